"""Exception hierarchy and the verdict type shared by all validators."""

from dataclasses import dataclass


class LpkiError(Exception):
    """Base class for every error raised by this package."""


class RngFailure(LpkiError):
    pass


class MalformedEncoding(LpkiError):
    pass


class NotOnCurve(LpkiError):
    pass


class DegenerateEphemeral(LpkiError):
    pass


class VerificationFailure(LpkiError):
    pass


class AuthenticationFailure(LpkiError):
    pass


class MalformedEnvelope(VerificationFailure):
    """Size or range violation; an envelope that cannot verify."""


class InvalidPeerKey(LpkiError):
    pass


class DecodeError(LpkiError):
    """Raised by the byte reader; carries the offset of the violation."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class MalformedCertificate(DecodeError):
    pass


class MalformedWireMessage(DecodeError):
    pass


class MalformedSnapshot(DecodeError):
    pass


class WrongPin(LpkiError):
    pass


class MissingFile(LpkiError):
    pass


class DuplicateRegistration(LpkiError):
    pass


class NotRegistered(LpkiError):
    pass


class AlreadyCertified(LpkiError):
    pass


class InvalidPublicKey(LpkiError):
    def __init__(self, condition: str):
        super().__init__(f"public key validation failed: condition ({condition})")
        self.condition = condition


class ProofRejected(LpkiError):
    pass


class UnknownSerial(LpkiError):
    pass


class NotFound(LpkiError):
    pass


class CapabilityError(LpkiError):
    pass


class RenewalNotPermitted(LpkiError):
    pass


class FlowError(LpkiError):
    """A message flow was aborted; ``step`` names the failing check."""

    def __init__(self, step: str, detail: str = ""):
        super().__init__(f"{step}: {detail}" if detail else step)
        self.step = step
        self.detail = detail


class SenderValidationFailed(FlowError):
    pass


class RecipientValidationFailed(FlowError):
    pass


class DelegatedValidationFailed(FlowError):
    def __init__(self, step: str, detail: str = "", report=None):
        super().__init__(step, detail)
        self.report = report


class VaSignatureInvalid(FlowError):
    pass


class ConfigError(LpkiError):
    def __init__(self, field: str, detail: str):
        super().__init__(f"{field}: {detail}")
        self.field = field


@dataclass(frozen=True)
class Verdict:
    """Outcome of a validation. Truthy iff it passed."""

    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "pass" if self.ok else f"fail({self.reason})"


PASS = Verdict(True)


def fail(reason: str) -> Verdict:
    return Verdict(False, reason)
