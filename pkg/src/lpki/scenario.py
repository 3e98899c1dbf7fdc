"""Scenario scripts: a replayable list of timed commands with expected outcomes.

One command per line, shell-style quoting::

    # comments and blank lines are ignored
    mode 2                                   # default send mode (1 or 2)
    at 0   enroll alice mode=1               # enrollment mode; validate=no to opt out
    at 0   enroll bob mode=2 validate=no
    at 10  send alice bob "hello" expect=ok
    at 20  revoke bob
    at 30  send alice bob "again" expect=error:Revoked
    at 40  renew bob
    at 50  query alice bob tag=2 expect=ok
    at 60  session alice bob "hi" mode=1

``expect`` is ``ok`` (the default), ``error``, or ``error:WORD`` where WORD
must occur in the error's class name or message. Names are subscriber
aliases, used as the MSISDN at enrollment. Times must not decrease.
"""

import shlex
from dataclasses import dataclass, field
from hashlib import sha256

from .errors import LpkiError, NotFound
from .flows import establish_session, renew, send, session_send
from .network import MessageLost
from .wire import MsgType, Tag, decode_wire
from .world import World

COMMANDS = {"enroll", "send", "revoke", "renew", "query", "session"}


class ScriptError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Step:
    lineno: int
    time: int
    command: str
    args: tuple[str, ...]
    options: dict[str, str] = field(default_factory=dict, hash=False)
    expect: str = "ok"

    def describe(self) -> str:
        opts = "".join(f" {k}={v}" for k, v in sorted(self.options.items()))
        return f"{self.command} {' '.join(shlex.quote(a) for a in self.args)}{opts}".strip()


@dataclass
class Script:
    steps: list[Step]
    default_mode: int = 1
    seed: int | None = None


_ARITY = {"enroll": 1, "send": 3, "revoke": 1, "renew": 1, "query": 2, "session": 3}


def parse_script(text: str) -> Script:
    steps: list[Step] = []
    default_mode, seed, last_time = 1, None, 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        try:
            words = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScriptError(lineno, str(exc)) from None
        if not words:
            continue
        if words[0] == "mode" and len(words) == 2 and words[1] in ("1", "2"):
            default_mode = int(words[1])
            continue
        if words[0] == "seed" and len(words) == 2 and words[1].lstrip("-").isdigit():
            seed = int(words[1])
            continue
        if words[0] != "at" or len(words) < 3:
            raise ScriptError(lineno, "expected 'at TIME COMMAND ...'")
        try:
            t = int(words[1])
        except ValueError:
            raise ScriptError(lineno, f"bad time {words[1]!r}") from None
        if t < last_time:
            raise ScriptError(lineno, "time went backwards")
        last_time = t
        cmd = words[2]
        if cmd not in COMMANDS:
            raise ScriptError(lineno, f"unknown command {cmd!r}")
        args, options = [], {}
        for w in words[3:]:
            key, sep, value = w.partition("=")
            if sep and key.isidentifier():
                options[key] = value
            else:
                args.append(w)
        if len(args) != _ARITY[cmd]:
            raise ScriptError(lineno, f"{cmd} takes {_ARITY[cmd]} argument(s), got {len(args)}")
        if options.get("mode", "1") not in ("1", "2"):
            raise ScriptError(lineno, f"mode must be 1 or 2, not {options['mode']!r}")
        expect = options.pop("expect", "ok")
        if not (expect in ("ok", "error") or expect.startswith("error:")):
            raise ScriptError(lineno, f"bad expectation {expect!r}")
        steps.append(Step(lineno, t, cmd, tuple(args), options, expect))
    return Script(steps, default_mode, seed)


@dataclass
class StepResult:
    index: int
    step: Step
    outcome: str
    detail: str
    matched: bool

    def line(self) -> str:
        mark = "ok" if self.matched else "MISMATCH"
        return (f"step {self.index} t={self.step.time} {self.step.describe()}: "
                f"{self.outcome} {self.detail} [expect {self.step.expect}] {mark}")


@dataclass
class ScenarioRun:
    results: list[StepResult]
    delivered: list[tuple[str, str, bytes]]
    va_log: str
    transcript: list[tuple[str, str, bytes]]

    @property
    def ok(self) -> bool:
        return all(r.matched for r in self.results)

    def first_mismatch(self) -> StepResult | None:
        return next((r for r in self.results if not r.matched), None)

    def transcript_bytes(self) -> bytes:
        out = bytearray()
        for src, dst, data in self.transcript:
            for part in (src.encode(), dst.encode(), data):
                out += len(part).to_bytes(4, "big") + part
        return bytes(out)

    def transcript_lines(self) -> list[str]:
        lines = []
        for i, (src, dst, data) in enumerate(self.transcript):
            try:
                kind = decode_wire(data).msg_type.name
            except LpkiError:
                kind = "MALFORMED"
            lines.append(f"{i:04d} {src} -> {dst} {kind} {len(data)}B "
                         f"{sha256(data).hexdigest()[:16]}")
        return lines


def _matches(expect: str, outcome: str, detail: str) -> bool:
    if expect == "ok":
        return outcome == "ok"
    if outcome != "error":
        return False
    word = expect.partition(":")[2]
    return not word or word in detail


def _mode(step: Step, script: Script, force_mode: int | None) -> int:
    if force_mode is not None:
        return force_mode
    return int(step.options.get("mode", script.default_mode))


def _execute(world: World, step: Step, script: Script, force_mode: int | None,
             delivered: list) -> str:
    args, opts, now = step.args, step.options, step.time
    world.net.now = now
    if step.command == "enroll":
        mode = int(opts.get("mode", "1"))
        validate = opts.get("validate", "yes") not in ("no", "off", "false", "0")
        if force_mode == 1:
            validate = True
        e = world.enroll(args[0], mode, now=now, pin=opts.get("pin", "1234"),
                         can_validate=validate)
        return f"{e.subject_id} serial={e.certificate().serial}"
    if step.command == "revoke":
        sid = world.entity(args[0]).subject_id
        serial = world.ca.live_serial(sid)
        if serial is None:
            raise NotFound(f"{args[0]} has no live certificate")
        world.ca.revoke(serial, now)
        return f"serial={serial}"
    if step.command == "renew":
        cert = renew(world, world.entity(args[0]), now)
        return f"serial={cert.serial}"
    if step.command == "query":
        requester = world.entity(args[0])
        try:
            target = world.entity(args[1]).subject_id
        except KeyError:
            target = args[1]
        reply = requester._gateway(target, opts.get("tag", "2"))
        if reply.msg_type is MsgType.ERROR:
            raise GatewayError(reply.text(Tag.ERROR_CODE))
        return "token" if reply.get(Tag.OCSP_TOKEN) else "certificate"
    sender = world.entity(args[0])
    recipient_id = world.entity(args[1]).subject_id
    m = args[2].encode()
    mode = _mode(step, script, force_mode)
    if step.command == "session":
        establish_session(world, sender, recipient_id, now, mode)
        out = session_send(world, sender, recipient_id, m, now)
    else:
        out = send(world, sender, recipient_id, m, now, mode)
    delivered.append((sender.subject_id, recipient_id, out.message))
    return f"delivered {len(out.message)}B mode={mode}"


class GatewayError(LpkiError):
    pass


def run_scenario(world: World, script: Script, force_mode: int | None = None) -> ScenarioRun:
    results, delivered = [], []
    for i, step in enumerate(script.steps, 1):
        try:
            detail = _execute(world, step, script, force_mode, delivered)
            outcome = "ok"
        except (LpkiError, MessageLost, KeyError) as exc:
            outcome, detail = "error", f"{type(exc).__name__}({exc})"
        results.append(StepResult(i, step, outcome, detail,
                                  _matches(step.expect, outcome, detail)))
    return ScenarioRun(results, delivered, world.va.log_text(), list(world.net.transcript))


def format_run(run: ScenarioRun) -> str:
    out = [r.line() for r in run.results]
    out += ["", "-- VA log"]
    out += run.va_log.splitlines() or ["(empty)"]
    out += ["", "-- delivery transcript"]
    out += run.transcript_lines() or ["(empty)"]
    out += ["", f"transcript.sha256={sha256(run.transcript_bytes()).hexdigest()}",
            f"steps={len(run.results)} matched={sum(r.matched for r in run.results)}",
            f"delivered={len(run.delivered)}",
            f"result={'pass' if run.ok else 'fail'}"]
    return "\n".join(out) + "\n"
