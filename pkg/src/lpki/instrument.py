"""Operation counters used for the cost measurements.

Scalar multiplications are reported to whichever counter is active in the
current context (see :func:`counting`) and attributed to the innermost
named operation (see :func:`operation`).
"""

from collections import Counter
from contextlib import contextmanager
from contextvars import ContextVar
from types import MappingProxyType
from typing import Iterator, Mapping

_active: ContextVar["OpCounter | None"] = ContextVar("lpki_counter", default=None)
_op_name: ContextVar[str] = ContextVar("lpki_op", default="other")


class OpCounter:
    def __init__(self) -> None:
        self.scalar_mults = 0
        self._mults: Counter[str] = Counter()
        self._calls: Counter[str] = Counter()
        self._overhead: dict[str, int] = {}

    def _add_mults(self, op: str, k: int) -> None:
        self.scalar_mults += k
        self._mults[op] += k

    def report(self) -> Mapping[str, Mapping[str, int]]:
        """Read-only view: operation -> {calls, scalar_mults, overhead_bytes}."""
        ops = set(self._mults) | set(self._calls) | set(self._overhead)
        return MappingProxyType({
            op: MappingProxyType({
                "calls": self._calls[op],
                "scalar_mults": self._mults[op],
                "overhead_bytes": self._overhead.get(op, 0),
            })
            for op in sorted(ops)
        })

    def mults_for(self, op: str) -> int:
        return self._mults[op]

    def reset(self) -> None:
        self.__init__()


@contextmanager
def counting(counter: OpCounter | None = None) -> Iterator[OpCounter]:
    counter = counter if counter is not None else OpCounter()
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)


@contextmanager
def operation(name: str) -> Iterator[None]:
    token = _op_name.set(name)
    counter = _active.get()
    if counter is not None:
        counter._calls[name] += 1
    try:
        yield
    finally:
        _op_name.reset(token)


def record_scalar_mults(k: int = 1) -> None:
    counter = _active.get()
    if counter is not None:
        counter._add_mults(_op_name.get(), k)


def record_overhead(nbytes: int) -> None:
    counter = _active.get()
    if counter is not None:
        counter._overhead[_op_name.get()] = nbytes
