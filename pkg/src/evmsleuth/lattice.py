"""Constant-propagation lattice: Bottom, a bounded set of words, or Top."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LatticeValue:
    kind: str  # "bottom" | "const" | "top"
    values: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        assert self.kind in ("bottom", "const", "top")
        assert (self.kind == "const") == bool(self.values)

    @property
    def is_const(self) -> bool:
        return self.kind == "const"

    @property
    def is_singleton(self) -> bool:
        return self.kind == "const" and len(self.values) == 1


BOTTOM = LatticeValue("bottom")
TOP = LatticeValue("top")


def const(*values: int) -> LatticeValue:
    return LatticeValue("const", frozenset(values))


def join(a: LatticeValue, b: LatticeValue, cap: int) -> LatticeValue:
    if a.kind == "bottom":
        return b
    if b.kind == "bottom":
        return a
    if a.kind == "top" or b.kind == "top":
        return TOP
    merged = a.values | b.values
    if len(merged) > cap:
        return TOP
    return LatticeValue("const", merged)


def leq(a: LatticeValue, b: LatticeValue) -> bool:
    """Partial order: Bottom below Const sets ordered by inclusion below Top."""
    if a.kind == "bottom" or b.kind == "top":
        return True
    if a.kind == "top":
        return b.kind == "top"
    if b.kind == "bottom":
        return False
    return a.values <= b.values
