"""Admissible residue classes for the three representation problems."""

from __future__ import annotations

import enum


class ClassPredicate(str, enum.Enum):
    H2 = "H2"  # p + p'^2
    H3 = "H3"  # p1^2 + p2^2 + p3^2
    H4 = "H4"  # four prime squares

    def __call__(self, n: int) -> bool:
        return in_class(self, n)

    @classmethod
    def parse(cls, name: str) -> "ClassPredicate":
        return cls(name.upper())


def in_class(cls: ClassPredicate | str, n: int) -> bool:
    cls = ClassPredicate.parse(cls) if isinstance(cls, str) else cls
    if cls is ClassPredicate.H2:
        return n % 2 == 0 and n % 3 != 1
    if cls is ClassPredicate.H3:
        return n % 24 == 3 and n % 5 != 0
    return n % 24 == 4


def class_members(cls: ClassPredicate | str, lo: int, hi: int) -> list[int]:
    """Members of the class in (lo, hi], ascending."""
    cls = ClassPredicate.parse(cls) if isinstance(cls, str) else cls
    return [n for n in range(lo + 1, hi + 1) if in_class(cls, n)]
