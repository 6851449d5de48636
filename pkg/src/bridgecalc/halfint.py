"""Exact half-integer arithmetic.

All invariants of the calculus live in (1/2)Z.  To keep every computation
exact and every serialized value diff-stable, a half-integer is stored as
its doubled value (an ordinary Python int); no floats appear anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=False)
class HalfInt:
    """An element of (1/2)Z, stored as twice its value."""

    twice: int

    @staticmethod
    def whole(n: int) -> "HalfInt":
        return HalfInt(2 * n)

    @staticmethod
    def halves(n: int) -> "HalfInt":
        """The half-integer n/2."""
        return HalfInt(n)

    @staticmethod
    def of(value) -> "HalfInt":
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, int):
            return HalfInt(2 * value)
        raise TypeError(f"cannot make a HalfInt from {value!r}")

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def as_int(self) -> int:
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def __add__(self, other):
        return HalfInt(self.twice + HalfInt.of(other).twice)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __rsub__(self, other):
        return HalfInt(HalfInt.of(other).twice - self.twice)

    def __mul__(self, other):
        # Only scaling by an ordinary integer keeps us inside (1/2)Z.
        if not isinstance(other, int):
            return NotImplemented
        return HalfInt(self.twice * other)

    __rmul__ = __mul__

    def __neg__(self):
        return HalfInt(-self.twice)

    def __eq__(self, other):
        if isinstance(other, HalfInt):
            return self.twice == other.twice
        if isinstance(other, int):
            return self.twice == 2 * other
        return NotImplemented

    def __hash__(self):
        return hash(("HalfInt", self.twice))

    def _cmp_key(self, other) -> int:
        return HalfInt.of(other).twice

    def __lt__(self, other):
        return self.twice < self._cmp_key(other)

    def __le__(self, other):
        return self.twice <= self._cmp_key(other)

    def __gt__(self, other):
        return self.twice > self._cmp_key(other)

    def __ge__(self, other):
        return self.twice >= self._cmp_key(other)

    def __str__(self):
        if self.is_integer:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __repr__(self):
        return f"HalfInt({self.twice})"

    def to_json(self):
        """An int when integral, else the exact string \"p/2\"."""
        if self.is_integer:
            return self.twice // 2
        return f"{self.twice}/2"

    @staticmethod
    def from_json(value) -> "HalfInt":
        if isinstance(value, bool):
            raise ValueError(f"not a half-integer: {value!r}")
        if isinstance(value, int):
            return HalfInt(2 * value)
        if isinstance(value, str) and value.endswith("/2"):
            return HalfInt(int(value[:-2]))
        raise ValueError(f"not a half-integer: {value!r}")


ZERO = HalfInt(0)
HALF = HalfInt(1)
ONE = HalfInt(2)
