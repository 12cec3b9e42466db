"""Exact scalar fields: arbitrary-precision rationals and prime fields F_p.

Rationals are gmpy2.mpq values (lowest terms, positive denominator by
construction); prime-field elements are thin wrappers storing a residue
in [0, p).  Matrix code stays field-agnostic: it only uses the arithmetic
operators of the elements plus the constructors exposed here.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as _mpq


class RationalField:
    """The rationals, tag ``Q``."""

    tag = "Q"
    prime = None

    def __init__(self):
        self.zero = _mpq(0)
        self.one = _mpq(1)

    def from_int(self, n):
        return _mpq(n)

    def ratio(self, num, den):
        return _mpq(num, den)

    def parse(self, value):
        """Accept a JSON scalar: int, or a string 'n' / 'a/b'."""
        if isinstance(value, bool):
            raise ValueError("boolean is not a scalar")
        if isinstance(value, int):
            return _mpq(value)
        if isinstance(value, str):
            return _mpq(value)
        raise ValueError(f"cannot parse scalar {value!r}")

    def fmt(self, x):
        """JSON form: plain int when integral, else 'a/b'."""
        if x.denominator == 1:
            return int(x)
        return str(x)

    def sort_key(self, x):
        return x

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "QQ"


class FpElement:
    """Residue modulo a prime, normalized to [0, p)."""

    __slots__ = ("v", "p")

    def __init__(self, v, p):
        self.v = v % p
        self.p = p

    def _lift(self, other):
        if isinstance(other, FpElement):
            if other.p != self.p:
                raise ValueError("mixed moduli")
            return other.v
        if isinstance(other, int):
            return other % self.p
        return NotImplemented

    def __add__(self, other):
        w = self._lift(other)
        if w is NotImplemented:
            return NotImplemented
        return FpElement(self.v + w, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        w = self._lift(other)
        if w is NotImplemented:
            return NotImplemented
        return FpElement(self.v - w, self.p)

    def __rsub__(self, other):
        w = self._lift(other)
        if w is NotImplemented:
            return NotImplemented
        return FpElement(w - self.v, self.p)

    def __mul__(self, other):
        w = self._lift(other)
        if w is NotImplemented:
            return NotImplemented
        return FpElement(self.v * w, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        w = self._lift(other)
        if w is NotImplemented:
            return NotImplemented
        if w == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return FpElement(self.v * pow(w, -1, self.p), self.p)

    def __rtruediv__(self, other):
        w = self._lift(other)
        if w is NotImplemented:
            return NotImplemented
        if self.v == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return FpElement(w * pow(self.v, -1, self.p), self.p)

    def __neg__(self):
        return FpElement(-self.v, self.p)

    def __pow__(self, n):
        return FpElement(pow(self.v, n, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, FpElement):
            return self.p == other.p and self.v == other.v
        if isinstance(other, int):
            return self.v == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __str__(self):
        return str(self.v)

    def __repr__(self):
        return f"FpElement({self.v}, {self.p})"


class PrimeField:
    """F_p for a prime p, tag ``Fp:<p>``."""

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError(f"modulus {p} is not prime")
        self.prime = p
        self.tag = f"Fp:{p}"
        self.zero = FpElement(0, p)
        self.one = FpElement(1, p)

    def from_int(self, n):
        return FpElement(n, self.prime)

    def ratio(self, num, den):
        return self.from_int(num) / self.from_int(den)

    def parse(self, value):
        if isinstance(value, bool):
            raise ValueError("boolean is not a scalar")
        if isinstance(value, int):
            return self.from_int(value)
        if isinstance(value, str):
            if "/" in value:
                num, den = value.split("/", 1)
                return self.ratio(int(num), int(den))
            return self.from_int(int(value))
        raise ValueError(f"cannot parse scalar {value!r}")

    def fmt(self, x):
        return x.v

    def sort_key(self, x):
        return x.v

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.prime == self.prime

    def __hash__(self):
        return hash(("Fp", self.prime))

    def __repr__(self):
        return f"GF({self.prime})"


QQ = RationalField()


def field_from_tag(tag: str):
    """Parse a field tag: ``Q`` or ``Fp:<p>``."""
    if tag == "Q":
        return QQ
    if tag.startswith("Fp:"):
        return PrimeField(int(tag[3:]))
    raise ValueError(f"unknown field tag {tag!r}")
