"""Exact scalar arithmetic: prime fields, the rationals, and truncated
epsilon-polynomial rings over either.

Elements are stored as *raw* canonical values so that matrix and tensor
kernels can work on plain Python objects:

* ``F_p``  -> ``int`` in ``[0, p)``
* ``Q``    -> :class:`fractions.Fraction`
* ``eps``  -> ``tuple`` of ``order`` base-field raw values ``(c0, ..., c_{k-1})``

:class:`FieldSpec` carries the arithmetic on raw values; :class:`Scalar` is a
thin immutable wrapper for the public API.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

__all__ = [
    "FieldSpec",
    "Scalar",
    "GF",
    "QQ",
    "eps_ring",
    "parse_field",
    "parse_scalar",
    "scalar_arith",
    "NotInvertibleError",
]


class NotInvertibleError(ZeroDivisionError):
    """Raised when dividing by an element with no inverse."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


_INT_RE = re.compile(r"^[+-]?\d+$")
_FRAC_RE = re.compile(r"^([+-]?\d+)\s*/\s*([+-]?\d+)$")


@dataclass(frozen=True)
class FieldSpec:
    """A field F_p, Q, or the truncated ring base[eps]/(eps^order)."""

    kind: str
    p: int = 0
    base: Optional["FieldSpec"] = None
    order: int = 0

    def __post_init__(self):
        if self.kind == "prime":
            if not _is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")
        elif self.kind == "rational":
            pass
        elif self.kind == "eps":
            if self.base is None or self.base.kind == "eps":
                raise ValueError("eps ring needs a prime or rational base field")
            if self.order < 1:
                raise ValueError("eps order must be >= 1")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    # -- identification -------------------------------------------------
    @property
    def is_prime(self) -> bool:
        return self.kind == "prime"

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def is_eps(self) -> bool:
        return self.kind == "eps"

    @property
    def characteristic(self) -> int:
        if self.kind == "prime":
            return self.p
        if self.kind == "eps":
            return self.base.characteristic
        return 0

    def __str__(self) -> str:
        if self.kind == "prime":
            return f"F{self.p}"
        if self.kind == "rational":
            return "Q"
        return f"eps({self.base},{self.order})"

    # -- raw element construction ---------------------------------------
    def zero(self):
        if self.kind == "prime":
            return 0
        if self.kind == "rational":
            return Fraction(0)
        return (self.base.zero(),) * self.order

    def one(self):
        if self.kind == "prime":
            return 1
        if self.kind == "rational":
            return Fraction(1)
        return (self.base.one(),) + (self.base.zero(),) * (self.order - 1)

    def eps(self):
        """The raw element eps (only for eps rings)."""
        if self.kind != "eps":
            raise TypeError("eps is only defined in eps rings")
        c = [self.base.zero()] * self.order
        if self.order > 1:
            c[1] = self.base.one()
        return tuple(c)

    def convert(self, x: Any):
        """Coerce an int, Fraction, string, Scalar, or coefficient sequence."""
        if isinstance(x, Scalar):
            if x.field != self:
                raise ValueError(f"scalar from {x.field} used in {self}")
            return x.value
        if isinstance(x, str):
            return parse_scalar(x, self).value
        if self.kind == "prime":
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise ZeroDivisionError(f"denominator divisible by {self.p}")
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        if self.kind == "rational":
            if isinstance(x, float):
                raise TypeError("floating point values are not accepted")
            return Fraction(x)
        if isinstance(x, (tuple, list)):
            if len(x) > self.order:
                raise ValueError(f"coefficient list longer than order {self.order}")
            c = [self.base.convert(v) for v in x]
            c += [self.base.zero()] * (self.order - len(c))
            return tuple(c)
        return (self.base.convert(x),) + (self.base.zero(),) * (self.order - 1)

    def from_int(self, n: int):
        return self.convert(n)

    # -- arithmetic on raw values ---------------------------------------
    def add(self, a, b):
        if self.kind == "prime":
            return (a + b) % self.p
        if self.kind == "rational":
            return a + b
        base = self.base
        return tuple(base.add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        if self.kind == "prime":
            return (a - b) % self.p
        if self.kind == "rational":
            return a - b
        base = self.base
        return tuple(base.sub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        if self.kind == "prime":
            return -a % self.p
        if self.kind == "rational":
            return -a
        return tuple(self.base.neg(x) for x in a)

    def mul(self, a, b):
        if self.kind == "prime":
            return a * b % self.p
        if self.kind == "rational":
            return a * b
        base = self.base
        k = self.order
        out = [base.zero()] * k
        for i, x in enumerate(a):
            if base.is_zero(x):
                continue
            for j in range(k - i):
                y = b[j]
                if not base.is_zero(y):
                    out[i + j] = base.add(out[i + j], base.mul(x, y))
        return tuple(out)

    def is_zero(self, a) -> bool:
        if self.kind == "eps":
            return all(self.base.is_zero(x) for x in a)
        return a == 0

    def is_unit(self, a) -> bool:
        if self.kind == "eps":
            return not self.base.is_zero(a[0])
        return a != 0

    def inv(self, a):
        if self.kind == "prime":
            if a == 0:
                raise NotInvertibleError("division by zero in " + str(self))
            return pow(a, -1, self.p)
        if self.kind == "rational":
            if a == 0:
                raise NotInvertibleError("division by zero in Q")
            return 1 / a
        base = self.base
        if base.is_zero(a[0]):
            raise NotInvertibleError("eps element with zero constant term is not invertible")
        # Newton-free power series inversion: b0 = 1/a0, b_k = -(sum a_i b_{k-i})/a0
        inv0 = base.inv(a[0])
        b = [inv0]
        for k in range(1, self.order):
            s = base.zero()
            for i in range(1, k + 1):
                s = base.add(s, base.mul(a[i], b[k - i]))
            b.append(base.neg(base.mul(s, inv0)))
        return tuple(b)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def truncate(self, a, order: int):
        """Project an eps element to a lower order ring (a ring homomorphism)."""
        if self.kind != "eps":
            raise TypeError("truncate applies to eps rings only")
        return tuple(a[:order])

    def constant_term(self, a):
        return a[0] if self.kind == "eps" else a

    def base_field(self) -> "FieldSpec":
        return self.base if self.kind == "eps" else self

    # -- text ------------------------------------------------------------
    def render(self, a) -> str:
        if self.kind == "prime":
            return str(a)
        if self.kind == "rational":
            return str(a)
        return "[" + ",".join(self.base.render(x) for x in a) + "]"

    def parse(self, text: str):
        return parse_scalar(text, self).value

    def random(self, rng, bound: int = 3):
        """A random raw element; rationals drawn as small fractions."""
        if self.kind == "prime":
            return rng.randrange(self.p)
        if self.kind == "rational":
            return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        return tuple(self.base.random(rng, bound) for _ in range(self.order))


def GF(p: int) -> FieldSpec:
    return FieldSpec("prime", p=p)


QQ = FieldSpec("rational")


def eps_ring(base: FieldSpec, order: int) -> FieldSpec:
    return FieldSpec("eps", base=base, order=order)


_EPS_FIELD_RE = re.compile(r"^eps\(\s*([^,]+?)\s*,\s*(\d+)\s*\)$")


def parse_field(text: str) -> FieldSpec:
    """Parse ``Q``, ``F<p>`` or ``eps(<base>,<order>)``."""
    t = text.strip()
    if t in ("Q", "QQ"):
        return QQ
    m = re.fullmatch(r"F(\d+)", t) or re.fullmatch(r"GF\((\d+)\)", t)
    if m:
        return GF(int(m.group(1)))
    m = _EPS_FIELD_RE.match(t)
    if m:
        return eps_ring(parse_field(m.group(1)), int(m.group(2)))
    raise ValueError(f"cannot parse field {text!r}")


def _parse_base(text: str, field: FieldSpec):
    t = text.strip()
    if _INT_RE.match(t):
        return field.convert(int(t))
    m = _FRAC_RE.match(t)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if den == 0:
            raise ZeroDivisionError(f"zero denominator in {text!r}")
        if field.kind == "prime":
            if den % field.p == 0:
                raise ZeroDivisionError(f"denominator of {text!r} vanishes mod {field.p}")
            return num * pow(den, -1, field.p) % field.p
        return Fraction(num, den)
    raise ValueError(f"cannot parse scalar {text!r}")


def parse_scalar(text: str, field: FieldSpec) -> "Scalar":
    """Parse an integer, ``a/b``, or (for eps rings) ``[c0,c1,...]``."""
    t = text.strip()
    if field.kind == "eps":
        if t.startswith("[") and t.endswith("]"):
            inner = t[1:-1].strip()
            parts = [s for s in inner.split(",")] if inner else []
            if len(parts) > field.order:
                raise ValueError(
                    f"coefficient list of length {len(parts)} exceeds order {field.order}"
                )
            coeffs = [_parse_base(s, field.base) for s in parts]
            coeffs += [field.base.zero()] * (field.order - len(coeffs))
            return Scalar(field, tuple(coeffs))
        return Scalar(field, field.convert(_parse_base(t, field.base)))
    return Scalar(field, _parse_base(t, field))


@dataclass(frozen=True)
class Scalar:
    """An immutable field element in canonical form."""

    field: FieldSpec
    value: Any

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise ValueError(f"field mismatch: {self.field} vs {other.field}")
            return other.value
        return self.field.convert(other)

    def __add__(self, other):
        return Scalar(self.field, self.field.add(self.value, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self.field, self.field.sub(self.value, self._coerce(other)))

    def __rsub__(self, other):
        return Scalar(self.field, self.field.sub(self._coerce(other), self.value))

    def __mul__(self, other):
        return Scalar(self.field, self.field.mul(self.value, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Scalar(self.field, self.field.div(self.value, self._coerce(other)))

    def __rtruediv__(self, other):
        return Scalar(self.field, self.field.div(self._coerce(other), self.value))

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.value))

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.field == other.field and self.value == other.value
        try:
            return self.value == self.field.convert(other)
        except (TypeError, ValueError, ZeroDivisionError):
            return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def is_zero(self) -> bool:
        return self.field.is_zero(self.value)

    def inverse(self) -> "Scalar":
        return Scalar(self.field, self.field.inv(self.value))

    def __str__(self):
        return self.field.render(self.value)

    def __repr__(self):
        return f"Scalar({self.field}, {self})"


def scalar_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    if a.field != b.field:
        raise ValueError(f"field mismatch: {a.field} vs {b.field}")
    f = a.field
    if op == "add":
        v = f.add(a.value, b.value)
    elif op == "sub":
        v = f.sub(a.value, b.value)
    elif op == "mul":
        v = f.mul(a.value, b.value)
    elif op == "div":
        v = f.div(a.value, b.value)
    else:
        raise ValueError(f"unknown op {op!r}")
    return Scalar(f, v)
