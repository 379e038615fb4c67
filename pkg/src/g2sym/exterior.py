"""Sparse exterior algebra over R^n for n <= 7.

A basis k-blade e^{i1...ik} is stored as an int bitmask with bit i set when
e^i is present (bit 0 is never used).  A :class:`KForm` maps such masks to
coefficients of a single scalar flavor:

* exact -- :class:`fractions.Fraction` (ints are promoted),
* float -- Python floats.

The flavors never mix implicitly; use :meth:`KForm.to_float` or
:meth:`KForm.to_exact` to convert.
"""
from __future__ import annotations

import functools
import itertools
import re
from fractions import Fraction
from numbers import Integral, Real
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MAX_DIM = 7
FLOAT_ZERO_TOL = 1e-14


class DimensionError(ValueError):
    pass


class FlavorError(TypeError):
    pass


class FormParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = -1):
        self.message = message
        self.text = text
        self.pos = pos
        if pos >= 0:
            message = f"{message} at position {pos}: {text!r}"
        super().__init__(message)


# ---------------------------------------------------------------- blades

def blade(indices: Iterable[int]) -> int:
    """Mask for a strictly increasing index tuple."""
    mask = 0
    last = 0
    for i in indices:
        if i <= last:
            raise ValueError(f"indices must be strictly increasing, got {tuple(indices)}")
        mask |= 1 << i
        last = i
    return mask


def blade_indices(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(1, MAX_DIM + 1) if mask >> i & 1)


def blade_degree(mask: int) -> int:
    return mask.bit_count()


def sort_indices(indices: Sequence[int]) -> tuple[int, int]:
    """Return (sign, mask) of e^{i1} ^ ... ^ e^{ik}; sign is 0 on a repeated index."""
    if len(set(indices)) != len(indices):
        return 0, 0
    inversions = sum(1 for a, b in itertools.combinations(indices, 2) if a > b)
    mask = 0
    for i in indices:
        mask |= 1 << i
    return (-1) ** inversions, mask


def merge_sign(a: int, b: int) -> int:
    """Sign of e^A ^ e^B relative to the sorted blade; 0 when A and B overlap."""
    if a & b:
        return 0
    crossings = 0
    m = b
    while m:
        low = m & -m
        # indices of A above this index of B must hop over it
        crossings += (a & ~((low << 1) - 1)).bit_count()
        m ^= low
    return -1 if crossings & 1 else 1


def _removal_sign(mask: int, i: int) -> int:
    # number of indices below i in the blade
    return -1 if (mask & ((1 << i) - 1)).bit_count() & 1 else 1


def complement(mask: int, dim: int) -> int:
    return ((1 << (dim + 1)) - 2) & ~mask


def top_mask(dim: int) -> int:
    return (1 << (dim + 1)) - 2


def basis_enumerate(dim: int, degree: int) -> list[int]:
    """All degree-k blades of R^dim, in ascending mask order.

    This ordering is the column convention of every dense matrix in the package.
    """
    return list(_basis(dim, degree))


@functools.lru_cache(maxsize=None)
def _basis(dim: int, degree: int) -> tuple[int, ...]:
    _check_dim(dim)
    if not 0 <= degree <= dim:
        return ()
    return tuple(sorted(blade(c) for c in itertools.combinations(range(1, dim + 1), degree)))


@functools.lru_cache(maxsize=None)
def basis_index(dim: int, degree: int) -> dict[int, int]:
    # shared cached dict: callers must not mutate it
    return {m: j for j, m in enumerate(_basis(dim, degree))}


def _check_dim(dim: int) -> None:
    if not 0 <= dim <= MAX_DIM:
        raise DimensionError(f"dimension must be in 0..{MAX_DIM}, got {dim}")


# ---------------------------------------------------------------- scalars

def _coerce(value, exact: bool):
    t = type(value)
    if t is float and not exact:
        return value
    if t is Fraction and exact:
        return value
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, Integral):
            return Fraction(int(value))
        raise FlavorError(f"exact form cannot hold {type(value).__name__} {value!r}")
    if isinstance(value, Fraction):
        raise FlavorError("Fraction in a float form; convert explicitly")
    if isinstance(value, Real):
        return float(value)
    raise FlavorError(f"not a real scalar: {value!r}")


def coerce_vector(X: Sequence, dim: int, exact: bool) -> tuple:
    X = tuple(X.tolist()) if isinstance(X, np.ndarray) else tuple(X)
    if len(X) != dim:
        raise DimensionError(f"vector of length {len(X)} in dimension {dim}")
    return tuple(_coerce(x, exact) for x in X)


# ---------------------------------------------------------------- forms

class KForm:
    """Immutable sparse k-form on R^dim."""

    __slots__ = ("dim", "degree", "exact", "_terms", "_hash")

    def __init__(self, dim: int, degree: int, terms: Mapping[int, object] | None = None,
                 exact: bool = True):
        _check_dim(dim)
        if not 0 <= degree <= dim:
            raise DimensionError(f"degree {degree} out of range for dimension {dim}")
        top = top_mask(dim)
        clean: dict[int, object] = {}
        for mask, c in (terms or {}).items():
            if mask & ~top:
                raise DimensionError(f"blade {blade_indices(mask)} outside dimension {dim}")
            if mask.bit_count() != degree:
                raise DimensionError(
                    f"blade {blade_indices(mask)} has degree {mask.bit_count()}, expected {degree}")
            c = _coerce(c, exact)
            if c != 0:
                clean[mask] = c
        self.dim = dim
        self.degree = degree
        self.exact = exact
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, dim: int, degree: int, exact: bool = True) -> KForm:
        return cls(dim, degree, {}, exact)

    @classmethod
    def one(cls, dim: int, exact: bool = True) -> KForm:
        return cls(dim, 0, {0: 1}, exact)

    @classmethod
    def basis(cls, dim: int, indices: Sequence[int], exact: bool = True) -> KForm:
        sign, mask = sort_indices(tuple(indices))
        return cls(dim, len(indices), {mask: sign} if sign else {}, exact)

    @classmethod
    def volume(cls, dim: int, exact: bool = True) -> KForm:
        return cls(dim, dim, {top_mask(dim): 1}, exact)

    @classmethod
    def from_array(cls, dim: int, degree: int, values: Sequence, exact: bool = False) -> KForm:
        masks = _basis(dim, degree)
        if len(values) != len(masks):
            raise DimensionError(f"expected {len(masks)} coefficients, got {len(values)}")
        vals = values.tolist() if isinstance(values, np.ndarray) else values
        return cls(dim, degree, dict(zip(masks, vals)), exact)

    # access
    @property
    def terms(self) -> Mapping[int, object]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[int, object]]:
        return iter(self._terms.items())

    def coefficient(self, mask: int):
        return self._terms.get(mask, Fraction(0) if self.exact else 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def to_array(self) -> np.ndarray:
        """Float coefficient vector in :func:`basis_enumerate` order."""
        idx = basis_index(self.dim, self.degree)
        out = np.zeros(len(idx))
        for m, c in self._terms.items():
            out[idx[m]] = float(c)
        return out

    def to_list(self) -> list:
        """Coefficients in basis order, keeping the flavor."""
        zero = Fraction(0) if self.exact else 0.0
        return [self._terms.get(m, zero) for m in _basis(self.dim, self.degree)]

    def norm(self) -> float:
        """Max-coefficient norm."""
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    # flavor conversion
    def to_float(self) -> KForm:
        if not self.exact:
            return self
        return KForm(self.dim, self.degree, {m: float(c) for m, c in self._terms.items()}, False)

    def to_exact(self, max_denominator: int | None = None) -> KForm:
        if self.exact:
            return self
        conv = {}
        for m, c in self._terms.items():
            f = Fraction(c)
            conv[m] = f.limit_denominator(max_denominator) if max_denominator else f
        return KForm(self.dim, self.degree, conv, True)

    def normalize_float(self, tol: float = FLOAT_ZERO_TOL) -> KForm:
        """Drop float coefficients with |c| < tol."""
        if self.exact:
            return self
        return KForm(self.dim, self.degree,
                     {m: c for m, c in self._terms.items() if abs(c) >= tol}, False)

    def embed(self, dim: int) -> KForm:
        """The same form viewed in a larger ambient dimension."""
        if dim < self.dim:
            raise DimensionError(f"cannot embed dimension {self.dim} into {dim}")
        return KForm(dim, self.degree, self._terms, self.exact)

    # arithmetic
    def _compatible(self, other: KForm, same_degree: bool = True) -> None:
        if not isinstance(other, KForm):
            raise TypeError(f"expected KForm, got {type(other).__name__}")
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if same_degree and self.degree != other.degree:
            raise DimensionError(f"degree mismatch: {self.degree} vs {other.degree}")
        if self.exact != other.exact:
            raise FlavorError("cannot combine exact and float forms")

    def __add__(self, other: KForm) -> KForm:
        return add(self, other)

    def __sub__(self, other: KForm) -> KForm:
        return add(self, scale(-1, other))

    def __neg__(self) -> KForm:
        return scale(-1, self)

    def __mul__(self, c) -> KForm:
        if isinstance(c, KForm):
            return NotImplemented
        return scale(c, self)

    __rmul__ = __mul__

    def __xor__(self, other: KForm) -> KForm:
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KForm):
            return NotImplemented
        return (self.dim, self.degree, self.exact, self._terms) == \
            (other.dim, other.degree, other.exact, other._terms)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, self.degree, self.exact,
                               tuple(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        flavor = "exact" if self.exact else "float"
        return f"KForm({format_form(self)!r}, dim={self.dim}, degree={self.degree}, {flavor})"

    def __str__(self) -> str:
        return format_form(self)


def add(a: KForm, b: KForm) -> KForm:
    a._compatible(b)
    out = dict(a._terms)
    for m, c in b._terms.items():
        out[m] = out.get(m, 0) + c
    return KForm(a.dim, a.degree, out, a.exact)


def scale(c, a: KForm) -> KForm:
    c = _coerce(c, a.exact)
    return KForm(a.dim, a.degree, {m: c * v for m, v in a._terms.items()}, a.exact)


def linear_combination(coeffs: Sequence, forms: Sequence[KForm]) -> KForm:
    if not forms:
        raise ValueError("empty combination")
    out: dict[int, object] = {}
    f0 = forms[0]
    for c, f in zip(coeffs, forms):
        f0._compatible(f)
        c = _coerce(c, f0.exact)
        if c == 0:
            continue
        for m, v in f._terms.items():
            out[m] = out.get(m, 0) + c * v
    return KForm(f0.dim, f0.degree, out, f0.exact)


def wedge(a: KForm, b: KForm) -> KForm:
    a._compatible(b, same_degree=False)
    degree = a.degree + b.degree
    if degree > a.dim:
        # no blades of that degree exist; report the zero top form
        return KForm(a.dim, a.dim, {}, a.exact)
    out: dict[int, object] = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            s = merge_sign(ma, mb)
            if s:
                m = ma | mb
                out[m] = out.get(m, 0) + s * ca * cb
    return KForm(a.dim, degree, out, a.exact)


def interior(X: Sequence, a: KForm) -> KForm:
    """Contraction into the first slot: i_X e^{i1..ik} = sum_j (-1)^(j-1) X^{ij} e^{..^ij..}."""
    if a.degree < 1:
        raise DimensionError("interior product of a 0-form")
    X = coerce_vector(X, a.dim, a.exact)
    out: dict[int, object] = {}
    for m, c in a._terms.items():
        rest = m
        while rest:
            low = rest & -rest
            i = low.bit_length() - 1
            rest ^= low
            x = X[i - 1]
            if x == 0:
                continue
            r = m ^ low
            out[r] = out.get(r, 0) + _removal_sign(m, i) * x * c
    return KForm(a.dim, a.degree - 1, out, a.exact)


def evaluate(a: KForm, *vectors: Sequence):
    """a(X1, ..., Xk) with the determinant convention e^{12}(e1, e2) = 1."""
    if len(vectors) != a.degree:
        raise DimensionError(f"{a.degree}-form evaluated on {len(vectors)} vectors")
    cur = a
    for X in vectors:
        cur = interior(X, cur)
    return cur.coefficient(0)


def coefficient(a: KForm, mask_or_indices) -> object:
    if isinstance(mask_or_indices, int):
        return a.coefficient(mask_or_indices)
    sign, mask = sort_indices(tuple(mask_or_indices))
    return sign * a.coefficient(mask)


# ---------------------------------------------------------------- text format

def _fmt_scalar(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def format_form(a: KForm) -> str:
    """Printable form, e.g. ``e^{12} - 3/2 e^{135}``; round-trips through parse_form."""
    if a.is_zero():
        return "0"
    parts = []
    for m, c in a._terms.items():
        neg = c < 0
        mag = -c if neg else c
        idx = "".join(str(i) for i in blade_indices(m))
        if m == 0:
            body = _fmt_scalar(mag)
        elif mag == 1:
            body = f"e^{{{idx}}}"
        else:
            body = f"{_fmt_scalar(mag)} e^{{{idx}}}"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)


_NUMBER = re.compile(r"(\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/(\d+))?")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.take(ch):
            raise self.error(f"expected {ch!r}")

    def error(self, message: str) -> FormParseError:
        self.skip()
        return FormParseError(message, self.text, self.pos)

    def number(self, exact: bool):
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        token = m.group(0)
        try:
            if exact:
                return Fraction(token)
            if "/" in token:
                num, den = token.split("/")
                return float(num) / float(den)
            return float(token)
        except (ValueError, ZeroDivisionError):
            raise FormParseError(f"bad coefficient {token!r}", self.text, m.start()) from None


def parse_form(text: str, dim: int, exact: bool = True, degree: int | None = None) -> KForm:
    """Parse ``e^{12} - 3/2 e^{135}``-style text into a canonical KForm.

    Indices inside braces are single digits, so ``e^{135}`` is e^1 ^ e^3 ^ e^5;
    whitespace is ignored everywhere.  Out-of-order indices are sign-normalized
    and repeated indices rejected.  A bare ``0`` is the zero form of
    ``degree`` (default 0).
    """
    _check_dim(dim)
    sc = _Scanner(text)
    if sc.peek() == "":
        raise sc.error("empty expression")
    terms: dict[int, object] = {}
    form_degree: int | None = None
    first = True
    saw_zero_literal = False
    while sc.peek() != "":
        sign = 1
        if sc.take("+"):
            pass
        elif sc.take("-"):
            sign = -1
        elif not first:
            raise sc.error("expected '+' or '-'")
        first = False
        coef = None
        if sc.take("("):
            coef = sc.number(exact)
            if coef is None:
                raise sc.error("expected coefficient")
            sc.expect(")")
        else:
            coef = sc.number(exact)
        if coef is not None and sc.peek() in ("*", "·"):
            sc.pos += 1
        start = sc.pos
        if sc.peek() == "e":
            sc.pos += 1
            sc.expect("^")
            indices: list[int] = []
            if sc.take("{"):
                while not sc.take("}"):
                    ch = sc.peek()
                    if ch == "":
                        raise sc.error("unterminated '{'")
                    if not ch.isdigit():
                        raise sc.error(f"unexpected {ch!r} in index list")
                    indices.append(int(ch))
                    sc.pos += 1
                if not indices:
                    raise sc.error("empty index list")
            else:
                ch = sc.peek()
                if not ch.isdigit():
                    raise sc.error("expected index")
                indices.append(int(ch))
                sc.pos += 1
            for i in indices:
                if not 1 <= i <= dim:
                    raise FormParseError(f"index {i} out of range 1..{dim}", text, start)
            s, mask = sort_indices(tuple(indices))
            if s == 0:
                raise FormParseError(f"repeated index in e^{{{''.join(map(str, indices))}}}",
                                     text, start)
            k = len(indices)
        elif coef is not None:
            s, mask, k = 1, 0, 0
            if coef == 0:
                saw_zero_literal = True
        else:
            raise sc.error("expected term")
        if coef is None:
            coef = Fraction(1) if exact else 1.0
        if form_degree is None:
            form_degree = k
        elif k != form_degree and not (k == 0 and coef == 0):
            raise FormParseError(f"mixed degrees {form_degree} and {k}", text, start)
        if k == 0 and coef == 0:
            continue
        terms[mask] = terms.get(mask, 0) + sign * s * coef
    if saw_zero_literal and not terms:
        form_degree = 0 if degree is None else degree
    if form_degree is None:
        form_degree = 0 if degree is None else degree
    if degree is not None and form_degree != degree:
        raise FormParseError(f"expected a {degree}-form, got degree {form_degree}", text, 0)
    if form_degree > dim:
        raise FormParseError(f"degree {form_degree} exceeds dimension {dim}", text, 0)
    return KForm(dim, form_degree, terms, exact)


def print_form(a: KForm) -> str:
    return format_form(a)
