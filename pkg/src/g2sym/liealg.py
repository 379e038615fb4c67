"""Lie algebras given by Salamon tuples, and their Chevalley-Eilenberg cohomology.

A tuple ``(0, 0, e^{12}, ...)`` lists the differentials de^1, ..., de^n of a
coframe.  Brackets follow the convention d alpha(X, Y) = -alpha([X, Y]), so

    [e_i, e_j] = -sum_k de^k(e_i, e_j) e_k.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral
from pathlib import Path
from typing import Sequence

from . import rational
from .exterior import (DimensionError, FormParseError, KForm, basis_enumerate, basis_index,
                       blade_indices, coerce_vector, evaluate, parse_form, wedge)


class JacobiError(ValueError):
    """d(de^k) != 0 for some k, i.e. the bracket violates the Jacobi identity."""

    def __init__(self, k: int, residual: KForm):
        self.k = k
        self.residual = residual
        super().__init__(f"Jacobi identity fails: d(de^{k}) = {residual} != 0")


TABLE1 = {
    "row1": "(0, 0, e^{12}, e^{13}, e^{23}, e^{15} + e^{24}, e^{16} + e^{34})",
    "row2": "(0, 0, e^{12}, e^{13}, e^{23}, e^{15} + e^{24}, e^{16} + e^{34} + e^{25})",
    "row3": "(0, 0, e^{12}, 0, e^{13} + e^{24}, e^{14}, e^{46} + e^{34} + e^{15} + e^{23})",
    "row4": "(0, 0, e^{12}, 0, e^{13}, e^{24} + e^{23}, e^{25} + e^{34} + e^{15} + e^{16} - 3 e^{26})",
}
TABLE1_B2 = {"row1": 3, "row2": 3, "row3": 5, "row4": 6}

BUILTINS = dict(TABLE1, abelian7="(0, 0, 0, 0, 0, 0, 0)")


@dataclass(frozen=True)
class BettiVector:
    b: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.b[k]

    def __len__(self) -> int:
        return len(self.b)

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * bk for k, bk in enumerate(self.b))

    def to_json(self) -> str:
        return json.dumps({"betti": list(self.b)})


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    dcoframe: tuple[KForm, ...]
    name: str | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "dcoframe", tuple(self.dcoframe))
        n = len(self.dcoframe)
        if not 1 <= n <= 7:
            raise DimensionError(f"Lie algebra dimension must be 1..7, got {n}")
        for k, form in enumerate(self.dcoframe, start=1):
            if form.dim != n or form.degree != 2:
                raise DimensionError(f"de^{k} must be a 2-form in dimension {n}")
            if not form.exact:
                raise TypeError("structure constants must be exact")
        if self.check:
            self.verify_jacobi()

    @classmethod
    def unchecked(cls, dcoframe: Sequence[KForm], name: str | None = None) -> LieAlgebra:
        """Build without the d^2 = 0 check (diagnostics only)."""
        return cls(tuple(dcoframe), name, check=False)

    @property
    def dim(self) -> int:
        return len(self.dcoframe)

    def __eq__(self, other):
        if not isinstance(other, LieAlgebra):
            return NotImplemented
        return self.dcoframe == other.dcoframe

    def __hash__(self):
        return hash(self.dcoframe)

    @functools.cached_property
    def _blade_d(self) -> dict[int, KForm]:
        # d of every basis blade, built degree by degree from the Leibniz rule
        n = self.dim
        table: dict[int, KForm] = {0: KForm.zero(n, 1)}
        for k in range(1, n + 1):
            for mask in basis_enumerate(n, k):
                idx = blade_indices(mask)
                first = KForm.basis(n, idx[:1])
                rest_mask = mask & ~(1 << idx[0])
                rest = KForm.basis(n, idx[1:])
                d_first = self.dcoframe[idx[0] - 1]
                if k == 1:
                    table[mask] = d_first
                    continue
                # d(e^i ^ rest) = de^i ^ rest - e^i ^ d(rest)
                table[mask] = wedge(d_first, rest) - wedge(first, table[rest_mask])
        return table

    def d_blade(self, mask: int) -> KForm:
        return self._blade_d[mask]

    def verify_jacobi(self) -> None:
        for k, form in enumerate(self.dcoframe, start=1):
            dd = ce_d(self, form)
            if not dd.is_zero():
                raise JacobiError(k, dd)

    def __str__(self) -> str:
        return format_salamon(self)


def ce_d(L: LieAlgebra, a: KForm) -> KForm:
    """Chevalley-Eilenberg differential, extended from de^k as an antiderivation."""
    if a.dim != L.dim:
        raise DimensionError(f"form of dimension {a.dim} on a {L.dim}-dimensional algebra")
    degree = a.degree + 1
    if degree > L.dim:
        return KForm.zero(L.dim, L.dim, a.exact)
    out: dict[int, object] = {}
    for mask, c in a.items():
        for m2, v in L.d_blade(mask).items():
            term = c * v if a.exact else c * float(v)
            out[m2] = out.get(m2, 0) + term
    return KForm(L.dim, degree, out, a.exact)


def bracket(L: LieAlgebra, X: Sequence, Y: Sequence) -> tuple:
    """[X, Y] with components -de^k(X, Y)."""
    exact = all(isinstance(x, (Integral, Fraction)) for x in list(X) + list(Y))
    X = coerce_vector(X, L.dim, exact)
    Y = coerce_vector(Y, L.dim, exact)
    out = []
    for form in L.dcoframe:
        f = form if exact else form.to_float()
        out.append(-evaluate(f, X, Y))
    return tuple(out)


def structure_constants(L: LieAlgebra) -> list[list[list[Fraction]]]:
    """c[i][j][k] with [e_i, e_j] = sum_k c[i][j][k] e_k (0-based)."""
    n = L.dim
    basis = [[int(i == j) for i in range(n)] for j in range(n)]
    return [[list(bracket(L, basis[i], basis[j])) for j in range(n)] for i in range(n)]


def ad_traces(L: LieAlgebra) -> list[Fraction]:
    c = structure_constants(L)
    return [sum((c[i][k][k] for k in range(L.dim)), Fraction(0)) for i in range(L.dim)]


def is_unimodular(L: LieAlgebra) -> bool:
    return all(t == 0 for t in ad_traces(L))


def d_matrix(L: LieAlgebra, k: int) -> list[list[Fraction]]:
    """Matrix of d: Lambda^k -> Lambda^(k+1); column j is d of the j-th basis blade."""
    n = L.dim
    if not 0 <= k <= n:
        raise DimensionError(f"degree {k} out of range 0..{n}")
    cols = basis_enumerate(n, k)
    rows = basis_enumerate(n, k + 1) if k < n else []
    row_idx = basis_index(n, k + 1) if k < n else {}
    mat = [[Fraction(0)] * len(cols) for _ in rows]
    for j, mask in enumerate(cols):
        if k == n:
            break
        for m2, v in L.d_blade(mask).items():
            mat[row_idx[m2]][j] = v
    return mat


def d_rank(L: LieAlgebra, k: int) -> int:
    if k < 0 or k >= L.dim:
        return 0
    return rational.rank(d_matrix(L, k))


def betti(L: LieAlgebra) -> BettiVector:
    n = L.dim
    ranks = [d_rank(L, k) for k in range(n + 1)]
    b = [math.comb(n, k) - ranks[k] - (ranks[k - 1] if k > 0 else 0) for k in range(n + 1)]
    return BettiVector(tuple(b))


def closed_forms_basis(L: LieAlgebra, k: int) -> list[KForm]:
    """Exact basis of Z^k = ker(d: Lambda^k -> Lambda^(k+1))."""
    n = L.dim
    ncols = math.comb(n, k)
    mat = d_matrix(L, k)
    return [KForm.from_array(n, k, v, exact=True) for v in rational.nullspace(mat, ncols)]


# ---------------------------------------------------------------- parsing

def _split_entries(text: str) -> list[tuple[str, int]]:
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise FormParseError("Salamon tuple must be enclosed in parentheses", text, 0)
    offset = text.index("(") + 1
    body = s[1:-1]
    entries = []
    start = 0
    for i, ch in enumerate(body + ","):
        if ch == ",":
            entries.append((body[start:i], offset + start))
            start = i + 1
    return entries


def parse_salamon(text: str, name: str | None = None, check: bool = True) -> LieAlgebra:
    """Parse ``(0, 0, e^{12}, e^{13}, ...)`` into a LieAlgebra."""
    entries = _split_entries(text)
    n = len(entries)
    if not 1 <= n <= 7:
        raise DimensionError(f"Salamon tuple must have 1..7 entries, got {n}")
    forms = []
    for k, (entry, pos) in enumerate(entries, start=1):
        if not entry.strip():
            raise FormParseError(f"empty entry {k}", text, pos)
        try:
            form = parse_form(entry, n, exact=True)
        except FormParseError as exc:
            where = pos + exc.pos if exc.pos >= 0 else -1
            raise FormParseError(f"entry {k}: {exc.message}", text, where) from exc
        if form.is_zero():
            form = KForm.zero(n, 2)
        if form.degree != 2:
            raise DimensionError(f"entry {k} has degree {form.degree}, expected 2")
        forms.append(form)
    return LieAlgebra(tuple(forms), name, check=check)


def format_salamon(L: LieAlgebra) -> str:
    return "(" + ", ".join(str(f) for f in L.dcoframe) + ")"


def builtin(name: str) -> LieAlgebra:
    key = name.lstrip("@")
    if key not in BUILTINS:
        raise KeyError(f"unknown algebra {name!r}; built-ins: {', '.join(BUILTINS)}")
    return parse_salamon(BUILTINS[key], name=key)


def load_algebras(path: str | Path, check: bool = True) -> list[LieAlgebra]:
    """Read ``name: tuple`` lines (blank lines and ``#`` comments skipped)."""
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name = None
        if ":" in line:
            name, line = (s.strip() for s in line.split(":", 1))
        try:
            out.append(parse_salamon(line, name=name or f"line{lineno}", check=check))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out
