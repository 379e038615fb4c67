"""Forms with function coefficients on the torus T^6 x S^1 (all periods 1).

Coefficients are :class:`CoeffFn` objects: a value plus exact partial
derivatives.  The elementary building blocks (constants, sines, sums,
products, exponentials) differentiate symbolically, so ``partial(i)`` is
again a CoeffFn and d(d a) can be evaluated.  Arbitrary callables can be
wrapped with :class:`CustomFn` when the caller supplies the gradient.

The torus example: for 1-periodic a(x1), b(x2), c(x3) put
lambda1 = b - c, lambda2 = c - a, lambda3 = a - b and

    omega = dx^14 + dx^25 + dx^36
    psi   = -exp(lambda3) dx^126 + exp(lambda2) dx^135 - exp(lambda1) dx^234 + dx^456
    phi   = omega ^ dx^7 + psi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .exterior import DimensionError, KForm, blade_indices, merge_sign, sort_indices
from .g2core import hodge_star, metric_from_phi

POINT_DIM = 7
FD_STEP = 1e-5
GRAD_CHECK_TOL = 1e-6
PERIOD_TOL = 1e-12
CLOSED_TOL = 1e-8
NONPARALLEL_THRESHOLD = 1e-3
SYMMETRY_TOL = 1e-8
# values of the coordinates a grid does not vary
FIXED_COORDS = (0.137, 0.291, 0.443, 0.619, 0.811, 0.953, 0.577)


class MissingGradientError(ValueError):
    pass


class CoeffFnError(ValueError):
    pass


class CoeffFn:
    """Scalar function of a point in R^7 with exact partial derivatives."""

    def __call__(self, p: np.ndarray) -> float:
        raise NotImplementedError

    def partial(self, i: int) -> CoeffFn:
        """d/dx_{i+1} (0-based coordinate index)."""
        raise NotImplementedError

    def grad(self, p: np.ndarray) -> np.ndarray:
        return np.array([self.partial(i)(p) for i in range(len(p))])

    def is_zero(self) -> bool:
        return False

    def __add__(self, other):
        return _sum(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return _sum(self, _scale(-1.0, _lift(other)))

    def __rsub__(self, other):
        return _sum(_lift(other), _scale(-1.0, self))

    def __neg__(self):
        return _scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return _scale(float(other), self)
        return _product(self, other)

    __rmul__ = __mul__


def _lift(x) -> CoeffFn:
    return x if isinstance(x, CoeffFn) else Constant(float(x))


class Constant(CoeffFn):
    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, p):
        return self.value

    def partial(self, i):
        return ZERO

    def is_zero(self):
        return self.value == 0.0

    def __repr__(self):
        return f"Constant({self.value})"


ZERO = Constant(0.0)
ONE = Constant(1.0)


class Sine(CoeffFn):
    """amp * sin(2 pi freq x_var + phase)."""

    def __init__(self, amp: float, var: int, freq: int = 1, phase: float = 0.0):
        self.amp, self.var, self.freq, self.phase = float(amp), var, int(freq), float(phase)

    def __call__(self, p):
        return self.amp * math.sin(2 * math.pi * self.freq * p[self.var] + self.phase)

    def partial(self, i):
        if i != self.var or self.amp == 0.0:
            return ZERO
        return Sine(self.amp * 2 * math.pi * self.freq, self.var, self.freq,
                    self.phase + math.pi / 2)

    def is_zero(self):
        return self.amp == 0.0

    def __repr__(self):
        return f"Sine({self.amp}, x{self.var + 1}, freq={self.freq}, phase={self.phase:.4g})"


class Sum(CoeffFn):
    def __init__(self, terms: Sequence[CoeffFn]):
        self.terms = tuple(terms)

    def __call__(self, p):
        return sum(t(p) for t in self.terms)

    def partial(self, i):
        return _sum(*(t.partial(i) for t in self.terms))

    def __repr__(self):
        return " + ".join(map(repr, self.terms))


class Scaled(CoeffFn):
    def __init__(self, c: float, f: CoeffFn):
        self.c, self.f = c, f

    def __call__(self, p):
        return self.c * self.f(p)

    def partial(self, i):
        return _scale(self.c, self.f.partial(i))

    def __repr__(self):
        return f"{self.c}*({self.f!r})"


class Product(CoeffFn):
    def __init__(self, f: CoeffFn, g: CoeffFn):
        self.f, self.g = f, g

    def __call__(self, p):
        return self.f(p) * self.g(p)

    def partial(self, i):
        return _sum(_product(self.f.partial(i), self.g), _product(self.f, self.g.partial(i)))

    def __repr__(self):
        return f"({self.f!r})*({self.g!r})"


class Exp(CoeffFn):
    def __init__(self, f: CoeffFn):
        self.f = f

    def __call__(self, p):
        return math.exp(self.f(p))

    def partial(self, i):
        return _product(self, self.f.partial(i))

    def __repr__(self):
        return f"exp({self.f!r})"


class CustomFn(CoeffFn):
    """Caller-supplied value, gradient and (optionally) Hessian."""

    def __init__(self, value: Callable, grad: Callable | None = None,
                 hess: Callable | None = None, name: str = "custom"):
        self._value, self._grad, self._hess, self.name = value, grad, hess, name

    def __call__(self, p):
        return float(self._value(p))

    def grad(self, p):
        if self._grad is None:
            raise MissingGradientError(f"{self.name}: no gradient supplied")
        return np.asarray(self._grad(p), float)

    def partial(self, i):
        if self._grad is None:
            raise MissingGradientError(f"{self.name}: no gradient supplied")
        hess = self._hess
        return CustomFn(lambda p: self._grad(p)[i],
                        (lambda p: np.asarray(hess(p))[i]) if hess else None,
                        name=f"d{i + 1} {self.name}")

    def __repr__(self):
        return f"CustomFn({self.name})"


def _sum(*fs: CoeffFn) -> CoeffFn:
    parts = []
    const = 0.0
    for f in fs:
        if isinstance(f, Sum):
            parts.extend(f.terms)
        elif isinstance(f, Constant):
            const += f.value
        else:
            parts.append(f)
    if const != 0.0:
        parts.append(Constant(const))
    if not parts:
        return ZERO
    return parts[0] if len(parts) == 1 else Sum(parts)


def _scale(c: float, f: CoeffFn) -> CoeffFn:
    if c == 0.0 or f.is_zero():
        return ZERO
    if c == 1.0:
        return f
    if isinstance(f, Constant):
        return Constant(c * f.value)
    return Scaled(c, f)


def _product(f: CoeffFn, g: CoeffFn) -> CoeffFn:
    if f.is_zero() or g.is_zero():
        return ZERO
    if isinstance(f, Constant):
        return _scale(f.value, g)
    if isinstance(g, Constant):
        return _scale(g.value, f)
    return Product(f, g)


def exp(f: CoeffFn) -> CoeffFn:
    if isinstance(f, Constant):
        return Constant(math.exp(f.value))
    return Exp(f)


def sine(amp: float, var: int) -> CoeffFn:
    """amp * sin(2 pi x_{var+1}); the zero constant when amp == 0."""
    return ZERO if amp == 0 else Sine(amp, var)


def check_coeff(f: CoeffFn, rng: np.random.Generator | None = None, n: int = 100,
                h: float = FD_STEP, tol: float = GRAD_CHECK_TOL) -> None:
    """Gradient-vs-finite-difference and 1-periodicity gate."""
    rng = rng or np.random.default_rng(0)
    for _ in range(n):
        p = rng.random(POINT_DIM)
        g = f.grad(p)
        for i in range(POINT_DIM):
            e = np.zeros(POINT_DIM)
            e[i] = h
            fd = (f(p + e) - f(p - e)) / (2 * h)
            if abs(fd - g[i]) > tol * max(1.0, abs(g[i])):
                raise CoeffFnError(
                    f"{f!r}: gradient component {i + 1} is {g[i]:.6g}, finite difference {fd:.6g}")
            e[i] = 1.0
            if abs(f(p + e) - f(p)) > PERIOD_TOL * max(1.0, abs(f(p))):
                raise CoeffFnError(f"{f!r} is not 1-periodic in x{i + 1}")


def check_single_variable(f: CoeffFn, var: int, rng: np.random.Generator | None = None,
                          n: int = 20) -> None:
    rng = rng or np.random.default_rng(1)
    for _ in range(n):
        g = f.grad(rng.random(POINT_DIM))
        others = np.delete(g, var)
        if np.abs(others).max() > 1e-12:
            raise CoeffFnError(f"{f!r} must depend on x{var + 1} only")


# ---------------------------------------------------------------- field forms

class FieldForm:
    """k-form on R^dim whose coefficients are CoeffFns of a point in R^7."""

    def __init__(self, dim: int, degree: int, terms: Mapping[int, CoeffFn]):
        if not 0 <= degree <= dim <= POINT_DIM:
            raise DimensionError(f"bad degree/dimension {degree}/{dim}")
        for mask in terms:
            if mask.bit_count() != degree or max(blade_indices(mask), default=0) > dim:
                raise DimensionError(f"blade {blade_indices(mask)} invalid in degree {degree}")
        self.dim = dim
        self.degree = degree
        self.terms = {m: f for m, f in sorted(terms.items()) if not f.is_zero()}

    @classmethod
    def from_blades(cls, dim: int, degree: int, items: Sequence[tuple[Sequence[int], object]]):
        acc: dict[int, list[CoeffFn]] = {}
        for idx, f in items:
            s, mask = sort_indices(tuple(idx))
            if s == 0:
                raise ValueError(f"repeated index in {idx}")
            acc.setdefault(mask, []).append(_scale(float(s), _lift(f)))
        return cls(dim, degree, {m: _sum(*fs) for m, fs in acc.items()})

    def eval_at(self, p: Sequence[float]) -> KForm:
        p = np.asarray(p, float)
        return KForm(self.dim, self.degree, {m: f(p) for m, f in self.terms.items()}, exact=False)

    def embed(self, dim: int) -> FieldForm:
        return FieldForm(dim, self.degree, self.terms)

    def __add__(self, other: FieldForm) -> FieldForm:
        if (self.dim, self.degree) != (other.dim, other.degree):
            raise DimensionError("adding field forms of different shape")
        terms = dict(self.terms)
        for m, f in other.terms.items():
            terms[m] = _sum(terms[m], f) if m in terms else f
        return FieldForm(self.dim, self.degree, terms)

    def __repr__(self):
        body = ", ".join(f"e^{{{''.join(map(str, blade_indices(m)))}}}: {f!r}"
                         for m, f in self.terms.items())
        return f"FieldForm(dim={self.dim}, degree={self.degree}, {{{body}}})"


def field_d(a: FieldForm) -> FieldForm:
    """d(f e^I) = sum_i (d_i f) e^i ^ e^I, from the exact partials."""
    if a.degree == a.dim:
        return FieldForm(a.dim, a.dim, {})
    acc: dict[int, list[CoeffFn]] = {}
    for mask, f in a.terms.items():
        for i in range(1, a.dim + 1):
            bit = 1 << i
            if mask & bit:
                continue
            df = f.partial(i - 1)
            if df.is_zero():
                continue
            acc.setdefault(mask | bit, []).append(_scale(float(merge_sign(bit, mask)), df))
    return FieldForm(a.dim, a.degree + 1, {m: _sum(*fs) for m, fs in acc.items()})


def field_wedge_const(a: FieldForm, b: KForm) -> FieldForm:
    """a ^ b for a constant-coefficient form b."""
    if a.dim != b.dim:
        raise DimensionError("dimension mismatch")
    acc: dict[int, list[CoeffFn]] = {}
    for ma, f in a.terms.items():
        for mb, c in b.items():
            s = merge_sign(ma, mb)
            if s:
                acc.setdefault(ma | mb, []).append(_scale(s * float(c), f))
    return FieldForm(a.dim, a.degree + b.degree, {m: _sum(*fs) for m, fs in acc.items()})


def field_su3_lift(omega: FieldForm, psi: FieldForm) -> FieldForm:
    """omega ^ dx^7 + psi on T^6 x S^1."""
    if omega.dim != 6 or psi.dim != 6 or omega.degree != 2 or psi.degree != 3:
        raise DimensionError("expected a 2-form and a 3-form on T^6")
    ds = KForm.basis(POINT_DIM, [7], exact=False)
    return field_wedge_const(omega.embed(POINT_DIM), ds) + psi.embed(POINT_DIM)


def fd_d_of_derived(sampler: Callable[[np.ndarray], KForm], p: Sequence[float],
                    h: float = FD_STEP, dim: int = POINT_DIM) -> KForm:
    """Exterior derivative of a sampled form field by central differences."""
    p = np.asarray(p, float)
    base = sampler(p)
    if base.degree == base.dim:
        return KForm.zero(base.dim, base.dim, exact=False)
    out: dict[int, float] = {}
    for i in range(1, dim + 1):
        e = np.zeros(len(p))
        e[i - 1] = h
        plus, minus = sampler(p + e), sampler(p - e)
        bit = 1 << i
        for mask in set(plus.terms) | set(minus.terms):
            if mask & bit:
                continue
            deriv = (float(plus.coefficient(mask)) - float(minus.coefficient(mask))) / (2 * h)
            m2 = mask | bit
            out[m2] = out.get(m2, 0.0) + merge_sign(bit, mask) * deriv
    return KForm(base.dim, base.degree + 1, out, exact=False)


def grid_points(grid: int, varying: Sequence[int] = (0, 1, 2)) -> np.ndarray:
    """grid^len(varying) points; other coordinates held at FIXED_COORDS."""
    axes = [np.arange(grid) / grid] * len(varying)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(varying))
    pts = np.tile(np.array(FIXED_COORDS[:POINT_DIM]), (len(mesh), 1))
    pts[:, list(varying)] = mesh
    return pts


def coordinate_symmetry_count(phi: FieldForm, grid: int = 8, tol: float = SYMMETRY_TOL,
                              points: np.ndarray | None = None) -> int:
    """Number of coordinate fields d/dx_i with L_{d_i} phi = 0 on the sample grid.

    L_{d_i} phi is the coefficientwise partial d_i.  This counts torus
    directions acting by symmetries: a lower bound for the rank of the
    automorphism group, not the group itself.
    """
    pts = grid_points(grid) if points is None else points
    count = 0
    for i in range(phi.dim):
        worst = 0.0
        for f in phi.terms.values():
            df = f.partial(i)
            if df.is_zero():
                continue
            worst = max(worst, max(abs(df(p)) for p in pts))
        if worst < tol:
            count += 1
    return count


@dataclass(frozen=True)
class TorusExample:
    omega: FieldForm
    psi: FieldForm
    phi: FieldForm
    lambdas: tuple[CoeffFn, CoeffFn, CoeffFn]

    def star_phi_at(self, p: np.ndarray) -> KForm:
        return hodge_star(metric_from_phi(self.phi.eval_at(p)), self.phi.eval_at(p))


def build_torus_example(a: CoeffFn, b: CoeffFn, c: CoeffFn, check: bool = True) -> TorusExample:
    if check:
        rng = np.random.default_rng(2)
        for f, var in ((a, 0), (b, 1), (c, 2)):
            check_coeff(f, rng)
            check_single_variable(f, var, rng)
    lam1, lam2, lam3 = b - c, c - a, a - b
    omega = FieldForm.from_blades(6, 2, [((1, 4), ONE), ((2, 5), ONE), ((3, 6), ONE)])
    psi = FieldForm.from_blades(6, 3, [
        ((1, 2, 6), -exp(lam3)),
        ((1, 3, 5), exp(lam2)),
        ((2, 3, 4), -exp(lam1)),
        ((4, 5, 6), ONE),
    ])
    phi = field_su3_lift(omega, psi)
    return TorusExample(omega, psi, phi, (lam1, lam2, lam3))


def max_norm_over(points: np.ndarray, fn: Callable[[np.ndarray], KForm]) -> float:
    return max(fn(p).norm() for p in points)


@dataclass(frozen=True)
class TorusReport:
    amplitudes: tuple[float, float, float]
    grid: int
    h: float
    closed_residual: float
    nonparallel_witness: float
    symmetry_count: int

    @property
    def closed(self) -> bool:
        return self.closed_residual < CLOSED_TOL

    @property
    def parallel(self) -> bool:
        return self.closed and self.nonparallel_witness <= NONPARALLEL_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "amplitudes": {"a": self.amplitudes[0], "b": self.amplitudes[1], "c": self.amplitudes[2]},
            "grid": self.grid,
            "h": self.h,
            "closed_residual": self.closed_residual,
            "nonparallel_witness": self.nonparallel_witness,
            "symmetry_count": self.symmetry_count,
            "closed": self.closed,
            "parallel": self.parallel,
            "symmetry_count_note": "coordinate fields only; lower bound for the torus rank",
        }


def torus_example_for(amp_a: float = 1.0, amp_b: float = 1.0, amp_c: float = 1.0) -> TorusExample:
    """Example with a = amp_a sin(2 pi x1), b = amp_b sin(2 pi x2), c = amp_c sin(2 pi x3)."""
    if min(amp_a, amp_b, amp_c) < 0:
        raise ValueError("amplitudes must be nonnegative")
    return build_torus_example(sine(amp_a, 0), sine(amp_b, 1), sine(amp_c, 2))


def torus_report(amp_a: float = 1.0, amp_b: float = 1.0, amp_c: float = 1.0,
                 grid: int = 8, h: float = FD_STEP) -> TorusReport:
    ex = torus_example_for(amp_a, amp_b, amp_c)
    pts = grid_points(grid)
    dphi = field_d(ex.phi)
    closed_residual = max_norm_over(pts, dphi.eval_at)
    witness = max_norm_over(pts, lambda p: fd_d_of_derived(ex.star_phi_at, p, h))
    return TorusReport((amp_a, amp_b, amp_c), grid, h, closed_residual, witness,
                       coordinate_symmetry_count(ex.phi, grid, points=pts))
