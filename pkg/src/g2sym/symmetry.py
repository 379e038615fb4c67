"""Invariant symmetries of a G2-structure on a 7-dimensional Lie algebra.

s(phi) = {X : L_X phi = 0}, with the Lie derivative of invariant data given by
Cartan's formula L_X = i_X d + d i_X on the Chevalley-Eilenberg complex.  For a
closed positive phi on a nilpotent algebra, X -> i_X phi sends s(phi) injectively
into closed, *-coclosed 2-forms, so dim s(phi) <= b_2 and s(phi) is abelian.
The checks here confirm those statements on individual instances only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rational
from .exterior import KForm, format_form, interior, linear_combination
from .g2core import (DIM, G2Structure, bilinear_batch, hodge_star, metric_from_phi,
                     torsion_report)
from .liealg import LieAlgebra, betti, bracket, ce_d, closed_forms_basis

SVD_REL_TOL = 1e-9
HARMONIC_TOL = 1e-8
CLOSED_TOL = 1e-9
POSITIVITY_MARGIN = 1e-10
COEFF_RANGE = 3
DISCLAIMER = ("instance check on left-invariant fields of one closed G2-structure; "
              "not a proof of the manifold-level statement")


class NotFound(Exception):
    """No positive form among the sampled closed 3-forms."""

    def __init__(self, attempts: int, z3_dim: int):
        self.attempts = attempts
        self.z3_dim = z3_dim
        super().__init__(f"no positive closed 3-form in {attempts} attempts (dim Z^3 = {z3_dim})")


class TheoremHypothesisError(ValueError):
    pass


def lie_derivative_phi(L: LieAlgebra, phi: KForm, X: Sequence) -> KForm:
    """L_X phi = i_X(d phi) + d(i_X phi)."""
    if L.dim != phi.dim:
        raise ValueError(f"dimension mismatch: algebra {L.dim}, form {phi.dim}")
    return interior(X, ce_d(L, phi)) + ce_d(L, interior(X, phi))


@dataclass(frozen=True)
class SymmetryAlgebra:
    basis: tuple[tuple, ...]
    abelian: bool
    harmonic_images: tuple[KForm, ...]
    exact: bool

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "abelian": self.abelian,
            "exact": self.exact,
            "basis": [[str(x) for x in v] for v in self.basis],
            "harmonic_images": [format_form(f) for f in self.harmonic_images],
        }


def _float_nullspace(cols: np.ndarray) -> np.ndarray:
    # columns are the images of e_1..e_n; returns kernel vectors as rows
    _, s, vt = np.linalg.svd(cols)
    if s.size == 0 or s[0] == 0:
        return np.eye(cols.shape[1])
    rank = int((s > SVD_REL_TOL * s[0]).sum())
    return vt[rank:]


def symmetry_algebra(L: LieAlgebra, phi: KForm, G: G2Structure | None = None) -> SymmetryAlgebra:
    G = G or metric_from_phi(phi)
    n = L.dim
    if phi.exact:
        unit = [[int(i == j) for i in range(n)] for j in range(n)]
        images = [lie_derivative_phi(L, phi, e).to_list() for e in unit]
        rows = rational.transpose(images)
        basis = [tuple(v) for v in rational.nullspace(rows, n)]
        brackets_zero = all(
            all(c == 0 for c in bracket(L, X, Y))
            for i, X in enumerate(basis) for Y in basis[i + 1:])
    else:
        unit = np.eye(n)
        cols = np.column_stack([lie_derivative_phi(L, phi, e).to_array() for e in unit])
        basis = [tuple(float(x) for x in v) for v in _float_nullspace(cols)]
        brackets_zero = all(
            max(abs(c) for c in bracket(L, X, Y)) < CLOSED_TOL
            for i, X in enumerate(basis) for Y in basis[i + 1:])
    images = tuple(interior(X, phi) for X in basis)
    return SymmetryAlgebra(tuple(basis), brackets_zero, images, phi.exact)


def _images_independent(images: Sequence[KForm]) -> bool:
    if not images:
        return True
    if images[0].exact:
        return rational.rank([f.to_list() for f in images]) == len(images)
    M = np.array([f.to_array() for f in images])
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > SVD_REL_TOL * s[0]).sum()) == len(images)


@dataclass
class VerificationReport:
    algebra: str
    witness: str
    dim_s: int
    b2: int
    abelian: bool
    bound_b2_ok: bool
    bound_6_ok: bool
    F_injective: bool
    harmonic_ok: bool
    residuals: dict = field(default_factory=dict)
    disclaimer: str = DISCLAIMER

    @property
    def confirmed(self) -> bool:
        return all((self.abelian, self.bound_b2_ok, self.bound_6_ok,
                    self.F_injective, self.harmonic_ok))

    def to_dict(self) -> dict:
        return {
            "algebra": self.algebra,
            "witness_phi": self.witness,
            "dim_s": self.dim_s,
            "b2": self.b2,
            "abelian": self.abelian,
            "bound_b2_ok": self.bound_b2_ok,
            "bound_6_ok": self.bound_6_ok,
            "F_injective": self.F_injective,
            "harmonic_ok": self.harmonic_ok,
            "confirmed": self.confirmed,
            "residuals": self.residuals,
            "disclaimer": self.disclaimer,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def harmonic_residuals(L: LieAlgebra, G: G2Structure, images: Sequence[KForm]) -> tuple[float, float]:
    """Largest |d(i_X phi)| and |d *(i_X phi)| over the given images."""
    d_max = max((ce_d(L, f).norm() for f in images), default=0.0)
    dstar_max = max((ce_d(L, hodge_star(G, f.to_float())).norm() for f in images), default=0.0)
    return d_max, dstar_max


def verify_theorem_bounds(L: LieAlgebra, phi: KForm) -> VerificationReport:
    G = metric_from_phi(phi)
    tr = torsion_report(L, phi, G)
    if not tr.closed:
        raise TheoremHypothesisError(f"phi is not closed (|d phi| = {tr.d_phi_norm:.3g})")
    if tr.parallel:
        raise TheoremHypothesisError("theorem hypothesis violated: non-parallel required")
    S = symmetry_algebra(L, phi, G)
    b2 = betti(L)[2]
    d_max, dstar_max = harmonic_residuals(L, G, S.harmonic_images)
    return VerificationReport(
        algebra=L.name or str(L),
        witness=format_form(phi),
        dim_s=S.dim,
        b2=b2,
        abelian=S.abelian,
        bound_b2_ok=S.dim <= b2,
        bound_6_ok=S.dim <= 6,
        F_injective=_images_independent(S.harmonic_images),
        harmonic_ok=d_max < CLOSED_TOL and dstar_max < HARMONIC_TOL,
        residuals={"d_phi": tr.d_phi_norm, "d_star_phi": tr.d_star_phi_norm,
                   "max_d_iota": d_max, "max_d_star_iota": dstar_max},
    )


def _attempt_coefficients(seed: int, start: int, stop: int, size: int) -> np.ndarray:
    # attempt i draws from its own stream keyed by (seed, i)
    out = np.empty((stop - start, size), dtype=np.int64)
    for row, i in enumerate(range(start, stop)):
        rng = np.random.default_rng([seed, i])
        out[row] = rng.integers(-COEFF_RANGE, COEFF_RANGE + 1, size=size)
    return out


def search_positive_combination(basis: Sequence[KForm], seed: int, attempts: int,
                                batch: int = 512) -> tuple[KForm, int]:
    """First sampled integer combination of ``basis`` that is a positive 3-form.

    Returns the form and the index of the successful attempt.
    """
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    if not basis:
        raise NotFound(attempts, 0)
    Z = np.array([b.to_array() for b in basis])
    for start in range(0, attempts, batch):
        stop = min(start + batch, attempts)
        C = _attempt_coefficients(seed, start, stop, len(basis))
        raw = bilinear_batch(C @ Z)
        eig = np.linalg.eigvalsh(raw)
        # positive up to orientation; borderline (semi-)definite samples are rejected
        ok = (eig[:, 0] > POSITIVITY_MARGIN) | (eig[:, -1] < -POSITIVITY_MARGIN)
        hits = np.flatnonzero(ok)
        if hits.size:
            j = int(hits[0])
            coeffs = [int(c) for c in C[j]]
            return linear_combination(coeffs, list(basis)), start + j
    raise NotFound(attempts, len(basis))


def find_closed_g2(L: LieAlgebra, seed: int = 0, attempts: int = 10_000) -> KForm:
    """Closed positive 3-form found by seeded integer sampling of Z^3."""
    if L.dim != DIM:
        raise ValueError(f"G2-structures live on 7-dimensional algebras, got {L.dim}")
    basis = closed_forms_basis(L, 3)
    phi, _ = search_positive_combination(basis, seed, attempts)
    return phi


__all__ = [
    "NotFound", "TheoremHypothesisError", "SymmetryAlgebra", "VerificationReport",
    "lie_derivative_phi", "symmetry_algebra", "verify_theorem_bounds", "find_closed_g2",
    "search_positive_combination", "harmonic_residuals", "DISCLAIMER",
]
