"""G2-structures on R^7: metric and volume from a 3-form, Hodge star, torsion.

A 3-form phi gives the symmetric bilinear form

    B'_ij = coefficient of e^{1..7} in (1/6) i_{e_i}phi ^ i_{e_j}phi ^ phi.

phi is positive (defines a G2-structure) exactly when B' is definite.  With
``orientation = sign det B'`` and ``B = orientation * B'``,

    vol_coeff = det(B)^(1/9),   g = B / vol_coeff,   det g = vol_coeff^2,

so vol_coeff = sqrt(det g).  The volume form is oriented so that i_X phi ^ phi = -2 *(i_X phi) holds for
every X; equivalently g(X, Y) dV = -(1/6) i_X phi ^ i_Y phi ^ phi, i.e.
``dV = -orientation * vol_coeff * e^{1..7}``.  For the standard form
``PHI0`` this gives g = identity, vol_coeff = 1 and dV = -e^{1..7}.

All computations here are in floating point; norms are max-coefficient norms.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exterior import (DimensionError, KForm, basis_enumerate, basis_index, complement,
                       interior, merge_sign, parse_form, top_mask, wedge, blade_indices)
from .liealg import LieAlgebra, ce_d

DIM = 7
REL_TOL = 1e-9
DEGENERATE_TOL = 1e-12
PHI0_TEXT = "e^{123} + e^{145} + e^{167} + e^{246} - e^{257} - e^{347} - e^{356}"


class G2Error(ValueError):
    pass


class DegenerateFormError(G2Error):
    pass


class NotPositiveError(G2Error):
    pass


def standard_phi(exact: bool = True) -> KForm:
    return parse_form(PHI0_TEXT, DIM, exact=exact)


# ---------------------------------------------------------------- dense tables

@functools.lru_cache(maxsize=None)
def _tables():
    b2, b3 = basis_enumerate(DIM, 2), basis_enumerate(DIM, 3)
    i2 = basis_index(DIM, 2)
    iota = np.zeros((DIM, len(b2), len(b3)))
    for r, m in enumerate(b3):
        for i in blade_indices(m):
            e = [0] * DIM
            e[i - 1] = 1
            for m2, c in interior(e, KForm(DIM, 3, {m: 1})).items():
                iota[i - 1, i2[m2], r] = float(c)
    top = top_mask(DIM)
    w223 = np.zeros((len(b2), len(b2), len(b3)))
    for p, P in enumerate(b2):
        for q, Q in enumerate(b2):
            if P & Q:
                continue
            R = top & ~(P | Q)
            s = merge_sign(P, Q) * merge_sign(P | Q, R)
            w223[p, q, basis_index(DIM, 3)[R]] = s
    iota.setflags(write=False)
    w223.setflags(write=False)
    return iota, w223


def bilinear_batch(phis: np.ndarray) -> np.ndarray:
    """Raw B' for a stack of 3-form coefficient vectors of shape (N, 35)."""
    iota, w223 = _tables()
    A = np.einsum("ipr,nr->nip", iota, phis)
    K = np.einsum("pqr,nr->npq", w223, phis)
    return np.einsum("nip,npq,njq->nij", A, K, A) / 6.0


def _raw_bilinear(phi: KForm) -> np.ndarray:
    if phi.dim != DIM or phi.degree != 3:
        raise DimensionError(f"expected a 3-form on R^7, got degree {phi.degree} in dim {phi.dim}")
    return bilinear_batch(phi.to_array()[None, :])[0]


def bilinear_from_phi(phi: KForm) -> tuple[np.ndarray, int]:
    """(B, orientation) with B = orientation * B' and det B > 0."""
    raw = _raw_bilinear(phi)
    scale = np.abs(raw).max()
    det = np.linalg.det(raw)
    if scale == 0 or abs(det) <= DEGENERATE_TOL * scale ** DIM:
        raise DegenerateFormError("degenerate 3-form: det B' = 0")
    orientation = 1 if det > 0 else -1
    return orientation * raw, orientation


def is_positive(phi: KForm) -> bool:
    try:
        metric_from_phi(phi)
    except G2Error:
        return False
    return True


@functools.lru_cache(maxsize=None)
def _minor_index(k: int) -> np.ndarray:
    return np.array([[i - 1 for i in blade_indices(m)] for m in basis_enumerate(DIM, k)],
                    dtype=int).reshape(-1, k)


@functools.lru_cache(maxsize=None)
def _complement_table(k: int) -> tuple[np.ndarray, np.ndarray]:
    # row of I^c in the (7-k)-basis and the sign of e^I ^ e^{I^c}
    dst = basis_index(DIM, DIM - k)
    src = basis_enumerate(DIM, k)
    perm = np.array([dst[complement(I, DIM)] for I in src], dtype=int)
    signs = np.array([merge_sign(I, complement(I, DIM)) for I in src], dtype=float)
    return perm, signs


@functools.lru_cache(maxsize=None)
def _complement_matrix(k: int) -> np.ndarray:
    """Flat star on k-forms: e^I -> sign(I, I^c) e^{I^c}."""
    perm, signs = _complement_table(k)
    F = np.zeros((len(perm), len(perm)))
    F[perm, np.arange(len(perm))] = signs
    F.setflags(write=False)
    return F


def _compound(M: np.ndarray, k: int) -> np.ndarray:
    """k-th compound matrix: minors M[I, J] over increasing index sets, basis order."""
    if k == 0:
        return np.ones((1, 1))
    idx = _minor_index(k)
    sub = M[idx[:, None, :, None], idx[None, :, None, :]]
    if k == 1:
        return sub[..., 0, 0]
    if k == 2:
        return sub[..., 0, 0] * sub[..., 1, 1] - sub[..., 0, 1] * sub[..., 1, 0]
    if k == 3:
        a, b, c = sub[..., 0, 0], sub[..., 0, 1], sub[..., 0, 2]
        d, e, f = sub[..., 1, 0], sub[..., 1, 1], sub[..., 1, 2]
        g, h, i = sub[..., 2, 0], sub[..., 2, 1], sub[..., 2, 2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return np.linalg.det(sub)


@dataclass(frozen=True, eq=False)
class G2Structure:
    phi: KForm
    B: np.ndarray
    g: np.ndarray
    vol_coeff: float
    orientation: int

    @property
    def vol_sign(self) -> int:
        """Sign of dV relative to e^{1..7}."""
        return -self.orientation

    @property
    def volume_form(self) -> KForm:
        return KForm(DIM, DIM, {top_mask(DIM): self.vol_sign * self.vol_coeff}, exact=False)

    @functools.cached_property
    def _eig(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.g)

    @functools.cached_property
    def _star_cache(self) -> dict[int, np.ndarray]:
        return {}

    def gram(self, k: int) -> np.ndarray:
        """Gram matrix <e^I, e^J> of the metric on k-forms.

        With g = Q diag(d) Q^T this is C_k(Q) diag(prod_I 1/d) C_k(Q)^T.
        Minors are taken of the orthogonal Q only; minors of an
        ill-conditioned g^{-1} lose digits to cancellation.
        """
        d, Q = self._eig
        if k == 0:
            return np.ones((1, 1))
        if k <= DIM // 2:
            C = _compound(Q, k)
        else:
            F = _complement_matrix(DIM - k)
            C = np.linalg.det(Q) * F @ _compound(Q, DIM - k) @ F.T
        w = np.prod((1.0 / d)[_minor_index(k)], axis=1)
        return (C * w) @ C.T

    def star_matrix(self, k: int) -> np.ndarray:
        """Matrix of * on k-forms in the basis_enumerate convention."""
        if k not in self._star_cache:
            S = _complement_matrix(k) @ self.gram(k)
            self._star_cache[k] = self.vol_sign * self.vol_coeff * S
        return self._star_cache[k]

    def inner(self, a: KForm, b: KForm) -> float:
        """Induced inner product on k-forms (Gram determinants of g^{-1})."""
        if a.degree != b.degree:
            raise DimensionError("inner product of forms of different degree")
        return float(a.to_array() @ self.gram(a.degree) @ b.to_array())

    def metric_identity_residual(self, X: Sequence[float], Y: Sequence[float]) -> float:
        """|(1/6) i_X phi ^ i_Y phi ^ phi + g(X, Y) dV| on the top coefficient."""
        X = np.asarray(X, float)
        Y = np.asarray(Y, float)
        phi = self.phi
        top = wedge(wedge(interior(X, phi), interior(Y, phi)), phi)
        lhs = float(top.coefficient(top_mask(DIM))) / 6.0
        return abs(lhs + X @ self.g @ Y * self.vol_sign * self.vol_coeff)

    def summary(self) -> dict:
        return {
            "g": self.g.tolist(),
            "vol_coeff": self.vol_coeff,
            "orientation": self.orientation,
            "vol_sign": self.vol_sign,
            "det_g": float(np.linalg.det(self.g)),
            "min_eig_g": float(np.linalg.eigvalsh(self.g).min()),
        }


def metric_from_phi(phi: KForm) -> G2Structure:
    phi = phi.to_float()
    B, orientation = bilinear_from_phi(phi)
    B = (B + B.T) / 2
    eig = np.linalg.eigvalsh(B)
    if eig.min() <= REL_TOL * abs(eig).max():
        raise NotPositiveError(
            f"3-form not positive: B has eigenvalues in [{eig.min():.3g}, {eig.max():.3g}]")
    lam = float(np.linalg.det(B)) ** (1.0 / 9.0)
    g = B / lam
    g.setflags(write=False)
    B.setflags(write=False)
    return G2Structure(phi, B, g, lam, orientation)


def hodge_star(G: G2Structure, a: KForm) -> KForm:
    """The star with b ^ *a = <b, a> dV."""
    if a.dim != DIM:
        raise DimensionError(f"form of dimension {a.dim}; expected {DIM}")
    if a.exact:
        raise TypeError("hodge_star works on float forms; convert with to_float()")
    vals = G.star_matrix(a.degree) @ a.to_array()
    return KForm.from_array(DIM, DIM - a.degree, vals, exact=False)


@dataclass(frozen=True)
class TorsionReport:
    closed: bool
    coclosed: bool
    d_phi_norm: float
    d_star_phi_norm: float

    @property
    def parallel(self) -> bool:
        return self.closed and self.coclosed

    def to_dict(self) -> dict:
        return {"closed": self.closed, "coclosed": self.coclosed, "parallel": self.parallel,
                "residuals": {"d_phi": self.d_phi_norm, "d_star_phi": self.d_star_phi_norm}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def torsion_report(L: LieAlgebra, phi: KForm, G: G2Structure | None = None) -> TorsionReport:
    if L.dim != DIM:
        raise DimensionError(f"G2-structures live on 7-dimensional algebras, got {L.dim}")
    G = G or metric_from_phi(phi)
    d_phi = ce_d(L, phi).norm()
    star_phi = hodge_star(G, phi.to_float())
    d_star = ce_d(L, star_phi).norm()
    return TorsionReport(
        closed=d_phi < REL_TOL * phi.norm(),
        coclosed=d_star < REL_TOL * star_phi.norm(),
        d_phi_norm=d_phi,
        d_star_phi_norm=d_star,
    )


def karigiannis_identity_residual(G: G2Structure, X: Sequence[float]) -> float:
    """max-norm of i_X phi ^ phi + 2 *(i_X phi)."""
    ix = interior(np.asarray(X, float), G.phi)
    return (wedge(ix, G.phi) + 2.0 * hodge_star(G, ix)).norm()


def su3_lift(omega: KForm, psi: KForm) -> KForm:
    """omega ^ ds + psi on R^6 x R, with ds = e^7."""
    if omega.degree != 2 or psi.degree != 3:
        raise DimensionError("su3_lift needs a 2-form omega and a 3-form psi")
    if omega.dim != 6 or psi.dim != 6:
        raise DimensionError("su3_lift needs forms on R^6")
    e7 = KForm.basis(DIM, [7], exact=omega.exact)
    return wedge(omega.embed(DIM), e7) + psi.embed(DIM)


def change_basis(a: KForm, A: np.ndarray) -> KForm:
    """Substitute e^i -> sum_j A[i, j] e^j, i.e. the pullback A^* a."""
    A = np.asarray(A, float)
    k = a.degree
    vals = _compound(A, k).T @ a.to_float().to_array()
    return KForm.from_array(a.dim, k, vals, exact=False)


def random_positive_phi(rng: np.random.Generator, spread: float = 0.4) -> KForm:
    """A^* phi0 for A = I + spread * N(0, 1), orientation-reversing about half the time."""
    while True:
        A = np.eye(DIM) + spread * rng.standard_normal((DIM, DIM))
        if rng.random() < 0.5:
            A[0] *= -1
        if abs(np.linalg.det(A)) > 0.1:
            return change_basis(standard_phi(), A)
