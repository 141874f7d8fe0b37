"""Reconstruction of the (almost) complex structure from a stable 3-form.

On the open orbit with Q < 0,  K o K = lambda id  with lambda = Q/4 < 0, so
``J = K / sqrt(-lambda)`` squares to -identity and the conjugate form
``phi_hat = phi(J., J., J.)`` completes phi to a decomposable complex 3-form.
The square root is fixed to the positive multiple of the reference volume;
with that branch the frozen sign conventions are

    iota_{JX} phi      = - iota_X phi_hat,
    iota_{JX} phi_hat  = + iota_X phi,
    F(phi) = 2 sqrt(-lambda) phi_hat,      phi ^ phi_hat = |phi|^2 omega^3/3!.

The orbit with Q > 0 carries the split analogue: ``P = 2K / sqrt(Q)`` is an
involution with 3-dimensional eigenspaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rational
from .exterior import (
    DIM,
    VOL_TUPLE,
    Form,
    LinearMap,
    Vector,
    pullback,
    wedge,
)
from .invariants import (
    DensityScalar,
    InternalCheckError,
    K_of,
    Q_of,
    SymplecticFrame,
    q_of,
)
from .scalars import FLOAT, RATIONAL

# iota_{JX} phi = HAT_SIGN_PHI * iota_X phi_hat ; iota_{JX} phi_hat = HAT_SIGN_HAT * iota_X phi.
# Determined once on the catalog form under the positive square root and frozen.
HAT_SIGN_PHI = -1
HAT_SIGN_HAT = +1

J_SQUARE_TOL = 1e-10


class OrbitError(ValueError):
    """The form lies on the wrong orbit for this construction."""


def _sqrt_scalar(value):
    """Positive square root; Fractions stay exact when possible."""
    if isinstance(value, Fraction):
        root = rational.nth_root_exact(value, 2)
        if root is not None:
            return root, True
        return float(value) ** 0.5, False
    return float(value) ** 0.5, False


@dataclass(frozen=True)
class HitchinPackage:
    """Complex-structure data reconstructed from a form with Q < 0.

    ``sqrt_neg_lambda`` is measured against the reference volume e^{123456};
    J and phi_hat are exact whenever that root is rational, float otherwise.
    ``norm_sq`` and ``mu`` are filled in only when a symplectic frame is
    supplied and the form is positive (q signature (0,6,0)).
    """

    lam: DensityScalar
    sqrt_neg_lambda: object
    sqrt_exact: bool
    J: tuple
    phi_hat: Form
    norm_sq: object = None
    mu: object = None

    def J_map(self) -> LinearMap:
        backend = RATIONAL if self.sqrt_exact else FLOAT
        return LinearMap(self.J, backend)

    def to_json(self) -> dict:
        from .exterior import form_to_json
        from .scalars import format_scalar

        return {
            "lambda": format_scalar(self.lam.value),
            "sqrt_neg_lambda": format_scalar(self.sqrt_neg_lambda),
            "J": [[format_scalar(x) for x in row] for row in self.J],
            "phi_hat": form_to_json(self.phi_hat),
            "norm_sq": None if self.norm_sq is None else format_scalar(self.norm_sq),
            "mu": None if self.mu is None else format_scalar(self.mu),
        }


def hitchin_package(phi: Form, frame: SymplecticFrame | None = None) -> HitchinPackage:
    """Build (lambda, J, phi_hat) for a 3-form with Q(phi) < 0.

    The construction verifies J^2 = -id (exactly when the root is exact,
    within ``J_SQUARE_TOL`` otherwise) and the relation F = 2 phi_hat
    sqrt(-lambda); failures raise :class:`InternalCheckError` since they can
    only come from implementation bugs.
    """
    Q = Q_of(phi)
    if not Q.value < 0:
        raise OrbitError(f"hitchin_package needs Q < 0, got Q = {Q.value}")
    lam = DensityScalar(Q.value / 4, 2, phi.backend)
    s, s_exact = _sqrt_scalar(-lam.value)
    K = K_of(phi)
    if s_exact and phi.backend == RATIONAL:
        J = tuple(tuple(x / s for x in row) for row in K.matrix)
        jmap = LinearMap(J, RATIONAL)
        if jmap.compose(jmap) != LinearMap.diagonal([-1] * DIM):
            raise InternalCheckError("J^2 != -id on the exact backend")
        work_phi = phi
    else:
        sf = float(s)
        J = tuple(tuple(float(x) / sf for x in row) for row in K.matrix)
        jmap = LinearMap(J, FLOAT)
        jj = np.array(J) @ np.array(J)
        if np.abs(jj + np.eye(DIM)).max() > J_SQUARE_TOL * max(1.0, np.abs(np.array(J)).max() ** 2):
            raise InternalCheckError("J^2 deviates from -id beyond tolerance")
        work_phi = phi.to_float()
    phi_hat = pullback(jmap, work_phi)
    _check_conjugate_relation(work_phi, phi_hat, s, s_exact)
    norm_sq = mu = None
    if frame is not None:
        sig = q_of(frame, phi).signature
        if sig == (0, 6, 0):
            norm_sq = norm_sq_of(frame, phi, phi_hat=phi_hat)
            half = Fraction(1, 2) if isinstance(norm_sq, Fraction) else 0.5
            root, _ = _sqrt_scalar(norm_sq)
            mu = root * half
    return HitchinPackage(
        lam=lam,
        sqrt_neg_lambda=s,
        sqrt_exact=s_exact,
        J=J,
        phi_hat=phi_hat,
        norm_sq=norm_sq,
        mu=mu,
    )


def _check_conjugate_relation(phi: Form, phi_hat: Form, s, s_exact: bool):
    from .invariants import F_of

    F_form = F_of(phi).form
    expected = phi_hat.scale(2 * s if s_exact and phi.backend == RATIONAL else 2.0 * float(s))
    if phi.backend == RATIONAL and s_exact:
        if F_form != expected:
            raise InternalCheckError("F(phi) != 2 phi_hat sqrt(-lambda)")
    else:
        diff = (F_form.to_float() - expected.to_float()).norm_inf()
        scale = max(1.0, F_form.norm_inf())
        if diff > 1e-9 * scale:
            raise InternalCheckError("F(phi) deviates from 2 phi_hat sqrt(-lambda)")


@dataclass(frozen=True)
class ParaPackage:
    """Split analogue on the orbit Q > 0: an involution with 3+3 eigenspaces."""

    P: tuple
    eigenbasis_plus: tuple
    eigenbasis_minus: tuple


def para_package(phi: Form) -> ParaPackage:
    """Build P = 2K/sqrt(Q) and its two 3-dimensional eigenspaces."""
    Q = Q_of(phi)
    if not Q.value > 0:
        raise OrbitError(f"para_package needs Q > 0, got Q = {Q.value}")
    s, s_exact = _sqrt_scalar(Q.value)
    K = K_of(phi)
    if s_exact and phi.backend == RATIONAL:
        P = [[2 * x / s for x in row] for row in K.matrix]
        back = RATIONAL
    else:
        sf = float(s)
        P = [[2.0 * float(x) / sf for x in row] for row in K.matrix]
        back = FLOAT
    pmap = LinearMap(P, back)
    if back == RATIONAL:
        if pmap.compose(pmap) != LinearMap.identity():
            raise InternalCheckError("P^2 != id on the exact backend")
        plus = rational.null_space(
            [[P[i][j] - (1 if i == j else 0) for j in range(DIM)] for i in range(DIM)]
        )
        minus = rational.null_space(
            [[P[i][j] + (1 if i == j else 0) for j in range(DIM)] for i in range(DIM)]
        )
        plus = [Vector(v, RATIONAL) for v in plus]
        minus = [Vector(v, RATIONAL) for v in minus]
    else:
        arr = np.array(P)
        if np.abs(arr @ arr - np.eye(DIM)).max() > J_SQUARE_TOL * max(1.0, np.abs(arr).max() ** 2):
            raise InternalCheckError("P^2 deviates from id beyond tolerance")
        w, v = np.linalg.eig(arr)
        plus = [Vector(list(map(float, v[:, k].real)), FLOAT) for k in range(DIM) if w[k].real > 0]
        minus = [Vector(list(map(float, v[:, k].real)), FLOAT) for k in range(DIM) if w[k].real < 0]
    if len(plus) != 3 or len(minus) != 3:
        raise InternalCheckError(
            f"eigenspace dimensions ({len(plus)}, {len(minus)}) != (3, 3)"
        )
    return ParaPackage(
        P=tuple(tuple(row) for row in P),
        eigenbasis_plus=tuple(plus),
        eigenbasis_minus=tuple(minus),
    )


def norm_sq_of(frame: SymplecticFrame, phi: Form, phi_hat: Form | None = None):
    """|phi|^2 from  phi ^ phi_hat = |phi|^2 omega^3/3!  (positive forms only)."""
    sig = q_of(frame, phi).signature
    if sig != (0, 6, 0):
        raise OrbitError(f"norm_sq is defined for positive forms; q signature is {sig}")
    if phi_hat is None:
        phi_hat = hitchin_package(phi).phi_hat
    if phi_hat.backend != phi.backend:
        phi = phi.to_float()
    coeff = wedge(phi, phi_hat).terms.get(VOL_TUPLE, 0)
    value = coeff / frame.trivialization if phi.backend == RATIONAL else float(coeff) / float(
        frame.trivialization
    )
    if not value > 0:
        raise InternalCheckError(f"|phi|^2 = {value} is not positive")
    return value


def hitchin_functional(patch, phi_field, omega_field, resolution: int | None = None):
    """Midpoint-rule quadrature of the trivialized Q over the patch box.

    Exact (Fraction arithmetic) for polynomial-backend fields evaluated at
    rational midpoints; the rule itself is exact for integrands of per-axis
    degree <= 1.
    """
    from .patch import FormField  # local import; patch builds on this module's inputs

    if not isinstance(phi_field, FormField) or not isinstance(omega_field, FormField):
        raise TypeError("hitchin_functional expects FormFields")
    if phi_field.backend != omega_field.backend:
        from .scalars import BackendMismatchError

        raise BackendMismatchError("phi and omega fields use different backends")
    pts, weight = patch.midpoint_grid(resolution)
    total = None
    for p in pts:
        omega_p = omega_field.evaluate(p)
        frame_p = SymplecticFrame(omega_p)
        q_p = Q_of(phi_field.evaluate(p)).trivialize(frame_p)
        cell = q_p * weight
        total = cell if total is None else total + cell
    return total
