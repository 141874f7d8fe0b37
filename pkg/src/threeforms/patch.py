"""Differential forms and vector fields over a coordinate box.

A :class:`Patch` fixes six coordinate names, a box domain and a sampling
grid.  Coefficient functions come in two backends:

* polynomial -- exact :class:`~threeforms.polynomials.Polynomial` data;
  derivatives are exact, identity checks are decidable;
* numeric -- closures evaluated in float64; derivatives are central finite
  differences with step ``fd_step_rel * (axis length)`` and an O(h^2)
  truncation budget.

On top of the fields live the pointwise integrability predicates: exterior
derivative, Lie bracket, the Nijenhuis tensor of the K-invariant field, and
the cross-check of the Nijenhuis tensor against the four-term exterior
expression that only involves d(phi) and d(F(phi)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .exterior import (
    DIM,
    VOL_TUPLE,
    Form,
    Vector,
    five_to_vector,
    merge_sign,
)
from .invariants import NotPrimitiveError, SymplecticFrame
from .polynomials import Polynomial
from .scalars import FLOAT, RATIONAL, BackendMismatchError

POLYNOMIAL = "polynomial"
NUMERIC = "numeric"

DEFAULT_RESOLUTION = 3
DEFAULT_FD_STEP_REL = 1e-5
Q_CONSTANT_TOL = 1e-8


# ---------------------------------------------------------------------------
# patch and coefficient functions


@dataclass(frozen=True)
class Patch:
    """A box [a_i, b_i]^6 with named coordinates and a sampling grid."""

    coord_names: tuple
    domain: tuple
    resolution: int = DEFAULT_RESOLUTION
    backend: str = POLYNOMIAL
    fd_step_rel: float = DEFAULT_FD_STEP_REL

    def __post_init__(self):
        if len(self.coord_names) != DIM or len(self.domain) != DIM:
            raise ValueError(f"a patch needs {DIM} coordinates and {DIM} intervals")
        if self.backend not in (POLYNOMIAL, NUMERIC):
            raise ValueError(f"unknown patch backend {self.backend!r}")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")

    def axis(self, name: str) -> int:
        try:
            return self.coord_names.index(name)
        except ValueError:
            raise KeyError(f"no coordinate {name!r} on this patch") from None

    @property
    def fd_steps(self) -> tuple:
        return tuple(
            self.fd_step_rel * (float(hi) - float(lo)) for lo, hi in self.domain
        )

    def grid_points(self, resolution: int | None = None) -> list:
        """Cell midpoints of the n^6 sampling grid, strictly inside the box.

        Rational endpoints on the polynomial backend give rational points,
        so pointwise classification at grid points stays exact.
        """
        n = resolution or self.resolution
        exact = self.backend == POLYNOMIAL and all(
            isinstance(v, (int, Fraction)) for lo_hi in self.domain for v in lo_hi
        )
        axes = []
        for lo, hi in self.domain:
            if exact:
                lo, hi = Fraction(lo), Fraction(hi)
                axes.append([lo + (hi - lo) * Fraction(2 * k + 1, 2 * n) for k in range(n)])
            else:
                lo, hi = float(lo), float(hi)
                axes.append([lo + (hi - lo) * (2 * k + 1) / (2 * n) for k in range(n)])
        return [tuple(p) for p in product(*axes)]

    def midpoint_grid(self, resolution: int | None = None):
        """(points, cell volume) for midpoint-rule quadrature over the box."""
        n = resolution or self.resolution
        pts = self.grid_points(n)
        exact = pts and all(isinstance(x, Fraction) for x in pts[0])
        weight = Fraction(1) if exact else 1.0
        for lo, hi in self.domain:
            w = (Fraction(hi) - Fraction(lo)) / n if exact else (float(hi) - float(lo)) / n
            weight = weight * w
        return pts, weight

    # -- coefficient constructors -------------------------------------------

    def zero_coef(self):
        if self.backend == POLYNOMIAL:
            return Polynomial()
        return NumFun(lambda p: 0.0, self.fd_steps, "0")

    def const(self, c):
        if self.backend == POLYNOMIAL:
            return Polynomial.constant(c)
        cf = float(c)
        return NumFun(lambda p: cf, self.fd_steps, str(c))

    def coord(self, name: str):
        i = self.axis(name)
        if self.backend == POLYNOMIAL:
            return Polynomial.variable(i)
        return NumFun(lambda p: float(p[i]), self.fd_steps, name)

    def fun(self, fn, desc: str = "f") -> "NumFun":
        if self.backend != NUMERIC:
            raise BackendMismatchError("closures require a numeric-backend patch")
        return NumFun(fn, self.fd_steps, desc)

    def coerce_coef(self, value):
        if isinstance(value, (int, Fraction)):
            return self.const(value)
        if isinstance(value, Polynomial):
            if self.backend == POLYNOMIAL:
                return value
            return NumFun(lambda p, _q=value: float(_q.evaluate(p)), self.fd_steps, "poly")
        if isinstance(value, NumFun):
            if self.backend != NUMERIC:
                raise BackendMismatchError("numeric coefficient on a polynomial patch")
            return value
        if isinstance(value, float):
            if self.backend != NUMERIC:
                raise BackendMismatchError("float coefficient on a polynomial patch")
            return self.const(value)
        if callable(value):
            return self.fun(value)
        raise TypeError(f"cannot use {type(value).__name__} as a coefficient")


class NumFun:
    """A float-valued coefficient function with finite-difference derivatives."""

    __slots__ = ("fn", "steps", "desc")

    def __init__(self, fn, steps, desc: str = "f"):
        self.fn = fn
        self.steps = tuple(steps)
        self.desc = desc

    def evaluate(self, point) -> float:
        return float(self.fn(tuple(float(x) for x in point)))

    def partial(self, i: int) -> "NumFun":
        h = self.steps[i]
        fn = self.fn

        def diff(p, _i=i, _h=h, _fn=fn):
            up = list(p)
            dn = list(p)
            up[_i] += _h
            dn[_i] -= _h
            return (_fn(tuple(up)) - _fn(tuple(dn))) / (2.0 * _h)

        return NumFun(diff, self.steps, f"d/d{i}({self.desc})")

    def _lift(self, other) -> "NumFun":
        if isinstance(other, NumFun):
            return other
        if isinstance(other, (int, float, Fraction)):
            c = float(other)
            return NumFun(lambda p: c, self.steps, str(other))
        if isinstance(other, Polynomial):
            return NumFun(lambda p, _q=other: float(_q.evaluate(p)), self.steps, "poly")
        raise BackendMismatchError(f"cannot combine NumFun with {type(other).__name__}")

    def __add__(self, other):
        g = self._lift(other)
        return NumFun(lambda p, a=self.fn, b=g.fn: a(p) + b(p), self.steps,
                      f"({self.desc}+{g.desc})")

    __radd__ = __add__

    def __sub__(self, other):
        g = self._lift(other)
        return NumFun(lambda p, a=self.fn, b=g.fn: a(p) - b(p), self.steps,
                      f"({self.desc}-{g.desc})")

    def __rsub__(self, other):
        g = self._lift(other)
        return NumFun(lambda p, a=g.fn, b=self.fn: a(p) - b(p), self.steps,
                      f"({g.desc}-{self.desc})")

    def __mul__(self, other):
        g = self._lift(other)
        return NumFun(lambda p, a=self.fn, b=g.fn: a(p) * b(p), self.steps,
                      f"({self.desc}*{g.desc})")

    __rmul__ = __mul__

    def __neg__(self):
        return NumFun(lambda p, a=self.fn: -a(p), self.steps, f"-{self.desc}")

    def __repr__(self):
        return f"NumFun({self.desc})"


def _coef_is_poly(c) -> bool:
    return isinstance(c, Polynomial)


# ---------------------------------------------------------------------------
# fields


class FormField:
    """A k-form whose coefficients are functions on a patch."""

    __slots__ = ("patch", "grade", "terms")

    def __init__(self, patch: Patch, grade: int, terms: dict):
        self.patch = patch
        self.grade = grade
        clean = {}
        for idx, c in terms.items():
            idx = tuple(idx)
            coef = patch.coerce_coef(c)
            if _coef_is_poly(coef) and coef.is_zero():
                continue
            clean[idx] = coef
        self.terms = clean

    @property
    def backend(self) -> str:
        return self.patch.backend

    @staticmethod
    def zero(patch: Patch, grade: int) -> "FormField":
        return FormField(patch, grade, {})

    def evaluate(self, point) -> Form:
        exact = self.backend == POLYNOMIAL and all(
            isinstance(x, (int, Fraction)) for x in point
        )
        backend = RATIONAL if exact else FLOAT
        terms = {}
        for idx, c in self.terms.items():
            v = c.evaluate(point)
            v = Fraction(v) if exact else float(v)
            if v != 0:
                terms[idx] = v
        return Form(self.grade, terms, backend, _raw=True)

    def coef(self, idx):
        return self.terms.get(tuple(idx), self.patch.zero_coef())

    def __add__(self, other: "FormField") -> "FormField":
        self._compat(other)
        out = dict(self.terms)
        for idx, c in other.terms.items():
            out[idx] = out[idx] + c if idx in out else c
        return FormField(self.patch, self.grade, out)

    def __sub__(self, other: "FormField") -> "FormField":
        return self + other.scale(-1)

    def scale(self, c) -> "FormField":
        c = self.patch.coerce_coef(c)
        return FormField(self.patch, self.grade, {k: v * c for k, v in self.terms.items()})

    def _compat(self, other: "FormField"):
        if self.patch is not other.patch:
            raise BackendMismatchError("fields live on different patches")
        if self.grade != other.grade:
            raise ValueError(f"grade mismatch {self.grade} vs {other.grade}")

    def is_identically_zero(self) -> bool:
        """Exact zero test; only meaningful on the polynomial backend."""
        if self.backend != POLYNOMIAL:
            raise BackendMismatchError("identical-zero test needs the polynomial backend")
        return all(c.is_zero() for c in self.terms.values())

    def sup_on_grid(self, resolution: int | None = None) -> float:
        pts = self.patch.grid_points(resolution)
        worst = 0.0
        for p in pts:
            for c in self.terms.values():
                worst = max(worst, abs(float(c.evaluate(p))))
        return worst

    def is_constant(self) -> bool:
        return self.backend == POLYNOMIAL and all(c.is_constant() for c in self.terms.values())

    def __repr__(self):
        return f"FormField(grade={self.grade}, terms={len(self.terms)})"


class VectorField:
    """Six coefficient functions; evaluates to a Vector."""

    __slots__ = ("patch", "components")

    def __init__(self, patch: Patch, components):
        comps = [patch.coerce_coef(c) for c in components]
        if len(comps) != DIM:
            raise ValueError(f"need {DIM} components")
        self.patch = patch
        self.components = tuple(comps)

    @staticmethod
    def zero(patch: Patch) -> "VectorField":
        return VectorField(patch, [0] * DIM)

    @staticmethod
    def coordinate(patch: Patch, name: str) -> "VectorField":
        i = patch.axis(name)
        return VectorField(patch, [1 if j == i else 0 for j in range(DIM)])

    def evaluate(self, point) -> Vector:
        exact = self.patch.backend == POLYNOMIAL and all(
            isinstance(x, (int, Fraction)) for x in point
        )
        vals = [c.evaluate(point) for c in self.components]
        if exact:
            return Vector([Fraction(v) for v in vals], RATIONAL)
        return Vector([float(v) for v in vals], FLOAT)

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.patch is not other.patch:
            raise BackendMismatchError("fields live on different patches")
        return VectorField(
            self.patch, [a + b for a, b in zip(self.components, other.components)]
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(-1)

    def scale(self, c) -> "VectorField":
        c = self.patch.coerce_coef(c)
        return VectorField(self.patch, [a * c for a in self.components])

    def __repr__(self):
        return "VectorField(6 components)"


class EndoField:
    """A 6x6 matrix of coefficient functions with a volume-density power."""

    __slots__ = ("patch", "entries", "density")

    def __init__(self, patch: Patch, entries, density: int = 0):
        rows = [tuple(patch.coerce_coef(x) for x in row) for row in entries]
        if len(rows) != DIM or any(len(r) != DIM for r in rows):
            raise ValueError(f"need a {DIM}x{DIM} matrix of coefficients")
        self.patch = patch
        self.entries = tuple(rows)
        self.density = int(density)

    def apply(self, X: VectorField) -> VectorField:
        comps = []
        for i in range(DIM):
            acc = None
            for j in range(DIM):
                term = self.entries[i][j] * X.components[j]
                acc = term if acc is None else acc + term
            comps.append(acc)
        return VectorField(self.patch, comps)

    def scale(self, c) -> "EndoField":
        c = self.patch.coerce_coef(c)
        return EndoField(
            self.patch, [[x * c for x in row] for row in self.entries], self.density
        )

    def trivialized(self, c, density_drop: int | None = None) -> "EndoField":
        """Divide out ``c`` per density power (c = omega^3/3! in volume units)."""
        drop = self.density if density_drop is None else density_drop
        if drop == 0:
            return self
        if isinstance(c, Fraction) and self.patch.backend == POLYNOMIAL:
            factor = Fraction(1) / c**drop
        else:
            factor = 1.0 / float(c) ** drop
        out = EndoField(
            self.patch, [[x * self.patch.coerce_coef(factor) for x in row] for row in self.entries],
            self.density - drop,
        )
        return out

    def evaluate(self, point) -> list:
        return [[x.evaluate(point) for x in row] for row in self.entries]

    def __repr__(self):
        return f"EndoField(density={self.density})"


# ---------------------------------------------------------------------------
# calculus on fields


def d(ff: FormField) -> FormField:
    """Exterior derivative; exact on the polynomial backend."""
    if ff.grade >= DIM:
        raise ValueError("exterior derivative of a top-degree form")
    out: dict = {}
    for idx, c in ff.terms.items():
        for axis in range(DIM):
            dc = c.partial(axis)
            if _coef_is_poly(dc) and dc.is_zero():
                continue
            ms = merge_sign((axis + 1,), idx)
            if ms is None:
                continue
            key, sign = ms
            term = dc if sign > 0 else -dc
            out[key] = out[key] + term if key in out else term
    return FormField(ff.patch, ff.grade + 1, out)


def wedge_fields(a: FormField, b: FormField) -> FormField:
    if a.patch is not b.patch:
        raise BackendMismatchError("fields live on different patches")
    g = a.grade + b.grade
    if g > DIM:
        return FormField.zero(a.patch, DIM)
    out: dict = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            ms = merge_sign(ia, ib)
            if ms is None:
                continue
            idx, sign = ms
            term = ca * cb
            if sign < 0:
                term = -term
            out[idx] = out[idx] + term if idx in out else term
    return FormField(a.patch, g, out)


def interior_field(X: VectorField, a: FormField) -> FormField:
    if a.grade == 0:
        raise ValueError("interior product of a 0-form field")
    if X.patch is not a.patch:
        raise BackendMismatchError("fields live on different patches")
    out: dict = {}
    for idx, c in a.terms.items():
        for pos, i in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1 :]
            term = X.components[i - 1] * c
            if pos % 2:
                term = -term
            out[rest] = out[rest] + term if rest in out else term
    return FormField(a.patch, a.grade - 1, out)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^m = X^n d_n Y^m - Y^n d_n X^m."""
    if X.patch is not Y.patch:
        raise BackendMismatchError("fields live on different patches")
    comps = []
    for m in range(DIM):
        acc = None
        for n in range(DIM):
            t1 = X.components[n] * Y.components[m].partial(n)
            t2 = Y.components[n] * X.components[m].partial(n)
            term = t1 - t2
            acc = term if acc is None else acc + term
        comps.append(acc)
    return VectorField(X.patch, comps)


# ---------------------------------------------------------------------------
# the invariants as fields


def K_field(phi: FormField) -> EndoField:
    """The quadratic endomorphism invariant of a 3-form field (density 1)."""
    if phi.grade != 3:
        raise ValueError("K_field expects a 3-form field")
    patch = phi.patch
    entries = [[patch.zero_coef() for _ in range(DIM)] for _ in range(DIM)]
    for j in range(1, DIM + 1):
        contraction = interior_field(_coordinate_vector(patch, j), phi)
        five = wedge_fields(contraction, phi)
        for comp_idx, c in five.terms.items():
            # iota_{e_i} vol = (-1)^(i-1) e^{complement}; column j of K is -five
            i = next(k for k in range(1, DIM + 1) if k not in comp_idx)
            sign = -1 if (i - 1) % 2 else 1
            entries[i - 1][j - 1] = entries[i - 1][j - 1] + (-c if sign > 0 else c)
    return EndoField(patch, entries, density=1)


def _coordinate_vector(patch: Patch, j: int) -> VectorField:
    return VectorField(patch, [1 if k == j - 1 else 0 for k in range(DIM)])


def _signed_coef(phi: FormField, indices):
    from .exterior import sort_sign

    ss = sort_sign(tuple(indices))
    if ss is None:
        return None
    sidx, sign = ss
    c = phi.terms.get(sidx)
    if c is None:
        return None
    return -c if sign < 0 else c


def F_field(phi: FormField, Kf: EndoField | None = None) -> FormField:
    """The cubic 3-form invariant as a field (one density power)."""
    if phi.grade != 3:
        raise ValueError("F_field expects a 3-form field")
    Kf = Kf or K_field(phi)
    out = {}
    for triple in combinations(range(1, DIM + 1), 3):
        j1, j2, j3 = triple
        acc = None
        for i in range(1, DIM + 1):
            kc = Kf.entries[i - 1][j1 - 1]
            if _coef_is_poly(kc) and kc.is_zero():
                continue
            pc = _signed_coef(phi, (i, j2, j3))
            if pc is None:
                continue
            term = kc * pc
            acc = term if acc is None else acc + term
        if acc is not None:
            acc = acc * phi.patch.const(-2)
            out[triple] = acc
    return FormField(phi.patch, 3, out)


def Q_coef(phi: FormField, Ff: FormField | None = None):
    """The quartic scalar invariant as a coefficient function (two densities)."""
    Ff = Ff if Ff is not None else F_field(phi)
    six = wedge_fields(phi, Ff)
    return -six.coef(VOL_TUPLE) if VOL_TUPLE in six.terms else phi.patch.zero_coef()


# ---------------------------------------------------------------------------
# Nijenhuis tensor, both routes


def _frame_at(omega_field: FormField, point) -> SymplecticFrame:
    omega = omega_field.evaluate(point)
    if omega.backend == RATIONAL:
        return SymplecticFrame(omega)
    return SymplecticFrame(omega)


def _require_constant_omega(omega_field: FormField):
    if omega_field.grade != 2:
        raise ValueError("omega field must have grade 2")
    if omega_field.backend == POLYNOMIAL:
        if not omega_field.is_constant():
            raise ValueError("omega field must be constant-coefficient on the patch")
    else:
        pts = omega_field.patch.grid_points(2)
        ref = omega_field.evaluate(pts[0])
        for p in pts[1:]:
            if (omega_field.evaluate(p) - ref).norm_inf() > 1e-12 * max(1.0, ref.norm_inf()):
                raise ValueError("omega field must be constant-coefficient on the patch")


def nijenhuis_field(Kf: EndoField, X: VectorField, Y: VectorField,
                    omega_field: FormField | None = None) -> VectorField:
    """N_K(X,Y) = -K^2 [X,Y] + K([KX,Y] + [X,KY]) - [KX,KY]  as a field.

    K must act as an honest endomorphism: either density 0 already, or an
    omega field is supplied so each density power can be divided out by
    omega^3/3! in volume units.
    """
    if Kf.density != 0:
        if omega_field is None:
            raise ValueError("K carries a density twist; supply an omega field")
        _require_constant_omega(omega_field)
        frame = _frame_at(omega_field, omega_field.patch.grid_points(1)[0])
        Kf = Kf.trivialized(frame.trivialization)
    KX = Kf.apply(X)
    KY = Kf.apply(Y)
    t1 = Kf.apply(Kf.apply(lie_bracket(X, Y))).scale(-1)
    t2 = Kf.apply(lie_bracket(KX, Y) + lie_bracket(X, KY))
    t3 = lie_bracket(KX, KY).scale(-1)
    return t1 + t2 + t3


def nijenhuis(Kf: EndoField, X: VectorField, Y: VectorField, point,
              omega_field: FormField | None = None) -> Vector:
    """The Nijenhuis tensor of K evaluated at one point."""
    return nijenhuis_field(Kf, X, Y, omega_field).evaluate(point)


def nijenhuis_rhs_field(phi: FormField, omega_field: FormField,
                        X: VectorField, Y: VectorField):
    """The 5-form field whose contraction identity expresses N_K.

    Returns (five_form_field, trivialization) with

        iota_{N_K(X,Y)} omega^3/3! =
            iota_Y iota_X dphi ^ F
            + 2 phi ^ (iota_Y iota_{KX} - iota_X iota_{KY}) dphi
            + phi ^ iota_Y iota_X dF,

    everything trivialized by omega^3/3! (omega constant on the patch).

    The expression is pinned by an exact fit over random polynomial fields;
    the coefficients are unique modulo the two double-contraction identities

        iota_X dphi ^ iota_Y F - (X<->Y)
            = iota_Y iota_X dphi ^ F + dphi ^ iota_Y iota_X F,
        phi ^ iota_Y iota_X dF + iota_Y iota_X phi ^ dF
            + (iota_X phi ^ iota_Y dF - (X<->Y)) = 0,

    which also hold exactly.  In particular a ``- dphi ^ iota_Y iota_X F``
    term cannot appear: it is nonzero on generic data and lies outside the
    span of the identities above (see the cross-path equality tests).
    """
    _require_constant_omega(omega_field)
    frame = _frame_at(omega_field, omega_field.patch.grid_points(1)[0])
    c = frame.trivialization
    Kf = K_field(phi).trivialized(c)
    inv_c = Fraction(1) / c if isinstance(c, Fraction) and phi.backend == POLYNOMIAL else 1.0 / float(c)
    Ff = F_field(phi).scale(inv_c)
    dphi = d(phi)
    dF = d(Ff)
    KX = Kf.apply(X)
    KY = Kf.apply(Y)
    t1 = wedge_fields(interior_field(Y, interior_field(X, dphi)), Ff)
    mixed = interior_field(Y, interior_field(KX, dphi)) - interior_field(
        X, interior_field(KY, dphi)
    )
    t3 = wedge_fields(phi, mixed).scale(2)
    t4 = wedge_fields(phi, interior_field(Y, interior_field(X, dF)))
    return t1 + t3 + t4, c


def nijenhuis_rhs(phi: FormField, omega_field: FormField,
                  X: VectorField, Y: VectorField, point) -> Vector:
    """Evaluate the four-term expression at a point, as a vector.

    The 5-form value is converted through iota_v (omega^3/3!) = value, i.e.
    five_to_vector against the reference volume divided by the
    trivialization factor.
    """
    five, c = nijenhuis_rhs_field(phi, omega_field, X, Y)
    value = five.evaluate(point)
    v = five_to_vector(value)
    factor = Fraction(1) / c if value.backend == RATIONAL else 1.0 / float(c)
    return v.scale(factor)


# ---------------------------------------------------------------------------
# integrability report


@dataclass(frozen=True)
class IntegrabilityReport:
    closed: bool
    F_integrable: bool
    Q_integrable: bool
    F_harmonic: bool
    Q_value: object          # the constant value when Q_integrable, else None
    Q_range: tuple           # (min, max) over the grid, floats
    pointwise_orbits: tuple  # SpOrbit per grid point
    points: tuple

    def to_json(self) -> dict:
        from .scalars import format_scalar

        return {
            "closed": self.closed,
            "F_integrable": self.F_integrable,
            "Q_integrable": self.Q_integrable,
            "F_harmonic": self.F_harmonic,
            "Q": None if self.Q_value is None else format_scalar(self.Q_value),
            "Q_range": [float(self.Q_range[0]), float(self.Q_range[1])],
            "orbits": sorted({o.tag.value for o in self.pointwise_orbits}),
        }


def integrability_report(phi: FormField, omega_field: FormField,
                         resolution: int | None = None, tol: float = 1e-6,
                         classify_points: bool = True) -> IntegrabilityReport:
    """Closedness, F/Q-integrability and pointwise orbits over the grid.

    Polynomial backend: the differential predicates are exact coefficient
    statements.  Numeric backend: sup-norm over the grid against ``tol``.
    Every grid point must be primitive; the first failure is reported with
    its location.  When the field is closed and F-integrable the report
    asserts that Q is constant and that stability is uniform across the
    grid, raising otherwise.
    """
    from .classify import STABLE_SP_TAGS, sp_classify
    from .invariants import InternalCheckError

    _require_constant_omega(omega_field)
    patch = phi.patch
    pts = patch.grid_points(resolution)
    frame = _frame_at(omega_field, pts[0])
    c = frame.trivialization

    dphi = d(phi)
    Ff = F_field(phi)
    dF = d(Ff)
    qc = Q_coef(phi, Ff)
    if patch.backend == POLYNOMIAL:
        closed = dphi.is_identically_zero()
        F_integrable = dF.is_identically_zero()
        Q_integrable = qc.is_constant()
    else:
        scale = max(1.0, _field_scale(phi, pts))
        closed = dphi.sup_on_grid(resolution) <= tol * scale
        F_integrable = dF.sup_on_grid(resolution) <= tol * scale**3
        Q_integrable = None  # decided from the grid range below

    q_values = [qc.evaluate(p) for p in pts]
    q_floats = [float(v) for v in q_values]
    q_min, q_max = min(q_floats), max(q_floats)
    if Q_integrable is None:
        mid = max(abs(q_min), abs(q_max))
        Q_integrable = (q_max - q_min) <= Q_CONSTANT_TOL * (1.0 + mid)
    c2 = c**2 if isinstance(c, Fraction) else float(c) ** 2
    Q_value = q_values[0] / c2 if Q_integrable else None

    orbits = []
    if classify_points:
        constant_field = phi.is_constant() if patch.backend == POLYNOMIAL else False
        cache = {}
        for p in pts:
            key = 0 if constant_field else None
            if key is not None and key in cache:
                orbits.append(cache[key])
                continue
            value = phi.evaluate(p)
            frame_p = frame if value.backend == frame.backend else SymplecticFrame(
                omega_field.evaluate(p)
            )
            try:
                orbit = sp_classify(frame_p, value, tol)
            except NotPrimitiveError as exc:
                raise NotPrimitiveError(f"non-primitive 3-form at grid point {p}") from exc
            if key is not None:
                cache[key] = orbit
            orbits.append(orbit)

    F_harmonic = closed and F_integrable
    if F_harmonic:
        if not Q_integrable:
            raise InternalCheckError(
                "closed and F-integrable field with non-constant Q on the grid"
            )
        if classify_points and orbits:
            stable_flags = {o.tag in STABLE_SP_TAGS for o in orbits}
            if len(stable_flags) > 1:
                raise InternalCheckError(
                    "closed and F-integrable field mixing stable and unstable points"
                )
    return IntegrabilityReport(
        closed=closed,
        F_integrable=F_integrable,
        Q_integrable=Q_integrable,
        F_harmonic=F_harmonic,
        Q_value=Q_value,
        Q_range=(q_min, q_max),
        pointwise_orbits=tuple(orbits),
        points=tuple(pts),
    )


def _field_scale(phi: FormField, pts) -> float:
    worst = 0.0
    for p in pts[:: max(1, len(pts) // 8)]:
        worst = max(worst, phi.evaluate(p).norm_inf())
    return worst


# ---------------------------------------------------------------------------
# primitive 3-form helpers


def primitive_basis(frame: SymplecticFrame) -> list[Form]:
    """A basis of the 14-dimensional space of omega-primitive 3-forms."""
    from . import rational as rat
    from .exterior import wedge

    triples = list(combinations(range(1, DIM + 1), 3))
    rows_idx = list(combinations(range(1, DIM + 1), 5))
    row_of = {t: r for r, t in enumerate(rows_idx)}
    mat = [[Fraction(0)] * len(triples) for _ in rows_idx]
    for col, t in enumerate(triples):
        prod = wedge(frame.omega, Form.basis(t))
        for idx, cc in prod.terms.items():
            mat[row_of[idx]][col] = cc
    basis = rat.null_space(mat, cols=len(triples))
    return [
        Form(3, {triples[i]: v[i] for i in range(len(triples)) if v[i] != 0}, RATIONAL, _raw=True)
        for v in basis
    ]
