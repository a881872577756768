"""The three-parameter-function family of 3-D structure matrices.

A family member is built from a nonvanishing factor eta(x), three axis
triples (phi_i, psi_i, zeta_i), and skew constants kappa_ij with
kappa_12 + kappa_23 + kappa_31 = 0.  Its independent entries are

    J12 = eta * (psi_1(x1) - psi_2(x2) + kappa_12) * phi_3(x3)
    J23 = eta * (psi_2(x2) - psi_3(x3) + kappa_23) * phi_1(x1)
    J31 = eta * (psi_3(x3) - psi_1(x1) + kappa_31) * phi_2(x2)

with chi_ij = psi_i - psi_j + kappa_ij the bracketed combinations.  The
chi sum telescopes to zero, which forbids exactly two entries vanishing
at a point and limits the rank to 0 or 2.

eta is stored as a multiplicative chain so that rescaling composes a new
factor onto existing entries exactly: every entry of the rescaled matrix
is float-identical to factor(x) times the original entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import (
    ConsistencyAlarmError,
    DomainMembershipError,
    FamilyValidationError,
    InvalidAxisError,
)
from .scalar_fields import DomainBox, ScalarField1D

_AXES = (1, 2, 3)
# entry (i, j) pairs in cyclic order with the complementary density axis
ENTRY_PAIRS = ((1, 2, 3), (2, 3, 1), (3, 1, 2))


@dataclass(frozen=True)
class KappaMatrix:
    """Skew constants with the zero-sum closure built in.

    Only kappa_12 and kappa_23 are stored; kappa_31 is always derived as
    their negated sum, so the zero-sum condition cannot be violated.
    """

    k12: float
    k23: float

    @property
    def k31(self) -> float:
        return -(self.k12 + self.k23)

    def entry(self, i: int, j: int) -> float:
        if i not in _AXES or j not in _AXES:
            raise InvalidAxisError(f"axes must be in {{1,2,3}}, got ({i}, {j})")
        if i == j:
            return 0.0
        table = {(1, 2): self.k12, (2, 3): self.k23, (3, 1): self.k31}
        if (i, j) in table:
            return table[(i, j)]
        return -table[(j, i)]

    def shifted(self, k1: float, k2: float, k3: float) -> "KappaMatrix":
        """Constants after replacing every psi_i by psi_i + k_i."""
        return KappaMatrix(self.k12 + k1 - k2, self.k23 + k2 - k3)


def make_kappa(k12: float, k23: float) -> KappaMatrix:
    if not (math.isfinite(k12) and math.isfinite(k23)):
        raise ValueError(f"kappa constants must be finite, got ({k12!r}, {k23!r})")
    return KappaMatrix(float(k12), float(k23))


@dataclass(frozen=True)
class PoissonFamilySpec:
    """One member of the family, with its domain of validity.

    Use make_family_spec for a validated instance.  eta_chain holds the
    conformal factor as an ordered product; rescale() appends to it.
    """

    eta_chain: tuple[ex.Expr, ...]
    fields: tuple[ScalarField1D, ScalarField1D, ScalarField1D]
    kappa: KappaMatrix
    domain: DomainBox
    name: str = ""
    eta_fns: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "eta_fns", tuple(ex.compile_expr(e, ("x1", "x2", "x3")) for e in self.eta_chain)
        )

    @property
    def eta_expr(self) -> ex.Expr:
        e = self.eta_chain[0]
        for nxt in self.eta_chain[1:]:
            e = ex.mul(e, nxt)
        return e

    def eta_value(self, x1: float, x2: float, x3: float) -> float:
        v = 1.0
        for fn in self.eta_fns:
            v = v * fn(x1, x2, x3)
        return v

    def field(self, axis: int) -> ScalarField1D:
        if axis not in _AXES:
            raise InvalidAxisError(f"axis must be in {{1,2,3}}, got {axis}")
        return self.fields[axis - 1]

    def psi(self, axis: int, value: float) -> float:
        return self.field(axis).psi_fn(value)

    def phi(self, axis: int, value: float) -> float:
        return self.field(axis).phi_fn(value)


def make_family_spec(
    eta: ex.Expr | tuple[ex.Expr, ...],
    fields: tuple[ScalarField1D, ScalarField1D, ScalarField1D],
    kappa: KappaMatrix,
    domain: DomainBox,
    name: str = "",
    n_samples: int = 256,
    seed: int = 0,
) -> PoissonFamilySpec:
    """Assemble and validate a family member.

    Checks that each axis interval matches the domain box and that eta is
    nonvanishing (|eta| > 1e-12) at sampled domain points.
    """
    chain = tuple(eta) if isinstance(eta, tuple) else (eta,)
    for e in chain:
        extra = ex.free_vars(e) - {"x1", "x2", "x3"}
        if extra:
            raise FamilyValidationError(f"eta may only use x1,x2,x3; found {sorted(extra)}")
    for axis, fld in zip(_AXES, fields):
        if tuple(fld.interval) != tuple(domain.intervals[axis - 1]):
            raise FamilyValidationError(
                f"axis {axis} interval {fld.interval} does not match domain {domain.intervals[axis - 1]}"
            )
    spec = PoissonFamilySpec(chain, tuple(fields), kappa, domain, name)
    for x in domain.sample(n_samples, seed):
        v = spec.eta_value(float(x[0]), float(x[1]), float(x[2]))
        if abs(v) <= 1e-12:
            raise FamilyValidationError(f"eta vanishes at sampled point {tuple(x)}")
    return spec


# ---------------------------------------------------------------------------
# Pointwise evaluation


def chi(spec: PoissonFamilySpec, i: int, j: int, x) -> float:
    """psi_i(x_i) - psi_j(x_j) + kappa_ij; antisymmetric in (i, j)."""
    if i not in _AXES or j not in _AXES or i == j:
        raise InvalidAxisError(f"need two distinct axes in {{1,2,3}}, got ({i}, {j})")
    return (spec.psi(i, float(x[i - 1])) - spec.psi(j, float(x[j - 1]))) + spec.kappa.entry(i, j)


@dataclass(frozen=True)
class StructureMatrixValue:
    """The three independent entries of the skew matrix at one point."""

    j12: float
    j23: float
    j31: float

    def as_matrix(self) -> np.ndarray:
        return np.array(
            [
                [0.0, self.j12, -self.j31],
                [-self.j12, 0.0, self.j23],
                [self.j31, -self.j23, 0.0],
            ]
        )

    def entries(self) -> tuple[float, float, float]:
        return (self.j12, self.j23, self.j31)

    def scale(self) -> float:
        return 1.0 + max(abs(self.j12), abs(self.j23), abs(self.j31))

    def rank(self, tol: float | None = None) -> int:
        return rank_of_entries(self.j12, self.j23, self.j31, tol)


def structure_matrix_at(spec: PoissonFamilySpec, x, check_domain: bool = True) -> StructureMatrixValue:
    """Evaluate the three independent entries at a point of the domain."""
    if check_domain and not spec.domain.contains(x):
        raise DomainMembershipError(f"point {tuple(float(v) for v in x)} is outside the domain")
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    c12 = (spec.psi(1, x1) - spec.psi(2, x2)) + spec.kappa.k12
    c23 = (spec.psi(2, x2) - spec.psi(3, x3)) + spec.kappa.k23
    c31 = (spec.psi(3, x3) - spec.psi(1, x1)) + spec.kappa.k31
    j12 = c12 * spec.phi(3, x3)
    j23 = c23 * spec.phi(1, x1)
    j31 = c31 * spec.phi(2, x2)
    for fn in spec.eta_fns:
        e = fn(x1, x2, x3)
        j12, j23, j31 = j12 * e, j23 * e, j31 * e
    return StructureMatrixValue(j12, j23, j31)


def rank_of_entries(j12: float, j23: float, j31: float, tol: float | None = None) -> int:
    """Rank classification: 0 when all entries vanish, 2 otherwise.

    Exactly two near-zero entries with the third far above tolerance is
    impossible under the chi zero-sum relation, so that pattern raises a
    consistency alarm instead of returning a rank.
    """
    entries = (j12, j23, j31)
    if tol is None:
        tol = 1e-12 * (1.0 + max(abs(v) for v in entries))
    small = [abs(v) <= tol for v in entries]
    n_small = sum(small)
    if n_small == 3:
        return 0
    if n_small == 2:
        big = max(abs(v) for v in entries)
        if big > 100.0 * tol:
            raise ConsistencyAlarmError(
                f"entries {entries!r}: exactly two vanish while the third is large; "
                "impossible for a zero-sum family member"
            )
    return 2


def rank_at(spec: PoissonFamilySpec, x, tol: float | None = None) -> int:
    return structure_matrix_at(spec, x).rank(tol)


def rescale(
    spec: PoissonFamilySpec,
    factor: ex.Expr,
    n_samples: int = 256,
    seed: int = 0,
    name: str | None = None,
) -> PoissonFamilySpec:
    """New spec with eta multiplied by a nonvanishing factor.

    Entry values of the result are exactly factor(x) times the original
    entries (the factor is composed onto the evaluation chain, not folded
    into a new expression).
    """
    extra = ex.free_vars(factor) - {"x1", "x2", "x3"}
    if extra:
        raise FamilyValidationError(f"factor may only use x1,x2,x3; found {sorted(extra)}")
    fn = ex.compile_expr(factor, ("x1", "x2", "x3"))
    for x in spec.domain.sample(n_samples, seed):
        if abs(fn(float(x[0]), float(x[1]), float(x[2]))) <= 1e-12:
            raise FamilyValidationError(f"rescale factor vanishes at sampled point {tuple(x)}")
    return PoissonFamilySpec(
        spec.eta_chain + (factor,),
        spec.fields,
        spec.kappa,
        spec.domain,
        name if name is not None else spec.name,
    )


# ---------------------------------------------------------------------------
# Symbolic views (feed the analytic verification scheme)


def chi_expr(spec: PoissonFamilySpec, i: int, j: int, kappa_override: tuple[float, float, float] | None = None) -> ex.Expr:
    """chi_ij as an expression in x1, x2, x3."""
    if i not in _AXES or j not in _AXES or i == j:
        raise InvalidAxisError(f"need two distinct axes in {{1,2,3}}, got ({i}, {j})")
    psi_i = ex.substitute(spec.field(i).psi, "u", ex.Var(f"x{i}"))
    psi_j = ex.substitute(spec.field(j).psi, "u", ex.Var(f"x{j}"))
    if kappa_override is None:
        k = spec.kappa.entry(i, j)
    else:
        table = {(1, 2): kappa_override[0], (2, 3): kappa_override[1], (3, 1): kappa_override[2]}
        k = table[(i, j)] if (i, j) in table else -table[(j, i)]
    return ex.add(ex.sub(psi_i, psi_j), ex.Lit(float(k)))


def entry_exprs(
    spec: PoissonFamilySpec,
    include_eta: bool = True,
    kappa_override: tuple[float, float, float] | None = None,
) -> tuple[ex.Expr, ex.Expr, ex.Expr]:
    """The (J12, J23, J31) entries as expressions in x1, x2, x3.

    kappa_override swaps in a raw (k12, k23, k31) triple that need not sum
    to zero; with include_eta=False the eta factor is stripped.  Both knobs
    exist for the Jacobi-identity checks, which probe entries outside the
    guaranteed family.
    """
    out = []
    for i, j, k in ENTRY_PAIRS:
        phi_k = ex.substitute(spec.field(k).phi, "u", ex.Var(f"x{k}"))
        e = ex.mul(chi_expr(spec, i, j, kappa_override), phi_k)
        if include_eta:
            e = ex.mul(e, spec.eta_expr)
        out.append(e)
    return tuple(out)
