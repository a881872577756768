"""Global Darboux chart for family members.

With (i, j, k) cyclic and chi_ij nonvanishing on the domain, the map

    y_i = x_i,   y_j = x_j,   y_k = -C_k(x)

is a global diffeomorphism.  Its inverse recovers the k-th coordinate
through the inverse primitive:

    x_k = zeta_k( psi_j(y_j) + kappa_jk + chi_ij(y_i, y_j) * y_k )

Pushing the structure matrix through the chart leaves a single variable
entry J_ij(x(y)) times a constant skew pattern; dividing by that factor
(a time reparametrization) lands on the canonical matrix with one
conjugate pair and the decoupled Casimir coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .casimir import (
    casimir_expr,
    casimir_value,
    cyclic,
    default_casimir_index,
    denominator_threshold,
)
from .errors import DomainMembershipError, HypothesisViolationError
from .family import PoissonFamilySpec, chi, structure_matrix_at
from .scalar_fields import DomainBox, psi_inverse
from .verification import fd_step

FACTOR_FLOOR = 1e-12


def canonical_matrix(k: int) -> np.ndarray:
    """The constant Darboux pattern: +1 at (i, j), -1 at (j, i), k decoupled."""
    i, j, k = cyclic(k)
    M = np.zeros((3, 3))
    M[i - 1, j - 1] = 1.0
    M[j - 1, i - 1] = -1.0
    return M


@dataclass(frozen=True)
class DarbouxChart:
    spec: PoissonFamilySpec
    k: int
    domain: DomainBox
    sign_branch: tuple[int, int, int]
    image_box: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    grad_fns: tuple = field(repr=False, compare=False)

    @property
    def pair(self) -> tuple[int, int]:
        i, j, _ = cyclic(self.k)
        return i, j


def _axis_sign(interval: tuple[float, float]) -> int:
    lo, hi = interval
    if lo > 0.0:
        return 1
    if hi < 0.0:
        return -1
    return 0


def build_chart(
    spec: PoissonFamilySpec,
    k: int | None = None,
    domain: DomainBox | None = None,
    n_samples: int = 512,
    seed: int = 0,
) -> DarbouxChart:
    """Validate the chart hypothesis on a sample and assemble the chart.

    k defaults to the best-conditioned Casimir index.  The hypothesis
    chi_ij != 0 throughout the domain is certified by sampling: every
    sampled value must clear the denominator threshold and, on a plain box
    (no predicate carving the domain apart), must keep one sign, since a
    sign change on a connected set forces a zero in between.
    """
    if domain is None:
        domain = spec.domain
    if k is None:
        k = default_casimir_index(spec, seed=seed)
    i, j, k = cyclic(k)

    points = domain.sample(n_samples, seed)
    sign_seen = 0.0
    for x in points:
        value = chi(spec, i, j, x)
        if abs(value) <= denominator_threshold(spec, i, j, x):
            raise HypothesisViolationError(
                f"chi_{i}{j} = {value!r} at {tuple(float(v) for v in x)}; chart hypothesis fails"
            )
        s = math.copysign(1.0, value)
        if domain.predicate is None and sign_seen and s != sign_seen:
            raise HypothesisViolationError(
                f"chi_{i}{j} changes sign on the box (seen near {tuple(float(v) for v in x)}); "
                "it must vanish somewhere inside"
            )
        sign_seen = s

    grad_fns = tuple(
        ex.compile_expr(ex.differentiate(casimir_expr(spec, k), f"x{axis}"), ("x1", "x2", "x3"))
        for axis in (1, 2, 3)
    )
    chart = DarbouxChart(
        spec,
        k,
        domain,
        tuple(_axis_sign(iv) for iv in domain.intervals),
        ((0.0, 0.0),) * 3,  # replaced below once forward exists
        grad_fns,
    )
    ys = np.array([forward_map(chart, x) for x in points])
    image_box = tuple((float(ys[:, a].min()), float(ys[:, a].max())) for a in range(3))
    object.__setattr__(chart, "image_box", image_box)
    return chart


def forward_map(chart: DarbouxChart, x) -> np.ndarray:
    """y(x): pass-through pair plus the negated Casimir."""
    if not chart.domain.contains(x):
        raise DomainMembershipError(f"point {tuple(float(v) for v in x)} is outside the chart domain")
    y = np.array([float(v) for v in x])
    y[chart.k - 1] = -casimir_value(chart.spec, chart.k, x)
    return y


def inverse_map(chart: DarbouxChart, y) -> np.ndarray:
    """x(y): solve psi_k through zeta (or the bracketing root-finder)."""
    i, j, k = cyclic(chart.k)
    spec = chart.spec
    y = [float(v) for v in y]
    chi_ij = (spec.psi(i, y[i - 1]) - spec.psi(j, y[j - 1])) + spec.kappa.entry(i, j)
    target = spec.psi(j, y[j - 1]) + spec.kappa.entry(j, k) + chi_ij * y[k - 1]
    x = np.array(y)
    x[k - 1] = psi_inverse(spec.field(k), target)
    return x


def jacobian_forward(chart: DarbouxChart, x, scheme: str = "analytic") -> np.ndarray:
    """d y / d x at a domain point; row k is the negated Casimir gradient.

    analytic differentiates the Casimir ratio symbolically; fd applies
    central differences to the forward map.
    """
    x1, x2, x3 = (float(v) for v in x)
    M = np.eye(3)
    if scheme == "analytic":
        row = [-fn(x1, x2, x3) for fn in chart.grad_fns]
    elif scheme == "fd":
        row = []
        for axis in (1, 2, 3):
            h = fd_step((x1, x2, x3)[axis - 1])
            hi = [x1, x2, x3]
            lo = [x1, x2, x3]
            hi[axis - 1] += h
            lo[axis - 1] -= h
            c_hi = -casimir_value(chart.spec, chart.k, hi)
            c_lo = -casimir_value(chart.spec, chart.k, lo)
            row.append((c_hi - c_lo) / (2.0 * h))
    else:
        raise ValueError(f"scheme must be analytic or fd, got {scheme!r}")
    M[chart.k - 1, :] = row
    return M


def pushforward_matrix(chart: DarbouxChart, y, scheme: str = "analytic"):
    """J'(y) = (dy/dx) J(x(y)) (dy/dx)^T as a StructureMatrixValue."""
    from .family import StructureMatrixValue

    x = inverse_map(chart, y)
    if not chart.spec.domain.contains(x):
        raise DomainMembershipError(
            f"inverse image {tuple(float(v) for v in x)} of {tuple(float(v) for v in y)} "
            "left the spec domain; y is not in the chart image"
        )
    J = structure_matrix_at(chart.spec, x, check_domain=False).as_matrix()
    M = jacobian_forward(chart, x, scheme)
    P = M @ J @ M.T
    return StructureMatrixValue(float(P[0, 1]), float(P[1, 2]), float(P[2, 0]))


def reparam_factor(chart: DarbouxChart, y) -> float:
    """J_ij(x(y)) via the closed form eta(x(y)) chi_ij(y_i, y_j) phi_k(x_k(y)).

    Nonvanishing on the chart image; values at the 1e-12 floor raise a
    hypothesis violation.
    """
    i, j, k = cyclic(chart.k)
    spec = chart.spec
    x = inverse_map(chart, y)
    x1, x2, x3 = (float(v) for v in x)
    chi_ij = (spec.psi(i, float(y[i - 1])) - spec.psi(j, float(y[j - 1]))) + spec.kappa.entry(i, j)
    factor = spec.eta_value(x1, x2, x3) * chi_ij * spec.phi(k, float(x[k - 1]))
    if abs(factor) <= FACTOR_FLOOR:
        raise HypothesisViolationError(
            f"reparametrization factor {factor!r} vanishes at y = {tuple(float(v) for v in y)}"
        )
    return factor


@dataclass(frozen=True)
class CanonicalCheckReport:
    samples: int
    max_deviation: float
    worst_point: tuple[float, float, float]  # y-coordinates
    verdict: str
    scheme: str
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_deviation": self.max_deviation,
            "worst_point": list(self.worst_point),
            "verdict": self.verdict,
            "scheme": self.scheme,
            "seed": self.seed,
            "tol": self.tol,
        }


def canonical_check(
    chart: DarbouxChart,
    n_samples: int = 1000,
    seed: int = 42,
    tol: float = 1e-8,
    scheme: str = "analytic",
) -> CanonicalCheckReport:
    """Pushforward over factor must equal the constant canonical matrix.

    Sampled over the chart domain; reports the worst entrywise deviation
    of J'(y) / J_ij(x(y)) from the canonical pattern.
    """
    target = canonical_matrix(chart.k)
    worst = -1.0
    worst_y = (0.0, 0.0, 0.0)
    points = chart.domain.sample(n_samples, seed)
    for x in points:
        y = forward_map(chart, x)
        P = pushforward_matrix(chart, y, scheme).as_matrix()
        factor = reparam_factor(chart, y)
        deviation = float(np.max(np.abs(P / factor - target)))
        if deviation > worst:
            worst = deviation
            worst_y = tuple(float(v) for v in y)
    verdict = "pass" if worst <= tol else "fail"
    return CanonicalCheckReport(len(points), worst, worst_y, verdict, scheme, seed, tol)
