"""Casimir invariants of family members and their annihilation property.

For a cyclic permutation (i, j, k) of (1, 2, 3) with chi_ij nonvanishing
on the domain, the ratio

    C_k(x) = chi_jk(x_j, x_k) / chi_ij(x_i, x_j)

is a Casimir: J grad(C_k) = 0, so it is conserved by every Hamiltonian
flow of the structure.  The three choices satisfy C1 C2 C3 = 1 wherever
all are defined.  The gradient has the closed form

    grad(C_k) = -(eta * chi_ij^2)^(-1) * (J23, J31, J12)

which is what casimir_gradient evaluates; finite differences are kept
only as an independent oracle (casimir_gradient_fd).
"""

from __future__ import annotations

import numpy as np

from . import expr as ex
from .errors import InvalidAxisError, UndefinedAtPointError
from .family import PoissonFamilySpec, chi, chi_expr, structure_matrix_at

_EPS3 = float.fromhex("0x1.0p-52") ** (1.0 / 3.0)


def cyclic(k: int) -> tuple[int, int, int]:
    """The cyclic permutation (i, j, k) of (1, 2, 3) ending at k."""
    if k not in (1, 2, 3):
        raise InvalidAxisError(f"Casimir index must be 1, 2 or 3, got {k}")
    i = k % 3 + 1
    j = i % 3 + 1
    return i, j, k


def denominator_threshold(spec: PoissonFamilySpec, i: int, j: int, x) -> float:
    psi_i = spec.psi(i, float(x[i - 1]))
    psi_j = spec.psi(j, float(x[j - 1]))
    return 1e-12 * (1.0 + abs(psi_i) + abs(psi_j))


def casimir_value(spec: PoissonFamilySpec, k: int, x) -> float:
    """C_k at a point; UndefinedAtPointError below the denominator guard."""
    i, j, k = cyclic(k)
    denom = chi(spec, i, j, x)
    if abs(denom) <= denominator_threshold(spec, i, j, x):
        raise UndefinedAtPointError(
            f"chi_{i}{j} = {denom!r} at {tuple(float(v) for v in x)}; C_{k} undefined there"
        )
    return chi(spec, j, k, x) / denom


def casimir_expr(spec: PoissonFamilySpec, k: int) -> ex.Expr:
    """C_k as an expression in x1, x2, x3."""
    i, j, k = cyclic(k)
    return ex.div(chi_expr(spec, j, k), chi_expr(spec, i, j))


def casimir_gradient(spec: PoissonFamilySpec, k: int, x) -> np.ndarray:
    """Closed-form gradient -(eta chi_ij^2)^(-1) (J23, J31, J12)."""
    i, j, k = cyclic(k)
    denom = chi(spec, i, j, x)
    if abs(denom) <= denominator_threshold(spec, i, j, x):
        raise UndefinedAtPointError(
            f"chi_{i}{j} = {denom!r} at {tuple(float(v) for v in x)}; C_{k} undefined there"
        )
    J = structure_matrix_at(spec, x, check_domain=False)
    eta = spec.eta_value(float(x[0]), float(x[1]), float(x[2]))
    factor = -1.0 / (eta * denom * denom)
    return factor * np.array([J.j23, J.j31, J.j12])


def casimir_gradient_fd(spec: PoissonFamilySpec, k: int, x) -> np.ndarray:
    """Central-difference oracle for the gradient.

    The step shrinks with the Casimir denominator so the stencil stays well
    inside the region where C_k varies smoothly; accuracy is then uniformly
    ~1e-8 relative regardless of how small chi_ij is.
    """
    i, j, _ = cyclic(k)
    denom = abs(chi(spec, i, j, x))
    out = np.empty(3)
    for axis in (1, 2, 3):
        xl = float(x[axis - 1])
        h = _EPS3 * max(1.0, abs(xl))
        phi_l = abs(spec.phi(axis, xl))
        if phi_l > 0.0:
            h = min(h, 1e-4 * denom / phi_l)
        hi = [float(v) for v in x]
        lo = [float(v) for v in x]
        hi[axis - 1] += h
        lo[axis - 1] -= h
        out[axis - 1] = (casimir_value(spec, k, hi) - casimir_value(spec, k, lo)) / (2.0 * h)
    return out


def annihilation_residual(spec: PoissonFamilySpec, k: int, x, gradient: np.ndarray | None = None) -> float:
    """Max-norm of J(x) grad(C_k)(x); ~0 certifies the Casimir property."""
    if gradient is None:
        gradient = casimir_gradient(spec, k, x)
    J = structure_matrix_at(spec, x, check_domain=False).as_matrix()
    return float(np.max(np.abs(J @ gradient)))


def default_casimir_index(spec: PoissonFamilySpec, n_samples: int = 512, seed: int = 0) -> int:
    """The k whose denominator chi stays farthest from zero over a sample."""
    points = spec.domain.sample(n_samples, seed)
    best_k, best_margin = 1, -1.0
    for k in (1, 2, 3):
        i, j, _ = cyclic(k)
        margin = min(abs(chi(spec, i, j, x)) for x in points)
        if margin > best_margin:
            best_k, best_margin = k, margin
    return best_k
