"""Poisson dynamics: dx/dt = J(x) grad H(x), plus the reduced 1-DOF form.

Fixed-step explicit integrators only (classical 4th-order and explicit
midpoint), so invariant-drift behaves like a clean power of the step.
Every trajectory carries the Hamiltonian and a Casimir alongside the
states.  In Darboux coordinates the dynamics reduces to one conjugate
pair at constant Casimir coordinate, evolving in the reparametrized time
tau; the original clock is recovered by accumulating dt = dtau / factor
with the trapezoid rule.  A negative factor is legal and simply runs t
backwards relative to tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .casimir import casimir_value, cyclic, default_casimir_index
from .darboux import DarbouxChart, inverse_map, reparam_factor
from .errors import (
    DomainEvalError,
    DomainExitError,
    DomainMembershipError,
    HypothesisViolationError,
    ReparametrizationBreakdownError,
    UndefinedAtPointError,
)
from .family import PoissonFamilySpec, structure_matrix_at
from .verification import fd_step

METHODS = ("rk4", "midpoint")


class HamiltonianField:
    """A Hamiltonian with a gradient: symbolic, user-supplied, or fd.

    H may be an expression in x1, x2, x3 or a callable; grad, when given,
    is a triple of the same kind.  Expression Hamiltonians differentiate
    symbolically; callables fall back to central differences.
    """

    def __init__(self, h, grad=None):
        if isinstance(h, ex.Expr):
            self.expr = h
            self.value = ex.compile_expr(h, ("x1", "x2", "x3"))
        elif callable(h):
            self.expr = None
            self.value = h
        else:
            raise TypeError(f"H must be an expression or callable, got {type(h)!r}")
        if grad is not None:
            fns = []
            for g in grad:
                fns.append(ex.compile_expr(g, ("x1", "x2", "x3")) if isinstance(g, ex.Expr) else g)
            self._grad_fns = tuple(fns)
        elif self.expr is not None:
            self._grad_fns = tuple(
                ex.compile_expr(ex.differentiate(self.expr, v), ("x1", "x2", "x3"))
                for v in ("x1", "x2", "x3")
            )
        else:
            self._grad_fns = None

    def gradient(self, x1: float, x2: float, x3: float) -> tuple[float, float, float]:
        if self._grad_fns is not None:
            return tuple(fn(x1, x2, x3) for fn in self._grad_fns)
        out = []
        for axis in range(3):
            h = fd_step((x1, x2, x3)[axis])
            hi = [x1, x2, x3]
            lo = [x1, x2, x3]
            hi[axis] += h
            lo[axis] -= h
            out.append((self.value(*hi) - self.value(*lo)) / (2.0 * h))
        return tuple(out)


def as_hamiltonian(h) -> HamiltonianField:
    return h if isinstance(h, HamiltonianField) else HamiltonianField(h)


@dataclass(frozen=True)
class Trajectory:
    """Time series with both clocks and the invariant ledger.

    coords is "x" for direct runs (t is the integration clock, tau absent)
    and "y" for reduced runs (tau is the clock, t recovered; states are
    Darboux coordinates).
    """

    t: np.ndarray
    tau: np.ndarray | None
    states: np.ndarray
    H: np.ndarray
    C: np.ndarray | None
    casimir_k: int | None
    dt: float
    method: str
    coords: str = "x"

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class DriftReport:
    max_abs_dH: float
    rel_dH: float
    max_abs_dC: float | None
    rel_dC: float | None


def invariant_drift(traj: Trajectory) -> DriftReport:
    """Worst excursion of H and the Casimir from their initial values."""
    if len(traj) == 0:
        raise ValueError("trajectory is empty")
    dH = float(np.max(np.abs(traj.H - traj.H[0])))
    rel_dH = dH / max(1.0, abs(float(traj.H[0])))
    if traj.C is None:
        return DriftReport(dH, rel_dH, None, None)
    dC = float(np.max(np.abs(traj.C - traj.C[0])))
    return DriftReport(dH, rel_dH, dC, dC / max(1.0, abs(float(traj.C[0]))))


def hamiltonian_vector_field(spec: PoissonFamilySpec, h, x, check_domain: bool = True) -> np.ndarray:
    """J(x) grad H(x)."""
    H = as_hamiltonian(h)
    if check_domain and not spec.domain.contains(x):
        raise DomainMembershipError(f"point {tuple(float(v) for v in x)} is outside the domain")
    x1, x2, x3 = (float(v) for v in x)
    J = structure_matrix_at(spec, (x1, x2, x3), check_domain=False)
    g1, g2, g3 = H.gradient(x1, x2, x3)
    return np.array(
        [
            J.j12 * g2 - J.j31 * g3,
            -J.j12 * g1 + J.j23 * g3,
            J.j31 * g1 - J.j23 * g2,
        ]
    )


def _stepper(method: str, rhs, dt: float):
    if method == "rk4":

        def step(state):
            k1 = rhs(state)
            k2 = rhs([s + 0.5 * dt * k for s, k in zip(state, k1)])
            k3 = rhs([s + 0.5 * dt * k for s, k in zip(state, k2)])
            k4 = rhs([s + dt * k for s, k in zip(state, k3)])
            return [
                s + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                for s, a, b, c, d in zip(state, k1, k2, k3, k4)
            ]

    elif method == "midpoint":

        def step(state):
            k1 = rhs(state)
            k2 = rhs([s + 0.5 * dt * k for s, k in zip(state, k1)])
            return [s + dt * k for s, k in zip(state, k2)]

    else:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    return step


def integrate(
    spec: PoissonFamilySpec,
    h,
    x0,
    t_end: float,
    dt: float,
    method: str = "rk4",
    casimir_k: int | None | str = "auto",
) -> Trajectory:
    """Fixed-step integration with per-sample H and Casimir recording.

    dt is snapped to divide t_end into uniform steps.  The run aborts with
    DomainExitError (carrying the partial trajectory) as soon as a step
    lands outside the domain or a stage evaluation leaves it.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    if not spec.domain.contains(x0):
        raise DomainMembershipError(f"x0 = {tuple(float(v) for v in x0)} is outside the domain")
    H = as_hamiltonian(h)
    if casimir_k == "auto":
        casimir_k = default_casimir_index(spec)

    n_steps = max(1, round(t_end / dt))
    dt_eff = t_end / n_steps

    def rhs(state):
        x1, x2, x3 = state
        J = structure_matrix_at(spec, (x1, x2, x3), check_domain=False)
        g1, g2, g3 = H.gradient(x1, x2, x3)
        return (
            J.j12 * g2 - J.j31 * g3,
            -J.j12 * g1 + J.j23 * g3,
            J.j31 * g1 - J.j23 * g2,
        )

    step = _stepper(method, rhs, dt_eff)

    def record(state):
        ts.append(len(ts) * dt_eff)
        states.append(tuple(state))
        hs.append(H.value(*state))
        if casimir_k is not None:
            cs.append(casimir_value(spec, casimir_k, state))

    def partial() -> Trajectory:
        return Trajectory(
            np.array(ts),
            None,
            np.array(states),
            np.array(hs),
            np.array(cs) if casimir_k is not None else None,
            casimir_k,
            dt_eff,
            method,
        )

    ts: list[float] = []
    states: list[tuple] = []
    hs: list[float] = []
    cs: list[float] = []
    state = [float(v) for v in x0]
    record(state)
    for m in range(n_steps):
        t_now = m * dt_eff
        try:
            state = step(state)
        except (DomainEvalError, UndefinedAtPointError) as exc:
            raise DomainExitError(
                f"evaluation failed inside step at t = {t_now}: {exc}", t_now, tuple(state), partial()
            ) from None
        if not all(math.isfinite(v) for v in state):
            raise DomainExitError(
                f"non-finite state after step at t = {t_now}", t_now, tuple(state), partial()
            )
        if not spec.domain.contains(state):
            raise DomainExitError(
                f"trajectory left the domain at t = {(m + 1) * dt_eff}",
                (m + 1) * dt_eff,
                tuple(state),
                partial(),
            )
        record(state)
    return partial()


# ---------------------------------------------------------------------------
# Reduced dynamics in Darboux coordinates


def _reduced_hamiltonian(chart: DarbouxChart, H: HamiltonianField):
    """H(x(y)) and its (d/dy_i, d/dy_j) gradient; symbolic when possible."""
    spec = chart.spec
    i, j, k = cyclic(chart.k)
    fld = spec.field(k)
    if H.expr is not None and fld.zeta is not None:
        # x_k(y) = zeta_k(psi_j(y_j) + kappa_jk + chi_ij(y_i, y_j) y_k)
        from .family import chi_expr

        psi_j = ex.substitute(spec.field(j).psi, "u", ex.Var(f"x{j}"))
        arg = ex.add(
            ex.add(psi_j, ex.lit(spec.kappa.entry(j, k))),
            ex.mul(chi_expr(spec, i, j), ex.Var(f"x{k}")),
        )
        xk_of_y = ex.substitute(fld.zeta, "u", arg)
        h_tilde = ex.substitute(H.expr, f"x{k}", xk_of_y)
        value = ex.compile_expr(h_tilde, ("x1", "x2", "x3"))
        d_i = ex.compile_expr(ex.differentiate(h_tilde, f"x{i}"), ("x1", "x2", "x3"))
        d_j = ex.compile_expr(ex.differentiate(h_tilde, f"x{j}"), ("x1", "x2", "x3"))
        return value, lambda y: (d_i(*y), d_j(*y))

    def value(y1, y2, y3):
        x = inverse_map(chart, (y1, y2, y3))
        return H.value(float(x[0]), float(x[1]), float(x[2]))

    def grad_pair(y):
        out = []
        for axis in (i, j):
            h = fd_step(y[axis - 1])
            hi = list(y)
            lo = list(y)
            hi[axis - 1] += h
            lo[axis - 1] -= h
            out.append((value(*hi) - value(*lo)) / (2.0 * h))
        return tuple(out)

    return value, grad_pair


def integrate_reduced(
    chart: DarbouxChart,
    h,
    y0,
    tau_end: float,
    dtau: float,
    method: str = "rk4",
) -> Trajectory:
    """Integrate the canonical pair in tau; recover t; hold y_k fixed.

    tau_end may be negative (with a negative reparametrization factor that
    is how t is driven forward).  The factor is evaluated every step; a
    magnitude at the 1e-12 floor aborts with a breakdown error, and an
    inverse image outside the spec domain aborts with a domain exit.
    """
    if dtau <= 0.0:
        raise ValueError(f"dtau must be positive, got {dtau!r}")
    if tau_end == 0.0:
        raise ValueError("tau_end must be nonzero")
    H = as_hamiltonian(h)
    spec = chart.spec
    i, j, k = cyclic(chart.k)
    y0 = [float(v) for v in y0]
    x_start = inverse_map(chart, y0)
    if not spec.domain.contains(x_start):
        raise DomainMembershipError(
            f"y0 = {tuple(y0)} maps to {tuple(float(v) for v in x_start)} outside the domain"
        )

    n_steps = max(1, round(abs(tau_end) / dtau))
    dtau_eff = math.copysign(abs(tau_end) / n_steps, tau_end)
    value, grad_pair = _reduced_hamiltonian(chart, H)

    def rhs(pair):
        y = [0.0, 0.0, 0.0]
        y[i - 1], y[j - 1] = pair
        y[k - 1] = y0[k - 1]
        gi, gj = grad_pair(y)
        return (gj, -gi)  # dy_i/dtau = +dH/dy_j, dy_j/dtau = -dH/dy_i

    step = _stepper(method, rhs, dtau_eff)

    def assemble(pair) -> list[float]:
        y = [0.0, 0.0, 0.0]
        y[i - 1], y[j - 1] = pair
        y[k - 1] = y0[k - 1]
        return y

    def factor_at(y) -> float:
        try:
            return reparam_factor(chart, y)
        except HypothesisViolationError as exc:
            raise ReparametrizationBreakdownError(str(exc)) from None

    taus: list[float] = []
    ts: list[float] = []
    ys: list[list[float]] = []
    hs: list[float] = []

    pair = (y0[i - 1], y0[j - 1])
    y = assemble(pair)
    g_prev = 1.0 / factor_at(y)
    taus.append(0.0)
    ts.append(0.0)
    ys.append(y)
    hs.append(value(*y))
    for m in range(n_steps):
        try:
            pair = step(pair)
        except (DomainEvalError, UndefinedAtPointError) as exc:
            raise ReparametrizationBreakdownError(
                f"reduced step failed at tau = {m * dtau_eff}: {exc}"
            ) from None
        y = assemble(pair)
        g_new = 1.0 / factor_at(y)  # breakdown outranks domain exit
        x = inverse_map(chart, y)
        if not spec.domain.contains(x):
            raise DomainExitError(
                f"reduced trajectory left the domain at tau = {(m + 1) * dtau_eff}",
                (m + 1) * dtau_eff,
                tuple(y),
            )
        taus.append((m + 1) * dtau_eff)
        ts.append(ts[-1] + dtau_eff * 0.5 * (g_prev + g_new))
        ys.append(y)
        hs.append(value(*y))
        g_prev = g_new

    casimir_constant = -y0[k - 1]
    return Trajectory(
        np.array(ts),
        np.array(taus),
        np.array(ys),
        np.array(hs),
        np.full(len(ts), casimir_constant),
        chart.k,
        dtau_eff,
        method,
        coords="y",
    )


def hermite_resample(traj: Trajectory, t_values, deriv_fn) -> np.ndarray:
    """Cubic Hermite interpolation of a direct trajectory at given times.

    deriv_fn(state) -> velocity; with exact endpoint derivatives the
    interpolation error is O(dt^4), matching the integrator's order.
    """
    t = traj.t
    X = traj.states
    out = np.empty((len(t_values), X.shape[1]))
    for row, tv in enumerate(np.asarray(t_values, float)):
        if not (t[0] <= tv <= t[-1]):
            raise ValueError(f"t = {tv!r} outside trajectory range [{t[0]}, {t[-1]}]")
        seg = min(max(int(np.searchsorted(t, tv, side="right")) - 1, 0), len(t) - 2)
        h = t[seg + 1] - t[seg]
        s = (tv - t[seg]) / h
        p0, p1 = X[seg], X[seg + 1]
        v0 = np.asarray(deriv_fn(p0), float)
        v1 = np.asarray(deriv_fn(p1), float)
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        out[row] = h00 * p0 + h10 * h * v0 + h01 * p1 + h11 * h * v1
    return out
