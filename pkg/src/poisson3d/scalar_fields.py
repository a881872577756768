"""Per-axis function triples (density, primitive, inverse) and domain boxes.

Each axis of a structure carries a density phi, a user-supplied primitive
psi with psi' = phi, and optionally the primitive's inverse zeta.  phi must
be continuous and nonvanishing on the axis interval, which makes psi
strictly monotone and globally invertible there; those guarantees are what
the Casimir and chart constructions later rely on.  All certificates here
are sampled (grid) checks, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import DomainEvalError, FieldValidationError, OutOfRangeError

_EPS = float(np.finfo(float).eps)
_EPS3 = _EPS ** (1.0 / 3.0)
_GRID = 256


# ---------------------------------------------------------------------------
# Deterministic point derivation: each sample is a pure function of
# (seed, index), so reports never depend on scheduling or shared RNG state.

_M64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def unit_uniforms(seed: int, index: int, count: int) -> list[float]:
    """count uniforms in [0, 1) derived from (seed, index)."""
    state = _mix64((seed & _M64) ^ _mix64(index & _M64))
    out = []
    for _ in range(count):
        state = _mix64(state)
        out.append((state >> 11) / float(1 << 53))
    return out


@dataclass(frozen=True)
class ScalarField1D:
    """A density phi, its primitive psi, and optionally psi's inverse zeta.

    phi and psi are expressions in the variable u; zeta, when supplied, maps
    psi-values back to u.  Use build_scalar_field to get a validated value.
    """

    phi: ex.Expr
    psi: ex.Expr
    zeta: ex.Expr | None
    interval: tuple[float, float]
    phi_fn: object = field(init=False, repr=False, compare=False)
    psi_fn: object = field(init=False, repr=False, compare=False)
    zeta_fn: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "phi_fn", ex.compile_expr(self.phi, ("u",)))
        object.__setattr__(self, "psi_fn", ex.compile_expr(self.psi, ("u",)))
        object.__setattr__(
            self, "zeta_fn", ex.compile_expr(self.zeta, ("u",)) if self.zeta is not None else None
        )

    def psi_range(self) -> tuple[float, float]:
        lo, hi = self.interval
        a, b = self.psi_fn(lo), self.psi_fn(hi)
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class NonvanishingReport:
    ok: bool
    reason: str = ""
    where: float | None = None


def assert_nonvanishing(f, interval: tuple[float, float], samples: int, threshold: float = 1e-12) -> NonvanishingReport:
    """Sampled certificate that f has no zero on the interval.

    Fails when any sample magnitude drops to the threshold or the sign
    flips between adjacent samples (a root in between by continuity).
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    lo, hi = interval
    xs = np.linspace(lo, hi, samples)
    prev_sign = 0.0
    for x in xs:
        try:
            v = f(float(x))
        except DomainEvalError as exc:
            return NonvanishingReport(False, f"evaluation failed: {exc}", float(x))
        if abs(v) <= threshold:
            return NonvanishingReport(False, f"|f| = {abs(v):.3e} at sample", float(x))
        s = math.copysign(1.0, v)
        if prev_sign and s != prev_sign:
            return NonvanishingReport(False, "sign change between adjacent samples", float(x))
        prev_sign = s
    return NonvanishingReport(True)


def build_scalar_field(
    phi: ex.Expr,
    psi: ex.Expr,
    zeta: ex.Expr | None,
    interval: tuple[float, float],
) -> ScalarField1D:
    """Validate and assemble a field triple on a closed interval.

    Checks, on a 256-point grid: psi' = phi (central differences, relative
    1e-6), phi nonvanishing, psi strictly monotone, and zeta(psi(x)) = x to
    1e-9 when zeta is supplied.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise FieldValidationError(f"bad interval [{lo}, {hi}]")
    for name, e in (("phi", phi), ("psi", psi)) + ((("zeta", zeta),) if zeta is not None else ()):
        extra = ex.free_vars(e) - {"u"}
        if extra:
            raise FieldValidationError(f"{name} may only use the variable u, found {sorted(extra)}")

    fld = ScalarField1D(phi, psi, zeta, (lo, hi))

    report = assert_nonvanishing(fld.phi_fn, (lo, hi), _GRID)
    if not report.ok:
        raise FieldValidationError(f"phi must be nonvanishing on the interval: {report.reason} (u = {report.where})")

    # psi' = phi on interior points; the stencil must stay inside the
    # interval, where the expressions are guaranteed to be defined
    width = hi - lo
    xs = lo + width * (np.arange(_GRID) + 0.5) / _GRID
    for x in xs:
        x = float(x)
        h = min(_EPS3 * max(1.0, abs(x)), 0.49 * min(x - lo, hi - x) + 1e-300)
        if h <= 0.0:
            continue
        try:
            dpsi = (fld.psi_fn(x + h) - fld.psi_fn(x - h)) / (2.0 * h)
            phival = fld.phi_fn(x)
        except DomainEvalError as exc:
            raise FieldValidationError(f"evaluation failed during psi'=phi check at u={x}: {exc}") from None
        if abs(dpsi - phival) > 1e-6 * max(1.0, abs(phival)):
            raise FieldValidationError(
                f"psi is not a primitive of phi: psi'({x}) = {dpsi!r} but phi({x}) = {phival!r}"
            )

    grid = np.linspace(lo, hi, _GRID)
    psis = [fld.psi_fn(float(x)) for x in grid]
    diffs = np.diff(psis)
    if not (np.all(diffs > 0.0) or np.all(diffs < 0.0)):
        raise FieldValidationError("psi is not strictly monotone on the sampled grid")

    if fld.zeta_fn is not None:
        for x in grid:
            x = float(x)
            try:
                back = fld.zeta_fn(fld.psi_fn(x))
            except DomainEvalError as exc:
                raise FieldValidationError(f"zeta round-trip failed to evaluate at u={x}: {exc}") from None
            if abs(back - x) > 1e-9 * max(1.0, abs(x)):
                raise FieldValidationError(f"zeta(psi({x})) = {back!r}, not the identity")

    return fld


def psi_inverse(fld: ScalarField1D, target: float) -> float:
    """Solve psi(x) = target on the field's interval.

    Uses zeta when available (polished by the root-finder if its residual
    is above tolerance), otherwise a bisection-safeguarded secant search;
    monotonicity of psi guarantees the bracket.
    """
    lo, hi = fld.interval
    rlo, rhi = fld.psi_range()
    tol = 1e-12 * max(1.0, abs(target))
    if target < rlo - tol or target > rhi + tol:
        raise OutOfRangeError(f"target {target!r} outside psi range [{rlo!r}, {rhi!r}]")
    target = min(max(target, rlo), rhi)

    if fld.zeta_fn is not None:
        x = fld.zeta_fn(target)
        x = min(max(x, lo), hi)
        if abs(fld.psi_fn(x) - target) <= tol:
            return x
        # fall through and let the root-finder polish a sloppy zeta

    return _bracketed_solve(fld.psi_fn, lo, hi, target, tol)


def _bracketed_solve(psi, lo: float, hi: float, target: float, tol: float, max_iter: int = 80) -> float:
    a, b = lo, hi
    fa = psi(a) - target
    fb = psi(b) - target
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise OutOfRangeError(f"target {target!r} not bracketed by psi on [{lo}, {hi}]")
    x_prev, f_prev = a, fa
    x_cur, f_cur = b, fb
    for _ in range(max_iter):
        # secant proposal, bisection fallback when it leaves the bracket
        denom = f_cur - f_prev
        if denom != 0.0:
            x_new = x_cur - f_cur * (x_cur - x_prev) / denom
        else:
            x_new = 0.5 * (a + b)
        if not (min(a, b) < x_new < max(a, b)):
            x_new = 0.5 * (a + b)
        f_new = psi(x_new) - target
        if abs(f_new) <= tol:
            return x_new
        if math.copysign(1.0, f_new) == math.copysign(1.0, fa):
            a, fa = x_new, f_new
        else:
            b, fb = x_new, f_new
        x_prev, f_prev = x_cur, f_cur
        x_cur, f_cur = x_new, f_new
        if abs(b - a) <= _EPS * max(1.0, abs(a) + abs(b)):
            break
    x_best = min((a, b), key=lambda t: abs(psi(t) - target))
    if abs(psi(x_best) - target) <= max(tol, 4.0 * _EPS * max(1.0, abs(target))):
        return x_best
    raise OutOfRangeError(f"root-finder failed to reach tolerance for target {target!r}")


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned box with an optional nonvanishing predicate.

    A point belongs to the domain when it lies in the box (inclusive) and
    |predicate| exceeds 1e-12; the predicate expresses open conditions a
    box cannot, such as pairwise-distinct coordinates.
    """

    intervals: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    predicate: ex.Expr | None = None
    predicate_fn: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.intervals) != 3 or any(iv[0] >= iv[1] for iv in self.intervals):
            raise ValueError(f"need three nonempty intervals, got {self.intervals!r}")
        fn = ex.compile_expr(self.predicate, ("x1", "x2", "x3")) if self.predicate is not None else None
        object.__setattr__(self, "predicate_fn", fn)

    def contains(self, x, tol: float = 1e-12) -> bool:
        for v, (lo, hi) in zip(x, self.intervals):
            if not (lo <= v <= hi):
                return False
        if self.predicate_fn is not None:
            try:
                p = self.predicate_fn(float(x[0]), float(x[1]), float(x[2]))
            except DomainEvalError:
                return False
            if abs(p) <= tol:
                return False
        return True

    def point_for_index(self, seed: int, index: int) -> np.ndarray:
        us = unit_uniforms(seed, index, 3)
        return np.array([lo + (hi - lo) * t for (lo, hi), t in zip(self.intervals, us)])

    def sample(self, n: int, seed: int, max_draw_factor: int = 100) -> np.ndarray:
        """n admissible points, derived deterministically from (seed, index)."""
        from .errors import DomainSamplingError

        if n < 1:
            raise ValueError("need n >= 1 samples")
        accepted: list[np.ndarray] = []
        budget = max_draw_factor * n
        for index in range(budget):
            x = self.point_for_index(seed, index)
            if self.contains(x):
                accepted.append(x)
                if len(accepted) == n:
                    break
        if len(accepted) < n and len(accepted) * 10 < n:
            raise DomainSamplingError(
                f"only {len(accepted)} admissible points in {budget} draws; domain looks empty"
            )
        if not accepted:
            raise DomainSamplingError(f"no admissible points in {budget} draws")
        return np.array(accepted)
