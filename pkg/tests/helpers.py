"""Shared generators and finite-difference oracles for the test suite."""

from __future__ import annotations

import math
import random

from poisson3d import expr as ex

EPS3 = float.fromhex("0x1.0p-52") ** (1 / 3)  # cbrt machine epsilon


def central_diff(f, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


# ---------------------------------------------------------------------------
# Grammar-driven expression fuzzing (deterministic via random.Random)

_SMOOTH_FNS = ("exp", "ln", "sin", "cos", "sqrt")
_ALL_FNS = _SMOOTH_FNS + ("abs", "sign")


def gen_expr(rng: random.Random, depth: int, variables=("x1", "x2", "x3"), smooth_only=False):
    """Random expression tree of bounded depth over the given variables."""
    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return ex.Var(rng.choice(variables))
        if rng.random() < 0.3:
            return ex.Lit(float(rng.randint(0, 9)))
        return ex.Lit(round(rng.uniform(0.0, 8.0), 3))
    r = rng.random()
    if r < 0.55:
        op = rng.choice("+-*/")
        return ex.Bin(op, gen_expr(rng, depth - 1, variables, smooth_only),
                      gen_expr(rng, depth - 1, variables, smooth_only))
    if r < 0.70:
        # keep exponents small literals so values stay representable
        exponent = ex.Lit(float(rng.choice([2, 3, 2, 2, -1, -2, 0.5] if not smooth_only else [2, 3, 2, -1, -2])))
        return ex.Bin("^", gen_expr(rng, depth - 1, variables, smooth_only), exponent)
    if r < 0.80:
        return ex.Neg(gen_expr(rng, depth - 1, variables, smooth_only))
    fn = rng.choice(_SMOOTH_FNS if smooth_only else _ALL_FNS)
    return ex.Call(fn, gen_expr(rng, depth - 1, variables, smooth_only))


def gen_expr_source(rng: random.Random, depth: int = 6, variables=("x1", "x2", "x3")) -> str:
    return ex.to_source(gen_expr(rng, rng.randint(1, depth), variables))


# ---------------------------------------------------------------------------
# Derivative spot-check with an FD oracle that certifies its own validity.


def fd_derivative_if_trustworthy(f, x: float):
    """Central difference at x, or None where the stencil is unreliable.

    Two step sizes must agree closely; that rejects points near kinks,
    domain edges, or very high curvature without consulting the symbolic
    derivative under test.
    """
    h = EPS3 * max(1.0, abs(x)) * 8.0
    try:
        d1 = central_diff(f, x, h)
        d2 = central_diff(f, x, h / 2.0)
    except Exception:
        return None
    if not (math.isfinite(d1) and math.isfinite(d2)):
        return None
    if abs(d1 - d2) > 1e-7 * max(1.0, abs(d1)):
        return None
    if abs(d2) > 1e8:
        return None
    return d2
