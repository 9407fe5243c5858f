"""Closed-form safety probabilities for three monotonicity-violating setups.

Each evaluator works the two-branch recursion (or its closed form) out
directly on the concrete system, independent of the automaton pipeline, so
these values double as end-to-end oracles for the model builders and the
exact checker.  In all three setups the intuitively safer start (farther,
slower, nearer the middle) has the *lower* safety probability.
"""
from __future__ import annotations

import math
from typing import Callable

from ..pa import PA
from ..pmc import SafetyProperty
from .aebs import AebsParams, BrakingRule, DetectionModel, build_aebs_model
from .tanks import ErrorModel, TankParams, build_tank_model


def _default_ramp(d: float) -> float:
    return 1.0 - math.ceil(d) / 20.0


def _braking_recursion(d: float, v: float, power_of: Callable[[float], float],
                       pr_det: Callable[[float], float],
                       memo: dict | None = None) -> float:
    """No-collision probability from (d, v) with single-reading detection.

    The state is already lost once the gap is closed (d <= 0) and safe for
    good once stopped (v = 0); otherwise one step resolves the detection,
    brakes accordingly, and recurses.
    """
    if memo is None:
        memo = {}
    key = (d, v)
    if key in memo:
        return memo[key]
    if d <= 0.0:
        out = 0.0
    elif v <= 0.0:
        out = 1.0
    else:
        p = min(1.0, max(0.0, pr_det(d)))
        braked = _braking_recursion(d - v, max(0.0, v - power_of(d)), power_of, pr_det, memo)
        coasting = _braking_recursion(d - v, v, power_of, pr_det, memo)
        out = p * braked + (1.0 - p) * coasting
    memo[key] = out
    return out


def counterexample_distance(pr_det: Callable[[float], float] | None = None
                            ) -> tuple[float, float]:
    """Safety from (d=14, v=11) vs (d=13, v=11) under a detection ramp.

    Single braking power 10, time step 1.  With the default ramp
    1 - ceil(d)/20 the closer start is strictly safer: (0.2955, 0.315).
    """
    ramp = pr_det or _default_ramp
    far = _braking_recursion(14.0, 11.0, lambda d: 10.0, ramp)
    near = _braking_recursion(13.0, 11.0, lambda d: 10.0, ramp)
    return far, near


def counterexample_speed(p: float) -> tuple[float, float]:
    """Safety from (d=20, v=8) vs (d=20, v=9) under constant detection ``p``.

    Braking power is 10 within 11 m and 3 beyond, so the faster start
    reaches the strong-braking zone and wins: the slower start evaluates to
    p^2 (1 + 2p - 3p^2 + p^3) against p for the faster one.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("detection probability must lie strictly between 0 and 1")
    slower = p * p * (1.0 + 2.0 * p - 3.0 * p * p + p ** 3)
    faster = p
    return slower, faster


def counterexample_tank() -> tuple[float, float]:
    """Safety from w=10 vs w=40 in a 100-capacity tank over 4 steps.

    Perception is purely spurious (empty with 0.4, full with 0.6), inflow
    40 against outflow 3.  From 10 the tank survives unless it never fills
    (underflow) or fills three-plus times (overflow); from 40 two fills
    already overflow, so the middle start is worse: (0.6912, 0.4752).
    """
    def binom_tail(n: int, p: float, k_min: int) -> float:
        return sum(math.comb(n, k) * p ** k * (1.0 - p) ** (n - k)
                   for k in range(k_min, n + 1))

    p_fill = 0.4
    low = 1.0 - (1.0 - p_fill) ** 4 - binom_tail(4, p_fill, 3)
    mid = 1.0 - binom_tail(4, p_fill, 2)
    return low, mid


def _ce_aebs_params(detection: DetectionModel, braking: BrakingRule) -> AebsParams:
    return AebsParams(tau=1.0, b1=3.0, b2=10.0, min_gap=0.0, history=1,
                      filter_window=1, detection=detection, braking=braking)


def ce1_model(d0: float = 14.0, v0: float = 11.0) -> tuple[PA, SafetyProperty]:
    """Exact-state automaton of the distance setup, for pipeline cross-checks."""
    params = _ce_aebs_params(
        DetectionModel(kind="ceil_fraction", denominator=20.0),
        BrakingRule(kind="constant", default_power=10.0))
    return build_aebs_model(params, grid=None, initial=(d0, v0))


def ce2_model(v0: float = 9.0, p: float = 0.5, d0: float = 20.0) -> tuple[PA, SafetyProperty]:
    """Exact-state automaton of the speed setup."""
    params = _ce_aebs_params(
        DetectionModel(kind="constant", value=p),
        BrakingRule(kind="distance_steps", steps=((11.0, 10.0),), default_power=3.0))
    return build_aebs_model(params, grid=None, initial=(d0, v0))


def ce3_model(w0: float = 10.0) -> tuple[PA, SafetyProperty]:
    """Exact-state automaton of the tank setup."""
    params = TankParams(
        tanks=1, capacity=100.0, outflow=3.0, inflow=40.0,
        low_threshold=20.0, high_threshold=80.0, horizon=4,
        errors=ErrorModel(offsets=(), p_empty=0.4, p_full=0.6))
    return build_tank_model(params, grid=None, initial=(w0,))
