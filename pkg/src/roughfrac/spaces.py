"""Norms and functionals on balls centered at a fixed point x0.

The central objects are per-radius profiles: the generalized local Morrey
quasinorm and the local Campanato norm are suprema over r > 0, discretized
here on log grids with their arg-sup and boundary-attainment flags kept
alongside the value.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (Ball, LogGrid, adaptive_polar, ball_volume,
                       sphere_rule, DEFAULT_ABS_TOL, DEFAULT_REL_TOL,
                       _collect_breakpoints)

_SUP_TIE_REL = 1e-12


def _spheres_of(f) -> tuple:
    return tuple(getattr(f, "breakpoint_spheres", ()))


def _planes_of(f) -> tuple:
    return tuple(getattr(f, "breakpoint_planes", ()))


def _center_power_of(f) -> float:
    return float(getattr(f, "center_power", 0.0))


@dataclass(frozen=True)
class NormProfile:
    """Values of a radius-indexed functional on a log grid."""

    x0: np.ndarray
    grid: LogGrid
    values: np.ndarray
    sup_value: float
    arg_sup: float
    sup_at_boundary: bool

    def to_json_dict(self) -> dict:
        return {
            "x0": [float(v) for v in np.atleast_1d(self.x0)],
            "r": [float(v) for v in self.grid.nodes],
            "value": [float(v) for v in self.values],
            "sup_value": float(self.sup_value),
            "arg_sup": float(self.arg_sup),
            "sup_at_boundary": bool(self.sup_at_boundary),
        }

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("r,value\n")
        for r, v in zip(self.grid.nodes, self.values):
            buf.write(f"{r!r},{v!r}\n")
        return buf.getvalue()


def _make_profile(x0, grid: LogGrid, values: np.ndarray) -> NormProfile:
    values = np.asarray(values, dtype=float)
    vmax = float(values.max()) if values.size else 0.0
    if vmax <= 0.0:
        idx = 0
    else:
        idx = int(np.argmax(values >= vmax * (1.0 - _SUP_TIE_REL)))
    return NormProfile(
        x0=np.atleast_1d(np.asarray(x0, dtype=float)),
        grid=grid, values=values, sup_value=vmax,
        arg_sup=float(grid.nodes[idx]),
        sup_at_boundary=bool(idx in (0, len(grid.nodes) - 1)),
    )


# --------------------------------------------------------------------------
# Ball integrals shared by the norms below
# --------------------------------------------------------------------------

def _annular_integrals(f_transform, f, ball_center: np.ndarray, radii,
                       power_extra: float = 0.0, *, rel_tol=DEFAULT_REL_TOL,
                       abs_tol=DEFAULT_ABS_TOL, order=12, angular_count=32,
                       max_rounds=18):
    """Integrals of f_transform(f(y)) over nested annuli around ball_center.

    radii must be increasing; returns one integral per annulus
    (0, r_0], (r_0, r_1], ...  A declared algebraic singularity of f at the
    origin is absorbed into the radial weight when the origin is the center.
    """
    center = np.atleast_1d(np.asarray(ball_center, dtype=float))
    n = center.size
    radii = np.asarray(radii, dtype=float)
    cpow = _center_power_of(f)
    power = n - 1.0
    divide_out = 0.0
    if cpow != 0.0 and np.all(center == 0.0):
        divide_out = power_extra
        power += divide_out

    def run(count):
        rule = sphere_rule(n, count)
        breaks = _collect_breakpoints(center, rule.nodes,
                                      _spheres_of(f), _planes_of(f))

        def eval_fn(rho, rays):
            pts = center[None, :] + rho[:, None] * rule.nodes[rays]
            vals = f_transform(np.asarray(f(pts), dtype=float))
            if divide_out != 0.0:
                vals = vals / rho**divide_out
            return vals

        out = np.empty(radii.size)
        prev = 0.0
        for k, r in enumerate(radii):
            segments = [[(prev, float(r))]] * len(rule)
            out[k], _ = adaptive_polar(eval_fn, rule.weights, segments, power,
                                       breakpoints=breaks, rel_tol=rel_tol,
                                       abs_tol=abs_tol, order=order,
                                       max_rounds=max_rounds)
            prev = float(r)
        return out

    if n == 1:
        return run(2)
    vals = run(angular_count)
    count = angular_count
    for _ in range(3):
        count *= 2
        new = run(count)
        drift = np.abs(new - vals)
        vals = new
        if float(drift.sum()) <= max(rel_tol * float(np.abs(vals).sum()), abs_tol):
            break
    return vals


def _ball_integral(f_transform, f, ball: Ball, power_extra=0.0, **opts) -> float:
    vals = _annular_integrals(f_transform, f, ball.center, [ball.radius],
                              power_extra, **opts)
    return float(vals[0])


def lp_norm_on_ball(f, p: float, ball: Ball, **opts) -> float:
    """(int_B |f|^p dy)^(1/p) by adaptive polar quadrature.

    Declared discontinuity spheres/planes of f become panel edges, so
    indicator-type functions are integrated to machine precision.
    """
    if p < 1:
        raise ValueError(f"Lebesgue exponent must satisfy p >= 1, got {p}")
    cpow = _center_power_of(f)
    val = _ball_integral(lambda v: np.abs(v)**p, f, ball,
                         power_extra=-cpow * p, **opts)
    return val ** (1.0 / p)


def lp_profile(f, p: float, x0, grid: LogGrid, **opts) -> np.ndarray:
    """L_p norms of f over the nested balls B(x0, r) for r in the grid.

    Computed once via annular panels and cumulative sums; equivalent to
    calling lp_norm_on_ball per radius but each point of f is used once.
    """
    return lp_norms_at(f, p, x0, grid.nodes, **opts)


def lp_norms_at(f, p: float, x0, radii, **opts) -> np.ndarray:
    """L_p norms of f over B(x0, r) at arbitrary positive radii."""
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii <= 0.0):
        raise ValueError("radii must be positive")
    order = np.argsort(radii, kind="stable")
    cpow = _center_power_of(f)
    ann = _annular_integrals(lambda v: np.abs(v)**p, f, x0, radii[order],
                             power_extra=-cpow * p, **opts)
    out = np.empty(radii.shape)
    out[order] = np.cumsum(ann)
    return out ** (1.0 / p)


def ball_mean(b, ball: Ball, **opts) -> float:
    """Average of b over the ball."""
    return _ball_integral(lambda v: v, b, ball, **opts) / ball.volume


def oscillation_norm(b, center_value: float, p: float, ball: Ball, **opts) -> float:
    """(int_B |b - center_value|^p dy)^(1/p)."""
    return _ball_integral(lambda v: np.abs(v - center_value)**p, b, ball,
                          **opts) ** (1.0 / p)


# --------------------------------------------------------------------------
# Campanato and Morrey functionals
# --------------------------------------------------------------------------

def campanato_functional(b, p: float, lam: float, ball: Ball, **opts) -> float:
    """Single-radius value (|B|^(-(1+lam*p)) int_B |b - b_B|^p)^(1/p)."""
    mean = ball_mean(b, ball, **opts)
    osc = oscillation_norm(b, mean, p, ball, **opts)
    return osc * ball.volume ** (-(1.0 + lam * p) / p)


def campanato_norm(b, p: float, lam: float, x0, grid: LogGrid, **opts) -> NormProfile:
    """Profile of the local Campanato functional; sup approximates the norm."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not 0.0 <= lam < 1.0 / x0.size:
        raise ValueError(f"lambda must lie in [0, 1/n), got {lam}")
    values = [campanato_functional(b, p, lam, Ball(x0, float(r)), **opts)
              for r in grid.nodes]
    return _make_profile(x0, grid, values)


def morrey_functional(f, p: float, phi, x0, r: float, **opts) -> float:
    """phi(x0,r)^(-1) |B(x0,r)|^(-1/p) ||f||_{L_p(B(x0,r))}."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    ball = Ball(x0, r)
    w = float(phi(x0, r))
    if w <= 0.0:
        raise ValueError(f"weight must be positive at r={r}, got {w}")
    return lp_norm_on_ball(f, p, ball, **opts) / (w * ball.volume ** (1.0 / p))


def local_morrey_norm(f, p: float, phi, x0, grid: LogGrid, **opts) -> NormProfile:
    """Profile of the generalized local Morrey functional over the grid."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = x0.size
    norms = lp_profile(f, p, x0, grid, **opts)
    weights = np.asarray(phi(x0, grid.nodes), dtype=float)
    if np.any(weights <= 0.0):
        raise ValueError("weight must be positive on the whole grid")
    volumes = np.array([ball_volume(n, float(r)) for r in grid.nodes])
    values = norms / (weights * volumes ** (1.0 / p))
    return _make_profile(x0, grid, values)


# --------------------------------------------------------------------------
# Vanishing trend and tail infima
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VanishingTrend:
    is_vanishing: bool
    tail_max: float
    smallest_value: float
    threshold: float
    notes: tuple


def vanishing_trend(profile: NormProfile, threshold: float = 1e-2,
                    decades: float = 2.0, slack: float = 0.10) -> VanishingTrend:
    """Decide whether the profile tends to zero at small radii.

    True iff over the bottom `decades` decades the values are non-increasing
    toward zero within `slack`, and the smallest-node value is below
    `threshold` times the profile supremum.
    """
    nodes = profile.grid.nodes
    if profile.grid.r_min >= 1.0 or math.log10(1.0 / profile.grid.r_min) < decades:
        raise ValueError(f"profile must cover at least {decades} decades below r = 1")
    window = nodes <= profile.grid.r_min * 10.0**decades * (1 + 1e-12)
    vals = profile.values[window]
    sup = profile.sup_value
    if sup <= 0.0:
        return VanishingTrend(True, 0.0, 0.0, threshold, ("zero profile",))
    monotone = bool(np.all(vals[:-1] <= vals[1:] * (1.0 + slack)))
    small_enough = vals[0] < threshold * sup
    notes = []
    if not monotone:
        notes.append("profile not non-increasing toward zero in the window")
    if not small_enough:
        notes.append(f"smallest value {vals[0]:.3e} >= {threshold:g} * sup {sup:.3e}")
    return VanishingTrend(monotone and small_enough, float(vals.max()),
                          float(vals[0]), threshold, tuple(notes))


def _tail_values(g, t: float, grid: LogGrid) -> np.ndarray:
    tail = grid.nodes[grid.nodes > t]
    if tail.size == 0:
        raise ValueError(f"no grid nodes beyond t = {t}")
    try:
        vals = np.asarray(g(tail), dtype=float)
        if vals.shape != tail.shape:
            raise TypeError
    except TypeError:
        vals = np.array([float(g(float(tau))) for tau in tail])
    return vals


def ess_inf_on_tail(g, t: float, grid: LogGrid) -> float:
    """Discretized essential infimum of g over the open tail (t, infinity):
    the minimum over grid nodes strictly greater than t."""
    return float(_tail_values(g, t, grid).min())


def max_on_tail(g, t: float, grid: LogGrid) -> float:
    return float(_tail_values(g, t, grid).max())
