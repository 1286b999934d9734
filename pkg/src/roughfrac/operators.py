"""Fractional integral and maximal operators with rough variable kernels,
and their multilinear commutators with Campanato symbols.

All operators integrate over the (compact) support ball of the input.  When
the evaluation point sits inside the support, the kernel singularity is
absorbed by polar quadrature around the point; outside, the integrand is
smooth and a ball-centered rule is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import RoughKernel, Symbol, TestFunction
from .geometry import (Ball, LogGrid, adaptive_polar, ball_volume,
                       default_grid, sphere_rule, unit_ball_volume,
                       _collect_breakpoints, _ray_segments_into_ball,
                       DEFAULT_ABS_TOL, DEFAULT_REL_TOL)


@dataclass
class OperatorConfig:
    """Kernel, order alpha, quadrature knobs, and the t-grid for suprema."""

    kernel: RoughKernel
    alpha: float
    sup_grid: LogGrid = field(default_factory=default_grid)
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    radial_order: int = 12
    angular_count: int = 32
    max_rounds: int = 18

    def __post_init__(self):
        n = self.kernel.dimension
        if not 0.0 < self.alpha < n:
            raise ValueError(f"alpha must lie in (0, {n}), got {self.alpha}")

    @property
    def dimension(self) -> int:
        return self.kernel.dimension


def _quad_opts(cfg: OperatorConfig) -> dict:
    return dict(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                order=cfg.radial_order, max_rounds=cfg.max_rounds)


def _hints(f: TestFunction, symbols) -> tuple:
    spheres = tuple(f.breakpoint_spheres)
    planes = tuple(f.breakpoint_planes)
    for b in symbols:
        spheres += tuple(b.breakpoint_spheres)
        planes += tuple(b.breakpoint_planes)
    return spheres, planes


def _angular_loop(cfg, n, run):
    """Double the angular count until the result stabilizes (n=2 only)."""
    if n == 1:
        value, _ = run(2)
        return value
    count = cfg.angular_count
    value, err = run(count)
    for _ in range(4):
        count *= 2
        new_value, err = run(count)
        drift = abs(new_value - value)
        value = new_value
        if drift + err <= max(cfg.rel_tol * abs(value), cfg.abs_tol):
            break
    return value


def _rough_potential(cfg: OperatorConfig, f: TestFunction, x: np.ndarray,
                     symbols=(), *, absolute: bool = False) -> float:
    """int Omega(x, x-y) |x-y|**(alpha-n) prod_i [b_i(x)-b_i(y)] f(y) dy.

    With absolute=True every factor enters with absolute values (the
    pointwise majorant used by the maximal-operator comparisons).
    """
    n = cfg.dimension
    x = np.atleast_1d(np.asarray(x, dtype=float))
    supp = f.support_ball
    spheres, planes = _hints(f, symbols)
    bx = [float(b(x[None, :])[0]) for b in symbols]
    inside = float(np.linalg.norm(x)) <= supp.radius * (1.0 + 1e-12)

    if inside:
        # Polar around x: y = x + rho*theta, so x - y points along -theta
        # and the kernel factor is constant on each ray.
        power = cfg.alpha - 1.0
        fold = 0.0
        if f.center_power != 0.0 and np.all(x == 0.0):
            fold = f.center_power
            power -= fold

        def run(count):
            rule = sphere_rule(n, count)
            segments = _ray_segments_into_ball(x, rule.nodes, supp)
            breaks = _collect_breakpoints(x, rule.nodes, spheres, planes)
            kvals = cfg.kernel(x, -rule.nodes)
            if absolute:
                kvals = np.abs(kvals)

            def eval_fn(rho, rays):
                pts = x[None, :] + rho[:, None] * rule.nodes[rays]
                vals = f(pts)
                if fold != 0.0:
                    vals = vals * rho**fold
                if absolute:
                    vals = np.abs(vals)
                for bi, bxi in zip(symbols, bx):
                    factor = bxi - bi(pts)
                    vals = vals * (np.abs(factor) if absolute else factor)
                return kvals[rays] * vals

            return adaptive_polar(eval_fn, rule.weights, segments, power,
                                  breakpoints=breaks, **_quad_opts(cfg))

        return _angular_loop(cfg, n, run)

    # x outside the support: smooth integrand, polar around the support center.
    def h(pts):
        diffs = x[None, :] - pts
        dist = np.linalg.norm(diffs, axis=-1)
        kvals = cfg.kernel(x, diffs / dist[:, None])
        if absolute:
            kvals = np.abs(kvals)
        vals = f(pts)
        if absolute:
            vals = np.abs(vals)
        for bi, bxi in zip(symbols, bx):
            factor = bxi - bi(pts)
            vals = vals * (np.abs(factor) if absolute else factor)
        return kvals * vals * dist**(cfg.alpha - n)

    def run(count):
        rule = sphere_rule(n, count)
        segments = [[(0.0, supp.radius)]] * len(rule)
        breaks = _collect_breakpoints(supp.center, rule.nodes, spheres, planes)

        def eval_fn(rho, rays):
            pts = supp.center[None, :] + rho[:, None] * rule.nodes[rays]
            vals = h(pts)
            if f.center_power != 0.0:
                vals = vals * rho**f.center_power
            return vals

        power = n - 1.0 - f.center_power
        return adaptive_polar(eval_fn, rule.weights, segments, power,
                              breakpoints=breaks, **_quad_opts(cfg))

    return _angular_loop(cfg, n, run)


def _ball_average_integral(cfg: OperatorConfig, f: TestFunction,
                           x: np.ndarray, t: float, symbols=()) -> float:
    """int_{B(x,t)} |Omega(x, x-y)| prod_i |b_i(x)-b_i(y)| |f(y)| dy."""
    n = cfg.dimension
    x = np.atleast_1d(np.asarray(x, dtype=float))
    supp = f.support_ball
    spheres, planes = _hints(f, symbols)
    bx = [float(b(x[None, :])[0]) for b in symbols]

    def run(count):
        rule = sphere_rule(n, count)
        supp_segments = _ray_segments_into_ball(x, rule.nodes, supp)
        segments = []
        for seg in supp_segments:
            if not seg:
                segments.append([])
                continue
            lo, hi = seg[0]
            hi = min(hi, t)
            segments.append([(lo, hi)] if hi > lo else [])
        breaks = _collect_breakpoints(x, rule.nodes, spheres, planes)
        kvals = np.abs(cfg.kernel(x, -rule.nodes))

        def eval_fn(rho, rays):
            pts = x[None, :] + rho[:, None] * rule.nodes[rays]
            vals = np.abs(f(pts))
            for bi, bxi in zip(symbols, bx):
                vals = vals * np.abs(bxi - bi(pts))
            return kvals[rays] * vals

        return adaptive_polar(eval_fn, rule.weights, segments, n - 1.0,
                              breakpoints=breaks, **_quad_opts(cfg))

    return _angular_loop(cfg, n, run)


def _sup_nodes(cfg: OperatorConfig, f: TestFunction, x: np.ndarray,
               grid: LogGrid) -> np.ndarray:
    """Grid for the sup over t, augmented with the radii where the averaged
    integral saturates or kinks (support entry/exit seen from x)."""
    dist = float(np.linalg.norm(np.atleast_1d(x)))
    extra = [dist + f.support_radius]
    if f.support_radius > dist:
        extra.append(f.support_radius - dist)
    nodes = np.unique(np.concatenate([grid.nodes, np.asarray(extra)]))
    return nodes[nodes > 0.0]


def _maximal(cfg: OperatorConfig, f: TestFunction, x, symbols=(),
             grid: LogGrid | None = None) -> float:
    n = cfg.dimension
    x = np.atleast_1d(np.asarray(x, dtype=float))
    grid = grid or cfg.sup_grid
    best = 0.0
    for t in _sup_nodes(cfg, f, x, grid):
        integral = _ball_average_integral(cfg, f, x, float(t), symbols)
        scale = ball_volume(n, float(t)) ** (cfg.alpha / n - 1.0)
        best = max(best, scale * integral)
    return best


def fractional_integral(cfg: OperatorConfig, f: TestFunction, x) -> float:
    """T f(x) = int Omega(x, x-y) |x-y|**(alpha-n) f(y) dy."""
    return _rough_potential(cfg, f, x)


def majorant_potential(cfg: OperatorConfig, f: TestFunction, x) -> float:
    """The absolute-value majorant int |Omega(x,x-y)| |x-y|**(alpha-n) |f(y)| dy.

    Dominates the fractional maximal operator:
    M f(x) <= v_n**(-(n-alpha)/n) * (this value).
    """
    return _rough_potential(cfg, f, x, absolute=True)


def maximal_domination_constant(n: int, alpha: float) -> float:
    """v_n**(-(n-alpha)/n), the factor in the maximal-vs-majorant comparison."""
    return unit_ball_volume(n) ** (-(n - alpha) / n)


def fractional_maximal(cfg: OperatorConfig, f: TestFunction, x, *,
                       grid: LogGrid | None = None,
                       diagnostics: bool = False):
    """sup over the t-grid of |B(x,t)|**(alpha/n - 1) int_{B(x,t)} |Omega||f|.

    The reported value is a certified lower bound for the true supremum;
    with diagnostics=True also returns the relative change under grid
    doubling.
    """
    grid = grid or cfg.sup_grid
    value = _maximal(cfg, f, x, (), grid)
    if not diagnostics:
        return value
    refined = _maximal(cfg, f, x, (), grid.refined())
    drift = abs(refined - value) / max(abs(refined), 1e-300)
    return max(value, refined), drift


def multilinear_commutator(cfg: OperatorConfig, symbols, f: TestFunction, x) -> float:
    """int prod_i [b_i(x) - b_i(y)] Omega(x,x-y) |x-y|**(alpha-n) f(y) dy."""
    return _rough_potential(cfg, f, x, tuple(symbols))


def maximal_commutator(cfg: OperatorConfig, symbols, f: TestFunction, x, *,
                       grid: LogGrid | None = None,
                       diagnostics: bool = False):
    """sup over t of |B(x,t)|**(alpha/n-1) int_{B(x,t)} prod|b_i(x)-b_i(y)| |Omega||f|.

    Absolute values are applied to every commutator factor, matching the
    single-symbol specialization.
    """
    symbols = tuple(symbols)
    grid = grid or cfg.sup_grid
    value = _maximal(cfg, f, x, symbols, grid)
    if not diagnostics:
        return value
    refined = _maximal(cfg, f, x, symbols, grid.refined())
    drift = abs(refined - value) / max(abs(refined), 1e-300)
    return max(value, refined), drift


# --------------------------------------------------------------------------
# Operator outputs as evaluable fields
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorField:
    """Pointwise operator output wrapped for the norm machinery.

    Kinks of the output sit on the discontinuity loci of the input, so the
    input's breakpoint metadata is forwarded for panel alignment.
    """

    cfg: OperatorConfig
    f: TestFunction
    symbols: tuple = ()
    absolute: bool = False
    label: str = ""

    @property
    def breakpoint_spheres(self) -> tuple:
        return _hints(self.f, self.symbols)[0]

    @property
    def breakpoint_planes(self) -> tuple:
        return _hints(self.f, self.symbols)[1]

    @property
    def center_power(self) -> float:
        return 0.0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.array([
            _rough_potential(self.cfg, self.f, p, self.symbols,
                             absolute=self.absolute)
            for p in pts
        ])


def sample_lattice(f: TestFunction, x0, count: int = 21, factor: float = 4.0):
    """Centered lattice of evaluation points inside B(x0, factor*support)."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = x0.size
    reach = factor * f.support_radius
    if n == 1:
        return [x0 + np.array([v]) for v in np.linspace(-reach, reach, count)]
    side = max(2, int(math.isqrt(count)))
    axis = np.linspace(-reach, reach, side)
    return [x0 + np.array([a, b]) for a in axis for b in axis]
