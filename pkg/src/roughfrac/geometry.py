"""Balls, log grids, sphere rules, and adaptive polar quadrature.

Every integral in this package is reduced to polar coordinates around a
chosen origin: radial panels carry an algebraic weight rho**power (handled
by Gauss-Jacobi nodes on panels touching zero, folded in elsewhere), and
the angular factor is a rule on the unit sphere.  Weakly singular kernels
|x - y|**(alpha - n) with 0 < alpha < n become the integrable radial
weight rho**(alpha - 1) after the polar change of variables, so no
exclusion shell or cutoff is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

SUPPORTED_DIMENSIONS = (1, 2)

DEFAULT_RMIN = 2.0 ** -8
DEFAULT_RMAX = 2.0 ** 8
DEFAULT_GRID_COUNT = 33

DEFAULT_REL_TOL = 1e-6
DEFAULT_ABS_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Raised when adaptive refinement exhausts its budget.

    Carries the best value and the achieved error estimate so callers can
    decide whether to accept the result anyway.
    """

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(f"{message} (value={value!r}, error_estimate={error_estimate!r})")
        self.value = value
        self.error_estimate = error_estimate


def _check_dimension(n: int) -> None:
    if n not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"unsupported dimension {n}; expected one of {SUPPORTED_DIMENSIONS}")


def ball_volume(n: int, r: float) -> float:
    """Lebesgue measure of a ball of radius r: v_n * r**n (v_1 = 2, v_2 = pi)."""
    _check_dimension(n)
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    return unit_ball_volume(n) * r**n


def unit_ball_volume(n: int) -> float:
    _check_dimension(n)
    return 2.0 if n == 1 else math.pi


def unit_sphere_measure(n: int) -> float:
    """Total measure of S^(n-1): 2 for n=1 (counting measure), 2*pi for n=2."""
    _check_dimension(n)
    return 2.0 if n == 1 else 2.0 * math.pi


@dataclass(frozen=True)
class Ball:
    """Open ball B(center, radius) in R^n."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        _check_dimension(center.size)
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", center)

    @property
    def dimension(self) -> int:
        return self.center.size

    @property
    def volume(self) -> float:
        return ball_volume(self.dimension, self.radius)


@dataclass(frozen=True)
class LogGrid:
    """Geometrically spaced radii on [r_min, r_max]."""

    r_min: float
    r_max: float
    count: int
    nodes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.count

    def decades(self) -> float:
        return math.log10(self.r_max / self.r_min)

    def refined(self) -> "LogGrid":
        """Same span with doubled node density."""
        return log_grid(self.r_min, self.r_max, 2 * self.count - 1)


def log_grid(r_min: float, r_max: float, count: int) -> LogGrid:
    if not (0 < r_min < r_max):
        raise ValueError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    if count < 2:
        raise ValueError(f"need at least 2 nodes, got {count}")
    nodes = np.geomspace(r_min, r_max, count)
    nodes[0], nodes[-1] = r_min, r_max
    return LogGrid(r_min, r_max, count, nodes)


def default_grid() -> LogGrid:
    return log_grid(DEFAULT_RMIN, DEFAULT_RMAX, DEFAULT_GRID_COUNT)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes (unit vectors) and weights on S^(n-1).

    Weights sum to the total sphere measure.  For n=2 the nodes sit at the
    midpoints of equal arcs, which keeps them off the coordinate axes where
    the catalog's discontinuous kernels jump.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.weights.size

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def sphere_rule(n: int, count: int = 64) -> SphereRule:
    """Rule on S^(n-1): the two points {-1,+1} for n=1, equal arcs for n=2.

    The n=2 rule integrates trigonometric polynomials of degree < count
    exactly.  `count` is ignored for n=1.
    """
    _check_dimension(n)
    if n == 1:
        nodes = np.array([[-1.0], [1.0]])
        weights = np.array([1.0, 1.0])
        return SphereRule(1, nodes, weights)
    if count < 2:
        raise ValueError(f"need at least 2 angular nodes, got {count}")
    angles = (np.arange(count) + 0.5) * (2.0 * math.pi / count)
    nodes = np.column_stack([np.cos(angles), np.sin(angles)])
    weights = np.full(count, 2.0 * math.pi / count)
    return SphereRule(2, nodes, weights)


# --------------------------------------------------------------------------
# Gauss rule caches
# --------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _legendre_rule(k: int):
    x, w = roots_legendre(k)
    return x, w


@lru_cache(maxsize=256)
def _jacobi_rule(k: int, power: float):
    # weight (1+x)^power on [-1, 1]
    if power == 0.0:
        return _legendre_rule(k)
    x, w = roots_jacobi(k, 0.0, power)
    return x, w


# --------------------------------------------------------------------------
# Ray geometry
# --------------------------------------------------------------------------

def ray_sphere_crossings(origin: np.ndarray, directions: np.ndarray,
                         center: np.ndarray, radius: float) -> np.ndarray:
    """Parameters rho where origin + rho*theta meets the sphere |y-center|=radius.

    Returns an (M, 2) array [rho_lo, rho_hi] per direction; NaN where the ray
    line misses the sphere.  Roots may be negative (behind the origin).
    """
    v = center - origin
    b = directions @ v                       # (M,)
    disc = b * b - (v @ v - radius * radius)
    out = np.full((directions.shape[0], 2), np.nan)
    hit = disc >= 0.0
    sq = np.sqrt(np.maximum(disc[hit], 0.0))
    out[hit, 0] = b[hit] - sq
    out[hit, 1] = b[hit] + sq
    return out


def _ray_plane_crossings(origin: np.ndarray, directions: np.ndarray,
                         normal: np.ndarray, offset: float) -> np.ndarray:
    """Parameter rho where origin + rho*theta meets {y . normal = offset}."""
    denom = directions @ normal
    num = offset - origin @ normal
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = num / denom
    rho[np.abs(denom) < 1e-300] = np.nan
    return rho


# --------------------------------------------------------------------------
# Adaptive radial panel engine
# --------------------------------------------------------------------------

_MAX_PANEL_RATIO = 8.0        # pre-split panels wider than this (geometric)
_SPLIT_WIDE_GEOMETRIC = 16.0  # bisect geometrically above this ratio


def _initial_panels(ray: int, lo: float, hi: float, breaks) -> list:
    """Panel list [(ray, a, b)] for one segment, split at breakpoints and
    laddered geometrically so that no panel away from zero spans more than
    _MAX_PANEL_RATIO in relative width."""
    edges = [lo]
    for b in sorted(breaks):
        if edges[-1] * (1 + 1e-14) < b < hi * (1 - 1e-14):
            edges.append(b)
    edges.append(hi)
    panels = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        if a == 0.0 or b / max(a, 1e-300) <= _MAX_PANEL_RATIO:
            panels.append((ray, a, b))
        else:
            m = int(math.ceil(math.log(b / a) / math.log(_MAX_PANEL_RATIO)))
            cuts = a * (b / a) ** (np.arange(m + 1) / m)
            cuts[0], cuts[-1] = a, b
            panels.extend((ray, float(u), float(v)) for u, v in zip(cuts[:-1], cuts[1:]))
    return panels


def _panel_nodes(panels, power: float, order: int):
    """Nodes, weights and reduceat offsets for a panel list.

    Panels starting at rho=0 use Gauss-Jacobi with weight rho**power; the
    others use Gauss-Legendre with rho**power folded into the weights.
    """
    rhos, wts, rays, offsets = [], [], [], [0]
    xl, wl = _legendre_rule(order)
    xj, wj = _jacobi_rule(order, power)
    for ray, a, b in panels:
        if a == 0.0:
            rho = b * (1.0 + xj) / 2.0
            w = (b / 2.0) ** (power + 1.0) * wj
        else:
            rho = (a + b) / 2.0 + (b - a) / 2.0 * xl
            w = (b - a) / 2.0 * wl * rho**power
        rhos.append(rho)
        wts.append(w)
        rays.append(np.full(rho.size, ray, dtype=np.intp))
        offsets.append(offsets[-1] + rho.size)
    return (np.concatenate(rhos), np.concatenate(wts),
            np.concatenate(rays), np.array(offsets[:-1]))


def _split_panel(panel):
    ray, a, b = panel
    if a > 0.0 and b / a > _SPLIT_WIDE_GEOMETRIC:
        mid = math.sqrt(a * b)
    else:
        mid = 0.5 * (a + b)
    return [(ray, a, mid), (ray, mid, b)]


def adaptive_polar(eval_fn, ray_weights: np.ndarray, ray_segments,
                   power: float, *, breakpoints=None,
                   rel_tol: float = DEFAULT_REL_TOL,
                   abs_tol: float = DEFAULT_ABS_TOL,
                   order: int = 12, max_rounds: int = 18,
                   max_panels: int = 20000,
                   raise_on_failure: bool = True):
    """Integrate sum_i w_i * int rho**power * g(rho, ray=i) drho adaptively.

    eval_fn(rho, ray_idx) evaluates the radial integrand (without the
    rho**power weight) at a batch of radii belonging to the given rays.
    ray_segments[i] is a list of (lo, hi) intervals for ray i; breakpoints[i]
    lists known non-smooth radii.  Returns (value, error_estimate).

    Per-panel errors come from embedded Gauss pairs (order vs 2*order);
    panels whose error exceeds its share of the budget are bisected, with
    geometric bisection of panels spanning many scales.  For integrands
    with sign cancellation the relative tolerance is measured against the
    integral of |integrand| (the achievable scale), not the cancelled value.
    """
    panels = []
    for ray, segs in enumerate(ray_segments):
        brk = breakpoints[ray] if breakpoints is not None else ()
        for lo, hi in segs:
            if hi > lo:
                panels.extend(_initial_panels(ray, lo, hi, brk))
    if not panels:
        return 0.0, 0.0

    value = 0.0
    err = math.inf
    for _ in range(max_rounds):
        panels.sort(key=lambda p: (p[0], p[1]))
        rho, w, rays, offs = _panel_nodes(panels, power, order)
        coarse = np.add.reduceat(w * np.asarray(eval_fn(rho, rays), dtype=float), offs)
        rho, w, rays, offs = _panel_nodes(panels, power, 2 * order)
        weighted = w * np.asarray(eval_fn(rho, rays), dtype=float)
        fine = np.add.reduceat(weighted, offs)
        mass = np.add.reduceat(np.abs(weighted), offs)
        wr = ray_weights[np.fromiter((p[0] for p in panels), dtype=np.intp)]
        perr = np.abs(fine - coarse) * wr
        value = float(np.dot(wr, fine))
        scale = max(abs(value), float(np.dot(wr, mass)))
        err = float(perr.sum())
        budget = max(rel_tol * scale, abs_tol)
        if err <= budget:
            return value, err
        if len(panels) >= max_panels:
            break
        share = budget / (2.0 * len(panels))
        split_idx = np.nonzero(perr > share)[0]
        if split_idx.size == 0:
            split_idx = np.array([int(np.argmax(perr))])
        keep = [p for i, p in enumerate(panels) if i not in set(split_idx.tolist())]
        for i in split_idx:
            keep.extend(_split_panel(panels[i]))
        panels = keep

    if raise_on_failure:
        raise QuadratureError("adaptive radial quadrature did not converge", value, err)
    return value, err


# --------------------------------------------------------------------------
# Singular and regular ball integrals
# --------------------------------------------------------------------------

@dataclass
class SingularQuadrature:
    """Polar quadrature for int_B g(y) |y - singularity|**(-exponent) dy.

    exponent = n - alpha with alpha in (0, n); the radial integrand after
    the polar change of variables is rho**(alpha-1) * g, finite at zero.
    The singularity must lie in the closed ball.
    """

    ball: Ball
    singularity: np.ndarray
    exponent: float
    radial_order: int = 12
    angular_count: int = 32
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    max_rounds: int = 18

    def __post_init__(self):
        self.singularity = np.atleast_1d(np.asarray(self.singularity, dtype=float))
        n = self.ball.dimension
        if self.singularity.size != n:
            raise ValueError("singularity dimension does not match ball")
        if not 0.0 < self.exponent < n:
            raise ValueError(f"exponent must lie in (0, n), got {self.exponent}")
        gap = np.linalg.norm(self.singularity - self.ball.center) - self.ball.radius
        if gap > 1e-12 * self.ball.radius:
            raise ValueError("singularity lies outside the closed ball")

    @property
    def alpha(self) -> float:
        return self.ball.dimension - self.exponent


def _ray_segments_into_ball(origin, directions, ball):
    """Per-ray [max(rho_lo,0), rho_hi] segments of rays inside the ball."""
    cross = ray_sphere_crossings(origin, directions, ball.center, ball.radius)
    segments = []
    for lo, hi in cross:
        if not np.isfinite(hi) or hi <= 0.0:
            segments.append([])
        else:
            segments.append([(max(float(lo), 0.0), float(hi))])
    return segments


def _collect_breakpoints(origin, directions, spheres=(), planes=()):
    """Sorted interior breakpoint radii per ray from crossing geometry."""
    m = directions.shape[0]
    breaks = [[] for _ in range(m)]
    for center, radius in spheres:
        center = np.atleast_1d(np.asarray(center, dtype=float))
        cross = ray_sphere_crossings(origin, directions, center, radius)
        for i in range(m):
            for rho in cross[i]:
                if np.isfinite(rho) and rho > 0.0:
                    breaks[i].append(float(rho))
    for normal, offset in planes:
        normal = np.atleast_1d(np.asarray(normal, dtype=float))
        rho = _ray_plane_crossings(origin, directions, normal, offset)
        for i in range(m):
            if np.isfinite(rho[i]) and rho[i] > 0.0:
                breaks[i].append(float(rho[i]))
    return [sorted(b) for b in breaks]


def _polar_integral(origin, ball, power, g, *, spheres, planes, order,
                    angular_count, rel_tol, abs_tol, max_rounds,
                    raise_on_failure=True):
    """Adaptive polar integral around `origin` of g(y)*rho**power over `ball`.

    For n=2 the angular rule is doubled until the value stabilizes; n=1 has
    exactly two rays and no angular error.
    """
    n = ball.dimension

    def run(count):
        rule = sphere_rule(n, count)
        segments = _ray_segments_into_ball(origin, rule.nodes, ball)
        breaks = _collect_breakpoints(origin, rule.nodes, spheres, planes)

        def eval_fn(rho, rays):
            pts = origin[None, :] + rho[:, None] * rule.nodes[rays]
            return g(pts, rays, rule.nodes)

        return adaptive_polar(eval_fn, rule.weights, segments, power,
                              breakpoints=breaks, rel_tol=rel_tol,
                              abs_tol=abs_tol, order=order,
                              max_rounds=max_rounds,
                              raise_on_failure=raise_on_failure)

    if n == 1:
        return run(2)

    value, err = run(angular_count)
    count = angular_count
    for _ in range(4):
        count *= 2
        new_value, new_err = run(count)
        ang_err = abs(new_value - value)
        value, err = new_value, new_err
        if ang_err + err <= max(rel_tol * abs(value), abs_tol):
            return value, err + ang_err
    if raise_on_failure:
        raise QuadratureError("angular refinement did not converge", value, err)
    return value, err


def integrate_singular(sq: SingularQuadrature, g, *, breakpoint_spheres=(),
                       breakpoint_planes=(), raise_on_failure=True) -> float:
    """int_B g(y) |y - x|**(alpha - n) dy with x = sq.singularity.

    g maps an (N, n) array of points to (N,) values and must be bounded on
    the ball.  Known discontinuity loci of g can be passed as spheres
    (center, radius) or planes (normal, offset) to seed panel edges.
    """

    def wrapped(pts, rays, nodes):
        return np.asarray(g(pts), dtype=float)

    value, _ = _polar_integral(
        sq.singularity, sq.ball, sq.alpha - 1.0, wrapped,
        spheres=breakpoint_spheres, planes=breakpoint_planes,
        order=sq.radial_order, angular_count=sq.angular_count,
        rel_tol=sq.rel_tol, abs_tol=sq.abs_tol, max_rounds=sq.max_rounds,
        raise_on_failure=raise_on_failure)
    return value


def integrate_on_ball(ball: Ball, h, *, center_power: float = 0.0,
                      breakpoint_spheres=(), breakpoint_planes=(),
                      rel_tol: float = DEFAULT_REL_TOL,
                      abs_tol: float = DEFAULT_ABS_TOL,
                      order: int = 12, angular_count: int = 32,
                      max_rounds: int = 18, raise_on_failure=True) -> float:
    """int_B h(y) dy by polar quadrature around the ball center.

    center_power declares an algebraic singularity h ~ |y-c|**center_power
    at the center (e.g. truncated power test functions); it is absorbed
    into the radial Gauss-Jacobi weight.
    """

    def wrapped(pts, rays, nodes):
        vals = np.asarray(h(pts), dtype=float)
        if center_power != 0.0:
            rho = np.linalg.norm(pts - ball.center[None, :], axis=-1)
            vals = vals / rho**center_power
        return vals

    value, _ = _polar_integral(
        ball.center, ball, ball.dimension - 1.0 + center_power, wrapped,
        spheres=breakpoint_spheres, planes=breakpoint_planes,
        order=order, angular_count=angular_count,
        rel_tol=rel_tol, abs_tol=abs_tol, max_rounds=max_rounds,
        raise_on_failure=raise_on_failure)
    return value
