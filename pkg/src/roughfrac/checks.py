"""Empirical verification of the boundedness inequalities and weight-pair
conditions.

Each check turns one inequality into a family of LHS/RHS ratio samples over
radii, dilations, or radius pairs, fits the implicit constant as the
maximum ratio, and passes when the family is stable (max within a fixed
multiple of the median).  Tail integrals over (r, infinity) are truncated
where the integrand falls below a fixed fraction of its running peak, with
a geometric remainder estimate kept in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .catalog import (ExponentSet, PhiWeight, RoughKernel, Symbol,
                      TestFunction, kernel_sphere_norm,
                      REGIME_S_PRIME_LE_Q, REGIME_Q1_LT_S)
from .geometry import (Ball, LogGrid, adaptive_polar, ball_volume, log_grid,
                       sphere_rule, _collect_breakpoints,
                       _ray_segments_into_ball, _legendre_rule)
from .operators import (OperatorConfig, OperatorField, fractional_integral,
                        majorant_potential, sample_lattice)
from .report import (CheckReport, DEFAULT_STABILITY_CEILING, build_report)
from .spaces import (campanato_norm, local_morrey_norm, lp_norm_on_ball,
                     lp_norms_at, oscillation_norm, ball_mean,
                     vanishing_trend, NormProfile)

_RATIO_FLOOR = 1e-13

DEFAULT_PAIR_GRID = log_grid(1e-3, 1e3, 13)
DEFAULT_SHELL_GRID = log_grid(2.0**-4, 2.0**4, 9)
DEFAULT_LOCAL_GRID = log_grid(2.0**-4, 2.0**2, 7)
DEFAULT_WEIGHT_GRID = log_grid(1e-4, 1.0, 17)
DEFAULT_LIMIT_GRID = log_grid(1e-16, 1.0, 33)
DEFAULT_DEEP_GRID = log_grid(2.0**-24, 2.0**4, 29)
DEFAULT_DILATIONS = (0.25, 1.0, 4.0)


# --------------------------------------------------------------------------
# Tail integrals over (lower, infinity)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TailIntegral:
    value: float
    remainder: float
    decayed: bool
    panels: int


def _power_log_tail(T: float, power: float, log_power: int, log_ref: float) -> float:
    """Closed form of int_T^inf (1 + ln(t/log_ref))^lp * t^power dt for
    power < -1 (by parts; exact for integer log powers)."""
    gamma = -(power + 1.0)
    a = 1.0 + math.log(T / log_ref)
    total = 0.0
    for j in range(log_power + 1):
        total += (math.comb(log_power, j) * a**(log_power - j)
                  * math.factorial(j) / gamma**(j + 1))
    return T**(-gamma) * total


@dataclass(frozen=True)
class RhsIntegralScheme:
    """Truncated quadrature for the tail integrals on the right-hand sides.

    Panels are log-spaced (panels_per_decade per decade) with known kink
    radii inserted as edges; integration stops once the integrand falls
    below peak_threshold times its running peak beyond all breakpoints.
    When the caller declares the asymptotic power-log form of the integrand
    the truncated tail is completed in closed form, and the local drift of
    the matched prefactor goes into the remainder budget.
    """

    nodes_per_panel: int = 12
    panels_per_decade: int = 8
    peak_threshold: float = 1e-12
    max_decades: float = 24.0

    def doubled(self) -> "RhsIntegralScheme":
        return replace(self, nodes_per_panel=2 * self.nodes_per_panel,
                       panels_per_decade=2 * self.panels_per_decade)

    def _edges(self, lower: float, breakpoints, extra_decades: float = 0.0):
        total = self.max_decades + extra_decades
        count = int(math.ceil(total * self.panels_per_decade))
        ladder = lower * 10.0 ** (np.arange(count + 1) / self.panels_per_decade)
        extra = [b for b in breakpoints if lower < b < ladder[-1]]
        return np.unique(np.concatenate([ladder, np.asarray(extra)])) if extra else ladder

    def integrate(self, lower: float, integrand, *, breakpoints=(),
                  tail_inf=None, decay=None) -> TailIntegral:
        """integral_lower^inf integrand(t) dt, optionally times the
        discretized essential infimum of tail_inf over (t, infinity).

        decay = (power, log_power, log_ref) declares that the integrand
        behaves like K (1+ln(t/log_ref))^log_power t^power for large t; it
        drives the divergence verdict and the closed-form tail completion.
        Without it, a non-decaying tail is detected from the panel trend.
        """
        edges = self._edges(lower, breakpoints,
                            extra_decades=2.0 if tail_inf is not None else 0.0)
        n_int = edges.size - 1
        suffix_min = None
        if tail_inf is not None:
            g = np.asarray(tail_inf(edges), dtype=float)
            suffix_min = np.minimum.accumulate(g[::-1])[::-1]
        xg, wg = _legendre_rule(self.nodes_per_panel)
        last_break = max([lower] + [b for b in breakpoints if math.isfinite(b)])
        limit = int(math.ceil(self.max_decades * self.panels_per_decade))
        divergent = decay is not None and decay[0] >= -1.0 - 1e-12
        value = 0.0
        peak = 0.0
        contributions = []
        truncated_at = None
        for k in range(min(n_int, limit + len(breakpoints))):
            a, b = edges[k], edges[k + 1]
            t = 0.5 * (a + b) + 0.5 * (b - a) * xg
            w = 0.5 * (b - a) * wg
            vals = np.asarray(integrand(t), dtype=float)
            if suffix_min is not None:
                vals = vals * suffix_min[k + 1]
            c = float(np.dot(w, vals))
            top = float(np.abs(vals).max()) if vals.size else 0.0
            peak = max(peak, top)
            value += c
            contributions.append(c)
            if not divergent and b > last_break and top < self.peak_threshold * peak:
                truncated_at = (float(b), k)
                break

        if divergent:
            return TailIntegral(value, float("inf"), False, len(contributions))

        if truncated_at is None:
            # ladder exhausted: decide by the trend of the last panels
            tail = [abs(c) for c in contributions[-4:]]
            ratio = tail[-1] / tail[-2] if len(tail) >= 2 and tail[-2] > 0 else 1.0
            if ratio < 0.9:
                return TailIntegral(value, tail[-1] * ratio / (1.0 - ratio),
                                    True, len(contributions))
            return TailIntegral(value, float("inf"), False, len(contributions))

        T, k_last = truncated_at
        if decay is not None:
            power, log_power, log_ref = decay
            shape = (1.0 + math.log(T / log_ref))**log_power * T**power

            def prefactor(t):
                raw = float(np.asarray(integrand(np.array([t])), dtype=float)[0])
                if suffix_min is not None:
                    raw *= suffix_min[min(k_last + 1, suffix_min.size - 1)]
                return raw / ((1.0 + math.log(t / log_ref))**log_power * t**power)

            k_at_T = prefactor(T)
            k_before = prefactor(edges[k_last])
            completion = k_at_T * _power_log_tail(T, power, log_power, log_ref)
            drift = abs(k_at_T - k_before) / max(abs(k_at_T), 1e-300)
            remainder = abs(completion) * drift + abs(contributions[-1]) * self.peak_threshold
            return TailIntegral(value + completion, remainder, True,
                                len(contributions))

        remainder = abs(contributions[-1])
        return TailIntegral(value, remainder, True, len(contributions))


class _BallNormFactor:
    """t -> ||f||_{L_p(B(x0,t))}, constant beyond |x0| + support radius."""

    def __init__(self, f, p: float, x0):
        self.f = f
        self.p = p
        self.x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        self.saturation = float(np.linalg.norm(self.x0)) + f.support_radius
        self._full = None

    def full_norm(self) -> float:
        if self._full is None:
            self._full = lp_norm_on_ball(self.f, self.p,
                                         Ball(self.x0, self.saturation))
        return self._full

    def __call__(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.empty(ts.shape)
        below = ts < self.saturation
        if np.any(below):
            out[below] = lp_norms_at(self.f, self.p, self.x0, ts[below])
        if np.any(~below):
            out[~below] = self.full_norm()
        return out


# --------------------------------------------------------------------------
# Shared parameter records
# --------------------------------------------------------------------------

def _grid_params(grid: LogGrid) -> dict:
    return {"r_min": grid.r_min, "r_max": grid.r_max, "count": grid.count}


def _exps_params(exps: ExponentSet) -> dict:
    return {
        "n": exps.n, "alpha": exps.alpha, "s": exps.s, "m": exps.m,
        "p": exps.p, "p_i": list(exps.p_list), "q": exps.q, "q1": exps.q1,
        "lambda_i": list(exps.lambda_list), "regime": exps.regime,
    }


def _cfg_params(cfg: OperatorConfig) -> dict:
    return {"kernel": cfg.kernel.label, "alpha": cfg.alpha,
            "rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol}


def _scheme_params(scheme: RhsIntegralScheme) -> dict:
    return {"nodes_per_panel": scheme.nodes_per_panel,
            "panels_per_decade": scheme.panels_per_decade,
            "peak_threshold": scheme.peak_threshold,
            "max_decades": scheme.max_decades}


def _x0_array(x0, n: int) -> np.ndarray:
    if x0 is None:
        return np.zeros(n)
    arr = np.atleast_1d(np.asarray(x0, dtype=float))
    if arr.size != n:
        raise ValueError(f"x0 has dimension {arr.size}, expected {n}")
    return arr


# --------------------------------------------------------------------------
# Size condition and Lebesgue boundedness
# --------------------------------------------------------------------------

def check_size_condition(cfg: OperatorConfig, f: TestFunction,
                         x_samples=None, *, tol: float = 1e-6,
                         ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """|T f(x)| against the absolute-value majorant at points outside supp f.

    The triangle inequality forces every ratio to be at most 1; the fitted
    constant must stay below 1 + tol.
    """
    n = cfg.dimension
    if x_samples is None:
        x_samples = [x for x in sample_lattice(f, np.zeros(n), 21)
                     if np.linalg.norm(x) > f.support_radius * 1.05]
    samples = []
    notes = []
    for x in x_samples:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.linalg.norm(x) <= f.support_radius:
            raise ValueError("size-condition samples must lie outside supp f")
        lhs = abs(fractional_integral(cfg, f, x))
        rhs = majorant_potential(cfg, f, x)
        rec = {"x": list(x), "lhs": lhs, "rhs": rhs}
        if rhs <= _RATIO_FLOOR and lhs <= _RATIO_FLOOR:
            rec["note"] = "skipped: both sides vanish"
        else:
            rec["ratio"] = lhs / rhs if rhs > 0 else float("inf")
        samples.append(rec)
    return build_report(
        "size_condition",
        {"operator": _cfg_params(cfg), "f": f.label, "tol": tol,
         "points": len(samples)},
        samples, ceiling=ceiling, max_allowed=1.0 + tol, notes=notes)


def check_lebesgue_boundedness(cfg: OperatorConfig, exps: ExponentSet,
                               f_family, *, lambdas=(2.0**-4, 0.25, 1.0, 4.0, 2.0**4),
                               trunc_factor: float = 64.0,
                               ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """Global norm inequality ||T f||_q1 <= C ||Omega|| ||f||_q over a
    function family and its dilates (||.||_q1 truncated to a ball scaling
    with the support, so the ratios are exactly dilation invariant)."""
    if exps.regime == REGIME_S_PRIME_LE_Q and exps.s_prime > exps.q:
        raise ValueError("declared regime violated")
    omega_norm = kernel_sphere_norm(cfg.kernel, exps.s)
    samples = []
    for f in f_family:
        for lam in lambdas:
            fd = f.dilated(lam) if lam != 1.0 else f
            reach = trunc_factor * fd.support_radius
            field = OperatorField(cfg, fd, label=f"T[{fd.label}]")
            lhs = lp_norm_on_ball(field, exps.q1, Ball(np.zeros(cfg.dimension), reach))
            rhs = omega_norm * lp_norm_on_ball(fd, exps.q, fd.support_ball)
            rec = {"f": f.label, "lambda": lam, "lhs": lhs, "rhs": rhs}
            if rhs <= _RATIO_FLOOR and lhs <= _RATIO_FLOOR:
                rec["note"] = "skipped: zero function"
            else:
                rec["ratio"] = lhs / rhs if rhs > 0 else float("inf")
            samples.append(rec)
    return build_report(
        "lebesgue_boundedness",
        {"operator": _cfg_params(cfg), "exponents": _exps_params(exps),
         "f_family": [f.label for f in f_family], "lambdas": list(lambdas),
         "trunc_factor": trunc_factor, "omega_norm": omega_norm},
        samples, ceiling=ceiling)


def check_kernel_shell_bound(kernel: RoughKernel, s: float, x0=None,
                             t_grid: LogGrid = DEFAULT_SHELL_GRID, *,
                             offsets=(0.0, 0.45, 0.9),
                             ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """L_s norm of y -> Omega(x, x-y) on B(x0,t) against
    ||Omega|| |B(x0,2t)|^(1/s), for x inside B(x0,t)."""
    n = kernel.dimension
    x0 = _x0_array(x0, n)
    e1 = np.zeros(n)
    e1[0] = 1.0
    xs_used = [x0 + c * t * e1 for t in t_grid.nodes for c in offsets]
    omega_norm = kernel_sphere_norm(kernel, s,
                                    x_samples=list(xs_used))
    rule = sphere_rule(n, 256)
    samples = []
    for t in t_grid.nodes:
        shell = Ball(x0, float(t))
        for c in offsets:
            x = x0 + c * t * e1
            kvals = np.abs(kernel(x, -rule.nodes)) ** s
            segs = _ray_segments_into_ball(x, rule.nodes, shell)

            def eval_fn(rho, rays, _k=kvals):
                return _k[rays]

            integral, _ = adaptive_polar(eval_fn, rule.weights, segs, n - 1.0)
            lhs = integral ** (1.0 / s)
            rhs = omega_norm * ball_volume(n, 2.0 * float(t)) ** (1.0 / s)
            samples.append({"t": float(t), "offset": c, "lhs": lhs, "rhs": rhs,
                            "ratio": lhs / rhs})
    return build_report(
        "kernel_shell_bound",
        {"kernel": kernel.label, "s": s, "x0": list(x0),
         "grid": _grid_params(t_grid), "offsets": list(offsets),
         "omega_norm": omega_norm},
        samples, ceiling=ceiling)


# --------------------------------------------------------------------------
# Campanato log estimates
# --------------------------------------------------------------------------

def _campanato_pair_check(name: str, b: Symbol, p: float, lam: float, x0,
                          pair_grid: LogGrid, ceiling: float, lhs_fn):
    n = b.dimension
    x0 = _x0_array(x0, n)
    norm_profile = campanato_norm(b, p, lam, x0, pair_grid)
    bnorm = norm_profile.sup_value
    means = {float(r): ball_mean(b, Ball(x0, float(r))) for r in pair_grid.nodes}
    samples = []
    fail_notes = []
    for r1 in pair_grid.nodes:
        for r2 in pair_grid.nodes:
            r1f, r2f = float(r1), float(r2)
            lhs = lhs_fn(r1f, r2f, means)
            logfac = 1.0 + abs(math.log(r1f / r2f))
            rec = {"r1": r1f, "r2": r2f, "lhs": lhs}
            if bnorm <= _RATIO_FLOOR:
                if lhs > 1e-9:
                    fail_notes.append(
                        f"zero Campanato norm but LHS {lhs!r} at ({r1f}, {r2f})")
                rec["note"] = "zero-norm symbol"
            else:
                rec["ratio"] = lhs / (logfac * bnorm)
            samples.append(rec)
    return build_report(
        name,
        {"symbol": b.label, "p": p, "lambda": lam, "x0": list(x0),
         "pair_grid": _grid_params(pair_grid), "campanato_norm": bnorm},
        samples, ceiling=ceiling, fail_notes=fail_notes)


def check_campanato_cross_mean(b: Symbol, p: float, lam: float, x0=None,
                               pair_grid: LogGrid = DEFAULT_PAIR_GRID, *,
                               ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """Scaled oscillation of b on B(r1) about the mean over B(r2), against
    (1 + |ln(r1/r2)|) times the Campanato norm."""
    n = b.dimension
    x0a = _x0_array(x0, n)

    def lhs_fn(r1, r2, means):
        ball = Ball(x0a, r1)
        osc = oscillation_norm(b, means[r2], p, ball)
        return osc * ball.volume ** (-(1.0 + lam * p) / p)

    return _campanato_pair_check("campanato_cross_mean", b, p, lam, x0a,
                                 pair_grid, ceiling, lhs_fn)


def check_campanato_mean_gap(b: Symbol, p: float, lam: float, x0=None,
                             pair_grid: LogGrid = DEFAULT_PAIR_GRID, *,
                             ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """|b_B(r1) - b_B(r2)| against (1+|ln(r1/r2)|) |B(r1)|^lambda ||b||."""
    n = b.dimension
    x0a = _x0_array(x0, n)

    def lhs_fn(r1, r2, means):
        return abs(means[r1] - means[r2]) / ball_volume(n, r1) ** lam

    return _campanato_pair_check("campanato_mean_gap", b, p, lam, x0a,
                                 pair_grid, ceiling, lhs_fn)


def check_campanato_scaled_oscillation(b: Symbol, p: float, lam: float, x0=None,
                                       pair_grid: LogGrid = DEFAULT_PAIR_GRID, *,
                                       ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """||b - b_B(r2)||_{L_p(B(r1))} against (1+|ln(r1/r2)|) r1^(n/p+n*lam) ||b||.

    The radius on the right is read as the radius of the norm ball, the way
    the estimate is applied with nested balls in the commutator bounds.
    """
    n = b.dimension
    x0a = _x0_array(x0, n)

    def lhs_fn(r1, r2, means):
        osc = oscillation_norm(b, means[r2], p, Ball(x0a, r1))
        return osc / r1 ** (n / p + n * lam)

    return _campanato_pair_check("campanato_scaled_oscillation", b, p, lam,
                                 x0a, pair_grid, ceiling, lhs_fn)


# --------------------------------------------------------------------------
# Local bounds for the operator and its commutators
# --------------------------------------------------------------------------

def _local_bound_exponents(exps: ExponentSet, commutator: bool):
    """(prefactor r-exponent, integrand t-exponent, log power) for the
    regime-selected tail bound."""
    n, q1 = exps.n, exps.q1
    shift = exps.sum_lambda + exps.sum_inv_p
    if exps.regime == REGIME_S_PRIME_LE_Q:
        pre = n / q1
        tpow = n * (-1.0 / q1 + shift) - 1.0
    else:
        pre = n / q1 - n / exps.s
        tpow = n * (-1.0 / q1 + 1.0 / exps.s + shift) - 1.0
    logpow = exps.m if commutator else 0
    return pre, tpow, logpow


def _tail_rhs(scheme: RhsIntegralScheme, r: float, norm_factor: _BallNormFactor,
              tpow: float, logpow: int) -> TailIntegral:
    def integrand(ts):
        vals = ts**tpow * norm_factor(ts)
        if logpow:
            vals = vals * (1.0 + np.log(ts / r)) ** logpow
        return vals

    return scheme.integrate(2.0 * r, integrand,
                            breakpoints=(norm_factor.saturation,),
                            decay=(tpow, logpow, r))


def _asymptotic_slope(fn, t1: float = 1e6, t2: float = 1e9) -> float:
    """Log-log slope of a positive factor at large arguments."""
    v1 = float(np.asarray(fn(np.array([t1])), dtype=float)[0])
    v2 = float(np.asarray(fn(np.array([t2])), dtype=float)[0])
    if v1 <= 0.0 or v2 <= 0.0:
        return 0.0
    return math.log(v2 / v1) / math.log(t2 / t1)


def _local_bound_check(name: str, cfg: OperatorConfig, exps: ExponentSet,
                       symbols, f: TestFunction, x0, r_grid: LogGrid,
                       scheme: RhsIntegralScheme, ceiling: float,
                       split_diagnostics: bool,
                       input_exponent: float, prefactor_scale: float) -> CheckReport:
    n = cfg.dimension
    x0 = _x0_array(x0, n)
    pre, tpow, logpow = _local_bound_exponents(exps, bool(symbols))
    field = OperatorField(cfg, f, tuple(symbols))
    out_norms = lp_norms_at(field, exps.q1, x0, r_grid.nodes)
    norm_factor = _BallNormFactor(f, input_exponent, x0)
    samples = []
    notes = []
    warn_notes = []
    for k, r in enumerate(r_grid.nodes):
        r = float(r)
        tail = _tail_rhs(scheme, r, norm_factor, tpow, logpow)
        rhs = prefactor_scale * r**pre * tail.value
        lhs = float(out_norms[k])
        rec = {"r": r, "lhs": lhs, "rhs": rhs,
               "tail_decayed": tail.decayed,
               "tail_remainder": tail.remainder * prefactor_scale * r**pre}
        if not tail.decayed:
            notes.append(f"tail integral did not decay at r={r!r}")
            rec["note"] = "skipped: non-decaying tail"
        elif rhs <= _RATIO_FLOOR:
            rec["note"] = "skipped: RHS underflow (zero tail)"
        else:
            rec["ratio"] = lhs / rhs
        if split_diagnostics:
            near = f.inside_ball(x0, 2.0 * r)
            far = f.outside_ball(x0, 2.0 * r)
            ball = Ball(x0, r)
            lhs_near = lp_norm_on_ball(OperatorField(cfg, near, tuple(symbols)),
                                       exps.q1, ball)
            lhs_far = lp_norm_on_ball(OperatorField(cfg, far, tuple(symbols)),
                                      exps.q1, ball)
            near_den = lp_norm_on_ball(f, input_exponent, Ball(x0, 2.0 * r))
            rec["near_term"] = lhs_near
            rec["far_term"] = lhs_far
            if near_den > 0:
                rec["near_ratio"] = lhs_near / near_den
            if rhs > 0:
                rec["far_ratio"] = lhs_far / rhs
        samples.append(rec)

    # refinement stability of the reported RHS at the median radius
    mid = float(r_grid.nodes[len(r_grid.nodes) // 2])
    base = _tail_rhs(scheme, mid, norm_factor, tpow, logpow).value
    fine = _tail_rhs(scheme.doubled(), mid, norm_factor, tpow, logpow).value
    drift = abs(fine - base) / max(abs(fine), 1e-300)
    if drift > 0.005:
        warn_notes.append(f"tail refinement drift {drift:.3e} exceeds 0.5%")

    params = {
        "operator": _cfg_params(cfg), "exponents": _exps_params(exps),
        "f": f.label, "symbols": [b.label for b in symbols],
        "x0": list(x0), "grid": _grid_params(r_grid),
        "scheme": _scheme_params(scheme), "prefactor_scale": prefactor_scale,
        "tail_refinement_drift": drift,
    }
    return build_report(name, params, samples, ceiling=ceiling, notes=notes,
                        warn_notes=warn_notes)


def check_local_operator_bound(cfg: OperatorConfig, exps: ExponentSet,
                               f: TestFunction, x0=None,
                               r_grid: LogGrid = DEFAULT_LOCAL_GRID,
                               scheme: RhsIntegralScheme = RhsIntegralScheme(), *,
                               ceiling: float = DEFAULT_STABILITY_CEILING,
                               split_diagnostics: bool = True) -> CheckReport:
    """Local bound for the plain operator: the L_q1 norm of T f on B(x0,r)
    against r^(n/q1) * tail integral of t^(-n/q1-1) ||f||_{L_q(B(x0,t))}.

    The input/output Lebesgue pair is (q, q1) from the exponent tuple; with
    m = 0 this is exactly the single-operator coupling 1/q1 = 1/q - alpha/n.
    Split diagnostics report the near part (f restricted to B(x0,2r), ratio
    against ||f||_{L_q(2B)}) and the far part (ratio against the tail).
    """
    return _local_bound_check("local_operator_bound", cfg, exps, (), f, x0,
                              r_grid, scheme, ceiling, split_diagnostics,
                              input_exponent=exps.q, prefactor_scale=1.0)


def check_commutator_local_bound(cfg: OperatorConfig, exps: ExponentSet,
                                 symbols, f: TestFunction, x0=None,
                                 r_grid: LogGrid = DEFAULT_LOCAL_GRID,
                                 scheme: RhsIntegralScheme = RhsIntegralScheme(), *,
                                 norm_grid: LogGrid | None = None,
                                 ceiling: float = DEFAULT_STABILITY_CEILING,
                                 split_diagnostics: bool = False) -> CheckReport:
    """Local bound for the multilinear commutator: the L_q1 norm of
    [b, T] f on B(x0,r) against
    prod ||b_i|| * r^(n/q1) * int_2r (1+ln(t/r))^m t^(...) ||f||_{L_p} dt."""
    symbols = tuple(symbols)
    if exps.m != len(symbols):
        raise ValueError(f"exponent tuple expects m={exps.m} symbols, "
                         f"got {len(symbols)}")
    if exps.m == 0:
        raise ValueError("commutator bound needs at least one symbol")
    n = cfg.dimension
    x0a = _x0_array(x0, n)
    grid = norm_grid or DEFAULT_SHELL_GRID
    bnorms = [campanato_norm(b, pi, li, x0a, grid).sup_value
              for b, pi, li in zip(symbols, exps.p_list, exps.lambda_list)]
    product = math.prod(bnorms)
    if product <= _RATIO_FLOOR:
        # constant symbols: LHS is identically zero; verify and pass vacuously
        probe = OperatorField(cfg, f, symbols)
        worst = float(np.max(np.abs(probe(
            [x0a + 0.1 * k * np.eye(n)[0] for k in range(3)]))))
        fail = [] if worst < 1e-9 else [
            f"zero symbol norms but commutator reaches {worst!r}"]
        return build_report(
            "commutator_local_bound",
            {"operator": _cfg_params(cfg), "exponents": _exps_params(exps),
             "f": f.label, "symbols": [b.label for b in symbols],
             "campanato_norms": bnorms},
            [{"note": "zero Campanato norm: LHS identically zero"}],
            ceiling=ceiling, fail_notes=fail)
    report = _local_bound_check("commutator_local_bound", cfg, exps, symbols,
                                f, x0a, r_grid, scheme, ceiling,
                                split_diagnostics,
                                input_exponent=exps.p,
                                prefactor_scale=product)
    report.parameters["campanato_norms"] = bnorms
    return report


# --------------------------------------------------------------------------
# Weight-pair conditions
# --------------------------------------------------------------------------

def _pair_exponent(exps: ExponentSet) -> float:
    """Decay exponent c in the tail denominator t^(c+1)."""
    shift = exps.sum_lambda + exps.sum_inv_p
    if exps.regime == REGIME_S_PRIME_LE_Q:
        return exps.n * (1.0 / exps.q1 - shift)
    return exps.n * (1.0 / exps.q1 - (1.0 / exps.s + shift))


def _require_positive(phi: PhiWeight, x0, nodes, name: str):
    vals = np.asarray(phi(x0, nodes), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
        raise ValueError(f"{name} must be positive and finite on the grid")
    return vals


def check_weight_pair_condition(exps: ExponentSet, phi1: PhiWeight,
                                phi2: PhiWeight, x0=None,
                                r_grid: LogGrid = DEFAULT_WEIGHT_GRID,
                                scheme: RhsIntegralScheme = RhsIntegralScheme(), *,
                                ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """Tail condition coupling (phi1, phi2): the integral over (r, infinity)
    of (1+ln(t/r))^m essinf_{tau>t}[phi1 tau^(n/p)] / t^(c+1) against
    phi2(x0, r) (times r^(n/s) in the q1 < s regime)."""
    n = exps.n
    x0a = _x0_array(x0, n)
    if r_grid.decades() < 4:
        raise ValueError("weight-pair grid must span at least 4 decades")
    _require_positive(phi1, x0a, r_grid.nodes, "phi1")
    phi2_vals = _require_positive(phi2, x0a, r_grid.nodes, "phi2")
    c = _pair_exponent(exps)
    m = exps.m

    def weight_factor(taus):
        return np.asarray(phi1(x0a, taus), dtype=float) * taus ** (n / exps.p)

    slope = _asymptotic_slope(weight_factor)
    samples = []
    fail_notes = []
    for k, r in enumerate(r_grid.nodes):
        r = float(r)

        def integrand(ts, _r=r):
            return (1.0 + np.log(ts / _r)) ** m * ts ** (-c - 1.0)

        tail = scheme.integrate(r, integrand, tail_inf=weight_factor,
                                decay=(-c - 1.0 + slope, m, r))
        rhs = float(phi2_vals[k])
        if exps.regime == REGIME_Q1_LT_S:
            rhs *= r ** (n / exps.s)
        rec = {"r": r, "lhs": tail.value, "rhs": rhs,
               "tail_decayed": tail.decayed, "tail_remainder": tail.remainder}
        if not tail.decayed:
            if not fail_notes:
                fail_notes.append(f"divergent tail integral at r={r!r}")
        else:
            rec["ratio"] = tail.value / rhs
        samples.append(rec)

    mid = float(r_grid.nodes[len(r_grid.nodes) // 2])
    warn_notes = []
    base = scheme.integrate(
        mid, lambda ts: (1.0 + np.log(ts / mid))**m * ts**(-c - 1.0),
        tail_inf=weight_factor, decay=(-c - 1.0 + slope, m, mid))
    fine = scheme.doubled().integrate(
        mid, lambda ts: (1.0 + np.log(ts / mid))**m * ts**(-c - 1.0),
        tail_inf=weight_factor, decay=(-c - 1.0 + slope, m, mid))
    drift = abs(fine.value - base.value) / max(abs(fine.value), 1e-300)
    if drift > 0.005:
        warn_notes.append(f"tail refinement drift {drift:.3e} exceeds 0.5%")

    return build_report(
        "weight_pair_condition",
        {"exponents": _exps_params(exps), "phi1": phi1.label,
         "phi2": phi2.label, "x0": list(x0a), "grid": _grid_params(r_grid),
         "scheme": _scheme_params(scheme), "decay_exponent": c,
         "tail_refinement_drift": drift},
        samples, ceiling=ceiling, warn_notes=warn_notes,
        fail_notes=fail_notes)


def check_weight_pair_vanishing(exps: ExponentSet, phi1: PhiWeight,
                                phi2: PhiWeight, x0=None,
                                r_grid: LogGrid = DEFAULT_WEIGHT_GRID,
                                limit_grid: LogGrid = DEFAULT_LIMIT_GRID,
                                scheme: RhsIntegralScheme = RhsIntegralScheme(), *,
                                deltas=(0.25, 1.0, 4.0),
                                limit_threshold: float = 1e-2,
                                ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """The three vanishing-theorem weight conditions together: the tail
    bound with phi1(x0,t) t^(n/p) in place of the essential infimum, the
    log limit ln(1/r)/phi2 -> 0, and finiteness of the delta-tail constants.
    """
    n = exps.n
    x0a = _x0_array(x0, n)
    _require_positive(phi1, x0a, r_grid.nodes, "phi1")
    phi2_vals = _require_positive(phi2, x0a, r_grid.nodes, "phi2")
    c = _pair_exponent(exps)
    m = exps.m
    samples = []
    fail_notes = []

    def pointwise_factor(ts):
        return np.asarray(phi1(x0a, ts), dtype=float) * ts ** (n / exps.p)

    slope = _asymptotic_slope(pointwise_factor)
    for k, r in enumerate(r_grid.nodes):
        r = float(r)

        def integrand(ts, _r=r):
            return (1.0 + np.log(ts / _r))**m * pointwise_factor(ts) * ts**(-c - 1.0)

        tail = scheme.integrate(r, integrand,
                                decay=(-c - 1.0 + slope, m, r))
        rhs = float(phi2_vals[k])
        if exps.regime == REGIME_Q1_LT_S:
            rhs *= r ** (n / exps.s)
        rec = {"part": "tail_bound", "r": r, "lhs": tail.value, "rhs": rhs,
               "tail_decayed": tail.decayed}
        if not tail.decayed:
            rec["ratio"] = float("inf")
            fail_notes.append(f"divergent tail integral at r={r!r}")
        else:
            rec["ratio"] = tail.value / rhs
        samples.append(rec)

    # log limit: ln(1/r)/phi2 must fall below the threshold and decrease
    limit_vals = np.log(1.0 / limit_grid.nodes) / np.asarray(
        _require_positive(phi2, x0a, limit_grid.nodes, "phi2"))
    bottom = limit_grid.nodes <= limit_grid.r_min * 10.0
    decreasing = bool(np.all(limit_vals[bottom][:-1] <= limit_vals[bottom][1:] * 1.1))
    small = float(limit_vals[0]) < limit_threshold
    samples.append({"part": "log_limit", "value_at_rmin": float(limit_vals[0]),
                    "threshold": limit_threshold, "decreasing": decreasing})
    if not (small and decreasing):
        fail_notes.append(
            f"log limit fails: ln(1/r)/phi2 = {float(limit_vals[0])!r} at "
            f"r = {limit_grid.r_min!r} (threshold {limit_threshold:g})")

    # delta-tail constants, finite for every delta
    previous = float("inf")
    for delta in deltas:
        def integrand(ts):
            return (1.0 + np.abs(np.log(ts)))**m * pointwise_factor(ts) * ts**(-c - 1.0)

        tail = scheme.integrate(float(delta), integrand, breakpoints=(1.0,),
                                decay=(-c - 1.0 + slope, m, 1.0))
        samples.append({"part": "delta_tail", "delta": float(delta),
                        "value": tail.value, "decayed": tail.decayed})
        if not tail.decayed:
            fail_notes.append(f"delta-tail constant diverges at delta={delta!r}")
        if tail.value > previous * (1.0 + 1e-9):
            fail_notes.append("delta-tail constants not nested")
        previous = tail.value

    return build_report(
        "weight_pair_vanishing",
        {"exponents": _exps_params(exps), "phi1": phi1.label,
         "phi2": phi2.label, "x0": list(x0a), "grid": _grid_params(r_grid),
         "limit_grid": _grid_params(limit_grid), "deltas": list(deltas),
         "scheme": _scheme_params(scheme), "decay_exponent": c},
        samples, ceiling=ceiling, fail_notes=fail_notes)


# --------------------------------------------------------------------------
# End-to-end boundedness and the vanishing implication
# --------------------------------------------------------------------------

def check_morrey_boundedness(cfg: OperatorConfig, exps: ExponentSet, symbols,
                             f: TestFunction, phi1: PhiWeight, phi2: PhiWeight,
                             x0=None, grid: LogGrid | None = None, *,
                             lambdas=DEFAULT_DILATIONS,
                             norm_grid: LogGrid | None = None,
                             ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """Commutator norm between the weighted spaces: the output profile sup
    against prod ||b_i|| times the input profile sup, over a dilation family.

    Requires the weight-pair condition to hold for (phi1, phi2); a failing
    pair is a precondition violation, not a verdict.
    """
    symbols = tuple(symbols)
    n = cfg.dimension
    x0a = _x0_array(x0, n)
    grid = grid or log_grid(2.0**-8, 2.0**8, 33)
    pair = check_weight_pair_condition(exps, phi1, phi2, x0a, ceiling=ceiling)
    if pair.failed:
        raise ValueError("weight-pair condition fails for (phi1, phi2); "
                         "the boundedness check is not applicable")
    bnorm_grid = norm_grid or DEFAULT_SHELL_GRID
    bnorms = [campanato_norm(b, pi, li, x0a, bnorm_grid).sup_value
              for b, pi, li in zip(symbols, exps.p_list, exps.lambda_list)]
    product = math.prod(bnorms) if bnorms else 1.0
    samples = []
    warn_notes = []
    for lam in lambdas:
        fd = f.dilated(lam) if lam != 1.0 else f
        in_prof = local_morrey_norm(fd, exps.p, phi1, x0a, grid)
        out_prof = local_morrey_norm(OperatorField(cfg, fd, symbols),
                                     exps.q1, phi2, x0a, grid)
        denom = product * in_prof.sup_value
        rec = {"lambda": lam, "lhs": out_prof.sup_value, "rhs": denom,
               "input_sup": in_prof.sup_value,
               "output_arg_sup": out_prof.arg_sup}
        if denom <= _RATIO_FLOOR:
            if out_prof.sup_value <= _RATIO_FLOOR:
                rec["ratio"] = 0.0
                rec["note"] = "zero over zero: vacuous sample"
            else:
                rec["ratio"] = float("inf")
        else:
            rec["ratio"] = out_prof.sup_value / denom
        if out_prof.sup_at_boundary:
            warn_notes.append(
                f"output sup at grid boundary for lambda={lam!r}")
        samples.append(rec)
    return build_report(
        "morrey_boundedness",
        {"operator": _cfg_params(cfg), "exponents": _exps_params(exps),
         "f": f.label, "symbols": [b.label for b in symbols],
         "phi1": phi1.label, "phi2": phi2.label, "x0": list(x0a),
         "grid": _grid_params(grid), "lambdas": list(lambdas),
         "campanato_norms": bnorms},
        samples, ceiling=ceiling, warn_notes=warn_notes)


def check_vanishing_implication(cfg: OperatorConfig, exps: ExponentSet, symbols,
                                f: TestFunction, phi1: PhiWeight, phi2: PhiWeight,
                                x0=None, grid: LogGrid = DEFAULT_DEEP_GRID, *,
                                threshold: float = 1e-2, decades: float = 2.0,
                                ceiling: float = DEFAULT_STABILITY_CEILING) -> CheckReport:
    """Vanishing input implies vanishing commutator output: the output
    Morrey functional profile must decrease to below `threshold` times its
    sup over the bottom `decades` decades."""
    symbols = tuple(symbols)
    n = cfg.dimension
    x0a = _x0_array(x0, n)
    vanishing_pair = check_weight_pair_vanishing(exps, phi1, phi2, x0a,
                                                 ceiling=ceiling)
    if vanishing_pair.failed:
        raise ValueError("vanishing weight-pair conditions fail; "
                         "the implication check is not applicable")
    in_prof = local_morrey_norm(f, exps.p, phi1, x0a, grid)
    in_trend = vanishing_trend(in_prof, threshold=threshold, decades=decades)
    if not in_trend.is_vanishing:
        raise ValueError("input profile is not vanishing under (p, phi1): "
                         + "; ".join(in_trend.notes))
    if math.log10(1.0 / grid.r_min) < decades + 1:
        return build_report(
            "vanishing_implication",
            {"grid": _grid_params(grid)},
            [], warn_notes=["inconclusive: grid covers too few decades"])
    out_prof = local_morrey_norm(OperatorField(cfg, f, symbols),
                                 exps.q1, phi2, x0a, grid)
    out_trend = vanishing_trend(out_prof, threshold=threshold, decades=decades)
    samples = [{"r": float(r), "input": float(iv), "output": float(ov)}
               for r, iv, ov in zip(grid.nodes, in_prof.values, out_prof.values)]
    fail_notes = [] if out_trend.is_vanishing else [
        "output profile fails the vanishing trend: " + "; ".join(out_trend.notes)]
    return build_report(
        "vanishing_implication",
        {"operator": _cfg_params(cfg), "exponents": _exps_params(exps),
         "f": f.label, "symbols": [b.label for b in symbols],
         "phi1": phi1.label, "phi2": phi2.label, "x0": list(x0a),
         "grid": _grid_params(grid), "threshold": threshold,
         "decades": decades,
         "input_smallest": in_trend.smallest_value,
         "output_smallest": out_trend.smallest_value,
         "output_sup": out_prof.sup_value},
        samples, ceiling=ceiling, fail_notes=fail_notes)
