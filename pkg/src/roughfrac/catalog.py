"""Catalog of functional ingredients: rough kernels, test functions,
Campanato symbols, radial weights, and coupled exponent tuples.

Kernels are stored as functions of (position, unit direction); the public
entry point normalizes its argument, so homogeneity of degree zero in the
direction holds by construction.  Test functions and symbols carry the
geometric metadata (support radius, discontinuity spheres/planes, algebraic
singularity exponents) that the quadrature layer uses to place panel edges.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Ball, LogGrid, SphereRule, sphere_rule, unit_ball_volume

COUPLING_TOL = 1e-12

REGIME_S_PRIME_LE_Q = "s_prime_le_q"
REGIME_Q1_LT_S = "q1_lt_s"
REGIMES = (REGIME_S_PRIME_LE_Q, REGIME_Q1_LT_S)


# --------------------------------------------------------------------------
# Rough kernels
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RoughKernel:
    """Kernel Omega(x, theta) evaluated only at unit directions theta.

    evaluator(x, thetas) maps an (n,) position and (M, n) unit directions to
    (M,) values.  `at` accepts arbitrary nonzero vectors and normalizes them
    first, which makes degree-zero homogeneity structural.
    """

    dimension: int
    evaluator: object
    label: str = ""

    def __call__(self, x: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float),
                                         np.atleast_2d(thetas)), dtype=float)

    def at(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Evaluate at (x, z/|z|); z may be a single vector or a batch."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        norms = np.linalg.norm(z, axis=-1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("kernel direction must be nonzero")
        return self(x, z / norms)


def kernel_sphere_norm(kernel: RoughKernel, s: float,
                       x_samples=None, rule: SphereRule | None = None) -> float:
    """sup over sampled x of the L_s norm of Omega(x, .) on the unit sphere.

    The supremum over all positions is approximated by a finite sample;
    catalog kernels have known position behavior so a small default sample
    is an adequate upper envelope.
    """
    if s <= 1:
        raise ValueError(f"sphere integrability index must exceed 1, got {s}")
    n = kernel.dimension
    if rule is None:
        rule = sphere_rule(n, 64)
    if x_samples is None:
        x_samples = default_position_samples(n)
    best = 0.0
    for x in x_samples:
        vals = np.abs(kernel(np.asarray(x, dtype=float), rule.nodes)) ** s
        best = max(best, rule.integrate(vals))
    return best ** (1.0 / s)


def default_position_samples(n: int):
    """Positions used to envelope the sup over x: origin, +-e1, +-2e1, corners."""
    e1 = np.zeros(n)
    e1[0] = 1.0
    samples = [np.zeros(n), e1, -e1, 2 * e1, -2 * e1]
    if n == 2:
        samples += [np.array([sx * 2.0, sy * 2.0]) for sx in (-1, 1) for sy in (-1, 1)]
    return samples


# --------------------------------------------------------------------------
# Test functions and symbols
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Compactly supported input function with quadrature metadata.

    evaluator maps (N, n) points to (N,) values and must return 0 beyond
    support_radius.  breakpoint_spheres/planes mark known discontinuity
    loci; center_power declares an integrable algebraic singularity
    |y|**(-center_power) at the origin.  lp_ball_norm is an optional
    closed-form oracle (p, ball) -> value or None, kept for tests and
    diagnostics; production norms always go through quadrature.
    """

    dimension: int
    evaluator: object
    support_radius: float
    label: str = ""
    breakpoint_spheres: tuple = ()
    breakpoint_planes: tuple = ()
    center_power: float = 0.0
    lp_ball_norm: object = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.atleast_2d(points)), dtype=float)

    @property
    def support_ball(self) -> Ball:
        if not math.isfinite(self.support_radius):
            raise ValueError(f"{self.label or 'test function'} has unbounded support")
        return Ball(np.zeros(self.dimension), self.support_radius)

    def dilated(self, lam: float) -> "TestFunction":
        """f_lam(y) = f(lam * y); support and metadata scale by 1/lam."""
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        base = self
        oracle = None
        if base.lp_ball_norm is not None:
            def oracle(p, ball, _b=base, _l=lam):
                inner = _b.lp_ball_norm(p, Ball(ball.center * _l, ball.radius * _l))
                return None if inner is None else _l ** (-_b.dimension / p) * inner
        return replace(
            self,
            evaluator=lambda pts, _b=base, _l=lam: _b(np.atleast_2d(pts) * _l),
            support_radius=self.support_radius / lam,
            label=f"{self.label}~dil{lam:g}",
            breakpoint_spheres=tuple((np.asarray(c) / lam, r / lam)
                                     for c, r in self.breakpoint_spheres),
            breakpoint_planes=tuple((nrm, off / lam)
                                    for nrm, off in self.breakpoint_planes),
            lp_ball_norm=oracle,
        )

    def scaled(self, c: float) -> "TestFunction":
        base = self
        oracle = None
        if base.lp_ball_norm is not None:
            def oracle(p, ball, _b=base, _c=c):
                inner = _b.lp_ball_norm(p, ball)
                return None if inner is None else abs(_c) * inner
        return replace(self, evaluator=lambda pts, _b=base, _c=c: _c * _b(pts),
                       label=f"{c:g}*{self.label}", lp_ball_norm=oracle)

    def plus(self, other: "TestFunction") -> "TestFunction":
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        a, b = self, other
        return TestFunction(
            dimension=self.dimension,
            evaluator=lambda pts: a(pts) + b(pts),
            support_radius=max(a.support_radius, b.support_radius),
            label=f"{a.label}+{b.label}",
            breakpoint_spheres=a.breakpoint_spheres + b.breakpoint_spheres,
            breakpoint_planes=a.breakpoint_planes + b.breakpoint_planes,
            center_power=max(a.center_power, b.center_power),
        )

    def inside_ball(self, center: np.ndarray, radius: float) -> "TestFunction":
        """Restriction f * chi_{B(center, radius)}."""
        base, c = self, np.atleast_1d(np.asarray(center, dtype=float))
        support = self.support_radius
        if np.all(c == 0.0):
            support = min(support, radius)
        return replace(
            self,
            evaluator=lambda pts: base(pts) * (
                np.linalg.norm(np.atleast_2d(pts) - c, axis=-1) <= radius),
            support_radius=support,
            label=f"{self.label}|in",
            breakpoint_spheres=self.breakpoint_spheres + ((c, radius),),
        )

    def outside_ball(self, center: np.ndarray, radius: float) -> "TestFunction":
        """Restriction f * chi_{B(center, radius)^C}."""
        base, c = self, np.atleast_1d(np.asarray(center, dtype=float))
        return replace(
            self,
            evaluator=lambda pts: base(pts) * (
                np.linalg.norm(np.atleast_2d(pts) - c, axis=-1) > radius),
            label=f"{self.label}|out",
            breakpoint_spheres=self.breakpoint_spheres + ((c, radius),),
        )

    def times_symbol(self, b: "Symbol") -> "TestFunction":
        base = self
        return replace(
            self,
            evaluator=lambda pts: base(pts) * b(pts),
            label=f"{b.label}*{self.label}",
            breakpoint_spheres=self.breakpoint_spheres + b.breakpoint_spheres,
            breakpoint_planes=self.breakpoint_planes + b.breakpoint_planes,
            lp_ball_norm=None,
        )


@dataclass(frozen=True)
class Symbol:
    """Locally integrable symbol b with optional closed-form ball mean."""

    dimension: int
    evaluator: object
    label: str = ""
    breakpoint_spheres: tuple = ()
    breakpoint_planes: tuple = ()
    ball_mean_oracle: object = None   # (ball) -> value or None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.atleast_2d(points)), dtype=float)


# --------------------------------------------------------------------------
# Radial weights
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiWeight:
    """Positive weight phi(x0, r) used for both sides of the norm pairs."""

    evaluator: object
    label: str = ""

    def __call__(self, x0: np.ndarray, r):
        out = np.asarray(self.evaluator(np.asarray(x0, dtype=float),
                                        np.asarray(r, dtype=float)), dtype=float)
        return out if out.ndim else float(out)


def power_weight(exponent: float) -> PhiWeight:
    """phi(x0, r) = r**exponent."""
    return PhiWeight(lambda x0, r: r**exponent, label=f"power:{exponent:g}")


def morrey_power_weight(n: int, p: float, lam: float) -> PhiWeight:
    """The weight r**((lam - n)/p) that recovers the classical local Morrey norm."""
    return power_weight((lam - n) / p)


def power_log_weight(a: float, c: float) -> PhiWeight:
    """phi(x0, r) = r**(-a) * (1 + max(ln(1/r), 0))**(-c)."""
    def ev(x0, r):
        logplus = np.maximum(np.log(1.0 / r), 0.0)
        return r**(-a) * (1.0 + logplus)**(-c)
    return PhiWeight(ev, label=f"powerlog:{a:g},{c:g}")


def log_tail_weight() -> PhiWeight:
    """phi(x0, r) = ln(e + 1/r); grows too slowly for the vanishing-limit test."""
    return PhiWeight(lambda x0, r: np.log(math.e + 1.0 / r), label="logtail")


@dataclass(frozen=True)
class PhiAdmissibility:
    limit_at_zero_ok: bool
    sup_bounded_ok: bool
    witnesses: dict


def phi_admissibility(phi: PhiWeight, x0, grid: LogGrid,
                      zero_threshold: float = 1e-3,
                      growth_tol: float = 1.01) -> PhiAdmissibility:
    """Check the two standing weight conditions on a grid.

    limit_at_zero_ok: 1/phi falls below `zero_threshold` at the smallest
    node and decreases monotonically toward zero over the bottom decade.
    sup_bounded_ok: max of 1/phi on the grid is finite and not the tip of a
    blow-up at r -> 0 (detected as >1% growth across the bottom decade with
    the maximum sitting at the smallest node).
    """
    if grid.decades() < 4:
        raise ValueError("admissibility grid must span at least 4 decades")
    x0 = np.asarray(x0, dtype=float)
    vals = np.asarray(phi(x0, grid.nodes), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
        raise ValueError(f"weight {phi.label or ''} must be positive and finite on the grid")
    inv = 1.0 / vals
    bottom = grid.nodes <= grid.r_min * 10.0 + 1e-300
    inv_bottom = inv[bottom]
    mono = bool(np.all(inv_bottom[:-1] <= inv_bottom[1:] * (1.0 + 1e-9)))
    limit_ok = mono and inv[0] < zero_threshold
    argmax = int(np.argmax(inv))
    blow_up = argmax == 0 and inv_bottom[0] > growth_tol * inv_bottom[-1]
    sup_ok = bool(np.all(np.isfinite(inv))) and not blow_up
    witnesses = {
        "inv_at_rmin": float(inv[0]),
        "inv_at_rmax": float(inv[-1]),
        "inv_max": float(inv[argmax]),
        "argmax_radius": float(grid.nodes[argmax]),
        "bottom_decade_monotone": mono,
    }
    return PhiAdmissibility(bool(limit_ok), sup_ok, witnesses)


# --------------------------------------------------------------------------
# Exponent tuples
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentSet:
    """The coupled tuple (n, alpha, s, m, p, p_i, q, q1, lambda_i, regime).

    Couplings 1/q = sum_i 1/p_i + 1/p and 1/q1 = 1/q - alpha/n are enforced
    to COUPLING_TOL.  m = 0 encodes the plain-operator case (empty products
    and sums); the commutator checks require m >= 1.
    """

    n: int
    alpha: float
    s: float
    p: float
    p_list: tuple
    q: float
    q1: float
    lambda_list: tuple
    regime: str

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(float(v) for v in self.p_list))
        object.__setattr__(self, "lambda_list", tuple(float(v) for v in self.lambda_list))
        n, alpha = self.n, self.alpha
        if n not in (1, 2):
            raise ValueError(f"unsupported dimension {n}")
        if not 0.0 < alpha < n:
            raise ValueError(f"alpha must lie in (0, {n}), got {alpha}")
        if not self.s > 1.0:
            raise ValueError(f"s must exceed 1, got {self.s}")
        if len(self.p_list) != len(self.lambda_list):
            raise ValueError("p_i and lambda_i lists must have equal length")
        top = n / alpha
        for name, v in [("p", self.p)] + [(f"p_{i+1}", v) for i, v in enumerate(self.p_list)]:
            if not 1.0 < v < top:
                raise ValueError(f"{name} = {v} outside (1, n/alpha) = (1, {top})")
        for i, lam in enumerate(self.lambda_list):
            if not 0.0 <= lam < 1.0 / n:
                raise ValueError(f"lambda_{i+1} = {lam} outside [0, 1/n)")
        if not self.q > 1.0 or not self.q1 > 1.0:
            raise ValueError("q and q1 must exceed 1")
        lhs = 1.0 / self.q
        rhs = sum(1.0 / v for v in self.p_list) + 1.0 / self.p
        if abs(lhs - rhs) > COUPLING_TOL:
            raise ValueError(
                f"coupling 1/q = sum(1/p_i) + 1/p violated: {lhs} vs {rhs}")
        if abs(1.0 / self.q1 - (1.0 / self.q - alpha / n)) > COUPLING_TOL:
            raise ValueError(
                f"coupling 1/q1 = 1/q - alpha/n violated: "
                f"{1.0 / self.q1} vs {1.0 / self.q - alpha / n}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.regime == REGIME_S_PRIME_LE_Q and self.s_prime > self.q + COUPLING_TOL:
            raise ValueError(f"regime {self.regime} requires s' <= q "
                             f"(s' = {self.s_prime}, q = {self.q})")
        if self.regime == REGIME_Q1_LT_S and not self.q1 < self.s:
            raise ValueError(f"regime {self.regime} requires q1 < s "
                             f"(q1 = {self.q1}, s = {self.s})")

    @classmethod
    def from_integrability(cls, n: int, alpha: float, s: float, p: float,
                           p_list, lambda_list, regime: str) -> "ExponentSet":
        """Derive q and q1 from the coupling relations."""
        p_list = tuple(float(v) for v in p_list)
        inv_q = sum(1.0 / v for v in p_list) + 1.0 / p
        if inv_q >= 1.0:
            raise ValueError(f"sum(1/p_i) + 1/p = {inv_q} >= 1 leaves no q > 1")
        inv_q1 = inv_q - alpha / n
        if inv_q1 <= 0.0:
            raise ValueError("1/q - alpha/n is not positive; q1 undefined")
        return cls(n=n, alpha=alpha, s=s, p=p, p_list=p_list,
                   q=1.0 / inv_q, q1=1.0 / inv_q1,
                   lambda_list=tuple(float(v) for v in lambda_list), regime=regime)

    @property
    def m(self) -> int:
        return len(self.p_list)

    @property
    def s_prime(self) -> float:
        return self.s / (self.s - 1.0)

    @property
    def sum_inv_p(self) -> float:
        return sum(1.0 / v for v in self.p_list)

    @property
    def sum_lambda(self) -> float:
        return sum(self.lambda_list)


# --------------------------------------------------------------------------
# Builtin catalog
# --------------------------------------------------------------------------

def _norms(pts: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.atleast_2d(pts), axis=-1)


def constant_kernel(n: int, value: float = 1.0) -> RoughKernel:
    return RoughKernel(n, lambda x, th: np.full(th.shape[0], value), label="one")


def first_component_kernel(n: int) -> RoughKernel:
    return RoughKernel(n, lambda x, th: th[:, 0], label="cos_dir")


def sign_direction_kernel(n: int) -> RoughKernel:
    return RoughKernel(n, lambda x, th: np.sign(th[:, 0]), label="sign_dir")


def wavy_kernel(n: int) -> RoughKernel:
    """Position-dependent kernel 1 + sin(|x|) * theta_1."""
    return RoughKernel(
        n, lambda x, th: 1.0 + math.sin(float(np.linalg.norm(x))) * th[:, 0],
        label="wavy")


def ball_indicator(n: int, radius: float = 1.0) -> TestFunction:
    vn = unit_ball_volume(n)

    def oracle(p, ball, _r=radius, _n=n, _v=vn):
        if np.any(ball.center != 0.0):
            return None
        reach = min(ball.radius, _r)
        return (_v * reach**_n) ** (1.0 / p)

    return TestFunction(
        dimension=n,
        evaluator=lambda pts: (_norms(pts) <= radius).astype(float),
        support_radius=radius,
        label=f"unit_ball" if radius == 1.0 else f"ball:{radius:g}",
        breakpoint_spheres=((np.zeros(n), radius),),
        lp_ball_norm=oracle,
    )


def gaussian_bump(n: int, cutoff: float = 6.0) -> TestFunction:
    """exp(-|y|^2) truncated at `cutoff` (tail value ~ e^-36, below noise)."""

    def oracle(p, ball, _n=n, _c=cutoff):
        if np.any(ball.center != 0.0):
            return None
        from scipy.special import erf
        reach = min(ball.radius, _c)
        if _n == 1:
            integral = math.sqrt(math.pi / p) * erf(math.sqrt(p) * reach)
        else:
            integral = (math.pi / p) * (1.0 - math.exp(-p * reach * reach))
        return integral ** (1.0 / p)

    return TestFunction(
        dimension=n,
        evaluator=lambda pts: np.exp(-_norms(pts)**2) * (_norms(pts) <= cutoff),
        support_radius=cutoff,
        label="gaussian",
        breakpoint_spheres=((np.zeros(n), cutoff),),
        lp_ball_norm=oracle,
    )


def power_cusp(n: int, beta: float = 0.25, radius: float = 1.0) -> TestFunction:
    """|y|**(-beta) * chi_{B(0,radius)}; beta < n/p keeps the L_p norms finite."""
    if not 0.0 < beta < n:
        raise ValueError(f"cusp exponent must lie in (0, n), got {beta}")

    def oracle(p, ball, _b=beta, _r=radius, _n=n):
        if np.any(ball.center != 0.0) or _b * p >= _n:
            return None
        reach = min(ball.radius, _r)
        sphere = 2.0 if _n == 1 else 2.0 * math.pi
        return (sphere * reach**(_n - _b * p) / (_n - _b * p)) ** (1.0 / p)

    def ev(pts):
        rho = _norms(pts)
        with np.errstate(divide="ignore"):
            vals = np.where(rho > 0.0, rho**(-beta), 0.0)
        return vals * (rho <= radius)

    return TestFunction(
        dimension=n, evaluator=ev, support_radius=radius,
        label=f"cusp:{beta:g}",
        breakpoint_spheres=((np.zeros(n), radius),),
        center_power=beta,
        lp_ball_norm=oracle,
    )


def zero_function(n: int) -> TestFunction:
    return TestFunction(
        dimension=n, evaluator=lambda pts: np.zeros(np.atleast_2d(pts).shape[0]),
        support_radius=1.0, label="zero",
        lp_ball_norm=lambda p, ball: 0.0,
    )


def constant_symbol(n: int, value: float = 1.0) -> Symbol:
    return Symbol(
        dimension=n,
        evaluator=lambda pts: np.full(np.atleast_2d(pts).shape[0], value),
        label=f"const:{value:g}",
        ball_mean_oracle=lambda ball: value,
    )


def sign_symbol(n: int) -> Symbol:
    e1 = np.zeros(n)
    e1[0] = 1.0

    def mean(ball, _n=n):
        if ball.center[0] != 0.0:
            return None
        return 0.0

    return Symbol(
        dimension=n,
        evaluator=lambda pts: np.sign(np.atleast_2d(pts)[:, 0]),
        label="sign",
        breakpoint_planes=((e1, 0.0),),
        ball_mean_oracle=mean,
    )


def log_symbol(n: int, center=None) -> Symbol:
    c = np.zeros(n) if center is None else np.atleast_1d(np.asarray(center, dtype=float))

    def ev(pts):
        rho = np.linalg.norm(np.atleast_2d(pts) - c, axis=-1)
        with np.errstate(divide="ignore"):
            return np.log(rho)

    def mean(ball, _c=c, _n=n):
        if np.any(ball.center != _c):
            return None
        return math.log(ball.radius) - 1.0 / _n

    # the zero-radius sphere registers the blow-up point with the panel logic
    return Symbol(dimension=n, evaluator=ev, label="log",
                  breakpoint_spheres=((c, 0.0),), ball_mean_oracle=mean)


def clipped_linear_symbol(n: int, scale: float = 1.0) -> Symbol:
    """First coordinate clipped to [-scale, scale]."""
    def mean(ball):
        if ball.center[0] != 0.0:
            return None
        return 0.0

    return Symbol(
        dimension=n,
        evaluator=lambda pts: np.clip(np.atleast_2d(pts)[:, 0], -scale, scale),
        label="linear_clip",
        breakpoint_spheres=((np.zeros(n), scale),),
        ball_mean_oracle=mean,
    )


_WEIGHT_PATTERNS = [
    (re.compile(r"^power:(?P<a>[-+0-9.eE/]+)$"),
     lambda m: power_weight(_parse_number(m["a"]))),
    (re.compile(r"^powerlog:(?P<a>[-+0-9.eE/]+),(?P<c>[-+0-9.eE/]+)$"),
     lambda m: power_log_weight(_parse_number(m["a"]), _parse_number(m["c"]))),
    (re.compile(r"^one$"), lambda m: PhiWeight(lambda x0, r: np.ones_like(np.asarray(r, dtype=float)), label="one")),
    (re.compile(r"^logtail$"), lambda m: log_tail_weight()),
]


def _parse_number(text: str) -> float:
    """Float parser that also accepts exact fractions like 4/3."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def resolve_weight(name: str) -> PhiWeight:
    for pattern, build in _WEIGHT_PATTERNS:
        m = pattern.match(name.strip())
        if m:
            return build(m)
    raise KeyError(f"unknown weight id {name!r}; expected power:<a>, "
                   f"powerlog:<a>,<c>, one, or logtail")


@dataclass(frozen=True)
class Catalog:
    """Named collections addressable from the CLI configuration."""

    dimension: int
    kernels: dict
    functions: dict
    symbols: dict

    def kernel(self, name: str) -> RoughKernel:
        return self._get(self.kernels, name, "kernel")

    def function(self, name: str) -> TestFunction:
        return self._get(self.functions, name, "test function")

    def symbol(self, name: str) -> Symbol:
        if name.startswith("const:"):
            return constant_symbol(self.dimension, _parse_number(name[6:]))
        return self._get(self.symbols, name, "symbol")

    @staticmethod
    def weight(name: str) -> PhiWeight:
        return resolve_weight(name)

    @staticmethod
    def _get(table: dict, name: str, kind: str):
        try:
            return table[name]
        except KeyError:
            raise KeyError(f"unknown {kind} id {name!r}; "
                           f"known: {', '.join(sorted(table))}") from None


def builtin_catalog(n: int) -> Catalog:
    """All built-in kernels, test functions, and symbols for dimension n."""
    kernels = {
        "one": constant_kernel(n),
        "cos_dir": first_component_kernel(n),
        "sign_dir": sign_direction_kernel(n),
        "wavy": wavy_kernel(n),
    }
    functions = {
        "unit_ball": ball_indicator(n),
        "gaussian": gaussian_bump(n),
        "cusp": power_cusp(n),
        "zero": zero_function(n),
    }
    symbols = {
        "constant": constant_symbol(n),
        "sign": sign_symbol(n),
        "log": log_symbol(n),
        "linear_clip": clipped_linear_symbol(n),
    }
    return Catalog(n, kernels, functions, symbols)
