import math

import numpy as np
import pytest
from scipy.integrate import quad

from roughfrac.catalog import (ExponentSet, builtin_catalog, power_weight,
                               resolve_weight)
from roughfrac.geometry import log_grid, unit_sphere_measure
from roughfrac.operators import OperatorConfig
from roughfrac.checks import (RhsIntegralScheme, _BallNormFactor,
                              _power_log_tail, _tail_rhs,
                              check_campanato_cross_mean,
                              check_campanato_mean_gap,
                              check_campanato_scaled_oscillation,
                              check_commutator_local_bound,
                              check_kernel_shell_bound,
                              check_lebesgue_boundedness,
                              check_local_operator_bound,
                              check_morrey_boundedness, check_size_condition,
                              check_vanishing_implication,
                              check_weight_pair_condition,
                              check_weight_pair_vanishing)
from roughfrac.report import build_report


@pytest.fixture(scope="module")
def cat1():
    return builtin_catalog(1)


@pytest.fixture(scope="module")
def cat2():
    return builtin_catalog(2)


@pytest.fixture(scope="module")
def exps_m0():
    # single-operator tuple: p = q = 4/3, q1 = 4 at alpha = 1/2
    return ExponentSet.from_integrability(1, 0.5, 4.0, 4 / 3, (), (),
                                          "s_prime_le_q")


@pytest.fixture(scope="module")
def exps_m1():
    # commutator tuple: q = 4/3, q1 = 2 at alpha = 1/4
    return ExponentSet.from_integrability(1, 0.25, 4.0, 8 / 3, (8 / 3,),
                                          (0.0,), "s_prime_le_q")


@pytest.fixture(scope="module")
def cfg_half(cat1):
    return OperatorConfig(cat1.kernel("one"), 0.5)


@pytest.fixture(scope="module")
def cfg_quarter(cat1):
    return OperatorConfig(cat1.kernel("one"), 0.25)


class TestTailScheme:
    @pytest.mark.parametrize("power,logpow", [(-1.25, 0), (-1.125, 1),
                                              (-2.0, 2)])
    def test_closed_form_tail(self, power, logpow):
        # oracle by adaptive quadrature on a finite transform
        T, ref = 3.0, 0.7
        oracle = quad(lambda u: (1 + math.log(T / ref) + u)**logpow
                      * (T * math.exp(u))**(power + 1), 0, 200, limit=400)[0]
        assert _power_log_tail(T, power, logpow, ref) == pytest.approx(
            oracle, rel=1e-9)

    def test_pure_power_integral(self):
        scheme = RhsIntegralScheme()
        tail = scheme.integrate(2.0, lambda t: t**-2.25,
                                decay=(-2.25, 0, 1.0))
        assert tail.decayed
        assert tail.value == pytest.approx(2.0**-1.25 / 1.25, rel=1e-12)

    def test_slow_power_with_log(self):
        scheme = RhsIntegralScheme()
        r = 0.3
        tail = scheme.integrate(
            r, lambda t: (1 + np.log(t / r)) * t**-1.125,
            decay=(-1.125, 1, r))
        expected = r**-0.125 * (1 / 0.125 + 1 / 0.125**2)
        assert tail.value == pytest.approx(expected, rel=1e-10)

    def test_divergence_detected(self):
        scheme = RhsIntegralScheme(max_decades=6.0)
        tail = scheme.integrate(1.0, lambda t: 1.0 / t, decay=(-1.0, 0, 1.0))
        assert not tail.decayed
        assert tail.remainder == math.inf

    def test_divergence_detected_without_decay_hint(self):
        scheme = RhsIntegralScheme(max_decades=6.0)
        tail = scheme.integrate(1.0, lambda t: 1.0 / t)
        assert not tail.decayed

    def test_refinement_stability(self, cat1):
        f = cat1.function("unit_ball")
        factor = _BallNormFactor(f, 4 / 3, np.zeros(1))
        base = _tail_rhs(RhsIntegralScheme(), 0.25, factor, -1.25, 0)
        fine = _tail_rhs(RhsIntegralScheme().doubled(), 0.25, factor, -1.25, 0)
        assert abs(fine.value - base.value) / fine.value < 0.005

    def test_norm_factor_saturates(self, cat1):
        factor = _BallNormFactor(cat1.function("unit_ball"), 2.0, np.zeros(1))
        assert factor.saturation == 1.0
        vals = factor(np.array([0.25, 1.0, 7.0]))
        assert vals[0] == pytest.approx(math.sqrt(0.5), rel=1e-10)
        assert vals[1] == pytest.approx(vals[2])


class TestSizeCondition:
    def test_no_cancellation_gives_unit_ratio(self, cfg_half, cat1):
        rep = check_size_condition(cfg_half, cat1.function("unit_ball"))
        assert rep.verdict == "pass"
        assert rep.fitted_constant == pytest.approx(1.0, abs=1e-9)

    def test_zero_function_vacuous(self, cfg_half, cat1):
        rep = check_size_condition(cfg_half, cat1.function("zero"))
        assert rep.verdict == "pass"
        assert any("vacuous" in note for note in rep.notes)

    def test_oscillatory_input_stays_below_one(self, cfg_half, cat1):
        f = cat1.function("unit_ball").times_symbol(cat1.symbol("sign"))
        rep = check_size_condition(cfg_half, f)
        assert rep.verdict == "pass"
        assert rep.fitted_constant <= 1.0 + 1e-6

    def test_inside_sample_rejected(self, cfg_half, cat1):
        with pytest.raises(ValueError):
            check_size_condition(cfg_half, cat1.function("unit_ball"),
                                 x_samples=[np.array([0.5])])


class TestLebesgueBoundedness:
    def test_dilation_invariance(self, cfg_half, exps_m0, cat1):
        rep = check_lebesgue_boundedness(cfg_half, exps_m0,
                                         [cat1.function("unit_ball")])
        assert rep.verdict == "pass"
        ratios = [s["ratio"] for s in rep.samples]
        assert max(ratios) / min(ratios) - 1.0 < 1e-4

    def test_zero_family_vacuous(self, cfg_half, exps_m0, cat1):
        rep = check_lebesgue_boundedness(cfg_half, exps_m0,
                                         [cat1.function("zero")])
        assert rep.verdict == "pass"
        assert any("vacuous" in note for note in rep.notes)


class TestKernelShell:
    @pytest.mark.parametrize("n,s", [(1, 3.0), (2, 2.0)])
    def test_constant_kernel_ratio(self, n, s):
        cat = builtin_catalog(n)
        rep = check_kernel_shell_bound(cat.kernel("one"), s)
        # |B(t)|^(1/s) over ||Omega|| |B(2t)|^(1/s) with ||Omega|| = |S|^(1/s)
        expected = 2.0**(-n / s) * unit_sphere_measure(n)**(-1.0 / s)
        ratios = [smp["ratio"] for smp in rep.samples]
        assert rep.verdict == "pass"
        assert min(ratios) == pytest.approx(expected, rel=1e-9)
        assert max(ratios) == pytest.approx(expected, rel=1e-9)

    def test_direction_kernel_bounded_by_constant_case(self, cat2):
        rep = check_kernel_shell_bound(cat2.kernel("cos_dir"), 2.0)
        assert rep.verdict == "pass"
        assert rep.fitted_constant <= 2.0**(-1.0)  # 2^(-n/s) for n=2, s=2


class TestCampanatoChecks:
    def test_constant_symbol_vacuous(self, cat1):
        rep = check_campanato_mean_gap(cat1.symbol("const:3"), 1.0, 0.0)
        assert rep.verdict == "pass"
        assert any("vacuous" in n or "zero-norm" in n
                   for n in rep.notes + tuple(
                       s.get("note", "") for s in rep.samples))

    def test_mean_gap_log_bounded(self, cat1):
        rep = check_campanato_mean_gap(cat1.symbol("log"), 1.0, 0.0)
        assert rep.verdict == "pass"
        assert rep.fitted_constant <= math.e / 2 + 1e-3

    def test_cross_mean_diagonal_at_most_one(self, cat1):
        rep = check_campanato_cross_mean(cat1.symbol("log"), 1.0, 0.0)
        assert rep.verdict == "pass"
        diag = [s["ratio"] for s in rep.samples if s["r1"] == s["r2"]]
        assert max(diag) <= 1.0 + 1e-9

    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_cross_mean_log_stable_across_four_decades(self, cat1, p):
        grid = log_grid(1e-2, 1e2, 9)
        rep = check_campanato_cross_mean(cat1.symbol("log"), p, 0.0,
                                         pair_grid=grid)
        assert rep.verdict == "pass"
        assert rep.stability_ratio <= 2.0

    def test_scaled_oscillation_log_quadratic(self, cat1):
        rep = check_campanato_scaled_oscillation(cat1.symbol("log"), 2.0, 0.0)
        assert rep.verdict == "pass"
        # sqrt(2) * sqrt(1+L^2)/(1+L) peaks at L = 0
        assert rep.fitted_constant == pytest.approx(math.sqrt(2.0), rel=1e-5)


class TestLocalBounds:
    def test_closed_form_rhs(self, cat1):
        # for r >= 1/2 the tail has the closed form r^(1/4) * 2^(3/4) * 4 (2r)^(-1/4)
        f = cat1.function("unit_ball")
        factor = _BallNormFactor(f, 4 / 3, np.zeros(1))
        for r in (0.5, 1.0, 2.0):
            tail = _tail_rhs(RhsIntegralScheme(), r, factor, -1.25, 0)
            assert r**0.25 * tail.value == pytest.approx(
                4.0 * math.sqrt(2.0), rel=1e-8)

    def test_operator_bound_passes(self, cfg_half, exps_m0, cat1):
        rep = check_local_operator_bound(cfg_half, exps_m0,
                                         cat1.function("unit_ball"))
        assert rep.verdict == "pass"
        assert rep.stability_ratio <= 3.0
        # split diagnostics present and the far term vanishes once
        # the support sits inside the doubled ball
        for s in rep.samples:
            if s["r"] >= 0.5:
                assert s["far_term"] == pytest.approx(0.0, abs=1e-12)
            assert "near_ratio" in s

    def test_zero_function_vacuous(self, cfg_half, exps_m0, cat1):
        rep = check_local_operator_bound(cfg_half, exps_m0,
                                         cat1.function("zero"),
                                         split_diagnostics=False)
        assert rep.verdict == "pass"
        assert any("vacuous" in note for note in rep.notes)

    def test_commutator_bound_passes(self, cfg_quarter, exps_m1, cat1):
        rep = check_commutator_local_bound(cfg_quarter, exps_m1,
                                           [cat1.symbol("sign")],
                                           cat1.function("unit_ball"))
        assert rep.verdict == "pass"
        assert rep.stability_ratio <= 3.0

    def test_commutator_constant_symbol_vacuous(self, cfg_quarter, exps_m1, cat1):
        rep = check_commutator_local_bound(cfg_quarter, exps_m1,
                                           [cat1.symbol("const:2")],
                                           cat1.function("unit_ball"))
        assert rep.verdict == "pass"
        assert any("zero Campanato norm" in str(s.get("note", ""))
                   for s in rep.samples)

    def test_commutator_rejects_wrong_symbol_count(self, cfg_quarter, exps_m1, cat1):
        with pytest.raises(ValueError):
            check_commutator_local_bound(cfg_quarter, exps_m1, [],
                                         cat1.function("unit_ball"))


def _beta(exps):
    return exps.n * (1.0 / exps.q1 - 1.0 / exps.p_list[0])


class TestWeightPairCondition:
    SETS = [
        ExponentSet.from_integrability(1, 0.25, 16 / 3, 2.0, (16 / 5,), (0.0,),
                                       "s_prime_le_q"),
        ExponentSet.from_integrability(1, 0.25, 4.0, 8 / 3, (8 / 3,), (0.0,),
                                       "s_prime_le_q"),
        ExponentSet.from_integrability(2, 0.5, 3.0, 3.0, (3.0,), (0.0,),
                                       "s_prime_le_q"),
    ]

    @pytest.mark.parametrize("exps", SETS)
    def test_matched_power_pair_constant(self, exps):
        beta = _beta(exps)
        rep = check_weight_pair_condition(exps, power_weight(-exps.n / exps.p),
                                          power_weight(-beta))
        assert rep.verdict == "pass"
        assert rep.fitted_constant == pytest.approx(1 / beta + 1 / beta**2,
                                                    rel=0.02)
        assert rep.stability_ratio == pytest.approx(1.0, rel=1e-9)

    def test_constant_phi2_fails(self):
        exps = self.SETS[0]
        rep = check_weight_pair_condition(exps, power_weight(-0.5),
                                          resolve_weight("one"),
                                          r_grid=log_grid(1e-6, 1.0, 19))
        assert rep.verdict == "fail"

    def test_q1_lt_s_regime_closed_form(self):
        # (48)-form with the r^(n/s) factor: q1 = 16/9 < s = 16 and
        # c = 9/16 - (1/16 + 5/16) = 3/16
        exps = ExponentSet.from_integrability(1, 0.25, 16.0, 2.0, (16 / 5,),
                                              (0.0,), "q1_lt_s")
        c = exps.n * (1 / exps.q1 - (1 / exps.s + exps.sum_lambda
                                     + exps.sum_inv_p))
        assert c == pytest.approx(3.0 / 16.0)
        phi2 = power_weight(-c - exps.n / exps.s)
        rep = check_weight_pair_condition(exps, power_weight(-0.5), phi2)
        assert rep.verdict == "pass"
        assert rep.fitted_constant == pytest.approx(1 / c + 1 / c**2, rel=0.02)

    def test_divergent_pair_fails(self):
        # q1 = 16/9 < s = 2: c = 9/16 - (1/2 + 5/16) = -1/4: divergent tail
        exps = ExponentSet.from_integrability(1, 0.25, 2.0, 2.0, (16 / 5,),
                                              (0.0,), "q1_lt_s")
        rep = check_weight_pair_condition(exps, power_weight(-0.5),
                                          power_weight(-0.25))
        assert rep.verdict == "fail"
        assert any("divergent" in n for n in rep.notes)

    def test_nonpositive_weight_rejected(self):
        from roughfrac.catalog import PhiWeight
        bad = PhiWeight(lambda x0, r: np.asarray(r) - 0.5, label="signchange")
        with pytest.raises(ValueError):
            check_weight_pair_condition(self.SETS[0], bad, power_weight(-0.25))

    def test_narrow_grid_rejected(self):
        with pytest.raises(ValueError):
            check_weight_pair_condition(self.SETS[0], power_weight(-0.5),
                                        power_weight(-0.25),
                                        r_grid=log_grid(0.1, 1.0, 5))


@pytest.fixture(scope="module")
def exps_vanishing():
    return ExponentSet.from_integrability(1, 0.25, 21.0, 1.5, (3.5,), (0.0,),
                                          "s_prime_le_q")


class TestWeightPairVanishing:
    def test_matched_pair_passes(self, exps_vanishing):
        beta = _beta(exps_vanishing)
        rep = check_weight_pair_vanishing(
            exps_vanishing, power_weight(-exps_vanishing.n / exps_vanishing.p),
            power_weight(-beta))
        assert rep.verdict == "pass"
        deltas = [s for s in rep.samples if s.get("part") == "delta_tail"]
        values = [s["value"] for s in deltas]
        assert values == sorted(values, reverse=True)  # nested tails

    def test_log_weight_fails_limit(self, exps_vanishing):
        rep = check_weight_pair_vanishing(
            exps_vanishing, power_weight(-exps_vanishing.n / exps_vanishing.p),
            resolve_weight("logtail"))
        assert rep.verdict == "fail"
        assert any("log limit" in n for n in rep.notes)
        # the reported trend value approaches 1, the no-vanishing signature
        limit = [s for s in rep.samples if s.get("part") == "log_limit"][0]
        assert limit["value_at_rmin"] == pytest.approx(1.0, rel=1e-2)


class TestEndToEnd:
    def test_morrey_boundedness_scale_invariant(self, exps_vanishing, cat1):
        beta = _beta(exps_vanishing)
        cfg = OperatorConfig(cat1.kernel("one"), exps_vanishing.alpha)
        rep = check_morrey_boundedness(
            cfg, exps_vanishing, [cat1.symbol("sign")],
            cat1.function("unit_ball"),
            power_weight(-exps_vanishing.n / exps_vanishing.p),
            power_weight(-beta))
        assert rep.verdict == "pass"
        ratios = [s["ratio"] for s in rep.samples]
        assert max(ratios) / min(ratios) - 1.0 < 1e-6

    def test_morrey_boundedness_requires_valid_pair(self, exps_vanishing, cat1):
        cfg = OperatorConfig(cat1.kernel("one"), exps_vanishing.alpha)
        with pytest.raises(ValueError, match="weight-pair"):
            check_morrey_boundedness(
                cfg, exps_vanishing, [cat1.symbol("sign")],
                cat1.function("unit_ball"),
                power_weight(-exps_vanishing.n / exps_vanishing.p),
                resolve_weight("one"))

    def test_vanishing_implication_passes(self, exps_vanishing, cat1):
        beta = _beta(exps_vanishing)
        cfg = OperatorConfig(cat1.kernel("one"), exps_vanishing.alpha)
        rep = check_vanishing_implication(
            cfg, exps_vanishing, [cat1.symbol("sign")],
            cat1.function("unit_ball"),
            power_weight(-exps_vanishing.n / exps_vanishing.p),
            power_weight(-beta))
        assert rep.verdict == "pass"
        assert rep.parameters["output_smallest"] < 1e-2 * rep.parameters["output_sup"]

    def test_vanishing_implication_needs_vanishing_input(self, exps_vanishing, cat1):
        beta = _beta(exps_vanishing)
        cfg = OperatorConfig(cat1.kernel("one"), exps_vanishing.alpha)
        # phi1 with 1/phi1 -> constant: the input functional does not vanish,
        # but the pair conditions themselves still hold
        from roughfrac.catalog import PhiWeight
        flat = PhiWeight(
            lambda x0, r: np.minimum(np.asarray(r, dtype=float), 1.0)
            ** (1.0 / 1.5) * np.asarray(r, dtype=float)**(-1.0 / 1.5),
            label="plateau")
        with pytest.raises(ValueError, match="not vanishing"):
            check_vanishing_implication(
                cfg, exps_vanishing, [cat1.symbol("sign")],
                cat1.function("unit_ball"), flat, power_weight(-beta))


class TestReportInvariants:
    def test_fitted_dominates_samples(self, cat1):
        rep = check_campanato_mean_gap(cat1.symbol("log"), 1.0, 0.0)
        for s in rep.samples:
            if "ratio" in s:
                assert rep.fitted_constant >= s["ratio"]

    def test_vacuous_discipline(self):
        rep = build_report("demo", {}, [])
        assert rep.verdict == "pass"
        assert any("vacuous" in n for n in rep.notes)

    def test_nonpositive_rhs_with_positive_lhs_fails(self):
        rep = build_report("demo", {}, [{"lhs": 1.0, "rhs": 0.0}])
        assert rep.verdict == "fail"

    def test_stability_ceiling_enforced(self):
        samples = [{"lhs": v, "rhs": 1.0, "ratio": v} for v in (1.0, 1.0, 10.0)]
        rep = build_report("demo", {}, samples, ceiling=3.0)
        assert rep.verdict == "fail"

    def test_bitwise_reproducibility(self, cfg_half, exps_m0, cat1):
        f = cat1.function("unit_ball")
        rep1 = check_local_operator_bound(cfg_half, exps_m0, f,
                                          split_diagnostics=False)
        rep2 = check_local_operator_bound(cfg_half, exps_m0, f,
                                          split_diagnostics=False)
        assert rep1.fitted_constant == rep2.fitted_constant
        assert rep1.to_json_dict() == rep2.to_json_dict()
