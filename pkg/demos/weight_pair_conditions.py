"""The weight-pair tail conditions, where the fitted constant is known.

For power weights matched to the exponent tuple the tail integral has the
closed form r^(-beta) (1/beta + 1/beta^2), so the checker's fitted constant
can be compared digit by digit; a constant phi2 then shows what a failing
pair looks like.
"""

from roughfrac import (ExponentSet, check_weight_pair_condition,
                       check_weight_pair_vanishing, log_grid, power_weight,
                       resolve_weight)

exps = ExponentSet.from_integrability(
    n=1, alpha=0.25, s=16 / 3, p=2.0, p_list=(16 / 5,), lambda_list=(0.0,),
    regime="s_prime_le_q")
beta = exps.n * (1 / exps.q1 - 1 / exps.p_list[0])
phi1 = power_weight(-exps.n / exps.p)
phi2 = power_weight(-beta)

print(f"exponent tuple: q = {exps.q:.6f}, q1 = {exps.q1:.6f}, beta = {beta}")
rep = check_weight_pair_condition(exps, phi1, phi2)
print(f"matched pair ({phi1.label}, {phi2.label}): verdict {rep.verdict}")
print(f"  fitted constant {rep.fitted_constant:.12f} "
      f"(closed form 1/beta + 1/beta^2 = {1 / beta + 1 / beta**2})")
print(f"  stability ratio {rep.stability_ratio:.6f}")

rep = check_weight_pair_condition(exps, phi1, resolve_weight("one"),
                                  r_grid=log_grid(1e-6, 1.0, 19))
print(f"constant phi2: verdict {rep.verdict} "
      f"(ratios grow like r^(-beta) toward zero)")

print()
print("vanishing-theorem conditions for the same family")
exps9 = ExponentSet.from_integrability(
    n=1, alpha=0.25, s=21.0, p=1.5, p_list=(3.5,), lambda_list=(0.0,),
    regime="s_prime_le_q")
beta9 = exps9.n * (1 / exps9.q1 - 1 / exps9.p_list[0])
rep = check_weight_pair_vanishing(exps9, power_weight(-exps9.n / exps9.p),
                                  power_weight(-beta9))
print(f"matched pair: verdict {rep.verdict}")
for s in rep.samples:
    if s.get("part") == "delta_tail":
        print(f"  delta = {s['delta']:<5g} tail constant {s['value']:.6f}")

rep = check_weight_pair_vanishing(exps9, power_weight(-exps9.n / exps9.p),
                                  resolve_weight("logtail"))
print(f"log-growth phi2: verdict {rep.verdict} "
      f"(the log-limit ratio tends to 1 instead of 0)")
