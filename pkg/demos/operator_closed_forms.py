"""Walk through the operator layer on inputs with known closed forms.

The fractional integral of the unit-interval indicator has elementary
antiderivatives, so every value printed here can be checked by hand; the
same inputs then feed the maximal operator and the commutator identities.
"""

import math

import numpy as np

from roughfrac import (OperatorConfig, builtin_catalog, fractional_integral,
                       fractional_maximal, majorant_potential,
                       maximal_domination_constant, multilinear_commutator)

cat = builtin_catalog(1)
f = cat.function("unit_ball")
cfg = OperatorConfig(cat.kernel("one"), alpha=0.5)

print("fractional integral of the indicator of [-1, 1] at alpha = 1/2")
cases = [
    (0.0, 4.0, "int |y|^(-1/2) dy over [-1,1]"),
    (3.0, 4.0 - 2.0 * math.sqrt(2.0), "2(sqrt(4) - sqrt(2))"),
    (0.5, 2.0 * (math.sqrt(0.5) + math.sqrt(1.5)), "2(sqrt(1/2) + sqrt(3/2))"),
]
for x, expected, formula in cases:
    value = fractional_integral(cfg, f, [x])
    print(f"  x = {x:4.1f}: {value:.12f}   expected {expected:.12f}   [{formula}]")

print()
print("fractional maximal operator at the origin")
maximal = fractional_maximal(cfg, f, [0.0])
print(f"  sup_t (2t)^(-1/2) * 2 min(t,1) = sqrt(2): computed {maximal:.12f}")

majorant = majorant_potential(cfg, f, [0.0])
const = maximal_domination_constant(1, 0.5)
print(f"  majorant value {majorant:.6f}; domination bound "
      f"{const:.6f} * {majorant:.6f} = {const * majorant:.6f} >= {maximal:.6f}")

print()
print("single-symbol commutator identity [b, T]f = b T f - T(b f)")
b = cat.symbol("sign")
for x in (0.7, -0.4):
    direct = multilinear_commutator(cfg, [b], f, [x])
    via = (float(b(np.array([[x]]))[0]) * fractional_integral(cfg, f, [x])
           - fractional_integral(cfg, f.times_symbol(b), [x]))
    print(f"  x = {x:5.2f}: direct {direct:.10f}   product form {via:.10f}")

print()
print("constant symbols annihilate the commutator")
for symbols in (["const:5"], ["sign", "const:5"]):
    value = multilinear_commutator(cfg, [cat.symbol(s) for s in symbols],
                                   f, [0.4])
    print(f"  b = {symbols}: {value:.2e}")
