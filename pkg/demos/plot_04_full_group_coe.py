"""
Orbit equivalence without conjugacy
===================================

Z/4 and the Klein four-group, each times the same odometer, act on one tree.
Their level-1 images are not isomorphic (exponent 4 versus 2), yet every
generator of one is a piecewise word in the other: they generate the same
full group at this truncation.
"""

from cantor_actions import (
    build_product_toy,
    coe_check,
    compose_piecewise,
    cyclic_table,
    generated_group,
    group_exponent,
    klein_table,
)

m1, m2 = build_product_toy(4, cyclic_table(4), klein_table(), (2, 2))
print("exponents:", group_exponent(generated_group(m1, 1)), group_exponent(generated_group(m2, 1)))

res = coe_check(m1, m2, 4, 3)
print(res.describe())
cert = res.certificate
for sym, pe in cert.forward.items():
    print(f"  {sym:3s} ->", pe.describe())
print("certificate re-verifies:", cert.verify(m1, m2))

# the +1 step squared is +2: two distinct piece words, same action as g2
step = cert.forward["g1"]
print("step o step:", compose_piecewise(step, step).describe())
