"""
Twisting an action on an adapted set
====================================

Adding a generator that acts as ``t^-2`` on the even residues and as the
identity elsewhere keeps the orbit structure (the new action is orbit
equivalent to the old one) but destroys topological freeness.
"""

from cantor_actions import (
    Clopen,
    build_odometer,
    coe_check,
    identity_matching,
    restricted_holonomy,
    return_equivalence_check,
    topological_freeness_check,
    twist_action,
)

m = build_odometer((2, 2, 2))
U = Clopen.cell(m, 1, 0)
tw = twist_action(m, U, {"t^2": "t^-2"})
print(tw)

res = coe_check(m, tw, 2, 3)
print(res.describe(), "tw1 ->", res.certificate.backward["tw1"].describe())
free = topological_freeness_check(tw, 2, 3)
print("freeness:", free.describe(), tw.fmt(free.witness.word), "on", free.witness.cylinder.render())

# restricted holonomy of U: distinct restrictions of stabilizer words
H = restricted_holonomy(m, U, 4, 3)
for restriction, word in H.maps.items():
    print(f"  {m.fmt(word):8s} {restriction}")

ok = return_equivalence_check(m, U, m, U, identity_matching(U, 3), 4, 3)
print("identity matching:", ok.describe())
small = build_odometer((2, 2))
full = Clopen.full(small)
bad = return_equivalence_check(small, full, small, full, {0: 1, 1: 0, 2: 2, 3: 3}, 3, 2)
print("swapped cells:", bad.describe(), "-", bad.failure.describe(small))
