"""
Odometers as group chains
=========================

A chain model stores the action of each generator on every finite level
``X_l = G/G_l`` together with the maps sending a point to its parent.
The 2-adic odometer is the simplest case: ``t`` adds one modulo ``2**l``.
"""

from cantor_actions import Clopen, build_odometer, is_adapted, level_image, validate_chain

m = build_odometer((2, 2, 2, 2))
print(m)

# every level passes the structural checks (bijective, transitive, compatible)
report = validate_chain(m)
print("valid:", report.valid)
for line in report.lines()[:6]:
    print("  ", line)

# words act on the left; t^3 shifts every point of X_4 = Z/16 by three
t3 = level_image(m, m.word("t^3"), 4)
print("t^3 on X_4:", t3.images.tolist())

# a union of cylinders is adapted when each translate is equal to it or disjoint
evens = Clopen(m, 2, {0, 2})
print("{0,2} mod 4:", is_adapted(m, evens, 5).verdict)
print("{0,1} mod 4:", is_adapted(m, Clopen(m, 2, {0, 1}), 5).verdict)
