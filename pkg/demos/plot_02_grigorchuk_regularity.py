"""
Local quasi-analyticity fails for the Grigorchuk group
======================================================

The generator ``d = (1, b)`` acts trivially on the left half of the binary
tree but not on the whole tree.  The bounded searches find this and
return witnesses that can be replayed against the model.
"""

from cantor_actions import (
    Clopen,
    PathPoint,
    ascending_chain_probe,
    build_grigorchuk,
    build_odometer,
    germ_hausdorff_witness,
    lqa_violation_search,
    topological_freeness_check,
)

g = build_grigorchuk(4)

res = lqa_violation_search(g, Clopen.full(g), 1, 2)
print(res.describe(), "word:", g.fmt(res.witness.word), "trivial on:", res.witness.inner.render())
print("replays:", res.witness.verify(g))

res = topological_freeness_check(g, 1, 3)
print("freeness:", res.describe(), g.fmt(res.witness.word), res.witness.cylinder.render())

# words trivial on shrinking cylinders around the leftmost path form a growing chain
chain = ascending_chain_probe(g, PathPoint.from_point(g, 0), (1, 2, 3), 4)
for step in chain.steps:
    sep = g.fmt(step.separating_word) if step.separating_word else "-"
    print("step", step.index, "strict" if step.strict else "equal", sep)

# finite shadow of a non-Hausdorff germ at the rightmost path
germ = germ_hausdorff_witness(g, PathPoint.from_point(g, 15), 4)
print("germ:", germ.describe(), g.fmt(germ.witness.word))

# the odometer, by contrast, is free at every tested bound
o = build_odometer((2, 2, 2, 2))
print("odometer:", topological_freeness_check(o, 8, 4).describe())
