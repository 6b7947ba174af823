"""
Automaton groups and tree export
================================

Self-similar groups are given by wreath recursion: a root permutation and
one section state per letter.  The builder unrolls the recursion level by
level; ``export_tree`` writes the cell tree in DOT form.
"""

import numpy as np

from cantor_actions import AutomatonSpec, build_automaton_group, build_odometer, export_tree

adding = AutomatonSpec(2, {"e": ((0, 1), ("e", "e")), "a": ((1, 0), ("e", "a"))})
m = build_automaton_group(adding, 3, name="adding-machine")
o = build_odometer((2, 2, 2))
same = all(np.array_equal(m.levels[i].images, o.levels[i].images) for i in range(4))
print("adding machine equals the odometer:", same)

print(export_tree(m, 2))
