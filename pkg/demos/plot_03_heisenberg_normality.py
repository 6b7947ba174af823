"""
Kernels of restriction in a nilpotent and a branch group
========================================================

For nested cylinders ``V`` inside ``U``, the words acting trivially on ``V``
should be closed under conjugation by words stabilizing ``U``.  The discrete
Heisenberg group passes at small bounds; the Grigorchuk group does not.
"""

from cantor_actions import Clopen, build_grigorchuk, build_heisenberg, kernel_normality_check

h = build_heisenberg(2, 3, 3)
print(h)
res = kernel_normality_check(h, Clopen.basepoint_cylinder(h, 2), Clopen.basepoint_cylinder(h, 1), 3, 3)
print("heisenberg:", res.describe())

g = build_grigorchuk(4)
res = kernel_normality_check(g, Clopen.cell(g, 2, 0), Clopen.cell(g, 1, 0), 4, 4)
w = res.witness
print("grigorchuk:", res.describe())
print("  kernel word", g.fmt(w.kernel_word), "conjugated by", g.fmt(w.conjugator), "->", g.fmt(w.conjugate(g)))
print("  replays:", w.verify(g))
