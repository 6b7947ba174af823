"""Bounded searches for regularity properties of chain models.

Every search enumerates reduced words up to a length bound and inspects their
actions on a finite truncation, so a negative answer always means "nothing
found up to these bounds".  Positive answers come with a witness object whose
``verify(model)`` re-checks it level by level from the model primitives.

A word counts as trivial on a cylinder only if it fixes every point of the
cylinder at a strictly deeper level; a cell at the deepest tested level is just
a fixed point of the finite permutation and is never accepted as a cylinder of
triviality.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .clopen import Clopen, translate_clopen
from .model import (
    DEFAULT_BUDGET,
    InvalidInput,
    PathPoint,
    _word_images,
    inverse_word,
    iter_word_images,
    level_image,
)


def _trivial_on(perm, points):
    return bool(np.all(perm[points] == points))


def _same_model(model, clopen):
    if clopen.model is not model and not model.same_tree(clopen.model):
        raise InvalidInput("clopen does not belong to this model's tree")


def _trivial_through(model, word, clopen, depth):
    """Word fixes every point of ``clopen`` at every level from its resolution to ``depth``."""
    for ell in range(clopen.level, depth + 1):
        perm = _word_images(model, word, ell)
        if not _trivial_on(perm, clopen.points(ell)):
            return False
    return True


def _moves_some(model, word, clopen, depth):
    perm = _word_images(model, word, depth)
    return not _trivial_on(perm, clopen.points(depth))


@dataclass
class AdaptedSetReport:
    clopen: Clopen
    bound: int
    adapted: bool
    witness: tuple | None = None
    translate_count: int = 0

    @property
    def verdict(self):
        return f"adapted-up-to-bound(L={self.bound})" if self.adapted else "violated"

    def verify(self, model):
        if self.witness is None:
            return self.adapted
        image = translate_clopen(model, self.witness, self.clopen)
        return not image.isdisjoint(self.clopen) and image != self.clopen


def is_adapted(model, clopen, max_len, budget=DEFAULT_BUDGET):
    """Look for a word moving ``clopen`` onto a set that overlaps it without equalling it.

    Also counts the distinct translates seen, the observed index of the
    stabilizer at this truncation.
    """
    _same_model(model, clopen)
    if clopen.is_empty():
        raise InvalidInput("adapted sets must be non-empty")
    cells = np.array(clopen.sorted_cells(), dtype=np.int64)
    base = clopen.cells
    translates = set()
    witness = None
    for w, perm in iter_word_images(model, max_len, clopen.level, budget):
        image = frozenset(perm[cells].tolist())
        translates.add(image)
        if witness is None and image != base and image & base:
            witness = w
    return AdaptedSetReport(clopen, max_len, witness is None, witness, len(translates))


def fixed_cylinder_set(model, word, level):
    """Cells of ``X_level`` fixed by ``word``: an over-approximation of Fix(word)."""
    img = level_image(model, word, level)
    return Clopen(model, level, np.flatnonzero(img.images == np.arange(len(img))).tolist())


@dataclass
class SearchResult:
    """Outcome of a bounded search: a witness, or an up-to-bounds verdict."""

    verdict: str
    witness: object = None
    bounds: dict = field(default_factory=dict)

    @property
    def found(self):
        return self.witness is not None

    def describe(self):
        b = ", ".join(f"{k}={v}" for k, v in self.bounds.items())
        return f"{self.verdict}({b})"


@dataclass(frozen=True)
class FixedCylinderWitness:
    """``word`` is trivial on ``cylinder`` through ``depth`` but not the identity at ``depth``."""

    word: tuple
    cylinder: Clopen
    depth: int

    kind = "freeness-witness"

    def verify(self, model):
        if not self.word or self.cylinder.is_empty() or self.cylinder.level >= self.depth:
            return False
        if not _trivial_through(model, self.word, self.cylinder, self.depth):
            return False
        return not level_image(model, self.word, self.depth).is_identity()


def _best_cell(moved, anc, allowed, size):
    """Smallest allowed cell of the coarse level all of whose points are unmoved."""
    bad = np.bincount(anc, weights=moved, minlength=size)
    ok = (bad == 0) & allowed
    hits = np.flatnonzero(ok)
    return int(hits[0]) if hits.size else None


def topological_freeness_check(model, max_len, depth, budget=DEFAULT_BUDGET):
    """Search for a nontrivial word that is trivial on some cylinder.

    Words are nontrivial at ``depth``; candidate cylinders are cells of levels
    ``1 .. depth - 1``.  Candidates are scanned coarsest level first, then by
    cell index, then by word order; the first hit is returned.
    """
    model.check_level(depth)
    if depth < 2:
        raise InvalidInput("freeness check needs depth >= 2")
    n = model.size(depth)
    ident = np.arange(n)
    ancs = {r: model.ancestors(depth, r) for r in range(1, depth)}
    allowed = {r: np.ones(model.size(r), dtype=bool) for r in range(1, depth)}
    best = None
    for idx, (w, perm) in enumerate(iter_word_images(model, max_len, depth, budget)):
        moved = perm != ident
        if not moved.any():
            continue
        for r in range(1, depth):
            if best is not None and r > best[0][0]:
                break
            c = _best_cell(moved, ancs[r], allowed[r], model.size(r))
            if c is not None:
                key = (r, c, idx)
                if best is None or key < best[0]:
                    best = (key, w)
                break
    bounds = {"L": max_len, "D": depth}
    if best is None:
        return SearchResult("free-up-to-bounds", None, bounds)
    (r, c, _), w = best
    return SearchResult("violated", FixedCylinderWitness(w, Clopen.cell(model, r, c), depth), bounds)


@dataclass(frozen=True)
class LqaWitness:
    """``word`` is trivial on ``inner`` and nontrivial on ``outer`` (inner within outer)."""

    word: tuple
    inner: Clopen
    outer: Clopen
    depth: int

    kind = "lqa-witness"

    def verify(self, model):
        if self.inner.is_empty() or not self.inner <= self.outer or self.inner.level >= self.depth:
            return False
        return _trivial_through(model, self.word, self.inner, self.depth) and _moves_some(
            model, self.word, self.outer, self.depth
        )


def lqa_violation_search(model, outer, max_len, depth, budget=DEFAULT_BUDGET):
    """Search for a word trivial on a cylinder ``V`` inside ``outer`` but not on ``outer``.

    ``depth`` bounds the resolution of the candidate cylinders ``V``; actions
    are compared at the model's deepest level, so ``V`` ranges over cells of
    levels ``outer.level .. min(depth, model.depth - 1)``.  Scan order: level,
    then cell, then word.
    """
    _same_model(model, outer)
    model.check_level(depth)
    if outer.is_empty():
        raise InvalidInput("LQA search needs a non-empty outer set")
    if outer.level > depth:
        raise InvalidInput(f"outer set resolution {outer.level} exceeds depth bound {depth}")
    report = is_adapted(model, outer, max_len, budget)
    if not report.adapted:
        warnings.warn(f"outer set {outer!r} is not adapted (witness {model.fmt(report.witness)})", stacklevel=2)
    top = model.depth
    n = model.size(top)
    ident = np.arange(n)
    outer_pts = outer.points(top)
    levels = range(outer.level, min(depth, top - 1) + 1)
    ancs = {r: model.ancestors(top, r) for r in levels}
    allowed = {}
    for r in levels:
        mask = np.zeros(model.size(r), dtype=bool)
        mask[outer.points(r)] = True
        allowed[r] = mask
    best = None
    for idx, (w, perm) in enumerate(iter_word_images(model, max_len, top, budget)):
        moved = perm != ident
        if not moved[outer_pts].any():
            continue
        for r in levels:
            if best is not None and r > best[0][0]:
                break
            c = _best_cell(moved, ancs[r], allowed[r], model.size(r))
            if c is not None:
                key = (r, c, idx)
                if best is None or key < best[0]:
                    best = (key, w)
                break
    bounds = {"L": max_len, "D": depth}
    if best is None:
        return SearchResult("lqa-up-to-bounds", None, bounds)
    (r, c, _), w = best
    return SearchResult("violated", LqaWitness(w, Clopen.cell(model, r, c), outer, top), bounds)


@dataclass(frozen=True)
class NormalityWitness:
    """``kernel_word`` is trivial on ``inner``; its conjugate by ``conjugator`` is not."""

    conjugator: tuple
    kernel_word: tuple
    inner: Clopen
    outer: Clopen
    depth: int

    kind = "normality-witness"

    def conjugate(self, model):
        u = self.conjugator
        return u + self.kernel_word + inverse_word(model.alphabet, u)

    def verify(self, model):
        if not self.inner <= self.outer or self.inner.level >= self.depth:
            return False
        if translate_clopen(model, self.conjugator, self.outer) != self.outer:
            return False
        if not _trivial_through(model, self.kernel_word, self.inner, self.depth):
            return False
        return _moves_some(model, self.conjugate(model), self.inner, self.depth)


def kernel_normality_check(model, inner, outer, max_len, depth, budget=DEFAULT_BUDGET):
    """Is the set of words trivial on ``inner`` closed under conjugation by stabilizer words of ``outer``?

    Triviality is tested at ``depth``, which must be deeper than ``inner``'s
    resolution.  Kernel words are the outer loop, conjugators the inner one.
    """
    _same_model(model, inner)
    _same_model(model, outer)
    model.check_level(depth)
    if inner.is_empty() or not inner <= outer:
        raise InvalidInput("need a non-empty inner set contained in the outer set")
    if inner.level >= depth:
        raise InvalidInput(f"depth {depth} must exceed the inner set's resolution {inner.level}")
    for s in (inner, outer):
        report = is_adapted(model, s, max_len, budget)
        if not report.adapted:
            warnings.warn(f"{s!r} is not adapted (witness {model.fmt(report.witness)})", stacklevel=2)
    inner_pts = inner.points(depth)
    outer_pts = outer.points(depth)
    outer_set = set(outer_pts.tolist())
    kernel, stab = [], []
    for w, perm in iter_word_images(model, max_len, depth, budget):
        if _trivial_on(perm, inner_pts):
            kernel.append((w, perm))
        if w and set(perm[outer_pts].tolist()) == outer_set:
            stab.append((w, perm))
    bounds = {"L": max_len, "D": depth}
    for w, pw in kernel:
        if not w:
            continue
        for u, pu in stab:
            conj = pu[pw[np.argsort(pu)]]
            if not _trivial_on(conj, inner_pts):
                return SearchResult("violated", NormalityWitness(u, w, inner, outer, depth), bounds)
    return SearchResult("normal-up-to-bounds", None, bounds)


@dataclass
class ChainStep:
    index: int
    included: bool
    strict: bool
    separating_word: tuple | None


@dataclass
class ChainReport:
    """Subgroups ``H_i`` of words trivial on the cylinders ``U_{l_i}`` around a point."""

    point: PathPoint
    depths: tuple
    bound: int
    subgroups: list
    steps: list

    @property
    def strict_increases(self):
        return [s for s in self.steps if s.strict]

    def verify(self, model):
        """Replay every separating word against the two cylinders it separates."""
        top = model.depth
        for s in self.steps:
            if not s.strict:
                continue
            lo, hi = self.depths[s.index], self.depths[s.index + 1]
            u_lo = Clopen.cell(model, lo, self.point[lo])
            u_hi = Clopen.cell(model, hi, self.point[hi])
            w = s.separating_word
            if not _trivial_through(model, w, u_hi, top) or _trivial_through(model, w, u_lo, top):
                return False
        return True


def ascending_chain_probe(model, point, depths, max_len, budget=DEFAULT_BUDGET):
    """Compare the groups of words trivial on shrinking cylinders around ``point``.

    Each depth must be below the model depth so that triviality is observed
    through at least one refinement.
    """
    depths = tuple(int(d) for d in depths)
    if not depths or any(b <= a for a, b in zip(depths, depths[1:])):
        raise InvalidInput("depths must be a non-empty strictly increasing sequence")
    top = model.depth
    if depths[0] < 0 or depths[-1] >= top:
        raise InvalidInput(f"depths must lie in 0..{top - 1}")
    point.check(model)
    if point.depth < depths[-1]:
        raise InvalidInput("point path is shorter than the deepest probe level")
    pts = [Clopen.cell(model, d, point[d]).points(top) for d in depths]
    subgroups = [[] for _ in depths]
    for w, perm in iter_word_images(model, max_len, top, budget):
        for i, p in enumerate(pts):
            if _trivial_on(perm, p):
                subgroups[i].append(w)
    steps = []
    for i in range(len(depths) - 1):
        lo, hi = set(subgroups[i]), set(subgroups[i + 1])
        extra = [w for w in subgroups[i + 1] if w not in lo]
        steps.append(ChainStep(i, lo <= hi, bool(extra), extra[0] if extra else None))
    return ChainReport(point, depths, max_len, subgroups, steps)


@dataclass(frozen=True)
class GermWitness:
    """Finite shadow of a non-Hausdorff germ at ``point``.

    ``word`` fixes the path of ``point``; for every level ``l`` in
    ``0 .. depth - 3`` it moves something in the cylinder ``U_l`` around the
    point, yet ``trivial_cells[l]`` is a cell of level ``depth - 1`` inside
    ``U_l``, off the point's path, on which the word is the identity.
    """

    word: tuple
    point: PathPoint
    trivial_cells: tuple
    depth: int

    kind = "germ-witness"

    def verify(self, model):
        top = self.depth
        if top != model.depth or top < 3 or len(self.trivial_cells) != top - 2:
            return False
        for ell in range(top + 1):
            if level_image(model, self.word, ell)(self.point[ell]) != self.point[ell]:
                return False
        for ell, cell in enumerate(self.trivial_cells):
            around = Clopen.cell(model, ell, self.point[ell])
            c = Clopen.cell(model, top - 1, cell)
            if cell == self.point[top - 1] or not c <= around:
                return False
            if not _trivial_through(model, self.word, c, top):
                return False
            if not _moves_some(model, self.word, around, top):
                return False
        return True


def germ_hausdorff_witness(model, point, max_len, budget=DEFAULT_BUDGET):
    """Search for a word whose germ at ``point`` is a finite-depth non-Hausdorff shadow."""
    top = model.depth
    if top < 3:
        raise InvalidInput("germ search needs model depth >= 3")
    point.check(model)
    if point.depth != top:
        raise InvalidInput("point must be given at full model depth")
    ident = np.arange(model.size(top))
    anc_fine = model.ancestors(top, top - 1)
    n_fine = model.size(top - 1)
    around = [Clopen.cell(model, ell, point[ell]).points(top) for ell in range(top - 2)]
    inside = []
    for ell in range(top - 2):
        mask = np.zeros(n_fine, dtype=bool)
        mask[Clopen.cell(model, ell, point[ell]).points(top - 1)] = True
        mask[point[top - 1]] = False
        inside.append(mask)
    x = point[top]
    for w, perm in iter_word_images(model, max_len, top, budget):
        if not w or perm[x] != x:
            continue
        moved = perm != ident
        unmoved_cells = np.bincount(anc_fine, weights=moved, minlength=n_fine) == 0
        cells = []
        for ell in range(top - 2):
            if not moved[around[ell]].any():
                break
            hits = np.flatnonzero(unmoved_cells & inside[ell])
            if not hits.size:
                break
            cells.append(int(hits[0]))
        else:
            return SearchResult("violated", GermWitness(w, point, tuple(cells), top), {"L": max_len})
    return SearchResult("none-up-to-bounds", None, {"L": max_len})


def verify_witness(model, witness):
    return witness.verify(model)
