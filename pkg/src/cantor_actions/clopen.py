"""Clopen subsets of the truncated inverse limit, as unions of cylinder cells."""

from __future__ import annotations

import numpy as np

from .model import InvalidInput, _word_images


class Clopen:
    """A finite union of level-``level`` cylinders of a chain model.

    Two clopens are equal when they describe the same set, whatever their
    resolutions; ``canonical()`` gives the coarsest representation.
    """

    __slots__ = ("model", "level", "cells")

    def __init__(self, model, level, cells):
        model.check_level(level)
        cells = frozenset(int(c) for c in cells)
        n = model.size(level)
        for c in cells:
            if not 0 <= c < n:
                raise InvalidInput(f"cell {c} outside X_{level} (size {n})")
        self.model = model
        self.level = level
        self.cells = cells

    @classmethod
    def full(cls, model, level=0):
        return cls(model, level, range(model.size(level)))

    @classmethod
    def empty(cls, model, level=0):
        return cls(model, level, ())

    @classmethod
    def cell(cls, model, level, index):
        return cls(model, level, (index,))

    @classmethod
    def basepoint_cylinder(cls, model, level):
        return cls(model, level, (model.basepoint(level),))

    def is_empty(self):
        return not self.cells

    def sorted_cells(self):
        return sorted(self.cells)

    def __len__(self):
        return len(self.cells)

    def refine(self, level):
        """Replace every cell by its full fiber at the deeper ``level``."""
        if level < self.level:
            raise InvalidInput(f"cannot refine level {self.level} to coarser level {level}")
        if level == self.level:
            return self
        return Clopen(self.model, level, self.model.descendants(self.cells, self.level, level).tolist())

    def points(self, level=None):
        """Sorted cell indices of the set at ``level`` (default: model depth)."""
        level = self.model.depth if level is None else level
        return self.model.descendants(self.cells, self.level, level) if level != self.level else np.array(
            self.sorted_cells(), dtype=np.int64
        )

    def canonical(self):
        """Coarsest clopen describing the same set."""
        cur = self
        m = self.model
        while cur.level > 0:
            proj = m.levels[cur.level].projection
            counts = np.bincount(proj, minlength=m.size(cur.level - 1))
            have = np.zeros(m.size(cur.level - 1), dtype=np.int64)
            for c in cur.cells:
                have[proj[c]] += 1
            touched = have > 0
            if not np.all(have[touched] == counts[touched]):
                break
            cur = Clopen(m, cur.level - 1, np.flatnonzero(touched).tolist())
        return cur

    def _align(self, other):
        if not isinstance(other, Clopen):
            raise InvalidInput(f"expected a Clopen, got {type(other).__name__}")
        if other.model is not self.model and not self.model.same_tree(other.model):
            raise InvalidInput("clopen sets belong to models with different level structures")
        level = max(self.level, other.level)
        return self.refine(level), other.refine(level)

    def __or__(self, other):
        a, b = self._align(other)
        return Clopen(a.model, a.level, a.cells | b.cells)

    def __and__(self, other):
        a, b = self._align(other)
        return Clopen(a.model, a.level, a.cells & b.cells)

    def __sub__(self, other):
        a, b = self._align(other)
        return Clopen(a.model, a.level, a.cells - b.cells)

    def complement(self):
        return Clopen(self.model, self.level, set(range(self.model.size(self.level))) - self.cells)

    __invert__ = complement

    def issubset(self, other):
        a, b = self._align(other)
        return a.cells <= b.cells

    __le__ = issubset

    def isdisjoint(self, other):
        a, b = self._align(other)
        return not (a.cells & b.cells)

    def __eq__(self, other):
        if not isinstance(other, Clopen):
            return NotImplemented
        try:
            a, b = self._align(other)
        except InvalidInput:
            return False
        return a.cells == b.cells

    def __hash__(self):
        c = self.canonical()
        return hash((c.level, c.cells))

    def __repr__(self):
        return f"Clopen(level={self.level}, cells={self.sorted_cells()})"

    def render(self):
        """``level:c1,c2,...`` text form (``level:-`` for the empty set)."""
        cells = ",".join(map(str, self.sorted_cells())) or "-"
        return f"{self.level}:{cells}"

    @classmethod
    def parse(cls, model, text):
        level_s, _, cells_s = text.strip().partition(":")
        try:
            level = int(level_s)
            cells = [] if cells_s.strip() in ("", "-") else [int(c) for c in cells_s.split(",")]
        except ValueError:
            raise InvalidInput(f"bad clopen text {text!r}; expected level:c1,c2,...") from None
        return cls(model, level, cells)


def translate_clopen(model, word, clopen):
    """Image of ``clopen`` under ``word``, cellwise at the clopen's resolution."""
    if clopen.model is not model and not model.same_tree(clopen.model):
        raise InvalidInput("clopen does not belong to this model's tree")
    for letter in word:
        model.alphabet.check_letter(letter)
    perm = _word_images(model, word, clopen.level)
    return Clopen(model, clopen.level, (int(perm[c]) for c in clopen.cells))
