"""Finitely generated groups acting level-by-level on nested finite sets.

A :class:`ChainModel` is the truncated odometer of a group chain
``G = G_0 > G_1 > ... > G_L``: level ``l`` is the finite set ``X_l = G/G_l``
with the left action of every generator stored as an image table, and
``projection`` maps each point of ``X_l`` to its parent in ``X_{l-1}``.

Letters are nonzero integers: ``i + 1`` is generator ``i`` and ``-(i + 1)`` its
formal inverse.  A word is a tuple of letters and acts on the left, last letter
first.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

Word = tuple

DEFAULT_BUDGET = 2_000_000

_SYMBOL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class InvalidInput(ValueError):
    """Raised for malformed words, models, clopen sets or parameters."""


class BudgetExceeded(RuntimeError):
    """Raised when a word search would enumerate more candidates than allowed."""

    def __init__(self, cap):
        super().__init__(f"word search exceeded candidate budget of {cap}")
        self.cap = cap


@dataclass(frozen=True)
class GeneratorAlphabet:
    """Ordered generator names.

    ``involutions`` holds indices of generators known to square to the
    identity in the group; their inverse letter is normalized to the plain
    letter and ``x x`` cancels.
    """

    symbols: tuple
    involutions: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "involutions", frozenset(self.involutions))
        if not self.symbols:
            raise InvalidInput("alphabet must be non-empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidInput(f"duplicate generator names in {self.symbols}")
        for s in self.symbols:
            if not isinstance(s, str) or not _SYMBOL_RE.match(s):
                raise InvalidInput(f"bad generator name {s!r}")
        for i in self.involutions:
            if not 0 <= i < len(self.symbols):
                raise InvalidInput(f"involution index {i} out of range")

    def __len__(self):
        return len(self.symbols)

    def index(self, symbol):
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise InvalidInput(f"unknown generator {symbol!r}") from None

    def letters(self):
        """All letters in enumeration order: each symbol, then its inverse."""
        out = []
        for i in range(len(self.symbols)):
            out.append(i + 1)
            if i not in self.involutions:
                out.append(-(i + 1))
        return out

    def check_letter(self, letter):
        if not isinstance(letter, (int, np.integer)) or letter == 0 or abs(letter) > len(self.symbols):
            raise InvalidInput(f"letter {letter!r} not in alphabet {self.symbols}")

    def normalize(self, letter):
        if letter < 0 and (-letter - 1) in self.involutions:
            return -letter
        return int(letter)

    def inverse(self, letter):
        if abs(letter) - 1 in self.involutions:
            return abs(letter)
        return -letter

    def parse(self, text):
        """Parse ``"a b^-1 c^3"`` style text into a (not reduced) word.

        ``1`` or an empty string is the empty word.  ``x^k`` repeats a letter
        ``|k|`` times, inverted when ``k < 0``.
        """
        text = text.strip()
        if text in ("", "1"):
            return ()
        letters = []
        for tok in text.replace("*", " ").split():
            name, caret, exp = tok.partition("^")
            i = self.index(name)
            k = 1
            if caret:
                try:
                    k = int(exp)
                except ValueError:
                    raise InvalidInput(f"bad exponent in {tok!r}") from None
            letter = i + 1 if k > 0 else -(i + 1)
            letters.extend([letter] * abs(k))
        return tuple(letters)

    def format(self, word):
        if not word:
            return "1"
        parts = []
        i = 0
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            s = self.symbols[abs(word[i]) - 1]
            k = (j - i) if word[i] > 0 else -(j - i)
            parts.append(s if k == 1 else f"{s}^{k}")
            i = j
        return " ".join(parts)


def reduce_word(alphabet, word):
    """Free reduction, also cancelling squares of declared involutions."""
    stack = []
    for letter in word:
        alphabet.check_letter(letter)
        letter = alphabet.normalize(letter)
        if stack and stack[-1] == alphabet.inverse(letter):
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def inverse_word(alphabet, word):
    return tuple(alphabet.inverse(letter) for letter in reversed(word))


def iter_reduced_words(alphabet, max_len, budget=DEFAULT_BUDGET):
    """Reduced words of length <= max_len: by length, then lexicographic."""
    if max_len < 0:
        raise InvalidInput("max word length must be >= 0")
    letters = alphabet.letters()
    count = 1
    yield ()
    layer = [()]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            forbidden = alphabet.inverse(w[-1]) if w else None
            for letter in letters:
                if letter == forbidden:
                    continue
                count += 1
                if count > budget:
                    raise BudgetExceeded(budget)
                nw = w + (letter,)
                nxt.append(nw)
                yield nw
        layer = nxt


@dataclass(frozen=True, eq=False)
class LevelPermutation:
    """A bijection of ``X_level`` stored as an image table."""

    level: int
    images: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.images, dtype=np.int64)
        if arr.ndim != 1 or not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise InvalidInput(f"image table at level {self.level} is not a permutation")
        arr.setflags(write=False)
        object.__setattr__(self, "images", arr)

    def __call__(self, x):
        return int(self.images[x])

    def __eq__(self, other):
        if not isinstance(other, LevelPermutation):
            return NotImplemented
        return self.level == other.level and np.array_equal(self.images, other.images)

    def __hash__(self):
        return hash((self.level, self.images.tobytes()))

    def __len__(self):
        return self.images.size

    def compose(self, other):
        """``self o other`` (apply ``other`` first)."""
        return LevelPermutation(self.level, self.images[other.images])

    def inverse(self):
        return LevelPermutation(self.level, np.argsort(self.images))

    def is_identity(self):
        return bool(np.all(self.images == np.arange(self.images.size)))

    def cycles(self):
        seen = np.zeros(self.images.size, dtype=bool)
        out = []
        for start in range(self.images.size):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = int(self.images[start])
            while j != start:
                seen[j] = True
                cyc.append(j)
                j = int(self.images[j])
            out.append(tuple(cyc))
        return out

    def order(self):
        n = 1
        for c in self.cycles():
            n = np.lcm(n, len(c))
        return int(n)

    def __repr__(self):
        cyc = "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles() if len(c) > 1)
        return f"LevelPermutation(level={self.level}, {cyc or '()'})"


@dataclass(frozen=True, eq=False)
class ActionLevel:
    """Generator image tables on ``X_level`` plus the projection to the level above."""

    level: int
    images: np.ndarray  # shape (k, |X_level|)
    projection: np.ndarray | None  # shape (|X_level|,), None at level 0
    basepoint: int = 0

    def __post_init__(self):
        imgs = np.array(self.images, dtype=np.int64)
        if imgs.ndim != 2:
            raise InvalidInput(f"level {self.level}: generator images must be a 2-d table")
        imgs.setflags(write=False)
        object.__setattr__(self, "images", imgs)
        if self.projection is not None:
            proj = np.array(self.projection, dtype=np.int64)
            if proj.shape != (imgs.shape[1],):
                raise InvalidInput(f"level {self.level}: projection has wrong length")
            proj.setflags(write=False)
            object.__setattr__(self, "projection", proj)
        if not 0 <= self.basepoint < imgs.shape[1]:
            raise InvalidInput(f"level {self.level}: basepoint out of range")

    @property
    def size(self):
        return self.images.shape[1]


@dataclass(frozen=True, eq=False)
class ChainModel:
    """A group chain odometer truncated at ``depth`` levels."""

    alphabet: GeneratorAlphabet
    levels: tuple
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        levels = tuple(self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise InvalidInput("a chain model needs at least level 0")
        k = len(self.alphabet)
        for i, lv in enumerate(levels):
            if lv.level != i:
                raise InvalidInput(f"levels must be dense: found level {lv.level} at position {i}")
            if lv.images.shape[0] != k:
                raise InvalidInput(f"level {i}: expected {k} generator tables, got {lv.images.shape[0]}")
            if (i == 0) != (lv.projection is None):
                raise InvalidInput(f"level {i}: projection must be present exactly for levels >= 1")
            if i > 0 and lv.projection.size and (
                lv.projection.min() < 0 or lv.projection.max() >= levels[i - 1].size
            ):
                raise InvalidInput(f"level {i}: projection leaves X_{i - 1}")
            if lv.images.size and (lv.images.min() < 0 or lv.images.max() >= lv.size):
                raise InvalidInput(f"level {i}: generator image leaves X_{i}")
        if levels[0].size != 1:
            raise InvalidInput("|X_0| must be 1")
        object.__setattr__(self, "_inv", {})
        object.__setattr__(self, "_anc", {})

    @property
    def depth(self):
        return len(self.levels) - 1

    def size(self, level):
        return self.levels[level].size

    def check_level(self, level):
        if not isinstance(level, (int, np.integer)) or not 0 <= level <= self.depth:
            raise InvalidInput(f"level {level} outside 0..{self.depth}")

    def basepoint(self, level):
        return self.levels[level].basepoint

    def letter_image(self, letter, level):
        """Image table of one letter at ``level``."""
        i = abs(letter) - 1
        if letter > 0:
            return self.levels[level].images[i]
        key = (i, level)
        inv = self._inv.get(key)
        if inv is None:
            inv = np.argsort(self.levels[level].images[i])
            inv.setflags(write=False)
            self._inv[key] = inv
        return inv

    def ancestors(self, level, to_level):
        """Array mapping each point of ``X_level`` to its ancestor in ``X_to_level``."""
        if to_level > level:
            raise InvalidInput("ancestor level must not be deeper")
        key = (level, to_level)
        anc = self._anc.get(key)
        if anc is None:
            anc = np.arange(self.size(level))
            for lv in range(level, to_level, -1):
                anc = self.levels[lv].projection[anc]
            anc.setflags(write=False)
            self._anc[key] = anc
        return anc

    def project(self, x, level, to_level):
        return int(self.ancestors(level, to_level)[x])

    def descendants(self, cells, level, to_level):
        """Sorted points of ``X_to_level`` lying below the given cells of ``X_level``."""
        anc = self.ancestors(to_level, level)
        mask = np.zeros(self.size(level), dtype=bool)
        mask[np.asarray(list(cells), dtype=np.int64)] = True
        return np.flatnonzero(mask[anc])

    def same_tree(self, other):
        """True when both models have identical point sets and projections."""
        if self.depth != other.depth:
            return False
        for a, b in zip(self.levels, other.levels):
            if a.size != b.size:
                return False
            if a.projection is not None and not np.array_equal(a.projection, b.projection):
                return False
        return True

    def word(self, text):
        return reduce_word(self.alphabet, self.alphabet.parse(text))

    def fmt(self, word):
        return self.alphabet.format(word)

    def __repr__(self):
        sizes = [lv.size for lv in self.levels]
        return f"ChainModel({self.name!r}, generators={list(self.alphabet.symbols)}, sizes={sizes})"


@dataclass(frozen=True)
class PathPoint:
    """A finite path ``x_0, ..., x_D`` with ``x_l`` in ``X_l``."""

    coordinates: tuple

    @property
    def depth(self):
        return len(self.coordinates) - 1

    def __getitem__(self, level):
        return self.coordinates[level]

    @classmethod
    def from_point(cls, model, x, level=None):
        """The path through ``x`` in ``X_level`` (default: deepest level)."""
        level = model.depth if level is None else level
        model.check_level(level)
        if not 0 <= x < model.size(level):
            raise InvalidInput(f"point {x} outside X_{level}")
        return cls(tuple(model.project(x, level, lv) for lv in range(level + 1)))

    def check(self, model):
        if self.depth > model.depth:
            raise InvalidInput("path deeper than the model")
        for lv in range(1, self.depth + 1):
            if model.levels[lv].projection[self.coordinates[lv]] != self.coordinates[lv - 1]:
                raise InvalidInput(f"path coordinates inconsistent at level {lv}")


def _word_images(model, word, level):
    perm = np.arange(model.size(level))
    for letter in reversed(word):
        perm = model.letter_image(letter, level)[perm]
    return perm


def level_image(model, word, level):
    """Action of ``word`` on ``X_level``; the last letter acts first."""
    model.check_level(level)
    for letter in word:
        model.alphabet.check_letter(letter)
    return LevelPermutation(level, _word_images(model, word, level))


def iter_word_images(model, max_len, level, budget=DEFAULT_BUDGET):
    """Yield ``(word, image table at level)`` over reduced words in enumeration order."""
    model.check_level(level)
    alphabet = model.alphabet
    letters = alphabet.letters()
    gens = {letter: model.letter_image(letter, level) for letter in letters}
    ident = np.arange(model.size(level))
    count = 1
    yield (), ident
    layer = [((), ident)]
    for _ in range(max_len):
        nxt = []
        for w, perm in layer:
            forbidden = alphabet.inverse(w[-1]) if w else None
            for letter in letters:
                if letter == forbidden:
                    continue
                count += 1
                if count > budget:
                    raise BudgetExceeded(budget)
                item = (w + (letter,), perm[gens[letter]])
                nxt.append(item)
                yield item
        layer = nxt


def stabilizer_member(model, word, level):
    """True iff ``word`` fixes the basepoint coset of ``X_level``."""
    img = level_image(model, word, level)
    b = model.basepoint(level)
    return img(b) == b


def kernel_words(model, level, max_len, budget=DEFAULT_BUDGET):
    """Reduced words of length <= max_len acting trivially on ``X_level``."""
    ident = np.arange(model.size(level))
    return [w for w, perm in iter_word_images(model, max_len, level, budget) if np.array_equal(perm, ident)]


def orbit_of_point(model, level, x, max_len):
    """Points reached from ``x`` by words of length <= max_len (BFS)."""
    model.check_level(level)
    if not 0 <= x < model.size(level):
        raise InvalidInput(f"point {x} outside X_{level}")
    tables = [model.letter_image(letter, level) for letter in model.alphabet.letters()]
    seen = {int(x)}
    frontier = [int(x)]
    for _ in range(max_len):
        nxt = []
        for y in frontier:
            for t in tables:
                z = int(t[y])
                if z not in seen:
                    seen.add(z)
                    nxt.append(z)
        if not nxt:
            break
        frontier = nxt
    return seen


@dataclass(frozen=True)
class LevelCheck:
    level: int
    check: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    model_name: str
    checks: list

    @property
    def valid(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def lines(self):
        out = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            out.append(f"level {c.level}\t{c.check}\t{status}" + (f"\t{c.detail}" if c.detail else ""))
        return out


def _orbits(tables, n):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for t in tables:
        for a in range(n):
            ra, rb = find(a), find(int(t[a]))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return sorted(groups.values())


def validate_chain(model):
    """Exhaustive per-level checks of the chain invariants; never raises."""
    checks = []
    alpha = model.alphabet
    for lv in model.levels:
        n, ell = lv.size, lv.level
        bad = [alpha.symbols[i] for i in range(len(alpha)) if not np.array_equal(np.sort(lv.images[i]), np.arange(n))]
        checks.append(LevelCheck(ell, "bijective", not bad, f"non-bijective: {','.join(bad)}" if bad else ""))
        orbits = _orbits(lv.images, n)
        checks.append(
            LevelCheck(ell, "transitive", len(orbits) == 1, "" if len(orbits) == 1 else f"{len(orbits)} orbits")
        )
        if ell == 0:
            continue
        proj = lv.projection
        parent = model.levels[ell - 1]
        detail = ""
        for i in range(len(alpha)):
            lhs = proj[lv.images[i]]
            rhs = parent.images[i][proj]
            diff = np.flatnonzero(lhs != rhs)
            if diff.size:
                detail = f"generator {alpha.symbols[i]} at point {int(diff[0])}"
                break
        checks.append(LevelCheck(ell, "equivariant", not detail, detail))
        ok = int(proj[lv.basepoint]) == parent.basepoint
        checks.append(
            LevelCheck(ell, "basepoint", ok, "" if ok else f"projects to {int(proj[lv.basepoint])}")
        )
        counts = np.bincount(proj, minlength=parent.size)
        uniform = bool(counts.min() == counts.max() and counts.min() > 0)
        checks.append(
            LevelCheck(ell, "fiber-uniform", uniform, "" if uniform else f"fiber sizes {sorted(set(counts.tolist()))}")
        )
    return ValidationReport(model.name, checks)


def generated_group(model, level):
    """All permutations of ``X_level`` generated by the generator images."""
    model.check_level(level)
    gens = [model.levels[level].images[i] for i in range(len(model.alphabet))]
    ident = tuple(range(model.size(level)))
    seen = {ident}
    queue = deque([ident])
    while queue:
        p = np.array(queue.popleft())
        for g in gens:
            q = tuple(g[p].tolist())
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return seen


def group_exponent(perms):
    """Maximum element order in a finite set of permutation tuples."""
    return max(LevelPermutation(0, np.array(p)).order() for p in perms)


def model_from_tables(symbols, sizes, images, projections, basepoints=None, name="", involutions=()):
    """Build a model from plain lists.

    ``images[l][i]`` is the table of generator ``i`` on ``X_l`` (levels 0..D),
    ``projections[l]`` the map ``X_l -> X_{l-1}`` for ``l >= 1``.
    """
    alphabet = GeneratorAlphabet(tuple(symbols), frozenset(involutions))
    basepoints = basepoints or [0] * len(sizes)
    levels = []
    for ell, n in enumerate(sizes):
        imgs = np.array(images[ell], dtype=np.int64).reshape(len(symbols), n)
        proj = None if ell == 0 else np.array(projections[ell], dtype=np.int64)
        levels.append(ActionLevel(ell, imgs, proj, basepoints[ell]))
    return ChainModel(alphabet, tuple(levels), name)
