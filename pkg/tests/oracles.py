"""Brute-force reference computations, written without the library's search code.

Everything here works point by point on plain Python integers and tuples so it
can cross-check the vectorized implementation.
"""

from itertools import product


# --- Heisenberg group: integer triples with (x,y,z)(a,b,c) = (x+a, y+b, z+c+xb)


def heis_mul(g, h):
    return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])


def heis_inv(g):
    x, y, z = g
    return (-x, -y, -z + x * y)


def heis_in_subgroup(g, p, q, n):
    x, y, z = g
    return x % p**n == 0 and y % q**n == 0 and z % p**n == 0


HEIS_GENS = {"X": (1, 0, 0), "Y": (0, 1, 0), "Z": (0, 0, 1)}


def heis_letters():
    out = []
    for name, g in HEIS_GENS.items():
        out.append((name, 1, g))
        out.append((name, -1, heis_inv(g)))
    return out


def heisenberg_cosets_pairwise(p, q, n):
    """Left cosets of G_n by closure, comparing representatives pairwise.

    Returns a list of ``(word, representative)``: the word is a list of
    ``(name, sign)`` letters whose left-to-right product is the representative.
    """
    reps = [([], (0, 0, 0))]
    frontier = list(reps)
    while frontier:
        nxt = []
        for word, g in frontier:
            for name, sign, k in heis_letters():
                h = heis_mul(k, g)
                if any(heis_in_subgroup(heis_mul(heis_inv(r), h), p, q, n) for _, r in reps):
                    continue
                item = ([(name, sign)] + word, h)
                reps.append(item)
                nxt.append(item)
        frontier = nxt
    return reps


def heisenberg_coset_key(g, p, q, n):
    """Canonical label of the left coset ``g G_n``.

    Right-multiplying by ``(a p^n, b q^n, c p^n)`` shifts x and y by multiples
    of ``p^n`` and ``q^n`` and z by ``x b q^n + c p^n``; reducing x and y first
    fixes a and b, after which z is determined modulo ``p^n``.
    """
    x, y, z = g
    P, Q = p**n, q**n
    a = -(x // P)
    b = -(y // Q)
    x2, y2, z2 = heis_mul(g, (a * P, b * Q, 0))
    return (x2, y2, z2 % P)


def heisenberg_cosets_keyed(p, q, n):
    seen = {heisenberg_coset_key((0, 0, 0), p, q, n)}
    frontier = [(0, 0, 0)]
    while frontier:
        nxt = []
        for g in frontier:
            for _, _, k in heis_letters():
                h = heis_mul(k, g)
                key = heisenberg_coset_key(h, p, q, n)
                if key not in seen:
                    seen.add(key)
                    nxt.append(h)
        frontier = nxt
    return seen


# --- Self-similar groups by direct recursion on letter tuples

GRIGORCHUK = {
    "e": ((0, 1), ("e", "e")),
    "a": ((1, 0), ("e", "e")),
    "b": ((0, 1), ("a", "c")),
    "c": ((0, 1), ("a", "d")),
    "d": ((0, 1), ("e", "b")),
}


def tree_act(states, name, letters):
    if not letters:
        return ()
    perm, sections = states[name]
    x = letters[0]
    return (perm[x],) + tree_act(states, sections[x], letters[1:])


def tree_words(arity, level):
    """All tree words of a level, ordered by the encoding first letter least significant."""
    out = [tuple(reversed(t)) for t in product(range(arity), repeat=level)]
    return sorted(out, key=lambda w: encode(w, arity))


def encode(letters, arity):
    return sum(x * arity**i for i, x in enumerate(letters))


def tree_table(states, name, arity, level):
    return [encode(tree_act(states, name, w), arity) for w in tree_words(arity, level)]


# --- Generic point-by-point action of words on a finite model


class NaiveAction:
    """Point-by-point evaluation of words from raw generator tables."""

    def __init__(self, symbols, tables, projections, involutions=()):
        # tables[level][symbol] -> list of images; projections[level] -> list
        self.symbols = list(symbols)
        self.tables = tables
        self.projections = projections
        self.involutions = set(involutions)

    def letters(self):
        out = []
        for i, s in enumerate(self.symbols):
            out.append(i + 1)
            if s not in self.involutions:
                out.append(-(i + 1))
        return out

    def inv(self, letter):
        s = self.symbols[abs(letter) - 1]
        return abs(letter) if s in self.involutions else -letter

    def reduced_words(self, max_len):
        """Reduced words by length, then lexicographic in letter order."""
        letters = self.letters()
        rank = {x: i for i, x in enumerate(letters)}
        words = [()]
        for n in range(1, max_len + 1):
            layer = []
            for w in product(letters, repeat=n):
                if all(w[i + 1] != self.inv(w[i]) for i in range(n - 1)):
                    layer.append(w)
            layer.sort(key=lambda w: [rank[x] for x in w])
            words.extend(layer)
        return words

    def apply_letter(self, letter, level, x):
        table = self.tables[level][self.symbols[abs(letter) - 1]]
        if letter > 0:
            return table[x]
        return table.index(x)

    def apply(self, word, level, x):
        for letter in reversed(word):
            x = self.apply_letter(letter, level, x)
        return x

    def size(self, level):
        return len(self.projections[level]) if level else 1

    def ancestor(self, level, x, to_level):
        while level > to_level:
            x = self.projections[level][x]
            level -= 1
        return x

    def cell_points(self, level, cell, depth):
        return [y for y in range(self.size(depth)) if self.ancestor(depth, y, level) == cell]

    def trivial_on(self, word, level, cell, depth):
        """Word fixes every point below ``cell`` on every level from ``level`` to ``depth``."""
        return all(
            self.apply(word, lv, y) == y for lv in range(level, depth + 1) for y in self.cell_points(level, cell, lv)
        )

    def moves_any(self, word, points, depth):
        return any(self.apply(word, depth, y) != y for y in points)


def naive_from_model(model):
    tables = []
    projections = [None]
    for lv in model.levels:
        tables.append({s: lv.images[i].tolist() for i, s in enumerate(model.alphabet.symbols)})
        if lv.level:
            projections.append(lv.projection.tolist())
    invol = {model.alphabet.symbols[i] for i in model.alphabet.involutions}
    return NaiveAction(model.alphabet.symbols, tables, projections, invol)


def naive_freeness(act, max_len, depth):
    """First ``(level, cell, word)`` with word trivial on the cell and nontrivial at ``depth``."""
    words = act.reduced_words(max_len)
    everything = list(range(act.size(depth)))
    for level in range(1, depth):
        for cell in range(act.size(level)):
            for w in words:
                if act.moves_any(w, everything, depth) and act.trivial_on(w, level, cell, depth):
                    return level, cell, w
    return None


def naive_lqa(act, outer_level, outer_cells, max_len, depth, top):
    outer_pts = [y for c in outer_cells for y in act.cell_points(outer_level, c, top)]
    words = act.reduced_words(max_len)
    for level in range(outer_level, min(depth, top - 1) + 1):
        for cell in range(act.size(level)):
            if act.ancestor(level, cell, outer_level) not in outer_cells:
                continue
            for w in words:
                if act.moves_any(w, outer_pts, top) and act.trivial_on(w, level, cell, top):
                    return level, cell, w
    return None


def naive_normality(act, inner, outer, max_len, depth):
    """First ``(kernel word, conjugator)`` violating normality; ``inner``/``outer`` are (level, cells)."""
    words = act.reduced_words(max_len)
    ipts = [y for c in inner[1] for y in act.cell_points(inner[0], c, depth)]
    opts = [y for c in outer[1] for y in act.cell_points(outer[0], c, depth)]
    kernel = [w for w in words if all(act.apply(w, depth, y) == y for y in ipts)]
    stab = [u for u in words if u and sorted(act.apply(u, depth, y) for y in opts) == sorted(opts)]
    for w in kernel:
        if not w:
            continue
        for u in stab:
            conj = tuple(u) + tuple(w) + tuple(act.inv(x) for x in reversed(u))
            if any(act.apply(conj, depth, y) != y for y in ipts):
                return w, u
    return None


# --- Odometer arithmetic


def odometer_modulus(arities, level):
    m = 1
    for a in arities[:level]:
        m *= a
    return m


def odometer_holonomy_shifts(arities, cell_level, max_len, depth):
    """Distinct shifts mod M_depth of the powers t^k (|k| <= max_len) fixing the cell 0 mod M_level."""
    mod = odometer_modulus(arities, cell_level)
    big = odometer_modulus(arities, depth)
    return {k % big for k in range(-max_len, max_len + 1) if k % mod == 0}
