"""Piecewise group elements, orbit-equivalence certificates, twists and holonomy.

A piecewise element is a finite table of ``(cylinder, word)`` pairs: on each
cylinder the map acts as that word.  Tables are normalized to one common
resolution (the finest level among the pieces) for all algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clopen import Clopen, translate_clopen
from .model import (
    DEFAULT_BUDGET,
    ActionLevel,
    ChainModel,
    GeneratorAlphabet,
    InvalidInput,
    _word_images,
    inverse_word,
    iter_word_images,
    level_image,
    reduce_word,
    validate_chain,
)
from .regularity import is_adapted


class PiecewiseElement:
    """Map that acts on each cylinder of a finite partition by a group word."""

    def __init__(self, model, pieces):
        norm = []
        for cyl, word in pieces:
            if cyl.model is not model and not model.same_tree(cyl.model):
                raise InvalidInput("piece cylinder does not belong to this model's tree")
            norm.append((cyl, reduce_word(model.alphabet, tuple(word))))
        self.model = model
        self.pieces = tuple(norm)

    @property
    def resolution(self):
        return max((c.level for c, _ in self.pieces), default=0)

    @classmethod
    def from_word(cls, model, word):
        return cls(model, [(Clopen.full(model), word)])

    @classmethod
    def identity(cls, model):
        return cls.from_word(model, ())

    @classmethod
    def from_table(cls, model, level, words):
        """One piece per cell of ``level``; ``words[c]`` acts on cell ``c``."""
        if len(words) != model.size(level):
            raise InvalidInput(f"expected {model.size(level)} words for level {level}, got {len(words)}")
        return cls(model, [(Clopen.cell(model, level, c), w) for c, w in enumerate(words)])

    def assignment(self):
        """For each cell at the common resolution, the indices of pieces covering it."""
        r = self.resolution
        cover = [[] for _ in range(self.model.size(r))]
        for i, (cyl, _) in enumerate(self.pieces):
            for c in cyl.refine(r).sorted_cells():
                cover[c].append(i)
        return cover

    def table(self):
        """Word acting on each cell at the common resolution; needs a partition."""
        out = []
        for c, hits in enumerate(self.assignment()):
            if len(hits) != 1:
                raise InvalidInput(f"pieces do not partition the space at cell {c} of level {self.resolution}")
            out.append(self.pieces[hits[0]][1])
        return tuple(out)

    def image(self, level=None):
        """Cell map at ``level`` (default: model depth) as an array; may fail to be bijective."""
        m = self.model
        level = m.depth if level is None else level
        m.check_level(level)
        r = self.resolution
        if level < r:
            raise InvalidInput(f"level {level} is coarser than the piece resolution {r}")
        words = self.table()
        anc = m.ancestors(level, r)
        out = np.empty(m.size(level), dtype=np.int64)
        for w in sorted(set(words)):
            cells = np.array([c for c, x in enumerate(words) if x == w])
            mask = np.isin(anc, cells)
            out[mask] = _word_images(m, w, level)[mask]
        return out

    def canonical(self):
        """Coarsest single-resolution form: merge fibers whose cells share a word."""
        m = self.model
        r = self.resolution
        words = list(self.table())
        while r > 0:
            proj = m.levels[r].projection
            parent = [None] * m.size(r - 1)
            ok = True
            for c, w in enumerate(words):
                p = int(proj[c])
                if parent[p] is None:
                    parent[p] = w
                elif parent[p] != w:
                    ok = False
                    break
            if not ok:
                break
            words, r = parent, r - 1
        return PiecewiseElement.from_table(m, r, words)

    def word_classes(self):
        """Multi-cell pieces: ``(clopen, word)`` grouping the canonical cells by word."""
        can = self.canonical()
        r = can.resolution
        groups = {}
        for c, w in enumerate(can.table()):
            groups.setdefault(w, []).append(c)
        return [(Clopen(self.model, r, cells), w) for w, cells in sorted(groups.items(), key=lambda kv: kv[1][0])]

    def is_identity(self):
        can = self.canonical()
        return can.resolution == 0 and can.table() == ((),)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseElement):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return a.model.same_tree(b.model) and a.resolution == b.resolution and a.table() == b.table()

    def __hash__(self):
        can = self.canonical()
        return hash((can.resolution, can.table()))

    def describe(self):
        return "; ".join(f"{cyl.render()} -> {self.model.fmt(w)}" for cyl, w in self.pieces)

    def __repr__(self):
        return f"PiecewiseElement({self.describe()})"


@dataclass
class PiecewiseVerdict:
    valid: bool
    depth: int
    overlaps: list = field(default_factory=list)
    uncovered: list = field(default_factory=list)
    collisions: list = field(default_factory=list)

    def describe(self):
        if self.valid:
            return f"valid(D={self.depth})"
        parts = []
        if self.overlaps:
            parts.append("overlapping cells " + ",".join(map(str, self.overlaps)))
        if self.uncovered:
            parts.append("uncovered cells " + ",".join(map(str, self.uncovered)))
        if self.collisions:
            parts.append("non-injective at cells " + ",".join(map(str, self.collisions)))
        return "invalid: " + "; ".join(parts)


def validate_piecewise(model, pe, depth):
    """Check the pieces partition the space, then that the cell map at ``depth`` is a bijection."""
    model.check_level(depth)
    if pe.model is not model and not model.same_tree(pe.model):
        raise InvalidInput("piecewise element belongs to another tree")
    if depth < pe.resolution:
        raise InvalidInput(f"depth {depth} is coarser than the piece resolution {pe.resolution}")
    cover = pe.assignment()
    overlaps = [c for c, hits in enumerate(cover) if len(hits) > 1]
    uncovered = [c for c, hits in enumerate(cover) if not hits]
    if overlaps or uncovered:
        return PiecewiseVerdict(False, depth, overlaps, uncovered)
    img = PiecewiseElement(model, pe.pieces).image(depth)
    counts = np.bincount(img, minlength=model.size(depth))
    collisions = np.flatnonzero(counts > 1).tolist()
    return PiecewiseVerdict(not collisions, depth, collisions=collisions)


def _require_valid(pe, what):
    verdict = validate_piecewise(pe.model, pe, pe.model.depth)
    if not verdict.valid:
        raise InvalidInput(f"{what} is not a valid piecewise element: {verdict.describe()}")


def apply_piecewise(pe, x, level=None):
    """Image of point ``x`` of ``X_level`` (default: model depth)."""
    level = pe.model.depth if level is None else level
    return int(pe.image(level)[x])


def compose_piecewise(p, q):
    """``p o q``: apply ``q`` first, on the common refinement of both partitions."""
    if not p.model.same_tree(q.model):
        raise InvalidInput("cannot compose piecewise elements over different trees")
    _require_valid(p, "left operand")
    _require_valid(q, "right operand")
    m = q.model
    r = max(p.resolution, q.resolution)
    tp, tq = p.table(), q.table()
    anc_p, anc_q = m.ancestors(r, p.resolution), m.ancestors(r, q.resolution)
    words = []
    for c in range(m.size(r)):
        wq = tq[anc_q[c]]
        c2 = int(_word_images(m, wq, r)[c])
        words.append(reduce_word(m.alphabet, tp[anc_p[c2]] + wq))
    return PiecewiseElement.from_table(m, r, words)


def invert_piecewise(pe):
    """Inverse map: each piece's image cell carries the inverse word."""
    _require_valid(pe, "operand")
    m = pe.model
    r = pe.resolution
    words = [None] * m.size(r)
    for c, w in enumerate(pe.table()):
        words[int(_word_images(m, w, r)[c])] = inverse_word(m.alphabet, w)
    return PiecewiseElement.from_table(m, r, words)


def express_in_full_group(target, f, max_len, budget=DEFAULT_BUDGET):
    """Cover ``f`` (a permutation of ``X_D``) by words of ``target`` agreeing with it cell by cell.

    Resolutions ``0 .. D-1`` are tried at once; each cell takes the first word
    in enumeration order that agrees with ``f`` on its whole fiber at ``D``.
    The coarsest fully covered resolution wins.  Returns ``None`` when no
    resolution is covered within the word bound.
    """
    D = f.level
    target.check_level(D)
    if len(f) != target.size(D):
        raise InvalidInput(f"permutation has {len(f)} points but X_{D} has {target.size(D)}")
    if D == 0:
        return PiecewiseElement.identity(target)
    goal = f.images
    ancs = [target.ancestors(D, r) for r in range(D)]
    assigned = [[None] * target.size(r) for r in range(D)]
    missing = [target.size(r) for r in range(D)]
    for w, perm in iter_word_images(target, max_len, D, budget):
        bad = (perm != goal).astype(np.int64)
        for r in range(D):
            if not missing[r]:
                continue
            ok = np.bincount(ancs[r], weights=bad, minlength=target.size(r)) == 0
            for c in np.flatnonzero(ok).tolist():
                if assigned[r][c] is None:
                    assigned[r][c] = w
                    missing[r] -= 1
        if not missing[0]:
            break
    for r in range(D):
        if not missing[r]:
            return PiecewiseElement.from_table(target, r, assigned[r]).canonical()
    return None


@dataclass
class CoeFailure:
    generator: str
    direction: str

    def describe(self):
        return f"generator {self.generator} ({self.direction}) not expressible"


@dataclass
class CoeCertificate:
    """Each generator of either model written as a piecewise element of the other."""

    forward: dict  # generator of model 1 -> PiecewiseElement over model 2
    backward: dict  # generator of model 2 -> PiecewiseElement over model 1
    max_len: int
    depth: int

    kind = "coe-certificate"

    def swapped(self):
        return CoeCertificate(self.backward, self.forward, self.max_len, self.depth)

    def max_pieces(self):
        return max(len(pe.pieces) for pe in list(self.forward.values()) + list(self.backward.values()))

    def verify(self, m1, m2):
        """Each table entry validates and replays its generator at the certified depth."""
        for src, dst, table in ((m1, m2, self.forward), (m2, m1, self.backward)):
            if set(table) != set(src.alphabet.symbols):
                return False
            for sym, pe in table.items():
                pe = PiecewiseElement(dst, pe.pieces)
                if pe.resolution >= self.depth or not validate_piecewise(dst, pe, self.depth).valid:
                    return False
                gen = level_image(src, (src.alphabet.index(sym) + 1,), self.depth)
                if not np.array_equal(pe.image(self.depth), gen.images):
                    return False
        return True


@dataclass
class CoeResult:
    certificate: CoeCertificate | None
    failure: CoeFailure | None
    max_len: int
    depth: int

    @property
    def verdict(self):
        return "coe-certified-up-to-bounds" if self.certificate else "not-found-up-to-bounds"

    def describe(self):
        return f"{self.verdict}(L={self.max_len}, D={self.depth})"


def coe_check(m1, m2, max_len, depth, budget=DEFAULT_BUDGET):
    """Express every generator of each model in the full group of the other."""
    if not m1.same_tree(m2):
        raise InvalidInput("models do not share point sets and projections")
    m1.check_level(depth)
    tables = []
    for src, dst, direction in ((m1, m2, "1->2"), (m2, m1, "2->1")):
        table = {}
        for i, sym in enumerate(src.alphabet.symbols):
            f = level_image(src, (i + 1,), depth)
            pe = express_in_full_group(dst, f, max_len, budget)
            if pe is None:
                return CoeResult(None, CoeFailure(sym, direction), max_len, depth)
            table[sym] = pe
        tables.append(table)
    return CoeResult(CoeCertificate(tables[0], tables[1], max_len, depth), None, max_len, depth)


def _stabilizes(model, word, clopen):
    return translate_clopen(model, word, clopen) == clopen


def twist_action(model, U, mapping, names=None, max_len=4, budget=DEFAULT_BUDGET):
    """Extend the model by one generator per ``g`` in ``mapping``, acting as ``mapping[g]`` on ``U``.

    Both ``g`` and its image must stabilize ``U``.  The new generator is the
    identity outside ``U``; on levels coarser than ``U`` its action is the one
    induced through the projections, and must be well defined.
    """
    if U.model is not model and not model.same_tree(U.model):
        raise InvalidInput("U does not belong to this model's tree")
    if U.is_empty():
        raise InvalidInput("twist needs a non-empty set U")
    report = is_adapted(model, U, max_len, budget)
    if not report.adapted:
        raise InvalidInput(f"U is not adapted: witness {model.fmt(report.witness)}")
    items = []
    for g, a in mapping.items():
        g = model.word(g) if isinstance(g, str) else reduce_word(model.alphabet, tuple(g))
        a = model.word(a) if isinstance(a, str) else reduce_word(model.alphabet, tuple(a))
        if not _stabilizes(model, g, U):
            raise InvalidInput(f"{model.fmt(g)} does not stabilize U")
        if not _stabilizes(model, a, U):
            raise InvalidInput(f"image {model.fmt(a)} of {model.fmt(g)} leaves the stabilizer of U")
        items.append((g, a))
    if not items:
        raise InvalidInput("twist mapping is empty")
    names = list(names) if names else [f"tw{i + 1}" for i in range(len(items))]
    if len(names) != len(items):
        raise InvalidInput("need one name per twisted generator")
    old = model.alphabet
    alphabet = GeneratorAlphabet(old.symbols + tuple(names), old.involutions)
    new_tables = {ell: [] for ell in range(model.depth + 1)}
    for _, a in items:
        per_level = {}
        for ell in range(U.level, model.depth + 1):
            inside = np.zeros(model.size(ell), dtype=bool)
            inside[U.points(ell)] = True
            img = np.arange(model.size(ell))
            img[inside] = _word_images(model, a, ell)[inside]
            per_level[ell] = img
        fine = per_level[U.level]
        for ell in range(U.level - 1, -1, -1):
            anc = model.ancestors(U.level, ell)
            img = np.full(model.size(ell), -1, dtype=np.int64)
            targets = anc[fine]
            for y in range(model.size(U.level)):
                c, t = int(anc[y]), int(targets[y])
                if img[c] not in (-1, t):
                    raise InvalidInput(f"twisted generator is not well defined on level {ell} at cell {c}")
                img[c] = t
            per_level[ell] = img
        for ell in range(model.depth + 1):
            new_tables[ell].append(per_level[ell])
    levels = []
    for lv in model.levels:
        images = np.vstack([lv.images] + [t[None, :] for t in new_tables[lv.level]])
        levels.append(ActionLevel(lv.level, images, lv.projection, lv.basepoint))
    meta = dict(model.metadata)
    meta["twisted_from"] = model.name
    out = ChainModel(alphabet, tuple(levels), f"{model.name}+twist", meta)
    rep = validate_chain(out)
    if not rep.valid:
        raise InvalidInput(f"twisted model is not a valid chain: {rep.failures()[0]}")
    return out


@dataclass
class HolonomySet:
    """Distinct restrictions to ``U`` (at ``depth``) of stabilizer words, with a shortest word each."""

    clopen: Clopen
    depth: int
    max_len: int
    points: tuple
    maps: dict  # restriction tuple (images of points, in order) -> word

    def __len__(self):
        return len(self.maps)


def restricted_holonomy(model, U, max_len, depth, budget=DEFAULT_BUDGET):
    if U.model is not model and not model.same_tree(U.model):
        raise InvalidInput("U does not belong to this model's tree")
    model.check_level(depth)
    if depth < U.level:
        raise InvalidInput(f"depth {depth} is coarser than U's resolution {U.level}")
    pts = U.points(depth)
    pset = set(pts.tolist())
    maps = {}
    for w, perm in iter_word_images(model, max_len, depth, budget):
        restr = tuple(perm[pts].tolist())
        if set(restr) != pset:
            continue
        maps.setdefault(restr, w)
    return HolonomySet(U, depth, max_len, tuple(pts.tolist()), maps)


def _conjugate(restr, src_pts, dst_pts, h):
    """``h o r o h^-1`` as a tuple over ``dst_pts``."""
    r = dict(zip(src_pts, restr))
    hinv = {v: k for k, v in h.items()}
    return tuple(h[r[hinv[y]]] for y in dst_pts)


@dataclass
class ReturnEquivCertificate:
    U1: Clopen
    U2: Clopen
    h: dict  # point of U1 at depth -> point of U2 at depth
    depth: int
    max_len: int
    pairs: list  # (word in model 1, word in model 2) matched by h-conjugation

    kind = "return-equiv-certificate"

    def verify(self, m1, m2):
        p1 = tuple(self.U1.points(self.depth).tolist())
        p2 = tuple(self.U2.points(self.depth).tolist())
        if sorted(self.h) != list(p1) or sorted(self.h.values()) != list(p2):
            return False
        for w1, w2 in self.pairs:
            if not (_stabilizes(m1, w1, self.U1) and _stabilizes(m2, w2, self.U2)):
                return False
            r1 = tuple(_word_images(m1, w1, self.depth)[list(p1)].tolist())
            r2 = tuple(_word_images(m2, w2, self.depth)[list(p2)].tolist())
            if _conjugate(r1, p1, p2, self.h) != r2:
                return False
        return True


@dataclass
class ReturnEquivFailure:
    direction: str
    word: tuple
    restriction: tuple

    def describe(self, model):
        return f"restriction of {model.fmt(self.word)} ({self.direction}) has no match"


@dataclass
class ReturnEquivResult:
    certificate: ReturnEquivCertificate | None
    failure: ReturnEquivFailure | None
    max_len: int
    depth: int

    @property
    def verdict(self):
        return "return-equivalent-up-to-bounds" if self.certificate else "not-matched-up-to-bounds"

    def describe(self):
        return f"{self.verdict}(L={self.max_len}, D={self.depth})"


def return_equivalence_check(m1, U1, m2, U2, h, max_len, depth, budget=DEFAULT_BUDGET):
    """Check that ``h`` conjugates the restricted holonomy of ``U1`` onto that of ``U2``."""
    H1 = restricted_holonomy(m1, U1, max_len, depth, budget)
    H2 = restricted_holonomy(m2, U2, max_len, depth, budget)
    if len(H1.points) != len(H2.points):
        raise InvalidInput(f"U1 has {len(H1.points)} cells at depth {depth}, U2 has {len(H2.points)}")
    h = {int(k): int(v) for k, v in h.items()}
    if sorted(h) != list(H1.points) or sorted(h.values()) != list(H2.points):
        raise InvalidInput("h must be a bijection from the cells of U1 to the cells of U2 at the given depth")
    hinv = {v: k for k, v in h.items()}
    pairs = []
    for r1, w1 in H1.maps.items():
        c = _conjugate(r1, H1.points, H2.points, h)
        if c not in H2.maps:
            return ReturnEquivResult(None, ReturnEquivFailure("1->2", w1, r1), max_len, depth)
        pairs.append((w1, H2.maps[c]))
    for r2, w2 in H2.maps.items():
        c = _conjugate(r2, H2.points, H1.points, hinv)
        if c not in H1.maps:
            return ReturnEquivResult(None, ReturnEquivFailure("2->1", w2, r2), max_len, depth)
        pair = (H1.maps[c], w2)
        if pair not in pairs:
            pairs.append(pair)
    cert = ReturnEquivCertificate(U1, U2, h, depth, max_len, pairs)
    return ReturnEquivResult(cert, None, max_len, depth)


def identity_matching(U, depth):
    return {int(x): int(x) for x in U.points(depth)}
