"""Builders for example chain models and DOT export of their tree of cells.

Tree coordinates: a point of level ``l`` in a model built over a tree of
constant arity ``n`` is the word ``x_1 ... x_l`` encoded as
``x_1 + n*x_2 + ... + n**(l-1)*x_l``, so dropping the last letter is ``mod``
and the binary adding machine is ``+1``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import prod

import numpy as np

from .model import (
    ActionLevel,
    ChainModel,
    GeneratorAlphabet,
    InvalidInput,
    validate_chain,
)


class NonTransitiveError(InvalidInput):
    """An automaton or table action with more than one orbit on some level."""

    def __init__(self, level, orbits):
        super().__init__(f"action is not transitive on level {level}: {len(orbits)} orbits")
        self.level = level
        self.orbits = orbits


def _is_prime(n):
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def _checked(model):
    report = validate_chain(model)
    if not report.valid:
        raise InvalidInput(f"builder produced an invalid chain: {report.failures()[0]}")
    return model


def _levels(tables_by_level, projections, basepoints=None):
    out = []
    for ell, imgs in enumerate(tables_by_level):
        bp = 0 if basepoints is None else basepoints[ell]
        out.append(ActionLevel(ell, np.asarray(imgs), None if ell == 0 else projections[ell], bp))
    return tuple(out)


def build_odometer(arities, name=None):
    """Single generator ``t`` acting as ``+1`` on ``Z/(n_1 ... n_l)``."""
    arities = tuple(int(a) for a in arities)
    if not arities or any(a < 2 for a in arities):
        raise InvalidInput(f"odometer arities must all be >= 2, got {arities}")
    tables, projs = [], [None]
    for ell in range(len(arities) + 1):
        m = prod(arities[:ell])
        x = np.arange(m)
        tables.append([(x + 1) % m])
        if ell:
            projs.append(x % prod(arities[: ell - 1]))
    model = ChainModel(
        GeneratorAlphabet(("t",)),
        _levels(tables, projs),
        name or "odometer(" + ",".join(map(str, arities)) + ")",
        {"builder": "odometer", "arities": arities, "arity": arities[0] if len(set(arities)) == 1 else None},
    )
    return _checked(model)


def cyclic_table(n):
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def klein_table():
    return [[i ^ j for j in range(4)] for i in range(4)]


def check_group_table(table):
    """Return the identity index of a Cayley table, or raise."""
    n = len(table)
    t = np.asarray(table)
    if t.shape != (n, n) or t.min() < 0 or t.max() >= n:
        raise InvalidInput("Cayley table must be square with entries in range")
    ident = [e for e in range(n) if np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))]
    if not ident:
        raise InvalidInput("Cayley table has no identity")
    e = ident[0]
    for i in range(n):
        if sorted(t[i].tolist()) != list(range(n)) or e not in t[i]:
            raise InvalidInput(f"row {i} of the Cayley table is not a permutation")
    for a in range(n):
        for b in range(n):
            if not np.array_equal(t[t[a, b]], t[a][t[b]]):
                raise InvalidInput("Cayley table is not associative")
    return e


def build_product_model(table, arities, prefix="g", name=None):
    """One product action on ``X x odometer`` for the group with Cayley table ``table``.

    Level 1 is the finite set ``X`` (one point per group element) and level
    ``l >= 2`` is ``X x Z/(n_1 ... n_{l-1})``.  Each non-identity group element
    ``k`` is a generator ``<prefix>k`` translating the ``X`` factor on the
    left; ``t`` steps the odometer factor.
    """
    arities = tuple(int(a) for a in arities)
    if not arities or any(a < 2 for a in arities):
        raise InvalidInput("odometer arities must all be >= 2")
    n = len(table)
    e = check_group_table(table)
    t = np.asarray(table)
    elems = [k for k in range(n) if k != e]
    symbols = tuple(f"{prefix}{k}" for k in elems) + ("t",)
    invol = frozenset(i for i, k in enumerate(elems) if t[k, k] == e)
    tables = [np.zeros((len(symbols), 1), dtype=np.int64)]
    projs = [None]
    basepoints = [0]
    for ell in range(1, len(arities) + 2):
        m = prod(arities[: ell - 1])
        idx = np.arange(n * m)
        x, y = idx // m, idx % m
        rows = [t[k][x] * m + y for k in elems]
        rows.append(x * m + (y + 1) % m)
        tables.append(np.array(rows))
        if ell == 1:
            projs.append(np.zeros(n, dtype=np.int64))
        else:
            pm = prod(arities[: ell - 2])
            projs.append(x * pm + y % pm)
        basepoints.append(e * m)
    model = ChainModel(
        GeneratorAlphabet(symbols, invol),
        _levels(tables, projs, basepoints),
        name or f"product(order={n},{prefix})",
        {"builder": "product", "order": n, "arities": tuple(arities)},
    )
    return _checked(model)


def build_product_toy(order, table1, table2, arities):
    """Two product actions of equal-order groups on the same tree, generators ``g*`` and ``h*``."""
    if order < 4:
        raise InvalidInput("product toys need group order >= 4")
    if len(table1) != order or len(table2) != order:
        raise InvalidInput(f"Cayley tables must have order {order}")
    m1 = build_product_model(table1, arities, "g", f"product-1(order={order})")
    m2 = build_product_model(table2, arities, "h", f"product-2(order={order})")
    return m1, m2


def build_dihedral(p, depth):
    """``t: x -> x+1`` and ``s: x -> -x`` on ``Z/p^l`` (infinite dihedral group)."""
    if p % 2 == 0 or not _is_prime(p):
        raise InvalidInput(f"dihedral model needs an odd prime, got {p}")
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    tables, projs = [], [None]
    for ell in range(depth + 1):
        m = p**ell
        x = np.arange(m)
        tables.append([(x + 1) % m, (-x) % m])
        if ell:
            projs.append(x % p ** (ell - 1))
    model = ChainModel(
        GeneratorAlphabet(("t", "s"), frozenset({1})),
        _levels(tables, projs),
        f"dihedral(p={p})",
        {"builder": "dihedral", "p": p, "reconstructed": True},
    )
    return _checked(model)


def heisenberg_index(x, y, z, p, q, n):
    return ((x % p**n) * q**n + (y % q**n)) * p**n + (z % p**n)


def build_heisenberg(p, q, depth):
    """Discrete Heisenberg group with the chain ``G_n = diag(p^n, q^n) Z^2 x p^n Z``.

    A coset ``g G_n`` is stored as the reduced triple ``(x mod p^n, y mod q^n,
    z mod p^n)`` of ``g^-1``, on which the left action of ``k`` becomes right
    multiplication by ``k^-1`` and is well defined.
    """
    if p == q or not (_is_prime(p) and _is_prime(q)):
        raise InvalidInput(f"need two distinct primes, got p={p}, q={q}")
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    tables, projs = [], [None]
    for n in range(depth + 1):
        P, Q = p**n, q**n
        idx = np.arange(P * Q * P)
        z = idx % P
        y = (idx // P) % Q
        x = idx // (P * Q)
        gx = heisenberg_index(x - 1, y, z, p, q, n)
        gy = heisenberg_index(x, y - 1, z - x, p, q, n)
        gz = heisenberg_index(x, y, z - 1, p, q, n)
        tables.append([gx, gy, gz])
        if n:
            projs.append(heisenberg_index(x, y, z, p, q, n - 1))
    model = ChainModel(
        GeneratorAlphabet(("X", "Y", "Z")),
        _levels(tables, projs),
        f"heisenberg(p={p},q={q})",
        {"builder": "heisenberg", "p": p, "q": q},
    )
    return _checked(model)


@dataclass(frozen=True)
class AutomatonSpec:
    """A self-similar group given by wreath recursion over a tree of constant arity.

    ``states`` maps a name to ``(root_permutation, sections)`` where the root
    permutation is a tuple of images of ``0..arity-1`` and ``sections[i]`` is
    the state acting below letter ``i``.
    """

    arity: int
    states: dict
    identity: str = "e"

    def __post_init__(self):
        n = self.arity
        if n < 2:
            raise InvalidInput("arity must be >= 2")
        if self.identity not in self.states:
            raise InvalidInput(f"identity state {self.identity!r} missing")
        for name, (perm, sections) in self.states.items():
            if sorted(perm) != list(range(n)):
                raise InvalidInput(f"state {name}: root permutation {perm} is not a permutation of 0..{n - 1}")
            if len(sections) != n:
                raise InvalidInput(f"state {name}: expected {n} sections")
            for s in sections:
                if s not in self.states:
                    raise InvalidInput(f"state {name}: section {s!r} is not a state")
        perm, sections = self.states[self.identity]
        if tuple(perm) != tuple(range(n)) or any(s != self.identity for s in sections):
            raise InvalidInput("identity state must have trivial permutation and identity sections")

    @property
    def generators(self):
        return [s for s in self.states if s != self.identity]

    def is_involution(self, state):
        """Decide ``state**2 == 1`` exactly by exploring the product automaton."""
        seen = {(state, state)}
        queue = deque(seen)
        while queue:
            u, v = queue.popleft()
            pu, su = self.states[u]
            pv, sv = self.states[v]
            if any(pu[pv[i]] != i for i in range(self.arity)):
                return False
            for i in range(self.arity):
                pair = (su[pv[i]], sv[i])
                if pair not in seen:
                    seen.add(pair)
                    queue.append(pair)
        return True


def automaton_tables(spec, depth):
    """Per-level image tables of every state, keyed by state name."""
    names = list(spec.states)
    pos = {s: i for i, s in enumerate(names)}
    n = spec.arity
    perms = np.array([spec.states[s][0] for s in names])
    secs = np.array([[pos[t] for t in spec.states[s][1]] for s in names])
    level_tables = [np.zeros((len(names), 1), dtype=np.int64)]
    for ell in range(1, depth + 1):
        idx = np.arange(n**ell)
        first, rest = idx % n, idx // n
        prev = level_tables[-1]
        cur = np.stack([perms[k][first] + n * prev[secs[k][first], rest] for k in range(len(names))])
        level_tables.append(cur)
    return {s: [lt[pos[s]] for lt in level_tables] for s in names}


def build_automaton_group(spec, depth, name="automaton"):
    """Chain model of the group generated by the non-identity states of ``spec``."""
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    from .model import _orbits

    per_state = automaton_tables(spec, depth)
    gens = spec.generators
    n = spec.arity
    for ell in range(1, depth + 1):
        orbits = _orbits([per_state[g][ell] for g in gens], n**ell)
        if len(orbits) != 1:
            raise NonTransitiveError(ell, orbits)
    tables = [np.array([per_state[g][ell] for g in gens]) for ell in range(depth + 1)]
    projs = [None] + [np.arange(n**ell) % n ** (ell - 1) for ell in range(1, depth + 1)]
    invol = frozenset(i for i, g in enumerate(gens) if spec.is_involution(g))
    model = ChainModel(
        GeneratorAlphabet(tuple(gens), invol),
        _levels(tables, projs),
        name,
        {"builder": "automaton", "arity": n},
    )
    return _checked(model)


def adding_machine_spec():
    """The binary adding machine ``a = (0 1)(1, a)``."""
    return AutomatonSpec(2, {"e": ((0, 1), ("e", "e")), "a": ((1, 0), ("e", "a"))})


def grigorchuk_spec():
    """``a`` swaps the first letter; ``b = (a, c)``, ``c = (a, d)``, ``d = (1, b)``."""
    return AutomatonSpec(
        2,
        {
            "e": ((0, 1), ("e", "e")),
            "a": ((1, 0), ("e", "e")),
            "b": ((0, 1), ("a", "c")),
            "c": ((0, 1), ("a", "d")),
            "d": ((0, 1), ("e", "b")),
        },
    )


def build_grigorchuk(depth):
    return build_automaton_group(grigorchuk_spec(), depth, name="grigorchuk")


def tree_cell(model, path):
    """``(level, index)`` of the cylinder given by a path string like ``"0110"``."""
    n = model.metadata.get("arity")
    if not n:
        raise InvalidInput(f"model {model.name!r} is not over a tree of constant arity")
    letters = [int(ch) for ch in path]
    if any(not 0 <= a < n for a in letters):
        raise InvalidInput(f"path {path!r} has letters outside 0..{n - 1}")
    index = sum(a * n**i for i, a in enumerate(letters))
    model.check_level(len(letters))
    return len(letters), index


def tree_path(model, level, index):
    n = model.metadata.get("arity")
    if not n:
        raise InvalidInput(f"model {model.name!r} is not over a tree of constant arity")
    return "".join(str((index // n**i) % n) for i in range(level))


def export_tree(model, depth):
    """DOT digraph of the cells down to ``depth``; edges follow the projections."""
    model.check_level(depth)
    lines = [f'digraph "{model.name}" {{', "  node [shape=circle, fontsize=10];"]
    for ell in range(depth + 1):
        names = " ".join(f'"{ell}:{i}";' for i in range(model.size(ell)))
        lines.append(f"  {{ rank=same; {names} }}")
    for ell in range(1, depth + 1):
        proj = model.levels[ell].projection
        for i in range(model.size(ell)):
            lines.append(f'  "{ell - 1}:{int(proj[i])}" -> "{ell}:{i}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def standard_gallery(depth=4):
    """One model per builder, each at least ``depth`` levels deep where cheap."""
    m1, m2 = build_product_toy(4, cyclic_table(4), klein_table(), (2,) * max(depth - 1, 1))
    return {
        "odometer": build_odometer((2,) * depth),
        "product-cyclic": m1,
        "product-klein": m2,
        "dihedral": build_dihedral(3, depth),
        "heisenberg": build_heisenberg(2, 3, min(depth, 3)),
        "grigorchuk": build_grigorchuk(depth),
    }
