"""Exact hom/inj/ind counting by backtracking, quotients, and the
partition-lattice machinery tying the three counts together."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

from .errors import BudgetError, SignatureError
from .structures import Signature, Structure, lift, make_structure


# ---------------------------------------------------------------------------
# Partitions of {0..n-1}

def set_partitions(n: int):
    """All partitions of range(n), blocks ordered by minimum element.

    Generated lazily from restricted-growth strings.
    """
    if n == 0:
        yield ()
        return

    def grow(prefix, maxval):
        depth = len(prefix)
        if depth == n:
            blocks: list[list[int]] = [[] for _ in range(maxval + 1)]
            for v, b in enumerate(prefix):
                blocks[b].append(v)
            yield tuple(tuple(b) for b in blocks)
            return
        for b in range(maxval + 2):
            yield from grow(prefix + [b], max(maxval, b))

    yield from grow([0], 0)


def validate_partition(theta, n: int) -> tuple[tuple[int, ...], ...]:
    blocks = tuple(tuple(sorted(b)) for b in theta)
    seen: set[int] = set()
    for block in blocks:
        if not block:
            raise SignatureError("partition blocks must be non-empty")
        if seen & set(block):
            raise SignatureError("partition blocks must be disjoint")
        seen.update(block)
    if seen != set(range(n)):
        raise SignatureError("partition must cover the whole domain")
    return tuple(sorted(blocks, key=min))


def mobius(theta) -> int:
    """Product over blocks I of (-1)^(|I|-1) * (|I|-1)!."""
    value = 1
    for block in theta:
        size = len(block)
        value *= (-1) ** (size - 1) * math.factorial(size - 1)
    return value


def quotient(pattern: Structure, theta) -> Structure:
    """Identify the vertices inside each block; tuples collapse accordingly."""
    blocks = validate_partition(theta, pattern.domain)
    block_of = {}
    for i, block in enumerate(blocks):
        for v in block:
            block_of[v] = i
    relations = {
        name: {tuple(block_of[v] for v in t) for t in pattern.rel(name)}
        for name in pattern.signature.names
    }
    return make_structure(pattern.signature, len(blocks), relations)


# ---------------------------------------------------------------------------
# Counting

@dataclass(frozen=True)
class CountReport:
    value: int
    mode: str
    nodes_explored: int


def _aligned(pattern: Structure, target: Structure) -> tuple[Structure, Structure]:
    symbols = list(pattern.signature.symbols)
    names = {n for n, _ in symbols}
    for name, arity in target.signature.symbols:
        if name in names:
            if pattern.signature.arity(name) != arity:
                raise SignatureError(f"symbol {name!r} has conflicting arities")
        else:
            symbols.append((name, arity))
            names.add(name)
    combined = Signature(tuple(symbols))
    return lift(pattern, combined), lift(target, combined)


def gaifman_components(s: Structure) -> list[list[int]]:
    """Connected components of the co-occurrence graph over all relations."""
    parent = list(range(s.domain))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for rel in s.relations:
        for t in rel:
            for v in t[1:]:
                parent[find(v)] = find(t[0])
    groups: dict[int, list[int]] = {}
    for v in range(s.domain):
        groups.setdefault(find(v), []).append(v)
    return [sorted(g) for g in sorted(groups.values(), key=min)]


def _search_order(pattern: Structure, vertices: list[int]) -> list[int]:
    # Place the most constrained vertex first, then greedily extend along
    # tuples touching already-placed vertices.
    incident: dict[int, list] = {v: [] for v in vertices}
    for idx, rel in enumerate(pattern.relations):
        for t in rel:
            for v in set(t):
                if v in incident:
                    incident[v].append((idx, t))
    remaining = set(vertices)
    order: list[int] = []
    placed: set[int] = set()
    while remaining:
        best = max(
            remaining,
            key=lambda v: (
                sum(1 for _, t in incident[v] if placed & set(t)),
                len(incident[v]),
                -v,
            ),
        )
        order.append(best)
        placed.add(best)
        remaining.discard(best)
    return order


def _count_maps(pattern: Structure, target: Structure, vertices: list[int],
                injective: bool, induced_check: bool) -> tuple[int, int]:
    """Count relation-preserving maps of `vertices` into the target."""
    order = _search_order(pattern, vertices)
    position = {v: i for i, v in enumerate(order)}
    # Tuples checked as soon as their last vertex (in search order) is placed.
    check_at: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in order]
    for idx, rel in enumerate(pattern.relations):
        for t in rel:
            if all(v in position for v in t):
                check_at[max(position[v] for v in t)].append((idx, t))
    target_sets = target.rel_sets()
    n = target.domain
    image: dict[int, int] = {}
    used: set[int] = set()
    nodes = 0

    def verify_induced() -> bool:
        img = set(image.values())
        inverse = {w: v for v, w in image.items()}
        for idx, rel in enumerate(target.relations):
            pattern_rel = frozenset(pattern.relations[idx])
            for t in rel:
                if all(w in img for w in t):
                    if tuple(inverse[w] for w in t) not in pattern_rel:
                        return False
        return True

    def extend(depth: int) -> int:
        nonlocal nodes
        if depth == len(order):
            if induced_check and not verify_induced():
                return 0
            return 1
        v = order[depth]
        total = 0
        for w in range(n):
            if injective and w in used:
                continue
            nodes += 1
            image[v] = w
            ok = all(
                tuple(image[u] for u in t) in target_sets[idx]
                for idx, t in check_at[depth]
            )
            if ok:
                if injective:
                    used.add(w)
                total += extend(depth + 1)
                if injective:
                    used.discard(w)
            del image[v]
        return total

    return extend(0), nodes


def hom_count(pattern: Structure, target: Structure) -> CountReport:
    """All relation-preserving maps; factorizes over the pattern's connected
    components and multiplies the per-component counts."""
    pattern, target = _aligned(pattern, target)
    value = 1
    nodes = 0
    for component in gaifman_components(pattern):
        sub, sub_nodes = _count_maps(pattern, target, component, False, False)
        value *= sub
        nodes += sub_nodes
        if value == 0:
            break
    return CountReport(value, "hom", nodes)


def inj_count(pattern: Structure, target: Structure) -> CountReport:
    """Injective relation-preserving maps (no component factorization)."""
    pattern, target = _aligned(pattern, target)
    if pattern.domain > target.domain:
        return CountReport(0, "inj", 0)
    value, nodes = _count_maps(pattern, target, list(range(pattern.domain)), True, False)
    return CountReport(value, "inj", nodes)


def ind_count(pattern: Structure, target: Structure) -> CountReport:
    """Injective maps whose image induces exactly the pattern's relations."""
    pattern, target = _aligned(pattern, target)
    if pattern.domain > target.domain:
        return CountReport(0, "ind", 0)
    value, nodes = _count_maps(pattern, target, list(range(pattern.domain)), True, True)
    return CountReport(value, "ind", nodes)


def hom(pattern: Structure, target: Structure) -> int:
    return hom_count(pattern, target).value


def inj(pattern: Structure, target: Structure) -> int:
    return inj_count(pattern, target).value


def ind(pattern: Structure, target: Structure) -> int:
    return ind_count(pattern, target).value


# ---------------------------------------------------------------------------
# Super-pattern enumeration (for the ind/inj inclusion-exclusion)

def _missing_tuples(pattern: Structure, closure: str | None):
    """Per symbol, the addable tuple groups.  With closure='simple' the binary
    relations grow by symmetric non-loop pairs; otherwise single tuples."""
    groups = []
    for idx, (name, arity) in enumerate(pattern.signature.symbols):
        present = set(pattern.relations[idx])
        if closure == "simple" and arity == 2:
            candidates = []
            for u in range(pattern.domain):
                for v in range(u + 1, pattern.domain):
                    if (u, v) not in present:
                        candidates.append(((u, v), (v, u)))
            groups.append((idx, candidates))
        else:
            candidates = [
                (t,) for t in product(range(pattern.domain), repeat=arity) if t not in present
            ]
            groups.append((idx, candidates))
    return groups


def super_patterns(pattern: Structure, closure: str | None = None, budget: int = 1 << 22):
    """Yield (superstructure, number of added tuple groups) for every way of
    enlarging the pattern's relations on the same domain."""
    groups = _missing_tuples(pattern, closure)
    total = 1
    for _, candidates in groups:
        total <<= len(candidates)
        if total > budget:
            raise BudgetError("super-pattern enumeration too large")

    def rec(level: int, relations: list[set], added: int):
        if level == len(groups):
            yield (
                make_structure(pattern.signature, pattern.domain,
                               {pattern.signature.symbols[i][0]: relations[i]
                                for i in range(len(relations))}),
                added,
            )
            return
        idx, candidates = groups[level]

        def choose(pos: int, count: int):
            if pos == len(candidates):
                yield from rec(level + 1, relations, added + count)
                return
            yield from choose(pos + 1, count)
            for t in candidates[pos]:
                relations[idx].add(t)
            yield from choose(pos + 1, count + 1)
            for t in candidates[pos]:
                relations[idx].discard(t)

        yield from choose(0, 0)

    base = [set(rel) for rel in pattern.relations]
    yield from rec(0, base, 0)
