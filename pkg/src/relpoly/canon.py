"""Canonical keys for small structures.

Two structures over the same signature get equal keys exactly when some
domain bijection carries every relation onto its namesake.  The key is the
minimum of a per-vertex encoding stream over all labelings compatible with an
iterated-refinement coloring; branch-and-bound with twin elimination keeps the
search tractable for the sizes this toolkit works at.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations

from .errors import BudgetError
from .structures import Structure

DEFAULT_CAP = 12
_BRUTE_CAP = 8


def _binary_code(s: Structure, u: int, v: int, binary: list[frozenset]) -> int:
    code = 0
    for bit, rel in enumerate(binary):
        if (u, v) in rel:
            code |= 1 << (2 * bit)
        if (v, u) in rel:
            code |= 1 << (2 * bit + 1)
    return code


def _refine_colors(s: Structure, binary: list[frozenset], unary_mask, loop_mask):
    n = s.domain
    colors = [0] * n
    ranking = {}
    for v in range(n):
        key = (unary_mask[v], loop_mask[v])
        colors[v] = ranking.setdefault(key, len(ranking))
    while True:
        keys = []
        for v in range(n):
            neigh = sorted(
                (_binary_code(s, v, u, binary), colors[u])
                for u in range(n)
                if u != v and _binary_code(s, v, u, binary)
            )
            keys.append((colors[v], tuple(neigh)))
        ranking = {}
        for key in sorted(set(keys)):
            ranking[key] = len(ranking)
        new = [ranking[k] for k in keys]
        if new == colors:
            return colors
        colors = new


def _canonical_stream(s: Structure) -> tuple:
    n = s.domain
    binary = [frozenset(s.rel(name)) for name, arity in s.signature.symbols if arity == 2]
    unary_names = [name for name, arity in s.signature.symbols if arity == 1]
    unary_mask = [0] * n
    for bit, name in enumerate(unary_names):
        for (v,) in s.rel(name):
            unary_mask[v] |= 1 << bit
    loop_mask = [0] * n
    for bit, rel in enumerate(binary):
        for v in range(n):
            if (v, v) in rel:
                loop_mask[v] |= 1 << bit
    colors = _refine_colors(s, binary, unary_mask, loop_mask)

    def is_twin(u: int, v: int) -> bool:
        if unary_mask[u] != unary_mask[v] or loop_mask[u] != loop_mask[v]:
            return False
        if _binary_code(s, u, v, binary) != _binary_code(s, v, u, binary):
            return False
        return all(
            _binary_code(s, u, w, binary) == _binary_code(s, v, w, binary)
            for w in range(n)
            if w != u and w != v
        )

    best: list | None = None
    labeled: list[int] = []
    remaining_by_color: dict[int, set[int]] = {}
    for v in range(n):
        remaining_by_color.setdefault(colors[v], set()).add(v)

    def search(stream: list):
        nonlocal best
        if len(labeled) == n:
            if best is None or stream < best:
                best = list(stream)
            return
        # Smallest remaining class first: its vertices are individualized
        # early, so later rows discriminate instead of branching blindly.
        size, color = min(
            (len(vs), c) for c, vs in remaining_by_color.items() if vs
        )
        candidates = []
        for v in remaining_by_color[color]:
            row = tuple(_binary_code(s, v, u, binary) for u in labeled)
            candidates.append((row, v))
        candidates.sort()
        min_row = candidates[0][0]
        picked: list[int] = []
        for row, v in candidates:
            if row != min_row:
                break
            if any(is_twin(v, w) for w in picked):
                continue
            picked.append(v)
        for v in picked:
            level = (size, color, unary_mask[v], loop_mask[v], min_row)
            stream.append(level)
            if best is not None and stream > best[: len(stream)]:
                stream.pop()
                continue
            labeled.append(v)
            remaining_by_color[color].discard(v)
            search(stream)
            remaining_by_color[color].add(v)
            labeled.pop()
            stream.pop()
        return

    search([])
    assert best is not None
    return tuple(best)


def _brute_stream(s: Structure) -> tuple:
    if s.domain > _BRUTE_CAP:
        raise BudgetError(
            f"canonical form for arity > 2 is capped at {_BRUTE_CAP} vertices (got {s.domain})"
        )
    best = None
    for perm in permutations(range(s.domain)):
        encoded = tuple(
            tuple(sorted(tuple(perm[v] for v in t) for t in rel)) for rel in s.relations
        )
        if best is None or encoded < best:
            best = encoded
    return best


@lru_cache(maxsize=65536)
def _canonical_key(s: Structure, cap: int) -> bytes:
    if s.domain > cap:
        raise BudgetError(f"canonical form capped at {cap} vertices (got {s.domain})")
    if any(arity > 2 for _, arity in s.signature.symbols):
        stream = _brute_stream(s)
    elif s.domain == 0:
        stream = ()
    else:
        stream = _canonical_stream(s)
    return repr((s.domain, s.signature.symbols, stream)).encode()


def canonical_form(s: Structure, cap: int = DEFAULT_CAP) -> bytes:
    """Canonical byte-string key; equal keys exactly for structures isomorphic
    under the identity symbol map."""
    return _canonical_key(s, cap)
