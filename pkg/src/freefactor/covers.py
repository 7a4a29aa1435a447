"""Subgroups of free groups as folded labeled graphs over the rose.

A :class:`CoverGraph` stores, for each generator, a partial injective
map on vertices: ``maps[g-1][v]`` is the endpoint of the g-labeled edge
leaving v, or None.  Loops at the base vertex read off exactly the
elements of the subgroup.  When every map is a total permutation the
graph is a finite-index cover and the vertex set is the coset space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .words import Alphabet, Word, generator_name


class CoverError(ValueError):
    pass


Edge = tuple[int, int, int]  # (source, generator, target), generator > 0


class CoverGraph:
    __slots__ = ("alphabet", "n_vertices", "base", "maps", "inv_maps")

    def __init__(self, alphabet: Alphabet, n_vertices: int, maps: Sequence[Sequence[Optional[int]]], base: int = 0):
        if n_vertices < 1:
            raise CoverError("need at least the base vertex")
        if base != 0:
            raise CoverError("base vertex is always 0")
        maps = tuple(tuple(row) for row in maps)
        if len(maps) != alphabet.rank:
            raise CoverError("one vertex map per generator required")
        inv: list[list[Optional[int]]] = []
        for g, row in enumerate(maps, start=1):
            if len(row) != n_vertices:
                raise CoverError("vertex map has wrong size")
            back: list[Optional[int]] = [None] * n_vertices
            for v, u in enumerate(row):
                if u is None:
                    continue
                if not (0 <= u < n_vertices):
                    raise CoverError(f"target {u} out of range")
                if back[u] is not None:
                    raise CoverError(f"generator {g} not injective at {u}")
                back[u] = v
            inv.append(back)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "n_vertices", n_vertices)
        object.__setattr__(self, "base", 0)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "inv_maps", tuple(tuple(row) for row in inv))
        if not self._connected():
            raise CoverError("graph is not connected")

    def __setattr__(self, *a):
        raise AttributeError("CoverGraph is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CoverGraph)
            and self.alphabet == other.alphabet
            and self.maps == other.maps
        )

    def __hash__(self):
        return hash((self.alphabet, self.maps))

    def __repr__(self):
        return f"CoverGraph(rank={self.alphabet.rank}, vertices={self.n_vertices}, edges={self.n_edges()})"

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for g in range(self.alphabet.rank):
                for u in (self.maps[g][v], self.inv_maps[g][v]):
                    if u is not None and u not in seen:
                        seen.add(u)
                        stack.append(u)
        return len(seen) == self.n_vertices

    # -- structure -------------------------------------------------------

    def step(self, v: int, letter: int) -> Optional[int]:
        """Follow one letter from vertex v; None if undefined."""
        if letter > 0:
            return self.maps[letter - 1][v]
        return self.inv_maps[-letter - 1][v]

    def edges(self) -> Iterable[Edge]:
        for g in range(1, self.alphabet.rank + 1):
            for v, u in enumerate(self.maps[g - 1]):
                if u is not None:
                    yield (v, g, u)

    def n_edges(self) -> int:
        return sum(1 for _ in self.edges())

    def rank(self) -> int:
        """Free rank of the fundamental group: E - V + 1."""
        return self.n_edges() - self.n_vertices + 1

    def is_complete(self) -> bool:
        return all(u is not None for row in self.maps for u in row)

    def degree(self, v: int) -> int:
        d = 0
        for g in range(self.alphabet.rank):
            if self.maps[g][v] is not None:
                d += 1
            if self.inv_maps[g][v] is not None:
                d += 1
        return d

    def is_core(self) -> bool:
        return all(self.degree(v) > 1 for v in range(self.n_vertices) if v != self.base)

    def trace(self, w: Word, start: Optional[int] = None) -> tuple[Optional[int], list[int]]:
        """Read w from a vertex.  Returns (end or None, visited vertices)."""
        if w.alphabet != self.alphabet:
            raise CoverError("alphabet mismatch")
        v = self.base if start is None else start
        visited = [v]
        for x in w.letters:
            nxt = self.step(v, x)
            if nxt is None:
                return None, visited
            v = nxt
            visited.append(v)
        return v, visited

    def canonical(self) -> "CoverGraph":
        """Relabel vertices in BFS discovery order from the base."""
        order = _bfs_order(self)
        relabel = {old: new for new, old in enumerate(order)}
        maps = [[None] * self.n_vertices for _ in range(self.alphabet.rank)]
        for v, g, u in self.edges():
            maps[g - 1][relabel[v]] = relabel[u]
        return CoverGraph(self.alphabet, self.n_vertices, maps)


def _bfs_order(g: CoverGraph) -> list[int]:
    order = [g.base]
    seen = {g.base}
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for gen in range(1, g.alphabet.rank + 1):
            for u in (g.maps[gen - 1][v], g.inv_maps[gen - 1][v]):
                if u is not None and u not in seen:
                    seen.add(u)
                    order.append(u)
    return order


# -- folding -------------------------------------------------------------


def fold(alphabet: Alphabet, generators: Sequence[Word]) -> CoverGraph:
    """Stallings folding of the wedge of loops reading the generators.

    The result is the core graph of the subgroup they generate, with
    vertices relabeled canonically (BFS from the base), so equal
    subgroups yield equal graphs.
    """
    for w in generators:
        if w.alphabet != alphabet:
            raise CoverError("generator over wrong alphabet")
    edges: set[Edge] = set()
    next_v = 1
    for w in generators:
        v = 0
        for i, x in enumerate(w.letters):
            u = 0 if i == len(w.letters) - 1 else next_v
            if i < len(w.letters) - 1:
                next_v += 1
            if x > 0:
                edges.add((v, x, u))
            else:
                edges.add((u, -x, v))
            v = u

    # fold: merge endpoints of equally labeled edges sharing a vertex
    parent = list(range(next_v))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int):
        x, y = find(x), find(y)
        if x != y:
            # keep the base representative at 0
            if y == 0:
                x, y = y, x
            parent[y] = x

    changed = True
    while changed:
        changed = False
        current = {(find(v), g, find(u)) for v, g, u in edges}
        out: dict[tuple[int, int], int] = {}
        inc: dict[tuple[int, int], int] = {}
        for v, g, u in current:
            if (v, g) in out and out[(v, g)] != u:
                union(out[(v, g)], u)
                changed = True
                break
            out[(v, g)] = u
            if (u, g) in inc and inc[(u, g)] != v:
                union(inc[(u, g)], v)
                changed = True
                break
            inc[(u, g)] = v
        edges = current

    edges = {(find(v), g, find(u)) for v, g, u in edges}
    verts = {find(0)} | {v for v, _, u in edges} | {u for _, _, u in edges}

    # prune hanging trees (valence-1 vertices other than the base)
    base = find(0)
    while True:
        deg: dict[int, int] = {v: 0 for v in verts}
        for v, _, u in edges:
            deg[v] += 1
            deg[u] += 1
        dead = {v for v in verts if v != base and deg[v] <= 1}
        if not dead:
            break
        verts -= dead
        edges = {(v, g, u) for v, g, u in edges if v not in dead and u not in dead}

    relabel = {base: 0}
    for v in sorted(verts):
        relabel.setdefault(v, len(relabel))
    maps: list[list[Optional[int]]] = [[None] * len(verts) for _ in range(alphabet.rank)]
    for v, g, u in edges:
        maps[g - 1][relabel[v]] = relabel[u]
    return CoverGraph(alphabet, len(verts), maps).canonical()


def membership(g: CoverGraph, w: Word) -> tuple[bool, list[int]]:
    """True iff the path reading w from the base closes at the base."""
    end, visited = g.trace(w)
    return end == g.base, visited


# -- spanning trees and bases ---------------------------------------------


@dataclass(frozen=True)
class SpanningTreeBasis:
    """A spanning tree together with the induced free basis.

    ``transversal[v]`` is the tree-path word from the base to v (a
    Schreier transversal: prefix-closed, shortest-then-lex for the BFS
    tree).  Non-tree edge i corresponds to basis letter i+1 of
    ``basis_alphabet``; its dictionary word is tree-path * edge *
    reverse tree-path.
    """

    cover: CoverGraph
    tree_edges: frozenset[Edge]
    transversal: tuple[Word, ...]
    basis_edges: tuple[Edge, ...]
    basis_alphabet: Alphabet
    dictionary: tuple[Word, ...]

    def expand(self, w: Word) -> Word:
        """Substitute basis letters by their ambient dictionary words."""
        if w.alphabet != self.basis_alphabet:
            raise CoverError("word not over the basis alphabet")
        out = Word.identity(self.cover.alphabet)
        for x in w.letters:
            d = self.dictionary[abs(x) - 1]
            out = out * (d if x > 0 else d.inv())
        return out


def spanning_tree_bfs(g: CoverGraph) -> frozenset[Edge]:
    """Deterministic BFS tree from the base, generator-index tie-breaking."""
    tree: set[Edge] = set()
    seen = {g.base}
    queue = [g.base]
    while queue:
        v = queue.pop(0)
        for gen in range(1, g.alphabet.rank + 1):
            u = g.maps[gen - 1][v]
            if u is not None and u not in seen:
                seen.add(u)
                tree.add((v, gen, u))
                queue.append(u)
            u = g.inv_maps[gen - 1][v]
            if u is not None and u not in seen:
                seen.add(u)
                tree.add((u, gen, v))
                queue.append(u)
    return frozenset(tree)


def basis_from_tree(g: CoverGraph, tree: Optional[frozenset[Edge]] = None) -> SpanningTreeBasis:
    """Free basis of the fundamental group from a spanning tree.

    With no tree given, the BFS tree is used.  Basis words are indexed
    by the non-tree edges sorted by (generator, source, target).
    """
    if tree is None:
        tree = spanning_tree_bfs(g)
    else:
        tree = frozenset(tree)
        all_edges = set(g.edges())
        if not tree <= all_edges:
            raise CoverError("tree contains unknown edges")
        if len(tree) != g.n_vertices - 1:
            raise CoverError("not a spanning tree")

    # tree-path words by BFS over tree edges only
    paths: list[Optional[Word]] = [None] * g.n_vertices
    paths[g.base] = Word.identity(g.alphabet)
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(g.n_vertices)}
    for v, gen, u in tree:
        adj[v].append((gen, u))
        adj[u].append((-gen, v))
    queue = [g.base]
    while queue:
        v = queue.pop(0)
        for letter, u in sorted(adj[v], key=lambda t: (abs(t[0]), t[0] < 0)):
            if paths[u] is None:
                paths[u] = paths[v] * Word(g.alphabet, (letter,))
                queue.append(u)
    if any(p is None for p in paths):
        raise CoverError("tree does not span")

    basis_edges = tuple(sorted(set(g.edges()) - tree))
    basis_alphabet = Alphabet(max(1, len(basis_edges)))
    if not basis_edges:
        raise CoverError("trivial subgroup has no basis")
    dictionary = tuple(
        paths[v] * Word(g.alphabet, (gen,)) * paths[u].inv() for v, gen, u in basis_edges
    )
    return SpanningTreeBasis(g, tree, tuple(paths), basis_edges, basis_alphabet, dictionary)


def rewrite_in_basis(g: CoverGraph, basis: SpanningTreeBasis, w: Word) -> Word:
    """Express a subgroup element in the spanning-tree basis.

    Traces w from the base and emits one basis letter per traversal of
    a non-tree edge; tree edges contribute nothing.  Expanding the
    result through the dictionary reduces back to w.
    """
    inside, _ = membership(g, w)
    if not inside:
        raise CoverError("word is not in the subgroup")
    index = {e: i + 1 for i, e in enumerate(basis.basis_edges)}
    out: list[int] = []
    v = g.base
    for x in w.letters:
        u = g.step(v, x)
        edge = (v, abs(x), u) if x > 0 else (u, abs(x), v)
        if edge not in basis.tree_edges:
            out.append(index[edge] if x > 0 else -index[edge])
        v = u
    return Word(basis.basis_alphabet, out)


# -- cover constructors ----------------------------------------------------


def grid_cover(k: int, n: int) -> CoverGraph:
    """The kn-vertex cover of the rose on {a, b} with b: j -> j+1 and
    a: j -> j+n (indices mod kn)."""
    if k < 1 or n < 1:
        raise CoverError("grid cover needs k, n >= 1")
    kn = k * n
    a_map = [(j + n) % kn for j in range(kn)]
    b_map = [(j + 1) % kn for j in range(kn)]
    return CoverGraph(Alphabet(2), kn, [a_map, b_map])


def grid_chain_tree(cover: CoverGraph) -> frozenset[Edge]:
    """All b-edges except the one closing the cycle back to the base."""
    kn = cover.n_vertices
    return frozenset((j, 2, j + 1) for j in range(kn - 1))


def kernel_mod_p_cover(alphabet: Alphabet, p: int, targets: Optional[Sequence[int]] = None) -> CoverGraph:
    """Cover of the kernel of the map to Z_p sending generator i to
    targets[i-1] (default: all 1).  Vertices are the residues."""
    if p < 2:
        raise CoverError("modulus must be >= 2")
    if targets is None:
        targets = [1] * alphabet.rank
    if len(targets) != alphabet.rank:
        raise CoverError("one target per generator required")
    targets = [t % p for t in targets]
    import math

    if math.gcd(p, *targets) != 1:
        raise CoverError("targets do not generate Z_p")
    maps = [[(v + t) % p for v in range(p)] for t in targets]
    return CoverGraph(alphabet, p, maps)


def make_cover(kind: str, **params) -> CoverGraph:
    """Dispatch: grid(k, n), kernel_mod_p(rank, p, targets=None),
    explicit(rank, maps)."""
    if kind == "grid":
        return grid_cover(params["k"], params["n"])
    if kind == "kernel_mod_p":
        return kernel_mod_p_cover(Alphabet(params["rank"]), params["p"], params.get("targets"))
    if kind == "explicit":
        maps = params["maps"]
        return CoverGraph(Alphabet(params["rank"]), len(maps[0]), maps)
    raise CoverError(f"unknown cover kind {kind!r}")


# -- serialization ----------------------------------------------------------


def cover_to_json(g: CoverGraph) -> dict:
    return {
        "rank": g.alphabet.rank,
        "vertices": g.n_vertices,
        "base": g.base,
        "maps": {
            generator_name(i, g.alphabet.rank): list(g.maps[i - 1])
            for i in range(1, g.alphabet.rank + 1)
        },
    }


def cover_from_json(data: dict) -> CoverGraph:
    rank = data["rank"]
    alphabet = Alphabet(rank)
    rows = []
    for i in range(1, rank + 1):
        key = generator_name(i, rank)
        if key not in data["maps"]:
            raise CoverError(f"missing generator map {key!r}")
        rows.append(data["maps"][key])
    return CoverGraph(alphabet, data["vertices"], rows)


def cover_to_dot(g: CoverGraph) -> str:
    """DOT text: one labeled arc per positive edge, inverses suppressed."""
    lines = ["digraph cover {", "  rankdir=LR;", '  node [shape=circle, fontsize=10];']
    for v in range(g.n_vertices):
        shape = ' [shape=doublecircle]' if v == g.base else ""
        lines.append(f"  v{v}{shape};")
    for v, gen, u in sorted(g.edges(), key=lambda e: (e[1], e[0])):
        lines.append(f'  v{v} -> v{u} [label="{generator_name(gen, g.alphabet.rank)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps_cover(g: CoverGraph) -> str:
    return json.dumps(cover_to_json(g), indent=2, sort_keys=True) + "\n"


def parse_cover_spec(text: str) -> CoverGraph:
    """CLI shorthand: ``grid:3,2`` or ``kernel:rank,p`` or a JSON path."""
    if ":" in text:
        kind, _, rest = text.partition(":")
        nums = [int(t) for t in rest.split(",") if t]
        if kind == "grid" and len(nums) == 2:
            return grid_cover(*nums)
        if kind == "kernel" and len(nums) >= 2:
            rank, p, *targets = nums
            return kernel_mod_p_cover(Alphabet(rank), p, targets or None)
        raise CoverError(f"bad cover spec {text!r}")
    with open(text) as fh:
        return cover_from_json(json.load(fh))


