"""Shared helpers for the test suite: exhaustive partition enumeration,
random generating graphings, and brute-force oracles kept independent of
the library code paths they check."""

import itertools
import random
from fractions import Fraction

from freefactor.costlab import FiniteRelation, FiniteSpace, PartialBijection


def greedy_nielsen_dependent(words):
    """Shortlex-greedy Nielsen reduction; True iff a word collapses.

    Length-reducing moves alone are not a complete decision procedure
    (a dependent tuple can stall at a local minimum), so a True answer
    is a constructive dependence witness while False is inconclusive."""
    tup = [min(u, u.inv()) for u in words]
    if any(not u for u in tup):
        return True
    changed = True
    while changed:
        changed = False
        for i in range(len(tup)):
            for j in range(len(tup)):
                if i == j:
                    continue
                best = tup[j]
                for a in (tup[i], tup[i].inv()):
                    for b in (tup[j], tup[j].inv()):
                        cand = a * b
                        cand = min(cand, cand.inv())
                        if cand < best:
                            best = cand
                if best != tup[j]:
                    tup[j] = best
                    if not best:
                        return True
                    changed = True
    return False


def naive_fold_rank(words):
    """Second folding implementation, deliberately different from the
    library's (edge-list rewriting, no union-find, no canonical form, no
    pruning; pruning cannot change E - V + 1)."""
    edges = []
    nv = 1
    for w in words:
        prev = 0
        for i, x in enumerate(w.letters):
            nxt = 0 if i == len(w.letters) - 1 else nv
            if i < len(w.letters) - 1:
                nv += 1
            edges.append((prev, x, nxt) if x > 0 else (nxt, -x, prev))
            prev = nxt
    changed = True
    while changed:
        changed = False
        out, inc = {}, {}
        for u, label, v in edges:
            if (u, label) in out and out[(u, label)] != v:
                a, b = v, out[(u, label)]
            elif (v, label) in inc and inc[(v, label)] != u:
                a, b = u, inc[(v, label)]
            else:
                out[(u, label)] = v
                inc[(v, label)] = u
                continue
            edges = [
                (x if x != a else b, l, y if y != a else b) for x, l, y in edges
            ]
            changed = True
            break
    edge_set = set(edges)
    if not edge_set:
        return 0
    verts = {u for u, _, _ in edge_set} | {v for _, _, v in edge_set}
    return len(edge_set) - len(verts) + 1


def nielsen_independent(words):
    """Tuple-freeness oracle: greedy Nielsen reduction for dependence
    witnesses, confirmed against an independent fold when it stalls.
    The two must agree whenever Nielsen does find a collapse."""
    words = list(words)
    rank_verdict = naive_fold_rank(words) == len(words) and all(words)
    if greedy_nielsen_dependent(words):
        assert not rank_verdict, "Nielsen collapse contradicts the independent fold"
        return False
    return rank_verdict


def all_partitions(points):
    """Every set partition of the given points."""
    points = list(points)
    if not points:
        yield ()
        return
    first, rest = points[0], points[1:]
    for sub in all_partitions(rest):
        yield sub + ((first,),)
        for i, c in enumerate(sub):
            yield sub[:i] + (c + (first,),) + sub[i + 1 :]


def random_partition(rng: random.Random, points):
    classes = []
    for p in points:
        if classes and rng.random() < 0.6:
            rng.choice(classes).append(p)
        else:
            classes.append([p])
    return FiniteRelation.from_classes(classes)


def random_generating_graphing(rng: random.Random, relation, extra_edges=0, fixed_points=0):
    """A graphing generating the relation: a random spanning tree per
    class plus optional redundant edges and degenerate fixed points,
    randomly packed into injective partial maps."""
    edges = []
    for c in relation.classes:
        verts = list(c)
        rng.shuffle(verts)
        for i in range(1, len(verts)):
            j = rng.randrange(i)
            edges.append((verts[i], verts[j]))
        for _ in range(extra_edges):
            if len(verts) >= 2 and rng.random() < 0.5:
                x, y = rng.sample(verts, 2)
                edges.append((x, y))
    for _ in range(fixed_points):
        p = rng.choice(relation.points)
        edges.append((p, p))
    rng.shuffle(edges)
    maps = []
    current: dict[int, int] = {}
    for x, y in edges:
        if x in current or y in set(current.values()):
            maps.append(PartialBijection.of(current))
            current = {}
        current[x] = y
    if current:
        maps.append(PartialBijection.of(current))
    return tuple(maps)


def brute_min_graphing_cost(space: FiniteSpace, relation: FiniteRelation) -> Fraction:
    """Exhaustive minimum over spanning edge sets, charging each edge
    the lighter endpoint."""
    total = Fraction(0)
    for c in relation.classes:
        verts = list(c)
        if len(verts) == 1:
            continue
        candidates = list(itertools.combinations(verts, 2))
        best = None
        for subset in itertools.combinations(candidates, len(verts) - 1):
            parent = {v: v for v in verts}

            def find(v):
                while parent[v] != v:
                    v = parent[v]
                return v

            for x, y in subset:
                parent[find(x)] = find(y)
            if len({find(v) for v in verts}) == 1:
                c_cost = sum(min(space.weight(x), space.weight(y)) for x, y in subset)
                best = c_cost if best is None else min(best, c_cost)
        total += best
    return total


def bipartite_forest_oracle(e1: FiniteRelation, e2: FiniteRelation) -> bool:
    """Orthogonality oracle: the multigraph on E1-classes and E2-classes
    with one edge per point is a forest."""
    nodes = 0
    index = {}
    for tag, rel in (("1", e1), ("2", e2)):
        for c in rel.classes:
            index[(tag, c)] = nodes
            nodes += 1
    edge_count = 0
    parent = list(range(nodes))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for p in e1.points:
        a = index[("1", e1.class_of(p))]
        b = index[("2", e2.class_of(p))]
        edge_count += 1
        ra, rb = find(a), find(b)
        if ra == rb:
            return False  # this edge closes a cycle
        parent[ra] = rb
    return True
