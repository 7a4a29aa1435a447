"""Cost of equivalence relations on finite weighted spaces, exactly.

Everything here is exact rational arithmetic (`fractions.Fraction`); no
floating point.  A graphing is a family of measure-preserving partial
bijections; its cost is the sum of the domain weights.  The cost of a
finite relation is attained by spanning forests, which makes the
treeing characterization and the complete-section formula testable
identities rather than limits.

Finite actions of free groups on finite sets are never free in the
group-theoretic sense; freeness is audited up to a recorded word
length instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .covers import CoverGraph, SpanningTreeBasis, basis_from_tree
from .lifts import CosetAction
from .words import Alphabet, Word, enumerate_reduced_words, generator_name


class CostError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteSpace:
    """Finitely many labeled points with positive rational weights.

    The ambient spaces of actions are probability spaces; restrictions
    to subsets keep the original (unrescaled) weights.
    """

    points: tuple[int, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.points) != len(set(self.points)) or len(self.points) != len(self.weights):
            raise CostError("points must be distinct and weighted")
        if any(w <= 0 for w in self.weights):
            raise CostError("weights must be positive")

    @staticmethod
    def uniform(n: int) -> "FiniteSpace":
        if n < 1:
            raise CostError("need at least one point")
        return FiniteSpace(tuple(range(n)), (Fraction(1, n),) * n)

    def weight(self, point: int) -> Fraction:
        return self.weights[self.points.index(point)]

    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def is_probability(self) -> bool:
        return self.total() == 1

    def restrict(self, subset: Iterable[int]) -> "FiniteSpace":
        subset = set(subset)
        unknown = subset - set(self.points)
        if unknown:
            raise CostError(f"unknown points {sorted(unknown)}")
        pts = tuple(p for p in self.points if p in subset)
        return FiniteSpace(pts, tuple(self.weight(p) for p in pts))

    def measure(self, subset: Iterable[int]) -> Fraction:
        return sum((self.weight(p) for p in set(subset)), Fraction(0))


@dataclass(frozen=True)
class PartialBijection:
    """An injective map between subsets, stored as sorted (x, y) pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        xs = [x for x, _ in self.pairs]
        ys = [y for _, y in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise CostError("not injective")
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    @staticmethod
    def of(mapping: dict[int, int]) -> "PartialBijection":
        return PartialBijection(tuple(sorted(mapping.items())))

    def domain(self) -> tuple[int, ...]:
        return tuple(x for x, _ in self.pairs)

    def image(self) -> tuple[int, ...]:
        return tuple(sorted(y for _, y in self.pairs))

    def is_measure_preserving(self, space: FiniteSpace) -> bool:
        return all(space.weight(x) == space.weight(y) for x, y in self.pairs)


Graphing = tuple[PartialBijection, ...]


def graphing(*maps: PartialBijection) -> Graphing:
    return tuple(maps)


@dataclass(frozen=True)
class FiniteRelation:
    """A partition of a labeled finite set into classes."""

    points: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = [p for c in self.classes for p in c]
        if sorted(flat) != sorted(self.points) or len(flat) != len(set(flat)):
            raise CostError("classes must partition the points")
        canon = tuple(sorted(tuple(sorted(c)) for c in self.classes))
        object.__setattr__(self, "points", tuple(sorted(self.points)))
        object.__setattr__(self, "classes", canon)

    @staticmethod
    def from_classes(classes: Sequence[Iterable[int]]) -> "FiniteRelation":
        classes = [tuple(c) for c in classes]
        pts = [p for c in classes for p in c]
        return FiniteRelation(tuple(pts), tuple(classes))

    @staticmethod
    def singletons(points: Iterable[int]) -> "FiniteRelation":
        pts = tuple(points)
        return FiniteRelation(pts, tuple((p,) for p in pts))

    def class_of(self, point: int) -> tuple[int, ...]:
        for c in self.classes:
            if point in c:
                return c
        raise CostError(f"unknown point {point}")

    def relates(self, x: int, y: int) -> bool:
        return y in self.class_of(x)

    def refines(self, other: "FiniteRelation") -> bool:
        """True iff self is a sub-relation of other (classes nest)."""
        if self.points != other.points:
            return False
        return all(set(c) <= set(other.class_of(c[0])) for c in self.classes)

    def join(self, other: "FiniteRelation") -> "FiniteRelation":
        if self.points != other.points:
            raise CostError("point sets differ")
        parent = {p: p for p in self.points}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for rel in (self, other):
            for c in rel.classes:
                for p in c[1:]:
                    parent[find(p)] = find(c[0])
        groups: dict[int, list[int]] = {}
        for p in self.points:
            groups.setdefault(find(p), []).append(p)
        return FiniteRelation(self.points, tuple(tuple(g) for g in groups.values()))

    def restrict(self, subset: Iterable[int]) -> "FiniteRelation":
        subset = set(subset)
        classes = [tuple(p for p in c if p in subset) for c in self.classes]
        classes = [c for c in classes if c]
        return FiniteRelation(tuple(sorted(subset & set(self.points))), tuple(classes))

    def class_count(self) -> int:
        return len(self.classes)


# -- generation and cost ----------------------------------------------------


def generated_partition(space: FiniteSpace, maps: Graphing) -> FiniteRelation:
    """Connected components of the graph with edges (x, phi(x))."""
    parent = {p: p for p in space.points}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for phi in maps:
        for x, y in phi.pairs:
            if x not in parent or y not in parent:
                raise CostError("map uses points outside the space")
            parent[find(x)] = find(y)
    groups: dict[int, list[int]] = {}
    for p in space.points:
        groups.setdefault(find(p), []).append(p)
    return FiniteRelation(space.points, tuple(tuple(g) for g in groups.values()))


def cost(space: FiniteSpace, maps: Graphing) -> Fraction:
    """Sum of the domain measures; demands measure preservation."""
    for phi in maps:
        if not phi.is_measure_preserving(space):
            raise CostError("graphing element is not measure-preserving")
    return sum((space.measure(phi.domain()) for phi in maps), Fraction(0))


def relation_cost(space: FiniteSpace, relation: FiniteRelation) -> Fraction:
    """Cost of the relation: a minimum-weight spanning forest, where an
    edge joining x and y can charge the lighter endpoint as its domain.

    For uniform weights this is (points - classes) / points.
    """
    if tuple(sorted(space.points)) != relation.points:
        raise CostError("relation is not over this space")
    total = Fraction(0)
    for c in relation.classes:
        weights = sorted(space.weight(p) for p in c)
        # Kruskal on the complete graph with w(x, y) = min(w(x), w(y)):
        # the optimum joins everything through the lightest point, so the
        # forest charges every weight except the heaviest once.
        total += sum(weights[:-1], Fraction(0))
    return total


def is_treeing(space: FiniteSpace, maps: Graphing, relation: FiniteRelation) -> bool:
    """True iff the graphing induces a tree on every class.

    Each pair (x, phi(x)) with x != phi(x) is one edge (multiplicities
    count); a fixed point on the domain is a degenerate loop and
    disqualifies the graphing outright.
    """
    if generated_partition(space, maps) != relation:
        raise CostError("graphing does not generate the relation")
    edge_count: dict[tuple[int, ...], int] = {c: 0 for c in relation.classes}
    for phi in maps:
        for x, y in phi.pairs:
            if x == y:
                return False
            edge_count[relation.class_of(x)] += 1
    return all(edge_count[c] == len(c) - 1 for c in relation.classes)


def treeing_for(space: FiniteSpace, relation: FiniteRelation) -> Graphing:
    """A spanning-forest graphing attaining the relation cost.

    Requires constant weights on each class, as any measure-preserving
    graphing does.
    """
    pairs = []
    for c in relation.classes:
        if len({space.weight(p) for p in c}) > 1:
            raise CostError("class carries unequal weights; no m.p. graphing exists")
        for x, y in zip(c, c[1:]):
            pairs.append((x, y))
    return (PartialBijection(tuple(pairs)),) if pairs else ()


@dataclass(frozen=True)
class SectionReport:
    relation_cost: Fraction
    restricted_cost: Fraction
    complement_measure: Fraction
    equal: bool

    def lines(self) -> list[str]:
        return [
            f"C(E)              = {self.relation_cost}",
            f"C(E|A)            = {self.restricted_cost}",
            f"mu(X \\ A)         = {self.complement_measure}",
            f"C(E|A) + mu(X\\A)  = {self.restricted_cost + self.complement_measure}",
            f"verdict: {'equal' if self.equal else 'MISMATCH'}",
        ]


def restrict_and_check(
    space: FiniteSpace, relation: FiniteRelation, section: Iterable[int]
) -> tuple[FiniteRelation, SectionReport]:
    """Restrict to a complete section and verify the cost identity
    C(E) = C(E|A) + mu(X \\ A) with the unrescaled restricted weights."""
    section = set(section)
    for c in relation.classes:
        if not section & set(c):
            raise CostError(f"section misses the class {c}")
    restricted = relation.restrict(section)
    sub_space = space.restrict(section)
    lhs = relation_cost(space, relation)
    rc = relation_cost(sub_space, restricted)
    comp = space.measure(set(space.points) - section)
    return restricted, SectionReport(lhs, rc, comp, lhs == rc + comp)


# -- free products -----------------------------------------------------------


def check_free_product(relation: FiniteRelation, e1: FiniteRelation, e2: FiniteRelation) -> bool:
    """True iff E = E1 * E2: the join is E and no alternating cycle of
    nontrivial E1/E2 steps exists (exhaustive path search)."""
    if not (e1.refines(relation) and e2.refines(relation)):
        raise CostError("factors must be sub-relations")
    if e1.join(e2) != relation:
        return False
    # states (point, parity); parity 0 takes a nontrivial E2 step, parity 1
    # a nontrivial E1 step; a directed cycle is exactly a violating cycle
    def neighbors(state):
        point, parity = state
        rel = e2 if parity == 0 else e1
        for q in rel.class_of(point):
            if q != point:
                yield (q, 1 - parity)

    color: dict[tuple[int, int], int] = {}
    for start in ((p, s) for p in relation.points for s in (0, 1)):
        if color.get(start):
            continue
        stack = [(start, iter(neighbors(start)))]
        color[start] = 1  # in progress
        while stack:
            state, it = stack[-1]
            advanced = False
            for nxt in it:
                if color.get(nxt) == 1:
                    return False  # cycle found
                if color.get(nxt, 0) == 0:
                    color[nxt] = 1
                    stack.append((nxt, iter(neighbors(nxt))))
                    advanced = True
                    break
            if not advanced:
                color[state] = 2
                stack.pop()
    return True


# -- finite actions ------------------------------------------------------------


@dataclass(frozen=True)
class FiniteAction:
    """Measure-preserving permutations indexed by named generators.

    ``audited_free_length`` records the bound L up to which no
    nontrivial reduced word was seen to fix a point; finite shadows of
    "free action" always carry such a bound instead of the real thing.
    """

    space: FiniteSpace
    names: tuple[str, ...]
    perms: tuple[tuple[int, ...], ...]
    audited_free_length: Optional[int] = None

    def __post_init__(self):
        n = len(self.space.points)
        for p in self.perms:
            if sorted(p) != list(range(n)):
                raise CostError("generator is not a permutation of point indices")
            for i, j in enumerate(p):
                if self.space.weights[i] != self.space.weights[j]:
                    raise CostError("permutation does not preserve the measure")
        if len(self.names) != len(self.perms):
            raise CostError("one name per permutation")

    def apply_letters(self, letters: Iterable[int], index: int) -> int:
        v = index
        for x in letters:
            v = self.perms[x - 1][v] if x > 0 else self.perms[-x - 1].index(v)
        return v

    def orbit_relation(self) -> FiniteRelation:
        maps = tuple(
            PartialBijection(tuple((self.space.points[i], self.space.points[j]) for i, j in enumerate(p)))
            for p in self.perms
        )
        return generated_partition(self.space, maps)

    def free_up_to(self, max_len: int) -> bool:
        alphabet = Alphabet(len(self.names))
        for w in enumerate_reduced_words(alphabet, max_len):
            if any(self.apply_letters(w.letters, i) == i for i in range(len(self.space.points))):
                return False
        return True

    def audit_freeness(self, max_len: int) -> "FiniteAction":
        if not self.free_up_to(max_len):
            raise CostError(f"action has a fixed point at word length <= {max_len}")
        return FiniteAction(self.space, self.names, self.perms, audited_free_length=max_len)


def induce_action(
    h_action: FiniteAction,
    cosets: CosetAction | CoverGraph,
    basis: Optional[SpanningTreeBasis] = None,
) -> FiniteAction:
    """Extend a subgroup action through a finite cover.

    The subgroup action must be indexed by the tree-basis letters of the
    cover.  The result acts on X x {cosets} with weights w(x)/n; the
    copy of X over the base coset occupies the first |X| indices, is a
    complete section, and the restriction of the induced orbit relation
    to it is the subgroup's orbit relation.  Both facts are checked.
    """
    cover = cosets.cover if isinstance(cosets, CosetAction) else cosets
    if cover is None:
        raise CostError("coset action does not carry its cover")
    if not cover.is_complete():
        raise CostError("finite induction needs a complete cover")
    if basis is None:
        basis = basis_from_tree(cover)
    expected = tuple(
        generator_name(i, basis.basis_alphabet.rank)
        for i in range(1, basis.basis_alphabet.rank + 1)
    )
    if h_action.names != expected:
        raise CostError("incompatible generator dictionaries")
    if not h_action.space.is_probability():
        raise CostError("subgroup action must live on a probability space")

    from .covers import rewrite_in_basis

    m = len(h_action.space.points)
    n = cover.n_vertices
    # point (x_i, v) gets index v*m + i; the base fiber is 0..m-1
    new_points = tuple(range(m * n))
    new_weights = tuple(h_action.space.weights[i] / n for v in range(n) for i in range(m))
    space = FiniteSpace(new_points, new_weights)

    perms = []
    for g in range(1, cover.alphabet.rank + 1):
        letter = Word(cover.alphabet, (g,))
        images = [0] * (m * n)
        for v in range(n):
            v2 = cover.step(v, -g)  # source coset: reading g from v2 lands on v
            h_word = basis.transversal[v2] * letter * basis.transversal[v].inv()
            h_in_basis = rewrite_in_basis(cover, basis, h_word)
            for i in range(m):
                j = h_action.apply_letters(h_in_basis.letters, i)
                images[v * m + i] = v2 * m + j
        perms.append(tuple(images))
    induced = FiniteAction(space, tuple(generator_name(i, cover.alphabet.rank) for i in range(1, cover.alphabet.rank + 1)), tuple(perms))

    # rescaled measure is a probability (induction property)
    if space.total() != 1:
        raise CostError("induced measure does not total 1")
    # the base fiber is a complete section and restricts to the H-relation
    x0 = set(range(m))
    induced_relation = induced.orbit_relation()
    for c in induced_relation.classes:
        if not x0 & set(c):
            raise CostError("base fiber fails to meet an orbit")
    restricted = induced_relation.restrict(x0)
    h_classes = tuple(
        tuple(sorted(h_action.space.points.index(p) for p in c))
        for c in h_action.orbit_relation().classes
    )
    if restricted.classes != tuple(sorted(h_classes)):
        raise CostError("restriction to the base fiber differs from the subgroup relation")
    return induced


# -- serialization ---------------------------------------------------------------


def space_to_json(space: FiniteSpace) -> dict:
    return {
        "points": list(space.points),
        "weights": [str(w) for w in space.weights],
    }


def space_from_json(data: dict) -> FiniteSpace:
    return FiniteSpace(tuple(data["points"]), tuple(Fraction(w) for w in data["weights"]))


def graphing_to_json(maps: Graphing) -> list:
    return [{"pairs": [list(p) for p in phi.pairs]} for phi in maps]


def graphing_from_json(data: list) -> Graphing:
    return tuple(PartialBijection(tuple((x, y) for x, y in phi["pairs"])) for phi in data)


def relation_to_json(relation: FiniteRelation) -> dict:
    return {"classes": [list(c) for c in relation.classes]}


def relation_from_json(data: dict) -> FiniteRelation:
    return FiniteRelation.from_classes([tuple(c) for c in data["classes"]])


def dumps_section_report(report: SectionReport) -> str:
    return "\n".join(report.lines()) + "\n"
