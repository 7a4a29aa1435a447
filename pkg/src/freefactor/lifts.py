"""Complete lifts of a word to a finite-index subgroup.

Given a complete cover (vertex set = coset space, base = the subgroup
itself) and a word w, the cosets split into orbits under reading w.  An
orbit of size m based at coset c yields the lift r_c * w^m * r_c^-1
where r_c is the Schreier transversal word of c; writing g = r_c^-1
this is the classical g^-1 w^m g over double-coset representatives.
The multiplicities over all orbits partition the index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .covers import CoverGraph, Edge, SpanningTreeBasis, basis_from_tree, fold, membership, rewrite_in_basis
from .words import Alphabet, Word, format_word, parse_indexed_word, parse_word


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class CosetAction:
    """Permutation representation on the coset space of a complete cover."""

    alphabet: Alphabet
    degree: int
    perms: tuple[tuple[int, ...], ...]
    cover: Optional[CoverGraph] = field(default=None, compare=False)

    def __post_init__(self):
        for p in self.perms:
            if sorted(p) != list(range(self.degree)):
                raise LiftError("generator does not act by a permutation")
        if not self._transitive():
            raise LiftError("coset action must be transitive")

    def _transitive(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for p in self.perms:
                for u in (p[v], p.index(v)):
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
        return len(seen) == self.degree

    def apply_word(self, w: Word, point: int) -> int:
        if w.alphabet != self.alphabet:
            raise LiftError("alphabet mismatch")
        v = point
        for x in w.letters:
            v = self.perms[x - 1][v] if x > 0 else self.perms[-x - 1].index(v)
        return v

    def stabilizer_contains(self, w: Word) -> bool:
        return self.apply_word(w, 0) == 0


def coset_action(g: CoverGraph) -> CosetAction:
    """Read a complete cover as a permutation representation."""
    if not g.is_complete():
        raise LiftError("cover is not complete (infinite index)")
    return CosetAction(
        g.alphabet,
        g.n_vertices,
        tuple(tuple(row) for row in g.maps),
        cover=g,
    )


def multiplicity(action: CosetAction, w: Word, coset: int) -> int:
    """Size of the w-orbit of the coset: min t > 0 with w^t fixing it."""
    if not (0 <= coset < action.degree):
        raise LiftError("coset out of range")
    t = 0
    v = coset
    while True:
        v = action.apply_word(w, v)
        t += 1
        if v == coset:
            return t


@dataclass(frozen=True)
class LiftEntry:
    rep: Word  # g_i, with w_i = g_i^-1 w^m_i g_i
    mult: int
    word: Word  # w_i
    basis_word: Optional[Word] = None


@dataclass(frozen=True)
class CompleteLift:
    base_word: Word
    index: int
    entries: tuple[LiftEntry, ...]

    def __post_init__(self):
        if sum(e.mult for e in self.entries) != self.index:
            raise LiftError("multiplicities must partition the index")

    def words(self) -> list[Word]:
        return [e.word for e in self.entries]


def complete_lift(
    cover: CoverGraph,
    w: Word,
    tree: Optional[frozenset[Edge]] = None,
    basis: Optional[SpanningTreeBasis] = None,
) -> CompleteLift:
    """One lift per w-orbit on the coset space.

    The representative of an orbit is the Schreier word of its
    least-index coset, taken from the given spanning tree (BFS by
    default); the orbit containing the base comes first, normalizing
    g_1 to the identity.  When a tree basis is supplied, each lift is
    also rewritten in it.
    """
    action = coset_action(cover)
    if basis is None:
        basis = basis_from_tree(cover, tree)
    elif tree is not None and basis.tree_edges != frozenset(tree):
        raise LiftError("tree and basis disagree")
    transversal = basis.transversal

    seen: set[int] = set()
    entries = []
    for start in range(action.degree):
        if start in seen:
            continue
        orbit = [start]
        v = action.apply_word(w, start)
        while v != start:
            orbit.append(v)
            v = action.apply_word(w, v)
        seen.update(orbit)
        m = len(orbit)
        r = transversal[start]
        lift_word = r * w**m * r.inv()
        entries.append(
            LiftEntry(
                rep=r.inv(),
                mult=m,
                word=lift_word,
                basis_word=rewrite_in_basis(cover, basis, lift_word),
            )
        )
    return CompleteLift(base_word=w, index=action.degree, entries=tuple(entries))


def verify_free_lift(lift: CompleteLift, subgroup_cover: Optional[CoverGraph] = None) -> tuple[bool, dict]:
    """True iff the lift words are a free basis of what they generate.

    Folds the tuple and compares the graph rank with the entry count;
    the witness records both.  If a subgroup cover is given, every lift
    word is also checked to lie in the subgroup.
    """
    words = lift.words()
    if subgroup_cover is not None:
        for word in words:
            if not membership(subgroup_cover, word)[0]:
                return False, {"reason": "lift word outside subgroup", "word": format_word(word)}
    if any(not word for word in words):
        return False, {"reason": "trivial lift word", "rank": 0, "expected": len(words)}
    folded = fold(words[0].alphabet, words)
    witness = {"rank": folded.rank(), "expected": len(words)}
    return folded.rank() == len(words), witness


# -- exact affine cost expressions -------------------------------------------


@dataclass(frozen=True)
class AffineCost:
    """A rational constant plus rational multiples of named atoms.

    Atoms stand for costs that are never evaluated numerically (the
    unknown C' of a complementary relation).
    """

    constant: Fraction
    atoms: tuple[tuple[str, Fraction], ...] = ()

    @staticmethod
    def of(constant=0, **atoms) -> "AffineCost":
        items = tuple(sorted((k, Fraction(v)) for k, v in atoms.items() if Fraction(v) != 0))
        return AffineCost(Fraction(constant), items)

    def __add__(self, other: "AffineCost") -> "AffineCost":
        merged = dict(self.atoms)
        for k, v in other.atoms:
            merged[k] = merged.get(k, Fraction(0)) + v
        items = tuple(sorted((k, v) for k, v in merged.items() if v != 0))
        return AffineCost(self.constant + other.constant, items)

    def __str__(self) -> str:
        parts = [str(self.constant)]
        for k, v in self.atoms:
            parts.append(f"{k}" if v == 1 else f"{v}*{k}")
        return " + ".join(parts)


@dataclass(frozen=True)
class LedgerReport:
    index: int
    lift_count: int
    mu_x: Fraction
    graphing_side: AffineCost
    section_side: AffineCost
    target: AffineCost
    equal: bool

    def lines(self) -> list[str]:
        return [
            f"index n = {self.index}, lifts k = {self.lift_count}, mu(X) = {self.mu_x}",
            f"graphing cost     mu(Y) + (k-1) mu(X) + C' = {self.graphing_side}",
            f"section formula   (n-1) mu(X) + k mu(X) + C' = {self.section_side}",
            f"target            (n+k-1) mu(X) + C' = {self.target}",
            f"verdict: {'equal' if self.equal else 'MISMATCH'}",
        ]


def cost_ledger(n: int, k: int, mu_x, atom: str = "C'") -> LedgerReport:
    """Replay the lifting theorem's cost bookkeeping as exact affine forms.

    The graphing side is mu(Y) + (k-1) mu(X) + C'; the complete-section
    side is (n-1) mu(X) + (k mu(X) + C').  Both must equal
    (n+k-1) mu(X) + C'.  Requires the induced normalization
    n * mu(X) = 1.
    """
    if n < 1 or not (1 <= k <= n):
        raise LiftError("need n >= 1 and 1 <= k <= n")
    mu = Fraction(mu_x)
    if mu * n != 1:
        raise LiftError("normalization requires n * mu(X) = 1")
    c_prime = AffineCost.of(0, **{atom: 1})
    mu_y = AffineCost.of(mu * n)
    graphing = mu_y + AffineCost.of((k - 1) * mu) + c_prime
    section = AffineCost.of((n - 1) * mu) + AffineCost.of(k * mu) + c_prime
    target = AffineCost.of((n + k - 1) * mu) + c_prime
    return LedgerReport(
        index=n,
        lift_count=k,
        mu_x=mu,
        graphing_side=graphing,
        section_side=section,
        target=target,
        equal=graphing == section == target,
    )


# -- serialization -------------------------------------------------------------


def lift_to_json(lift: CompleteLift) -> dict:
    return {
        "word": format_word(lift.base_word),
        "rank": lift.base_word.alphabet.rank,
        "index": lift.index,
        "entries": [
            {
                "rep": format_word(e.rep),
                "multiplicity": e.mult,
                "lift": format_word(e.word),
                **({"basis_word": format_word(e.basis_word)} if e.basis_word is not None else {}),
            }
            for e in lift.entries
        ],
    }


def _parse_any(text: str, alphabet: Alphabet) -> Word:
    try:
        return parse_word(text, alphabet)
    except ValueError:
        return parse_indexed_word(text, alphabet)


def lift_from_json(data: dict, basis_alphabet: Optional[Alphabet] = None) -> CompleteLift:
    alphabet = Alphabet(data["rank"])
    entries = []
    for e in data["entries"]:
        basis_word = None
        if "basis_word" in e and basis_alphabet is not None:
            basis_word = _parse_any(e["basis_word"], basis_alphabet)
        entries.append(
            LiftEntry(
                rep=_parse_any(e["rep"], alphabet),
                mult=e["multiplicity"],
                word=_parse_any(e["lift"], alphabet),
                basis_word=basis_word,
            )
        )
    return CompleteLift(
        base_word=_parse_any(data["word"], alphabet),
        index=data["index"],
        entries=tuple(entries),
    )


def dumps_lift(lift: CompleteLift) -> str:
    return json.dumps(lift_to_json(lift), indent=2, sort_keys=True) + "\n"
