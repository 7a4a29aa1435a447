"""Measure-free-factor certificates: judgments, derivation rules, scripts.

A certificate is a dag of nodes.  Each node applies one rule to premise
judgments and carries side conditions that are either *checked* (with a
witness that is replayed on every verification: covers, lifts, folds,
homomorphism pairs) or *cited* (a named measure-theoretic axiom from the
registry below; nothing word-level is ever cited).  Construction and
re-checking share one code path: a node that cannot be verified cannot
be built.

Judgment words are written over a group's coordinate alphabet: the
standard letters for an abstract free or virtually free group, or the
positions of the realization generator list when the group is presented
as a concrete subgroup of an ambient free group.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import vfree as vf
from .covers import (
    CoverGraph,
    basis_from_tree,
    cover_from_json,
    cover_to_json,
    fold,
    grid_cover,
    grid_chain_tree,
    kernel_mod_p_cover,
    membership,
    rewrite_in_basis,
)
from .lifts import complete_lift, cost_ledger, lift_from_json, lift_to_json, verify_free_lift
from .words import (
    Alphabet,
    GroupHom,
    Word,
    apply_hom,
    bs_word,
    format_word,
    is_primitive,
    is_proper_power,
    nonorientable_boundary_word,
    parse_indexed_word,
    parse_word,
    surface_commutator_word,
    three_letter_word,
    two_letter_word,
    verify_mutual_inverse,
)


class CertifyError(ValueError):
    pass


# Measure-theoretic inputs are recorded as named axioms; everything
# word-level is recomputed from witnesses.  No axiom states a result
# about the certified word families themselves, so a certificate can
# never cite what it is proving.
AXIOMS = {
    "treeable-free": "A free p.m.p. action of a free group is treeable; a free basis acts as a treeing.",
    "treeable-finite": "Finite groups are treeable: finite equivalence relations admit spanning-forest treeings.",
    "free-factor-mff": "A free factor of a group is a measure free factor: a basis splitting splits the orbit relation.",
    "mff-of-mff": "A free factor of a measure free factor is a measure free factor of the ambient group.",
    "conj-aut-mff": "The image of a measure free factor under an automorphism is a measure free factor.",
    "surface-commutator-mff": "In the free group of rank 2g the product of the g standard commutators generates a measure free factor.",
    "orientable-boundary-mff": "The boundary words of a compact orientable surface with boundary and genus at least one split off as common measure free factors of the fundamental group.",
    "free-product-common-mff": "Measure free factors of the factors of a free product are common measure free factors of the product.",
    "amalgam-treeable": "An amalgam of treeable groups over a measure free factor of one factor is treeable, and measure free factors of the other factor survive.",
    "hnn-treeable": "An HNN extension over common measure free factors H, H' with an injection of H into H' is treeable, and the remaining common measure free factors survive.",
    "lift-mff": "If a complete lift of w to a finite-index subgroup freely generates a measure free factor of the subgroup, then w generates a measure free factor; the graphing built from the lift data is a treeing by the cost count.",
    "induced-section": "The base fiber of a finitely induced action is a complete section whose restricted relation is the subgroup relation.",
    "branched-cover-decomposition": "The subgroup generated by the torsion-conjugates of the complementary factor decomposes as their free product and has index equal to the torsion order.",
}


# -- group objects -------------------------------------------------------


@dataclass(frozen=True)
class Realization:
    """Presentation of a group as the subgroup of an ambient free group
    generated by explicit words (one coordinate letter per word)."""

    ambient_rank: int
    generators: tuple[str, ...]

    def to_json(self):
        return {"ambient_rank": self.ambient_rank, "generators": list(self.generators)}

    @staticmethod
    def from_json(data):
        return Realization(data["ambient_rank"], tuple(data["generators"]))


@dataclass(frozen=True)
class GroupObject:
    kind: str  # "free" | "vfree" | "presented"
    rank: int = 0
    orders: tuple[int, ...] = ()
    realization: Optional[Realization] = None
    annotation: Optional[str] = None  # presentation note for amalgam/HNN shapes

    def coordinate_rank(self) -> int:
        if self.realization is not None:
            return len(self.realization.generators)
        return self.rank

    def to_json(self):
        out = {"kind": self.kind, "rank": self.rank}
        if self.orders:
            out["orders"] = list(self.orders)
        if self.realization is not None:
            out["realization"] = self.realization.to_json()
        if self.annotation is not None:
            out["annotation"] = self.annotation
        return out

    @staticmethod
    def from_json(data):
        return GroupObject(
            data["kind"],
            data.get("rank", 0),
            tuple(data.get("orders", ())),
            Realization.from_json(data["realization"]) if "realization" in data else None,
            data.get("annotation"),
        )


def free_group(rank: int) -> GroupObject:
    return GroupObject("free", rank)


def vfree_group_object(free_rank: int, orders: Sequence[int]) -> GroupObject:
    return GroupObject("vfree", free_rank, tuple(orders))


def parse_rank_word(text: str, rank: int) -> Word:
    alphabet = Alphabet(rank)
    if rank > 26:
        return parse_indexed_word(text, alphabet)
    return parse_word(text, alphabet)


def parse_coordinate_word(group: GroupObject, text: str) -> Word:
    if group.kind == "vfree" and group.realization is None:
        raise CertifyError("virtually free judgments use the free-product grammar")
    return parse_rank_word(text, group.coordinate_rank())


def parse_judgment_word(group: GroupObject, text: str):
    if group.kind == "vfree":
        return vf.parse_vfree(text, vf.VFreeGroup(group.rank, group.orders))
    return parse_coordinate_word(group, text)


def expand_to_ambient(group: GroupObject, w: Word) -> Word:
    """Substitute the realization generators for coordinate letters."""
    if group.realization is None:
        raise CertifyError("group has no realization")
    gens = [parse_rank_word(t, group.realization.ambient_rank) for t in group.realization.generators]
    out = Word.identity(Alphabet(group.realization.ambient_rank))
    for x in w.letters:
        g = gens[abs(x) - 1]
        out = out * (g if x > 0 else g.inv())
    return out


# -- judgments -----------------------------------------------------------


@dataclass(frozen=True)
class Judgment:
    kind: str  # "mff" | "common_mff" | "treeable"
    group: GroupObject
    subgroups: tuple[tuple[str, ...], ...] = ()

    def to_json(self):
        return {
            "kind": self.kind,
            "group": self.group.to_json(),
            "subgroups": [list(t) for t in self.subgroups],
        }

    @staticmethod
    def from_json(data):
        return Judgment(
            data["kind"],
            GroupObject.from_json(data["group"]),
            tuple(tuple(t) for t in data["subgroups"]),
        )


def mff(group: GroupObject, words: Sequence[str]) -> Judgment:
    return Judgment("mff", group, (tuple(words),))


def common_mff(group: GroupObject, tuples: Sequence[Sequence[str]]) -> Judgment:
    return Judgment("common_mff", group, tuple(tuple(t) for t in tuples))


def treeable(group: GroupObject) -> Judgment:
    return Judgment("treeable", group)


# -- certificate nodes -----------------------------------------------------


@dataclass(frozen=True)
class SideCondition:
    name: str
    status: str  # "checked" | "cited"
    witness: Optional[dict] = None
    anchor: Optional[str] = None

    def to_json(self):
        out = {"name": self.name, "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.anchor is not None:
            out["anchor"] = self.anchor
        return out

    @staticmethod
    def from_json(data):
        return SideCondition(data["name"], data["status"], data.get("witness"), data.get("anchor"))


def checked(name: str, witness: Optional[dict] = None) -> SideCondition:
    return SideCondition(name, "checked", witness=witness or {})


def cited(anchor: str) -> SideCondition:
    if anchor not in AXIOMS:
        raise CertifyError(f"unknown axiom {anchor!r}")
    return SideCondition(anchor, "cited", anchor=anchor)


@dataclass(frozen=True)
class CertificateNode:
    rule: str
    params: dict
    premises: tuple["CertificateNode", ...]
    conclusion: Judgment
    side_conditions: tuple[SideCondition, ...]

    def payload(self) -> dict:
        return {
            "rule": self.rule,
            "params": self.params,
            "premises": [p.node_id() for p in self.premises],
            "conclusion": self.conclusion.to_json(),
            "side_conditions": [c.to_json() for c in self.side_conditions],
        }

    def node_id(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def walk(self) -> list["CertificateNode"]:
        seen: dict[str, CertificateNode] = {}

        def rec(node):
            nid = node.node_id()
            if nid not in seen:
                for p in node.premises:
                    rec(p)
                seen[nid] = node

        rec(self)
        return list(seen.values())

    def cited_anchors(self) -> set[str]:
        return {
            c.anchor
            for node in self.walk()
            for c in node.side_conditions
            if c.status == "cited"
        }


def certificate_to_json(root: CertificateNode) -> dict:
    return {
        "format": "freefactor-certificate/1",
        "root": root.node_id(),
        "nodes": {node.node_id(): node.payload() for node in root.walk()},
    }


def dumps_certificate(root: CertificateNode) -> str:
    return json.dumps(certificate_to_json(root), indent=2, sort_keys=True) + "\n"


def certificate_from_json(data: dict) -> CertificateNode:
    """Rebuild the node dag; raises on missing references or cycles.
    Does not verify (see :func:`check_certificate`)."""
    if data.get("format") != "freefactor-certificate/1":
        raise CertifyError("unknown certificate format")
    payloads = data["nodes"]
    built: dict[str, CertificateNode] = {}
    building: set[str] = set()

    def rec(nid: str) -> CertificateNode:
        if nid in built:
            return built[nid]
        if nid in building:
            raise CertifyError("premise graph has a cycle")
        if nid not in payloads:
            raise CertifyError(f"missing node {nid}")
        building.add(nid)
        p = payloads[nid]
        node = CertificateNode(
            rule=p["rule"],
            params=p["params"],
            premises=tuple(rec(q) for q in p["premises"]),
            conclusion=Judgment.from_json(p["conclusion"]),
            side_conditions=tuple(SideCondition.from_json(c) for c in p["side_conditions"]),
        )
        building.discard(nid)
        built[nid] = node
        return node

    root = rec(data["root"])
    return root


# -- shared verification helpers ----------------------------------------------


def _fold_rank_of(texts: Sequence[str], rank: int) -> int:
    words = [parse_rank_word(t, rank) for t in texts]
    if any(not w for w in words):
        raise CertifyError("trivial word in a generating tuple")
    return fold(Alphabet(rank), words).rank()


def _require(cond: bool, message: str):
    if not cond:
        raise CertifyError(message)


def _hom_from_texts(src_rank: int, dst_rank: int, images: Sequence[str]) -> GroupHom:
    return GroupHom(
        Alphabet(src_rank),
        Alphabet(dst_rank),
        tuple(parse_rank_word(t, dst_rank) for t in images),
    )


def _witness(node: CertificateNode, name: str) -> dict:
    for c in node.side_conditions:
        if c.name == name and c.status == "checked":
            return c.witness or {}
    raise CertifyError(f"missing checked side condition {name!r}")


def _has_condition(node: CertificateNode, name: str) -> bool:
    return any(c.name == name for c in node.side_conditions)


def _guard_proper_power(judgment: Judgment):
    """The engine-wide refutation barrier: a cyclic conclusion must not
    be a proper power (infinite-order case)."""
    for tup in judgment.subgroups:
        if len(tup) != 1:
            continue
        if judgment.group.kind == "vfree":
            w = parse_judgment_word(judgment.group, tup[0])
            _require(
                vf.is_proper_power_vfree(w) is None,
                f"proper power cannot generate a measure free factor: {tup[0]}",
            )
        else:
            w = parse_coordinate_word(judgment.group, tup[0])
            _require(
                is_proper_power(w) is None,
                f"proper power cannot generate a measure free factor: {tup[0]}",
            )


# -- rule verifiers ----------------------------------------------------------


def _verify_free_factor(node: CertificateNode):
    """Target words, written over the free basis of M (the ambient group
    itself or the premise's subgroup), extend to a basis of M; hence
    they generate a free factor of M and a measure free factor of the
    ambient group."""
    params = node.params
    group = node.conclusion.group
    _require(group.kind in ("free",) or group.realization is not None, "need a free ambient group")
    rank = group.coordinate_rank()

    if node.premises:
        _require(len(node.premises) == 1, "at most one premise")
        prem = node.premises[0].conclusion
        _require(prem.kind in ("mff", "common_mff"), "premise must assert measure free factors")
        _require(prem.group == group, "premise group differs")
        m_tuple = [t for sub in prem.subgroups for t in sub]
    else:
        m_tuple = [format_word(Word.gen(Alphabet(rank), i)) for i in range(1, rank + 1)]
    m = len(m_tuple)
    _require(_fold_rank_of(m_tuple, rank) == m, "ambient tuple is not a free basis of its span")

    target = params["target"]
    _require(1 <= len(target) <= m, "bad target size")
    target_words = [parse_rank_word(t, m) for t in target]
    _require(all(w for w in target_words), "trivial target word")

    if "extension" in params:
        ext = params["extension"]
        phi = _hom_from_texts(m, m, ext["phi"])
        psi = _hom_from_texts(m, m, ext["psi"])
        _require(verify_mutual_inverse(phi, psi), "basis extension is not an automorphism pair")
        for i, w in enumerate(target_words):
            _require(phi.images[i] == w, "extension does not start with the target tuple")
    else:
        _require(
            len(target) == 1 and not node.premises,
            "extension witness required for tuple targets",
        )
        word_in_g = parse_rank_word(target[0], rank)
        _require(is_primitive(word_in_g), "cyclic target is not primitive")

    # expand target through the M-tuple into ambient coordinates
    m_words = [parse_rank_word(t, rank) for t in m_tuple]
    expanded = []
    for w in target_words:
        out = Word.identity(Alphabet(rank))
        for x in w.letters:
            g = m_words[abs(x) - 1]
            out = out * (g if x > 0 else g.inv())
        expanded.append(format_word(out))
    _require(
        node.conclusion.kind == "mff" and node.conclusion.subgroups == (tuple(expanded),),
        "conclusion does not match the expanded target",
    )
    _require(_fold_rank_of(expanded, rank) == len(expanded), "target tuple is not free")
    _guard_proper_power(node.conclusion)


def _verify_conj_aut(node: CertificateNode):
    params = node.params
    _require(len(node.premises) == 1, "one premise required")
    prem = node.premises[0].conclusion
    group = node.conclusion.group
    _require(prem.kind == "mff" and prem.group == group, "premise mismatch")
    _require(group.kind == "free" and group.realization is None, "conjugation rule works on abstract free groups")
    rank = group.rank
    phi = _hom_from_texts(rank, rank, params["phi"])
    psi = _hom_from_texts(rank, rank, params["psi"])
    _require(verify_mutual_inverse(phi, psi), "not an automorphism pair")
    images = tuple(
        format_word(apply_hom(phi, parse_rank_word(t, rank))) for t in prem.subgroups[0]
    )
    _require(node.conclusion == mff(group, images), "conclusion is not the automorphic image")
    _guard_proper_power(node.conclusion)


def _verify_surface_axiom(node: CertificateNode):
    g = node.params["genus"]
    _require(g >= 1, "genus must be at least 1")
    group = node.conclusion.group
    _require(group == free_group(2 * g), "wrong ambient group")
    expected = format_word(surface_commutator_word(g))
    _require(node.conclusion == mff(group, (expected,)), "word is not the surface relator boundary")
    _guard_proper_power(node.conclusion)


def _verify_boundary_axiom(node: CertificateNode):
    params = node.params
    mode = params["mode"]
    if mode == "presentation":
        g, k = params["genus"], params["boundary_count"]
        _require(g >= 1 and k >= 1, "need genus >= 1 and a boundary")
        rank = 2 * g + k - 1
        group = node.conclusion.group
        _require(group == free_group(rank), "wrong ambient group")
        alphabet = Alphabet(rank)
        gamma1 = surface_commutator_word(g)
        gamma1 = Word(alphabet, gamma1.letters + tuple(range(2 * g + 1, rank + 1)))
        expected = [(format_word(gamma1),)] + [
            (format_word(Word.gen(alphabet, 2 * g + j)),) for j in range(1, k)
        ]
        _require(
            node.conclusion == common_mff(group, expected),
            "boundary words do not match the documented convention",
        )
        _require(_fold_rank_of([t[0] for t in expected], rank) == k, "boundary tuple is not free")
    elif mode == "punctured_sphere_cover":
        _verify_boundary_cover(node, nonorientable=False)
    elif mode == "orientable_double_cover":
        _verify_boundary_cover(node, nonorientable=True)
    else:
        raise CertifyError(f"unknown boundary mode {mode!r}")
    for tup in node.conclusion.subgroups:
        if len(tup) == 1:
            _guard_proper_power(Judgment("mff", node.conclusion.group, (tup,)))


def _verify_boundary_cover(node: CertificateNode, nonorientable: bool):
    """Boundary subgroup of a finite cover surface, expressed in the
    cover subgroup's tree basis.  Word-level content is recomputed; the
    surface identification is the cited axiom."""
    params = node.params
    witness = _witness(node, "cover_data")
    cover = cover_from_json(witness["cover"])
    base_rank = params["base_rank"]
    _require(cover.alphabet.rank == base_rank, "cover alphabet mismatch")
    p = params["p"]
    _require(cover == kernel_mod_p_cover(Alphabet(base_rank), p), "not the mod-p kernel cover")
    alphabet = Alphabet(base_rank)

    if nonorientable:
        g = params["genus"]
        _require(p == 2, "orientable double cover has two sheets")
        _require(g == base_rank, "rank must equal the genus")
        _require(g >= 2, "double cover needs genus >= 2 to have positive genus itself")
        w = nonorientable_boundary_word(g)
        total = sum(w.exponent_sum(i) for i in range(1, g + 1))
        _require(total % 2 == 0, "boundary word must already lie in the double-cover subgroup")
        a1 = Word.gen(alphabet, 1)
        boundary = [w, a1 * w * a1.inv()]
    else:
        k = base_rank - 1
        _require(k >= 1, "need at least one attached cylinder")
        exponents = params["exponents"]
        _require(len(exponents) == k and all(m != 0 for m in exponents), "bad gluing degrees")
        _require(p >= 2 and math.gcd(p, base_rank) == 1, "sheet count must be coprime to k+1")
        _require(all(math.gcd(p, abs(m)) == 1 for m in exponents), "sheet count must be coprime to the gluing degrees")
        _require(k * (p - 1) >= 2, "cover surface has genus 0")
        v = Word(alphabet, range(1, base_rank + 1))
        boundary = [Word.gen(alphabet, i) ** p for i in range(1, base_rank + 1)] + [v**p]

    basis = basis_from_tree(cover)
    sub_rank = cover.rank()
    group = node.conclusion.group
    _require(
        group.kind == "free" and group.rank == sub_rank and group.realization is not None,
        "conclusion group must be the realized cover subgroup",
    )
    _require(group.realization.ambient_rank == params.get("ambient_rank", base_rank), "ambient rank mismatch")
    # every boundary word lies in the cover subgroup and rewrites to the
    # stated coordinates; the rewrites must round-trip
    expected_tuples = []
    for w in boundary:
        _require(membership(cover, w)[0], f"boundary word {format_word(w)} is not in the cover subgroup")
        coords = rewrite_in_basis(cover, basis, w)
        _require(basis.expand(coords) == w, "rewrite fails to round-trip")
        expected_tuples.append((format_word(coords),))
    _require(
        node.conclusion == common_mff(group, expected_tuples),
        "conclusion does not list the boundary words",
    )
    coord_rank = group.coordinate_rank()
    _require(
        _fold_rank_of([t[0] for t in expected_tuples], coord_rank) == len(expected_tuples),
        "boundary tuple is not free in the cover subgroup",
    )
    # the realization must be the basis dictionary transported by the
    # declared embedding of the base group
    embedding = params.get("embedding")
    if embedding is not None:
        amb = group.realization.ambient_rank
        phi = _hom_from_texts(base_rank, amb, embedding)
        images = [format_word(apply_hom(phi, d)) for d in basis.dictionary]
        _require(_fold_rank_of(embedding, amb) == base_rank, "base embedding is not injective on the fold")
    else:
        images = [format_word(d) for d in basis.dictionary]
    _require(list(group.realization.generators) == images, "realization differs from the tree basis")


def _verify_freeprod(node: CertificateNode):
    params = node.params
    group = node.conclusion.group
    _require(group.kind == "free" or group.realization is not None, "ambient must be free")
    rank = group.coordinate_rank()
    blocks = [tuple(b) for b in params["blocks"]]
    flat = [i for b in blocks for i in b]
    _require(sorted(flat) == list(range(1, rank + 1)), "blocks must partition the coordinates")
    _require(len(blocks) == len(node.premises), "one block per premise")
    expected = []
    for block, prem_node in zip(blocks, node.premises):
        prem = prem_node.conclusion
        _require(prem.kind == "mff", "premises must be single measure free factors")
        pg = prem.group
        _require(pg.kind == "free" and pg.realization is None, "factor premises are abstract free groups")
        _require(pg.rank == len(block), "factor rank does not match its block")
        inject = GroupHom(
            Alphabet(len(block)),
            Alphabet(rank),
            tuple(Word.gen(Alphabet(rank), i) for i in block),
        )
        expected.append(
            tuple(format_word(apply_hom(inject, parse_rank_word(t, len(block)))) for t in prem.subgroups[0])
        )
    _require(
        node.conclusion == common_mff(group, expected),
        "conclusion does not match the injected factors",
    )
    for tup in expected:
        for t in tup:
            w = parse_rank_word(t, rank)
            support = {abs(x) for x in w.letters}
            _require(
                any(support <= set(b) for b in blocks),
                "factor word strays outside its block",
            )


def _verify_hnn(node: CertificateNode):
    """One HNN step t h t^-1 = alpha(h): the edge subgroup H is consumed,
    every other listed subgroup survives.  With a realization the
    defining relation and the rank accounting are verified concretely in
    the ambient free group."""
    params = node.params
    _require(len(node.premises) == 1, "one premise required")
    prem = node.premises[0].conclusion
    _require(prem.kind == "common_mff", "premise must be a common-mff judgment")
    old_group = prem.group
    h_i, hp_i = params["h_index"], params["hprime_index"]
    subs = prem.subgroups
    _require(0 <= h_i < len(subs) and 0 <= hp_i < len(subs) and h_i != hp_i, "bad subgroup indices")
    old_rank = old_group.coordinate_rank()
    h_tuple, hp_tuple = subs[h_i], subs[hp_i]

    alpha = params["alpha_images"]
    _require(len(alpha) == len(h_tuple), "one alpha image per edge generator")
    hp_words = [parse_rank_word(t, old_rank) for t in hp_tuple]
    hp_fold = fold(Alphabet(old_rank), hp_words)
    for t in alpha:
        img = parse_rank_word(t, old_rank)
        _require(img and membership(hp_fold, img)[0], "alpha image escapes H'")
    _require(
        _fold_rank_of(alpha, old_rank) == _fold_rank_of(list(h_tuple), old_rank),
        "alpha is not injective: image rank drops",
    )

    new_group = node.conclusion.group
    if old_group.realization is not None:
        amb = old_group.realization.ambient_rank
        stable = parse_rank_word(params["stable_letter"], amb)
        _require(
            new_group.realization is not None
            and new_group.realization.ambient_rank == amb
            and new_group.realization.generators
            == old_group.realization.generators + (format_word(stable),),
            "realization must extend by the stable letter",
        )
        # the defining relation holds in the ambient group
        for h_text, a_text in zip(h_tuple, alpha):
            h_amb = expand_to_ambient(old_group, parse_rank_word(h_text, old_rank))
            a_amb = expand_to_ambient(old_group, parse_rank_word(a_text, old_rank))
            _require(
                stable * h_amb * stable.inv() == a_amb,
                "defining relation fails in the ambient group",
            )
        # rank accounting: chi(HNN over a rank-r edge) adds r - 1
        claimed = old_group.rank + _fold_rank_of(list(h_tuple), old_rank) - 1
        _require(new_group.rank == claimed, "rank accounting mismatch")
        gens = [parse_rank_word(t, amb) for t in new_group.realization.generators]
        _require(
            fold(Alphabet(amb), gens).rank() == claimed,
            "realized subgroup has the wrong rank",
        )
        if "expect_cover" in params:
            cover = cover_from_json(params["expect_cover"])
            folded = fold(Alphabet(amb), gens)
            _require(folded == cover.canonical(), "realized subgroup does not match the declared cover")
    else:
        _require(new_group.kind == "presented" and new_group.annotation, "abstract HNN needs an annotation")

    survivors = tuple(tuple(t) for i, t in enumerate(subs) if i != h_i)
    _require(
        node.conclusion.kind == "common_mff" and node.conclusion.subgroups == survivors,
        "conclusion must keep every subgroup except the consumed edge group",
    )


def _verify_amalgam(node: CertificateNode):
    """Amalgamated product over an edge subgroup that is a measure free
    factor of the first factor; word-level checks only, measure content
    cited.  The PLUS variant keeps a companion subgroup of the first
    factor alive as a common factor."""
    params = node.params
    plus = params.get("plus", False)
    _require(len(node.premises) == 2, "two premises: edge side and surviving side")
    left, right = (p.conclusion for p in node.premises)
    _require(left.group.kind in ("free", "vfree"), "left factor must be structurally treeable")
    _require(right.group.kind in ("free", "vfree"), "right factor must be structurally treeable")
    if plus:
        _require(left.kind == "common_mff" and len(left.subgroups) == 2, "plus variant needs common factors on the left")
    else:
        _require(left.kind == "mff", "left premise asserts the edge subgroup")
    _require(right.kind == "mff", "right premise asserts the surviving subgroup")
    edge_words = params["edge_words"]
    _require(list(edge_words) == list(left.subgroups[0]), "edge subgroup must be the left premise's factor")
    for t in edge_words:
        parse_judgment_word(left.group, t)
    group = node.conclusion.group
    _require(group.kind == "presented" and group.annotation, "amalgam conclusion group carries its presentation note")
    if node.conclusion.kind == "treeable":
        return
    expected = [tuple(f"2:{t}" for t in right.subgroups[0])]
    if plus:
        expected.append(tuple(f"1:{t}" for t in left.subgroups[1]))
    _require(
        node.conclusion.kind == ("common_mff" if plus else "mff")
        and list(node.conclusion.subgroups) == expected,
        "conclusion must tag the surviving subgroups by factor",
    )


def _verify_lift(node: CertificateNode):
    """The lifting theorem: recompute the complete lift on the supplied
    cover, confirm the lift tuple is free of the right rank, replay the
    cost ledger, and match the premise subgroup against the lift words
    through the premise group's realization."""
    params = node.params
    _require(len(node.premises) == 1, "one premise required")
    prem = node.premises[0].conclusion
    _require(prem.kind == "mff", "premise must assert the lift subgroup")
    sub_group = prem.group
    _require(sub_group.realization is not None, "premise group needs a realization")
    amb_rank = params["ambient_rank"]
    _require(sub_group.realization.ambient_rank == amb_rank, "ambient rank mismatch")

    cover = cover_from_json(params["cover"])
    _require(cover.alphabet.rank == amb_rank and cover.is_complete(), "need a complete cover of the ambient rose")
    n = cover.n_vertices
    w = parse_rank_word(params["word"], amb_rank)
    tree = frozenset(tuple(e) for e in params["tree"]) if "tree" in params else None
    lift = complete_lift(cover, w, tree=tree)
    supplied = lift_from_json(params["lift"])
    _require(
        supplied.index == n
        and len(supplied.entries) == len(lift.entries)
        and all(
            a.rep == b.rep and a.mult == b.mult and a.word == b.word
            for a, b in zip(supplied.entries, lift.entries)
        ),
        "supplied lift does not replay",
    )
    for data, entry in zip(params["lift"]["entries"], lift.entries):
        if "basis_word" in data:
            _require(
                data["basis_word"] == format_word(entry.basis_word),
                "supplied basis rewrite does not replay",
            )
    k = len(lift.entries)
    ok, witness = verify_free_lift(lift, subgroup_cover=cover)
    _require(ok, f"lift tuple is not free: {witness}")
    _require(cost_ledger(n, k, Fraction(1, n)).equal, "cost ledger mismatch")

    # premise realization generates exactly the cover subgroup
    gens = [parse_rank_word(t, amb_rank) for t in sub_group.realization.generators]
    for g in gens:
        _require(membership(cover, g)[0], "realization generator escapes the cover subgroup")
    folded = fold(Alphabet(amb_rank), gens)
    _require(folded == cover.canonical(), "realization does not generate the full cover subgroup")
    # the premise subgroup is the lift tuple, in cover-subgroup coordinates
    prem_words = [parse_rank_word(t, sub_group.coordinate_rank()) for t in prem.subgroups[0]]
    _require(len(prem_words) == k, "premise tuple size differs from the lift count")
    for pw, entry in zip(prem_words, lift.entries):
        _require(
            expand_to_ambient(sub_group, pw) == entry.word,
            "premise subgroup is not the complete lift",
        )
    _require(
        node.conclusion == mff(free_group(amb_rank), (format_word(w),)),
        "conclusion must be the cyclic subgroup of the lifted word",
    )
    _guard_proper_power(node.conclusion)


def _verify_vfree_lift(node: CertificateNode):
    """One induction step of the branched-cover argument in a free
    product with torsion: recompute the factor dictionary and the lift,
    audit free-product independence, and verify the basis extension that
    makes each lift a free factor of its block of conjugates."""
    params = node.params
    orders = tuple(params["orders"])
    powers = tuple(params["powers"])
    free_rank = params["free_rank"]
    _require(len(orders) == len(powers) >= 1, "need at least one torsion factor")
    group = vf.VFreeGroup(free_rank, orders)
    gobj = vfree_group_object(free_rank, orders)
    _require(node.conclusion.group == gobj, "conclusion group mismatch")
    w = vf.parse_vfree(params["word"], group)
    _require(node.conclusion == mff(gobj, (vf.format_vfree(w),)), "conclusion word mismatch")

    sub = vf.branched_cover_subgroup(group)
    u, p = vf.split_last_torsion(w, sub)
    _require(bool(u), "trivial complementary word; the lift tuple would collapse")

    _require(len(node.premises) == 1, "one premise required")
    prem = node.premises[0].conclusion
    _require(prem.kind == "mff" and len(prem.subgroups[0]) == 1, "premise must be cyclic")
    if len(orders) == 1:
        _require(prem.group == free_group(free_rank), "base premise lives in the free part")
        u_expected = vf.free_part_word(group, parse_rank_word(prem.subgroups[0][0], free_rank))
    else:
        k_obj = vfree_group_object(free_rank, orders[:-1])
        _require(prem.group == k_obj, "premise group must drop the last torsion factor")
        k_group = vf.VFreeGroup(free_rank, orders[:-1])
        u_prem = vf.parse_vfree(prem.subgroups[0][0], k_group)
        u_expected = vf.normal_form(group, u_prem.syllables)
    _require(u_expected == u, "premise word is not the complementary part of w")

    lift = vf.complete_lift_vfree(sub, w)
    n = sub.index
    d = math.gcd(p % n, n)
    supplied = params["lift"]
    _require(len(supplied) == len(lift.entries) == d, "lift entry count mismatch")
    sheets_seen: set[int] = set()
    for data, entry in zip(supplied, lift.entries):
        _require(data["multiplicity"] == entry.mult == n // d, "multiplicity mismatch")
        _require(vf.parse_vfree(data["word"], group) == entry.word, "lift word mismatch")
        _require(vf.parse_vfree(data["rep"], group) == entry.rep, "representative mismatch")
        sheets = [s for s, _ in entry.factor_rewrite]
        _require(list(data["sheets"]) == sheets, "factor rewrite mismatch")
        _require(not sheets_seen & set(sheets), "lift entries share conjugate factors")
        sheets_seen.update(sheets)
    _require(sum(e.mult for e in lift.entries) == n, "multiplicities do not sum to the index")

    import random as _random

    rng = _random.Random(params.get("audit_seed", 0))
    _require(
        vf.alternating_sample_nontrivial(sub, rng, trials=params.get("audit_trials", 64)),
        "free-product audit found a collapsing alternating word",
    )
    # basis extension: w_i = product of its block's conjugates extends
    # the block to a basis (replace the first generator by the product)
    m = n // d
    ext = params["extension"]
    phi = _hom_from_texts(m, m, ext["phi"])
    psi = _hom_from_texts(m, m, ext["psi"])
    _require(verify_mutual_inverse(phi, psi), "block extension is not an automorphism pair")
    product = Word(Alphabet(m), range(1, m + 1))
    _require(phi.images[0] == product, "extension must send the first letter to the block product")
    _guard_proper_power(node.conclusion)


RULE_VERIFIERS = {
    "FREE_FACTOR": _verify_free_factor,
    "CONJ_AUT": _verify_conj_aut,
    "SURFACE_AXIOM": _verify_surface_axiom,
    "BOUNDARY_AXIOM": _verify_boundary_axiom,
    "FREEPROD": _verify_freeprod,
    "HNN": _verify_hnn,
    "AMALGAM": _verify_amalgam,
    "LIFT": _verify_lift,
    "VFREE_LIFT": _verify_vfree_lift,
}

RULE_CITATIONS = {
    "FREE_FACTOR": ("free-factor-mff", "mff-of-mff"),
    "CONJ_AUT": ("conj-aut-mff",),
    "SURFACE_AXIOM": ("surface-commutator-mff",),
    "BOUNDARY_AXIOM": ("orientable-boundary-mff",),
    "FREEPROD": ("free-product-common-mff",),
    "HNN": ("hnn-treeable", "treeable-free"),
    "AMALGAM": ("amalgam-treeable", "treeable-free", "treeable-finite"),
    "LIFT": ("lift-mff", "induced-section", "treeable-free"),
    "VFREE_LIFT": (
        "lift-mff",
        "free-product-common-mff",
        "conj-aut-mff",
        "mff-of-mff",
        "branched-cover-decomposition",
        "treeable-finite",
    ),
}


def verify_node(node: CertificateNode):
    if node.rule not in RULE_VERIFIERS:
        raise CertifyError(f"unknown rule {node.rule!r}")
    for c in node.side_conditions:
        if c.status == "cited":
            if c.anchor not in AXIOMS:
                raise CertifyError(f"unknown axiom {c.anchor!r}")
        elif c.status != "checked":
            raise CertifyError(f"unknown side-condition status {c.status!r}")
    expected_cites = set(RULE_CITATIONS[node.rule])
    actual_cites = {c.anchor for c in node.side_conditions if c.status == "cited"}
    if actual_cites != expected_cites:
        raise CertifyError(f"rule {node.rule} must cite exactly {sorted(expected_cites)}")
    RULE_VERIFIERS[node.rule](node)


def apply_rule(
    rule: str,
    premises: Sequence[CertificateNode],
    params: dict,
    conclusion: Judgment,
    witnesses: Optional[dict[str, dict]] = None,
) -> CertificateNode:
    """Build a node and verify it; construction fails rather than
    produce an unchecked condition."""
    conditions = [checked(name, w) for name, w in (witnesses or {}).items()]
    conditions.extend(cited(a) for a in RULE_CITATIONS[rule])
    node = CertificateNode(
        rule=rule,
        params=params,
        premises=tuple(premises),
        conclusion=conclusion,
        side_conditions=tuple(conditions),
    )
    verify_node(node)
    return node


@dataclass
class CheckReport:
    accepted: bool
    node_count: int
    failures: list[str]
    cited: dict[str, str]

    def lines(self) -> list[str]:
        out = [f"nodes checked: {self.node_count}"]
        for anchor, statement in sorted(self.cited.items()):
            out.append(f"cited: {anchor}: {statement}")
        out.extend(f"FAIL: {f}" for f in self.failures)
        out.append("verdict: " + ("accepted" if self.accepted else "rejected"))
        return out


def check_certificate(cert) -> CheckReport:
    """Re-verify every node of a certificate from its witnesses.

    Accepts a root node or the JSON form.  Rejection reasons: malformed
    dag, a node id that does not match its content, an unknown or
    unexpected citation, or any side condition that fails to replay.
    """
    failures: list[str] = []
    if isinstance(cert, CertificateNode):
        root = cert
        claimed_ids = None
    else:
        try:
            root = certificate_from_json(cert)
        except (CertifyError, KeyError, TypeError, ValueError, AttributeError, IndexError) as e:
            return CheckReport(False, 0, [f"malformed certificate: {e}"], {})
        claimed_ids = set(cert["nodes"])
    nodes = root.walk()
    if claimed_ids is not None:
        actual = {n.node_id() for n in nodes}
        if actual != claimed_ids:
            failures.append("node ids do not match their content")
    for node in nodes:
        try:
            verify_node(node)
        except (CertifyError, ValueError, KeyError, TypeError, AttributeError, IndexError) as e:
            failures.append(f"{node.rule}: {e}")
    cited_map = {}
    for node in nodes:
        for c in node.side_conditions:
            if c.status == "cited" and c.anchor in AXIOMS:
                cited_map[c.anchor] = AXIOMS[c.anchor]
    return CheckReport(not failures, len(nodes), failures, cited_map)


# -- built-in proof scripts ---------------------------------------------------


def least_valid_prime(k: int, exponents: Sequence[int]) -> int:
    """Smallest prime coprime to k+1 and to every gluing degree."""
    p = 2
    while True:
        if _is_prime(p) and math.gcd(p, k + 1) == 1 and all(math.gcd(p, abs(m)) == 1 for m in exponents):
            return p
        p += 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def prove_primitive(word_text: str, rank: int) -> CertificateNode:
    """Base-case certificate: a primitive element is a free factor."""
    group = free_group(rank)
    w = parse_rank_word(word_text, rank)
    return apply_rule(
        "FREE_FACTOR",
        [],
        {"target": [format_word(w)]},
        mff(group, (format_word(w),)),
    )


def _bswords_embedding(exponents: Sequence[int]) -> GroupHom:
    """x -> x, c_j -> y_j x^{m_j} y_j^-1 (both groups have rank k+1)."""
    k = len(exponents)
    H, F = Alphabet(k + 1), Alphabet(k + 1)
    images = [Word.gen(F, 1)]
    for j, m in enumerate(exponents, start=1):
        images.append(Word(F, (1 + j,) + ((1,) * m if m > 0 else (-1,) * (-m)) + (-(1 + j),)))
    return GroupHom(H, F, tuple(images))


def bswords_cover(exponents: Sequence[int], p: int) -> CoverGraph:
    """The index-p cover of the ambient rose realizing the single lift:
    x advances the sheet, y_j multiplies it by the gluing degree."""
    k = len(exponents)
    maps = [[(s + 1) % p for s in range(p)]]
    for m in exponents:
        maps.append([(m % p) * s % p for s in range(p)])
    return CoverGraph(Alphabet(k + 1), p, maps)


def prove_bswords(exponents: Sequence[int], p: Optional[int] = None) -> CertificateNode:
    """Certificate that x y_1 x^{m_1} y_1^-1 ... y_k x^{m_k} y_k^-1
    generates a measure free factor of the rank-(k+1) free group.

    Chain: boundary words of the mod-p kernel cover of the punctured
    sphere group split off (axiom), one HNN step per attached cylinder
    consumes the c_j^p factor, the survivor w^p is selected, and the
    lifting step descends to w.
    """
    exponents = list(exponents)
    k = len(exponents)
    if k < 1 or any(m == 0 for m in exponents):
        raise CertifyError("need k >= 1 nonzero gluing degrees")
    if p is None:
        p = least_valid_prime(k, exponents)
    if p < 2 or math.gcd(p, k + 1) != 1 or any(math.gcd(p, abs(m)) != 1 for m in exponents):
        raise CertifyError("sheet count violates the coprimality constraints")
    base_rank = k + 1
    H = Alphabet(base_rank)
    emb = _bswords_embedding(exponents)
    w_f = bs_word(exponents)
    v_h = Word(H, range(1, base_rank + 1))
    if apply_hom(emb, v_h) != w_f:
        raise CertifyError("embedding does not carry v to w")

    cover = kernel_mod_p_cover(H, p)
    basis = basis_from_tree(cover)
    sub_rank = cover.rank()
    realization = Realization(
        base_rank, tuple(format_word(apply_hom(emb, d)) for d in basis.dictionary)
    )
    hhat = GroupObject("free", sub_rank, realization=realization)
    boundary = [Word.gen(H, i) ** p for i in range(1, base_rank + 1)] + [v_h**p]
    coords = [format_word(rewrite_in_basis(cover, basis, b)) for b in boundary]
    node = apply_rule(
        "BOUNDARY_AXIOM",
        [],
        {
            "mode": "punctured_sphere_cover",
            "base_rank": base_rank,
            "ambient_rank": base_rank,
            "p": p,
            "exponents": exponents,
            "embedding": [format_word(im) for im in emb.images],
        },
        common_mff(hhat, [(c,) for c in coords]),
        witnesses={"cover_data": {"cover": cover_to_json(cover)}},
    )

    group_cur = hhat
    fhat = bswords_cover(exponents, p)
    for j, m in enumerate(exponents, start=1):
        subs = node.conclusion.subgroups
        coord_rank = group_cur.coordinate_rank()
        x_hat = parse_rank_word(subs[0][0], coord_rank)
        stable = format_word(Word.gen(Alphabet(base_rank), 1 + j).inv())
        new_group = GroupObject(
            "free",
            group_cur.rank,
            realization=Realization(base_rank, group_cur.realization.generators + (stable,)),
        )
        params = {
            "h_index": 1,  # the current c_j^p entry sits right after x^p
            "hprime_index": 0,
            "alpha_images": [format_word(x_hat**m)],
            "stable_letter": stable,
        }
        if j == k:
            params["expect_cover"] = cover_to_json(fhat)
        survivors = tuple(t for i, t in enumerate(subs) if i != 1)
        node = apply_rule("HNN", [node], params, common_mff(new_group, survivors))
        group_cur = new_group

    # select the lifted word from the two survivors {x^p, w^p}
    swap = {"phi": ["b", "a"], "psi": ["b", "a"]}
    w_hat_text = node.conclusion.subgroups[1][0]
    node = apply_rule(
        "FREE_FACTOR",
        [node],
        {"target": ["b"], "extension": swap},
        mff(group_cur, (w_hat_text,)),
    )

    lift = complete_lift(fhat, w_f)
    return apply_rule(
        "LIFT",
        [node],
        {
            "ambient_rank": base_rank,
            "word": format_word(w_f),
            "cover": cover_to_json(fhat),
            "lift": lift_to_json(lift),
        },
        mff(free_group(base_rank), (format_word(w_f),)),
    )


def _cyclic_conjugate_product(k: int) -> Word:
    """C_0 C_1 ... C_{k-1} over rank k, C_j the j-th rotation of 1..k."""
    alphabet = Alphabet(k)
    letters: list[int] = []
    for j in range(k):
        letters.extend((i % k) + 1 for i in range(j, j + k))
    return Word(alphabet, letters)


def _rotation_basis_change(k: int) -> tuple[GroupHom, GroupHom]:
    """Automorphism pair of F_k carrying the one-cylinder word
    x y_1 x y_1^-1 ... y_{k-1} x y_{k-1}^-1 to the cyclic-conjugate
    product: x -> a_1...a_k and y_j -> (a_1...a_j)^-1."""
    alphabet = Alphabet(k)
    phi_images = [Word(alphabet, range(1, k + 1))]
    for j in range(1, k):
        phi_images.append(Word(alphabet, tuple(-i for i in range(j, 0, -1))))
    psi_images = [Word(alphabet, (-2,)) if k > 1 else Word(alphabet, (1,))]
    for j in range(1, k - 1):
        psi_images.append(Word(alphabet, (1 + j, -(2 + j))))
    if k > 1:
        psi_images.append(Word(alphabet, (k, 1)))
    phi = GroupHom(alphabet, alphabet, tuple(phi_images))
    psi = GroupHom(alphabet, alphabet, tuple(psi_images))
    return phi, psi


def grid_factor_blocks(k: int, n: int) -> list[list[int]]:
    """Coordinate blocks of the grid tree basis: letter 1 + t + n*i is
    the loop based at sheet t through the i-th a-edge; the closing
    b-edge is the last letter."""
    blocks = [[1 + t + n * i for i in range(k)] for t in range(n)]
    blocks.append([k * n + 1])
    return blocks


def prove_two_letter(k: int, n: int) -> CertificateNode:
    """Certificate that a^k b^n generates a measure free factor of F_2."""
    if k == 0 or n == 0:
        raise CertifyError("need k, n nonzero")
    if k < 0 or n < 0:
        inner = prove_two_letter(abs(k), abs(n))
        sa, sb = (1 if k > 0 else -1), (1 if n > 0 else -1)
        flip = {
            "phi": [format_word(Word(Alphabet(2), (1 * sa,))), format_word(Word(Alphabet(2), (2 * sb,)))],
        }
        flip["psi"] = flip["phi"]
        return apply_rule(
            "CONJ_AUT",
            [inner],
            flip,
            mff(free_group(2), (format_word(two_letter_word(k, n)),)),
        )
    w = two_letter_word(k, n)
    if k == 1 or n == 1:
        return prove_primitive(format_word(w), 2)

    cover = grid_cover(k, n)
    tree = grid_chain_tree(cover)
    basis = basis_from_tree(cover, tree)
    lift = complete_lift(cover, w, basis=basis)
    sub_rank = k * n + 1
    h_obj = GroupObject(
        "free",
        sub_rank,
        realization=Realization(2, tuple(format_word(d) for d in basis.dictionary)),
    )

    # per-sheet factor: the one-cylinder word in the rotated basis
    bs_node = prove_bswords([1] * (k - 1))
    phi, psi = _rotation_basis_change(k)
    v_word = _cyclic_conjugate_product(k)
    if apply_hom(phi, parse_rank_word(bs_node.conclusion.subgroups[0][0], k)) != v_word:
        raise CertifyError("basis change does not produce the cyclic-conjugate product")
    factor_node = apply_rule(
        "CONJ_AUT",
        [bs_node],
        {"phi": [format_word(im) for im in phi.images], "psi": [format_word(im) for im in psi.images]},
        mff(free_group(k), (format_word(v_word),)),
    )
    b_node = prove_primitive("a", 1)

    blocks = grid_factor_blocks(k, n)
    injected = []
    for block in blocks[:-1]:
        inject = GroupHom(
            Alphabet(k), Alphabet(sub_rank), tuple(Word.gen(Alphabet(sub_rank), i) for i in block)
        )
        injected.append((format_word(apply_hom(inject, v_word)),))
    injected.append((format_word(Word.gen(Alphabet(sub_rank), sub_rank)),))
    freeprod_node = apply_rule(
        "FREEPROD",
        [factor_node] * n + [b_node],
        {"blocks": blocks},
        common_mff(h_obj, injected),
    )

    # rebase {v_0,...,v_{n-1}, B} to the lift words w_t = v_t B
    m = n + 1
    target = [format_word(Word(Alphabet(m), (t, m))) for t in range(1, n + 1)]
    ext_phi = [format_word(Word(Alphabet(m), (t, m))) for t in range(1, n + 1)] + [
        format_word(Word.gen(Alphabet(m), m))
    ]
    ext_psi = [format_word(Word(Alphabet(m), (t, -m))) for t in range(1, n + 1)] + [
        format_word(Word.gen(Alphabet(m), m))
    ]
    lift_basis_words = tuple(format_word(e.basis_word) for e in lift.entries)
    select_node = apply_rule(
        "FREE_FACTOR",
        [freeprod_node],
        {"target": target, "extension": {"phi": ext_phi, "psi": ext_psi}},
        mff(h_obj, lift_basis_words),
    )

    return apply_rule(
        "LIFT",
        [select_node],
        {
            "ambient_rank": 2,
            "word": format_word(w),
            "cover": cover_to_json(cover),
            "lift": lift_to_json(lift),
            "tree": sorted(list(e) for e in tree),
        },
        mff(free_group(2), (format_word(w),)),
    )


def prove_three_letter(k: int, n: int, p: int) -> CertificateNode:
    """a^k b^n a^p with k != -p and n != 0, by conjugating a^{k+p} b^n."""
    if n == 0 or k + p == 0:
        raise CertifyError("three-letter family needs n != 0 and k != -p")
    inner = prove_two_letter(k + p, n)
    a = Word.gen(Alphabet(2), 1)
    b = Word.gen(Alphabet(2), 2)
    phi = [format_word(a), format_word(a ** (-p) * b * a**p)]
    psi = [format_word(a), format_word(a**p * b * a ** (-p))]
    return apply_rule(
        "CONJ_AUT",
        [inner],
        {"phi": phi, "psi": psi},
        mff(free_group(2), (format_word(three_letter_word(k, n, p)),)),
    )


def prove_nonorientable_boundary(g: int, boundary_count: int = 1) -> CertificateNode:
    """Boundary subgroup of a nonorientable surface of genus g.

    The single-boundary case lifts a_1^2...a_g^2 through the orientable
    double cover; it requires g >= 2 (for g = 1 the boundary word a^2 is
    a proper power and the double cover degenerates to an annulus, so no
    certificate exists).  Extra boundary components split off by the
    free-product step.
    """
    if g < 1 or boundary_count < 1:
        raise CertifyError("need genus >= 1 and a boundary component")
    if g == 1:
        raise CertifyError(
            "the genus-1 boundary word a^2 is a proper power; the derivation "
            "degenerates (annulus double cover) and the conclusion is false"
        )
    w = nonorientable_boundary_word(g)
    if boundary_count == 1:
        cover = kernel_mod_p_cover(Alphabet(g), 2)
        basis = basis_from_tree(cover)
        hhat = GroupObject(
            "free",
            cover.rank(),
            realization=Realization(g, tuple(format_word(d) for d in basis.dictionary)),
        )
        a1 = Word.gen(Alphabet(g), 1)
        tuples = [
            (format_word(rewrite_in_basis(cover, basis, w)),),
            (format_word(rewrite_in_basis(cover, basis, a1 * w * a1.inv())),),
        ]
        node = apply_rule(
            "BOUNDARY_AXIOM",
            [],
            {"mode": "orientable_double_cover", "base_rank": g, "genus": g, "p": 2},
            common_mff(hhat, tuples),
            witnesses={"cover_data": {"cover": cover_to_json(cover)}},
        )
        ident = {"phi": ["a", "b"], "psi": ["a", "b"]}
        node = apply_rule(
            "FREE_FACTOR",
            [node],
            {"target": ["a", "b"], "extension": ident},
            mff(hhat, (tuples[0][0], tuples[1][0])),
        )
        lift = complete_lift(cover, w)
        return apply_rule(
            "LIFT",
            [node],
            {
                "ambient_rank": g,
                "word": format_word(w),
                "cover": cover_to_json(cover),
                "lift": lift_to_json(lift),
            },
            mff(free_group(g), (format_word(w),)),
        )

    # several boundary components: split the a-part from the c-part
    single = prove_nonorientable_boundary(g, 1)
    c_count = boundary_count - 1
    c_letters = [format_word(Word.gen(Alphabet(c_count), i)) for i in range(1, c_count + 1)]
    c_node = apply_rule(
        "FREE_FACTOR",
        [],
        {"target": c_letters, "extension": {"phi": c_letters, "psi": c_letters}},
        mff(free_group(c_count), tuple(c_letters)),
    )
    rank = g + c_count
    blocks = [list(range(1, g + 1)), list(range(g + 1, rank + 1))]
    amb = Alphabet(rank)
    w_amb = Word(amb, w.letters)
    c_amb = [Word.gen(amb, g + j) for j in range(1, c_count + 1)]
    freeprod_node = apply_rule(
        "FREEPROD",
        [single, c_node],
        {"blocks": blocks},
        common_mff(
            free_group(rank),
            [(format_word(w_amb),), tuple(format_word(c) for c in c_amb)],
        ),
    )
    m = 1 + c_count
    gamma1 = Word(Alphabet(m), range(1, m + 1))
    target = [format_word(gamma1)] + [
        format_word(Word.gen(Alphabet(m), j)) for j in range(2, m + 1)
    ]
    psi_first = Word(Alphabet(m), (1,) + tuple(-j for j in range(m, 1, -1)))
    extension = {
        "phi": target,
        "psi": [format_word(psi_first)] + target[1:],
    }
    boundary_words = [format_word(w_amb * _product(c_amb))] + [format_word(c) for c in c_amb]
    return apply_rule(
        "FREE_FACTOR",
        [freeprod_node],
        {"target": target, "extension": extension},
        mff(free_group(rank), tuple(boundary_words)),
    )


def _product(words: Sequence[Word]) -> Word:
    out = Word.identity(words[0].alphabet)
    for w in words:
        out = out * w
    return out


def prove_vfree(v_text: str, orders: Sequence[int], powers: Sequence[int], v_rank: Optional[int] = None) -> CertificateNode:
    """Certificate that v s_1^{p_1} ... s_k^{p_k} generates a measure
    free factor of F_n * Z_{n_1} * ... * Z_{n_k}.

    The free-part word v gets its own certificate first: a primitivity
    check if it is primitive, else the two-letter derivation if it has
    that shape.  Each torsion factor is then consumed by one
    branched-cover lifting step.
    """
    orders, powers = list(orders), list(powers)
    if len(orders) != len(powers) or not orders:
        raise CertifyError("need matching torsion orders and powers")
    if v_rank is None:
        v_rank = max((abs(x) for x in parse_word(v_text).letters), default=1)
    v = parse_rank_word(v_text, v_rank)
    if not v:
        raise CertifyError("the free part must be nontrivial")
    node = _certify_free_part(v)
    group = None
    for j in range(1, len(orders) + 1):
        group = vf.VFreeGroup(v_rank, tuple(orders[:j]))
        w = vf.make_vfree_word(v, orders[:j], powers[:j])
        sub = vf.branched_cover_subgroup(group)
        lift = vf.complete_lift_vfree(sub, w)
        m = lift.entries[0].mult
        alphabet = Alphabet(m)
        ext_phi = [format_word(Word(alphabet, range(1, m + 1)))] + [
            format_word(Word.gen(alphabet, i)) for i in range(2, m + 1)
        ]
        ext_psi = [
            format_word(Word(alphabet, (1,) + tuple(-i for i in range(m, 1, -1))))
        ] + [format_word(Word.gen(alphabet, i)) for i in range(2, m + 1)]
        node = apply_rule(
            "VFREE_LIFT",
            [node],
            {
                "free_rank": v_rank,
                "orders": orders[:j],
                "powers": powers[:j],
                "word": vf.format_vfree(w),
                "lift": [
                    {
                        "rep": vf.format_vfree(e.rep),
                        "multiplicity": e.mult,
                        "word": vf.format_vfree(e.word),
                        "sheets": [s for s, _ in e.factor_rewrite],
                    }
                    for e in lift.entries
                ],
                "extension": {"phi": ext_phi, "psi": ext_psi},
                "audit_seed": 0,
                "audit_trials": 64,
            },
            mff(vfree_group_object(v_rank, orders[:j]), (vf.format_vfree(w),)),
        )
    return node


def _certify_free_part(v: Word) -> CertificateNode:
    if is_primitive(v):
        return prove_primitive(format_word(v), v.alphabet.rank)
    letters = v.letters
    if v.alphabet.rank == 2 and letters:
        k = sum(1 for x in letters if abs(x) == 1 and x > 0) - sum(1 for x in letters if x == -1)
        n = sum(1 for x in letters if x == 2) - sum(1 for x in letters if x == -2)
        if k != 0 and n != 0 and v == two_letter_word(k, n):
            return prove_two_letter(k, n)
    raise CertifyError("no built-in derivation certifies this free-part word")


def prove(theorem: str, **params) -> CertificateNode:
    """Dispatch the built-in scripts by name."""
    if theorem == "two_letter":
        return prove_two_letter(params["k"], params["n"])
    if theorem == "three_letter":
        return prove_three_letter(params["k"], params["n"], params["p"])
    if theorem == "bswords":
        return prove_bswords(params["m"], params.get("p"))
    if theorem == "nonorientable_boundary":
        return prove_nonorientable_boundary(params["g"], params.get("k", 1))
    if theorem == "vfree":
        return prove_vfree(
            params["v"], params["orders"], params["powers"], params.get("v_rank")
        )
    if theorem == "surface_comm":
        g = params["g"]
        return apply_rule(
            "SURFACE_AXIOM",
            [],
            {"genus": g},
            mff(free_group(2 * g), (format_word(surface_commutator_word(g)),)),
        )
    raise CertifyError(f"unknown theorem {theorem!r}")
