"""Stress tests beyond the acceptance grid: higher-rank Whitehead
descent, randomized cover/lift invariants, and certificate rejection
paths for structurally wrong derivations."""

import random

import pytest

from freefactor.certify import (
    CertifyError,
    apply_rule,
    check_certificate,
    common_mff,
    free_group,
    mff,
    prove,
    prove_primitive,
)
from freefactor.covers import CoverGraph, basis_from_tree, fold, membership
from freefactor.lifts import complete_lift, coset_action, multiplicity, verify_free_lift
from freefactor.words import Alphabet, Word, enumerate_reduced_words, is_primitive, is_proper_power

from util import nielsen_independent

F3 = Alphabet(3)


def test_primitivity_rank3_against_oracle():
    from test_words import primitive_words_oracle

    oracle = primitive_words_oracle(F3, 3)
    for word in enumerate_reduced_words(F3, 3):
        assert is_primitive(word) == (word.cyclic_reduce()[0] in oracle), str(word)


def test_primitive_implies_not_power_rank3():
    for word in enumerate_reduced_words(F3, 4):
        if is_proper_power(word):
            assert not is_primitive(word)


def test_descent_trace_replays_for_all_short_primitives():
    from freefactor.words import apply_hom

    F2 = Alphabet(2)
    for word in enumerate_reduced_words(F2, 4):
        trace = []
        if not is_primitive(word, trace=trace):
            continue
        cur = word.cyclic_reduce()[0]
        for phi in trace:
            cur = apply_hom(phi, cur).cyclic_reduce()[0]
        assert len(cur) == 1, str(word)


def random_complete_cover(rng, rank, index):
    while True:
        maps = []
        for _ in range(rank):
            p = list(range(index))
            rng.shuffle(p)
            maps.append(p)
        try:
            return CoverGraph(Alphabet(rank), index, maps)
        except Exception:
            continue


def test_complete_lift_invariants_random_covers():
    rng = random.Random(99)
    for _ in range(60):
        rank = rng.randrange(1, 4)
        index = rng.randrange(1, 8)
        cover = random_complete_cover(rng, rank, index)
        letters = [rng.choice([s * g for g in range(1, rank + 1) for s in (1, -1)]) for _ in range(rng.randrange(1, 7))]
        w = Word(Alphabet(rank), letters)
        if not w:
            continue
        lift = complete_lift(cover, w)
        assert sum(e.mult for e in lift.entries) == index
        action = coset_action(cover)
        seen_orbits = set()
        for e in lift.entries:
            assert membership(cover, e.word)[0]
            assert e.rep * e.word * e.rep.inv() == w**e.mult
            # the representative's inverse traces from the base to a coset
            # whose w-orbit size is the multiplicity
            end, _ = cover.trace(e.rep.inv())
            assert end is not None
            assert multiplicity(action, w, end) == e.mult
            orbit = frozenset(
                _orbit_of(action, w, end)
            )
            assert orbit not in seen_orbits
            seen_orbits.add(orbit)


def _orbit_of(action, w, start):
    orbit = [start]
    v = action.apply_word(w, start)
    while v != start:
        orbit.append(v)
        v = action.apply_word(w, v)
    return orbit


def test_verify_free_lift_against_oracle_rank3():
    rng = random.Random(100)
    from freefactor.lifts import CompleteLift, LiftEntry

    for _ in range(80):
        count = rng.randrange(1, 4)
        words = []
        for _ in range(count):
            letters = [rng.choice([s * g for g in range(1, 4) for s in (1, -1)]) for _ in range(rng.randrange(1, 8))]
            words.append(Word(F3, letters))
        if any(not u for u in words):
            continue
        lift = CompleteLift(words[0], count, tuple(LiftEntry(Word(F3), 1, u) for u in words))
        ok, _ = verify_free_lift(lift)
        assert ok == nielsen_independent(words)


def test_fold_rank_equals_count_iff_independent():
    rng = random.Random(101)
    F2 = Alphabet(2)
    for _ in range(100):
        count = rng.randrange(1, 4)
        words = []
        for _ in range(count):
            letters = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randrange(1, 7))]
            words.append(Word(F2, letters))
        if any(not u for u in words):
            continue
        assert (fold(F2, words).rank() == count) == nielsen_independent(words)


# -- certificate rejection paths ---------------------------------------------


def test_freeprod_rejects_wrong_rank_factor():
    a_node = prove_primitive("a", 1)
    with pytest.raises(CertifyError):
        apply_rule(
            "FREEPROD",
            [a_node],
            {"blocks": [[1, 2]]},
            common_mff(free_group(2), [("a",)]),
        )


def test_freeprod_rejects_overlapping_blocks():
    a_node = prove_primitive("a", 1)
    with pytest.raises(CertifyError):
        apply_rule(
            "FREEPROD",
            [a_node, a_node],
            {"blocks": [[1], [1]]},
            common_mff(free_group(2), [("a",), ("a",)]),
        )


def test_conj_aut_rejects_non_automorphism():
    base = prove_primitive("ab", 2)
    with pytest.raises(CertifyError):
        apply_rule(
            "CONJ_AUT",
            [base],
            {"phi": ["a2", "b"], "psi": ["a", "b"]},
            mff(free_group(2), ("a2b",)),
        )


def test_free_factor_rejects_wrong_conclusion():
    with pytest.raises(CertifyError):
        apply_rule(
            "FREE_FACTOR",
            [],
            {"target": ["ab"]},
            mff(free_group(2), ("ba",)),
        )


def test_free_factor_rejects_bad_extension():
    base = prove_primitive("a", 1)
    pair = apply_rule(
        "FREEPROD",
        [base, base],
        {"blocks": [[1], [2]]},
        common_mff(free_group(2), [("a",), ("b",)]),
    )
    # extension's first image must be the target word
    with pytest.raises(CertifyError):
        apply_rule(
            "FREE_FACTOR",
            [pair],
            {"target": ["ab"], "extension": {"phi": ["a", "b"], "psi": ["a", "b"]}},
            mff(free_group(2), ("ab",)),
        )


def test_lift_rejects_wrong_premise_subgroup():
    import copy
    import json

    from freefactor.certify import dumps_certificate
    from test_certify import rebuild_ids

    root = prove("two_letter", k=2, n=2)
    data = json.loads(dumps_certificate(root))
    # swap the premise tuple order so it no longer matches the lift order
    for p in data["nodes"].values():
        if p["rule"] == "FREE_FACTOR" and p["conclusion"]["group"].get("realization") and len(p["conclusion"]["subgroups"][0]) == 2:
            sub = p["conclusion"]["subgroups"][0]
            sub[0], sub[1] = sub[1], sub[0]
    rep = check_certificate(rebuild_ids(copy.deepcopy(data)))
    assert not rep.accepted


def test_vfree_lift_rejects_wrong_premise_word():
    from freefactor.certify import prove_two_letter

    wrong = prove_two_letter(3, 2)  # certifies a3b2, not the needed core
    from freefactor.certify import vfree_group_object
    from freefactor.vfree import VFreeGroup, branched_cover_subgroup, complete_lift_vfree, format_vfree, make_vfree_word
    from freefactor.words import parse_word

    v = parse_word("a2b3")
    w = make_vfree_word(v, [4], [2])
    group = VFreeGroup(2, (4,))
    sub = branched_cover_subgroup(group)
    lift = complete_lift_vfree(sub, w)
    params = {
        "free_rank": 2,
        "orders": [4],
        "powers": [2],
        "word": format_vfree(w),
        "lift": [
            {
                "rep": format_vfree(e.rep),
                "multiplicity": e.mult,
                "word": format_vfree(e.word),
                "sheets": [s for s, _ in e.factor_rewrite],
            }
            for e in lift.entries
        ],
        "extension": {"phi": ["ab", "b"], "psi": ["aB", "b"]},
        "audit_seed": 0,
        "audit_trials": 16,
    }
    with pytest.raises(CertifyError):
        apply_rule(
            "VFREE_LIFT",
            [wrong],
            params,
            mff(vfree_group_object(2, [4]), (format_vfree(w),)),
        )


def test_three_letter_grid_extra():
    for k, n, p in [(4, 2, -1), (-2, -3, 4)]:
        assert check_certificate(prove("three_letter", k=k, n=n, p=p)).accepted
