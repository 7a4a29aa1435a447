import random
from fractions import Fraction

import pytest

from freefactor.costlab import (
    CostError,
    FiniteAction,
    FiniteRelation,
    FiniteSpace,
    PartialBijection,
    check_free_product,
    cost,
    generated_partition,
    graphing_from_json,
    graphing_to_json,
    induce_action,
    is_treeing,
    relation_cost,
    relation_from_json,
    relation_to_json,
    restrict_and_check,
    space_from_json,
    space_to_json,
    treeing_for,
)
from freefactor.covers import CoverGraph, basis_from_tree, fold, grid_cover, kernel_mod_p_cover
from freefactor.lifts import coset_action
from freefactor.words import Alphabet, parse_word

from util import (
    all_partitions,
    bipartite_forest_oracle,
    brute_min_graphing_cost,
    random_generating_graphing,
    random_partition,
)

U6 = FiniteSpace.uniform(6)


def cycle_map(points):
    return PartialBijection.of({p: points[(i + 1) % len(points)] for i, p in enumerate(points)})


# -- spaces -------------------------------------------------------------


def test_space_invariants():
    with pytest.raises(CostError):
        FiniteSpace((0, 1), (Fraction(1, 2), Fraction(0)))
    s = FiniteSpace.uniform(4)
    assert s.is_probability()
    assert s.restrict({0, 2}).total() == Fraction(1, 2)


def test_partial_bijection_rejects_noninjective():
    with pytest.raises(CostError):
        PartialBijection(((0, 1), (2, 1)))


# -- generated partition --------------------------------------------------


def test_generated_partition_empty():
    assert generated_partition(U6, ()) == FiniteRelation.singletons(range(6))


def test_generated_partition_full_cycle():
    s = FiniteSpace.uniform(5)
    rel = generated_partition(s, (cycle_map(list(range(5))),))
    assert rel.class_count() == 1


def test_generated_partition_two_transpositions():
    rel = generated_partition(
        U6, (PartialBijection.of({0: 1}), PartialBijection.of({2: 3}))
    )
    sizes = sorted(len(c) for c in rel.classes)
    assert sizes == [1, 1, 2, 2]
    # direct set oracle
    assert rel == FiniteRelation.from_classes([(0, 1), (2, 3), (4,), (5,)])


# -- cost -------------------------------------------------------------------


def test_cost_empty():
    assert cost(U6, ()) == 0


def test_cost_full_map():
    assert cost(U6, (cycle_map(list(range(6))),)) == 1


def test_cost_additive():
    phi = PartialBijection.of({0: 1, 2: 3, 4: 5})  # measure 1/2
    psi = PartialBijection.of({0: 2, 1: 3})  # measure 1/3
    assert cost(U6, (phi, psi)) == Fraction(5, 6)


def test_cost_rejects_non_measure_preserving():
    s = FiniteSpace((0, 1), (Fraction(1, 3), Fraction(2, 3)))
    with pytest.raises(CostError):
        cost(s, (PartialBijection.of({0: 1}),))


# -- relation cost ------------------------------------------------------------


def test_relation_cost_singletons():
    assert relation_cost(U6, FiniteRelation.singletons(range(6))) == 0


def test_relation_cost_3_2_1():
    rel = FiniteRelation.from_classes([(0, 1, 2), (3, 4), (5,)])
    assert relation_cost(U6, rel) == Fraction(1, 2)
    assert brute_min_graphing_cost(U6, rel) == Fraction(1, 2)


def test_relation_cost_single_class():
    for n in (2, 3, 5, 8):
        s = FiniteSpace.uniform(n)
        rel = FiniteRelation.from_classes([tuple(range(n))])
        assert relation_cost(s, rel) == Fraction(n - 1, n)


def test_relation_cost_matches_brute_force():
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randrange(2, 7)
        s = FiniteSpace.uniform(n)
        rel = random_partition(rng, range(n))
        assert relation_cost(s, rel) == brute_min_graphing_cost(s, rel)


def test_relation_cost_monotone_under_merging():
    rng = random.Random(6)
    for _ in range(30):
        n = rng.randrange(3, 8)
        s = FiniteSpace.uniform(n)
        rel = random_partition(rng, range(n))
        if rel.class_count() < 2:
            continue
        merged_classes = list(rel.classes)
        a = merged_classes.pop(rng.randrange(len(merged_classes)))
        b = merged_classes.pop(rng.randrange(len(merged_classes)))
        merged = FiniteRelation.from_classes(merged_classes + [a + b])
        assert relation_cost(s, merged) >= relation_cost(s, rel)


# -- treeings --------------------------------------------------------------------


def test_treeing_spanning_path():
    s = FiniteSpace.uniform(4)
    rel = FiniteRelation.from_classes([(0, 1, 2, 3)])
    path = (PartialBijection.of({0: 1, 1: 2, 2: 3}),)
    assert is_treeing(s, path, rel)
    assert cost(s, path) == relation_cost(s, rel)


def test_full_cycle_is_not_treeing():
    s = FiniteSpace.uniform(4)
    rel = FiniteRelation.from_classes([(0, 1, 2, 3)])
    assert not is_treeing(s, (cycle_map([0, 1, 2, 3]),), rel)


def test_fixed_point_loop_rejected():
    s = FiniteSpace.uniform(2)
    rel = FiniteRelation.from_classes([(0, 1)])
    maps = (PartialBijection.of({0: 1}), PartialBijection.of({1: 1}))
    assert not is_treeing(s, maps, rel)


def test_is_treeing_requires_generation():
    s = FiniteSpace.uniform(3)
    rel = FiniteRelation.from_classes([(0, 1, 2)])
    with pytest.raises(CostError):
        is_treeing(s, (PartialBijection.of({0: 1}),), rel)


def test_treeing_iff_cost_equality_random():
    rng = random.Random(9)
    for _ in range(300):
        n = rng.randrange(2, 8)
        s = FiniteSpace.uniform(n)
        rel = random_partition(rng, range(n))
        maps = random_generating_graphing(
            rng, rel, extra_edges=rng.randrange(2), fixed_points=rng.randrange(2)
        )
        assert generated_partition(s, maps) == rel
        assert is_treeing(s, maps, rel) == (cost(s, maps) == relation_cost(s, rel))


def test_treeing_for_attains_cost():
    rng = random.Random(10)
    for _ in range(50):
        n = rng.randrange(1, 8)
        s = FiniteSpace.uniform(n)
        rel = random_partition(rng, range(n))
        forest = treeing_for(s, rel)
        if any(len(c) > 1 for c in rel.classes):
            assert is_treeing(s, forest, rel)
        assert cost(s, forest) == relation_cost(s, rel)


def test_sub_relation_treeability():
    # every refinement of a relation admits a treeing
    rng = random.Random(11)
    for _ in range(30):
        n = rng.randrange(2, 8)
        s = FiniteSpace.uniform(n)
        rel = random_partition(rng, range(n))
        finer_classes = []
        for c in rel.classes:
            cut = rng.randrange(len(c)) + 1
            finer_classes.append(c[:cut])
            if c[cut:]:
                finer_classes.append(c[cut:])
        finer = FiniteRelation.from_classes(finer_classes)
        assert finer.refines(rel)
        forest = treeing_for(s, finer)
        assert cost(s, forest) == relation_cost(s, finer)


def test_treeing_for_unequal_weights_rejected():
    s = FiniteSpace((0, 1), (Fraction(1, 3), Fraction(2, 3)))
    with pytest.raises(CostError):
        treeing_for(s, FiniteRelation.from_classes([(0, 1)]))


# -- complete sections ---------------------------------------------------------------


def test_restrict_full_space():
    rel = FiniteRelation.from_classes([(0, 1, 2), (3, 4, 5)])
    restricted, report = restrict_and_check(U6, rel, range(6))
    assert restricted == rel
    assert report.equal and report.complement_measure == 0


def test_restrict_one_point_per_class():
    rel = FiniteRelation.from_classes([(0, 1, 2), (3, 4), (5,)])
    restricted, report = restrict_and_check(U6, rel, {0, 3, 5})
    assert report.restricted_cost == 0
    assert report.complement_measure == Fraction(1, 2)
    assert report.equal


def test_restrict_half_of_one_class():
    s = FiniteSpace.uniform(4)
    rel = FiniteRelation.from_classes([(0, 1, 2, 3)])
    _, report = restrict_and_check(s, rel, {0, 1})
    assert report.restricted_cost == Fraction(1, 4)
    assert report.complement_measure == Fraction(1, 2)
    assert report.equal
    assert report.relation_cost == Fraction(3, 4)


def test_restrict_requires_complete_section():
    rel = FiniteRelation.from_classes([(0, 1, 2), (3, 4), (5,)])
    with pytest.raises(CostError):
        restrict_and_check(U6, rel, {0, 3})


def test_section_formula_random():
    rng = random.Random(12)
    for _ in range(200):
        n = rng.randrange(2, 8)
        s = FiniteSpace.uniform(n)
        rel = random_partition(rng, range(n))
        section = {rng.choice(c) for c in rel.classes}
        for p in range(n):
            if rng.random() < 0.4:
                section.add(p)
        _, report = restrict_and_check(s, rel, section)
        assert report.equal


# -- free products ----------------------------------------------------------------------


def test_free_product_trivial_factor():
    rel = FiniteRelation.from_classes([(0, 1), (2,)])
    singles = FiniteRelation.singletons(range(3))
    assert check_free_product(rel, rel, singles)


def test_free_product_two_transpositions():
    rel = FiniteRelation.from_classes([(0, 1, 2, 3)])
    e1 = FiniteRelation.from_classes([(0, 1), (2,), (3,)])
    e2 = FiniteRelation.from_classes([(1, 2), (0,), (3,)])
    # join is only three points' worth; add 3 via e2
    e2b = FiniteRelation.from_classes([(1, 2), (0, 3)])
    assert check_free_product(rel, e1, e2b)


def test_free_product_shared_pair_fails():
    rel = FiniteRelation.from_classes([(0, 1)])
    e1 = FiniteRelation.from_classes([(0, 1)])
    e2 = FiniteRelation.from_classes([(0, 1)])
    assert not check_free_product(rel, e1, e2)


def test_free_product_requires_subrelations():
    rel = FiniteRelation.from_classes([(0, 1), (2,)])
    other = FiniteRelation.from_classes([(0, 2), (1,)])
    with pytest.raises(CostError):
        check_free_product(rel, other, rel)


def test_free_product_join_must_match():
    rel = FiniteRelation.from_classes([(0, 1, 2)])
    e1 = FiniteRelation.from_classes([(0, 1), (2,)])
    e2 = FiniteRelation.singletons(range(3))
    assert not check_free_product(rel, e1, e2)


def test_free_product_wedge_of_cycles():
    # Z_p * Z_q acting through a wedge: a p-cycle and a q-cycle sharing
    # exactly one point generate a free product
    e1 = FiniteRelation.from_classes([(0, 1, 2), (3,), (4,)])
    e2 = FiniteRelation.from_classes([(0, 3, 4), (1,), (2,)])
    rel = e1.join(e2)
    assert check_free_product(rel, e1, e2)


def test_free_product_matches_forest_oracle():
    rng = random.Random(13)
    for _ in range(200):
        n = rng.randrange(2, 8)
        e1 = random_partition(rng, range(n))
        e2 = random_partition(rng, range(n))
        rel = e1.join(e2)
        assert check_free_product(rel, e1, e2) == bipartite_forest_oracle(e1, e2)


# -- finite actions -------------------------------------------------------------------


def test_action_validation():
    s = FiniteSpace.uniform(3)
    with pytest.raises(CostError):
        FiniteAction(s, ("a",), ((0, 0, 1),))
    act = FiniteAction(s, ("a",), ((1, 2, 0),))
    assert act.orbit_relation().class_count() == 1


def test_freeness_audit():
    s = FiniteSpace.uniform(3)
    act = FiniteAction(s, ("a",), ((1, 2, 0),))
    assert act.free_up_to(2)
    assert not act.free_up_to(3)  # a^3 fixes everything
    audited = act.audit_freeness(2)
    assert audited.audited_free_length == 2
    with pytest.raises(CostError):
        act.audit_freeness(3)


def test_orbit_free_product_of_action():
    # free-at-audit-bound wedge action of <a> * <b>
    s = FiniteSpace.uniform(5)
    a = FiniteAction(s, ("a", "b"), ((1, 2, 0, 3, 4), (3, 1, 2, 4, 0)))
    ea = FiniteAction(s, ("a",), (a.perms[0],)).orbit_relation()
    eb = FiniteAction(s, ("b",), (a.perms[1],)).orbit_relation()
    rel = a.orbit_relation()
    assert check_free_product(rel, ea, eb)


# -- induced actions ---------------------------------------------------------------------


def rose_cover():
    F2 = Alphabet(2)
    return fold(F2, [parse_word("a", F2), parse_word("b", F2)])


def test_induce_index_one_is_identity():
    s = FiniteSpace.uniform(4)
    h = FiniteAction(s, ("a", "b"), ((1, 0, 3, 2), (2, 3, 0, 1)))
    induced = induce_action(h, coset_action(rose_cover()))
    assert induced.space == s
    assert induced.perms == h.perms


def test_induce_class_counts_and_measure():
    rng = random.Random(17)
    F2 = Alphabet(2)
    for _ in range(25):
        index = rng.randrange(2, 5)
        cover = kernel_mod_p_cover(F2, index)
        basis = basis_from_tree(cover)
        m = rng.randrange(2, 5)
        s = FiniteSpace.uniform(m)
        names = tuple(chr(ord("a") + i) for i in range(basis.basis_alphabet.rank))
        perms = []
        for _ in names:
            p = list(range(m))
            rng.shuffle(p)
            perms.append(tuple(p))
        h = FiniteAction(s, names, tuple(perms))
        induced = induce_action(h, cover, basis)
        assert induced.space.total() == 1
        assert induced.orbit_relation().class_count() == h.orbit_relation().class_count()


def test_induce_incompatible_dictionary():
    s = FiniteSpace.uniform(2)
    h = FiniteAction(s, ("z",), ((1, 0),))
    with pytest.raises(CostError):
        induce_action(h, coset_action(rose_cover()))


def test_induce_square_semantics():
    # index-2 cover of <a>: the subgroup generator is a^2; reading a twice
    # through the induced action must act on the base fiber as the
    # subgroup permutation itself
    cover = kernel_mod_p_cover(Alphabet(1), 2)
    basis = basis_from_tree(cover)
    s = FiniteSpace.uniform(3)
    sigma = (1, 2, 0)
    h = FiniteAction(s, ("a",), (sigma,))
    induced = induce_action(h, cover, basis)
    p = induced.perms[0]
    for x in range(3):
        assert p[p[x]] == sigma[x]
        assert p[x] >= 3  # one step leaves the base fiber


def test_induce_grid_cover():
    cover = grid_cover(2, 2)
    basis = basis_from_tree(cover)
    m = 3
    s = FiniteSpace.uniform(m)
    names = tuple(chr(ord("a") + i) for i in range(basis.basis_alphabet.rank))
    perms = tuple(tuple((i + j) % m for i in range(m)) for j in range(1, len(names) + 1))
    h = FiniteAction(s, names, perms)
    induced = induce_action(h, cover, basis)
    assert len(induced.space.points) == m * 4


# -- exhaustive finite theory (small) ------------------------------------------------------


def test_treeing_iff_cost_small_exhaustive():
    rng = random.Random(23)
    for n in range(2, 6):
        s = FiniteSpace.uniform(n)
        for classes in all_partitions(range(n)):
            rel = FiniteRelation.from_classes(classes)
            maps = random_generating_graphing(rng, rel, extra_edges=1)
            assert is_treeing(s, maps, rel) == (cost(s, maps) == relation_cost(s, rel))


# -- serialization ---------------------------------------------------------------------------


def test_costlab_json_roundtrips():
    s = FiniteSpace((0, 1, 2), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    assert space_from_json(space_to_json(s)) == s
    maps = (PartialBijection.of({1: 2}),)
    assert graphing_from_json(graphing_to_json(maps)) == maps
    rel = FiniteRelation.from_classes([(0,), (1, 2)])
    assert relation_from_json(relation_to_json(rel)) == rel
