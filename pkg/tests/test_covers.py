import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freefactor.covers import (
    CoverError,
    CoverGraph,
    basis_from_tree,
    cover_from_json,
    cover_to_dot,
    cover_to_json,
    fold,
    grid_cover,
    grid_chain_tree,
    kernel_mod_p_cover,
    make_cover,
    membership,
    parse_cover_spec,
    rewrite_in_basis,
    spanning_tree_bfs,
)
from freefactor.words import Alphabet, Word, enumerate_reduced_words, parse_word

F2 = Alphabet(2)


def w(text, alphabet=F2):
    return parse_word(text, alphabet)


# -- folding ---------------------------------------------------------------


def test_fold_single_a_loop():
    g = fold(F2, [w("a")])
    assert g.n_vertices == 1
    assert g.maps[0][0] == 0
    assert g.maps[1][0] is None


def test_fold_a2_b():
    g = fold(F2, [w("a2"), w("b")])
    expected = CoverGraph(F2, 2, [[1, 0], [0, None]])
    assert g == expected


def test_fold_power_is_single_cycle():
    word = w("ab")  # x c_1 pattern in rank 2
    for p in (2, 3, 5):
        g = fold(F2, [word**p])
        assert g.n_vertices == p * len(word)
        assert g.n_edges() == p * len(word)
        assert g.rank() == 1


def test_fold_empty_generators():
    g = fold(F2, [])
    assert g.n_vertices == 1
    assert g.n_edges() == 0


def test_fold_produces_core():
    g = fold(F2, [w("abA"), w("a2")])
    assert g.is_core()


@given(st.lists(st.sampled_from(["a", "b", "ab", "aB", "a2", "b2a", "abAB"]), min_size=0, max_size=4))
@settings(max_examples=100)
def test_fold_membership_of_generators(texts):
    gens = [w(t) for t in texts]
    g = fold(F2, gens)
    for s in gens:
        assert membership(g, s)[0]
    assert g.rank() <= len(gens)


def test_fold_confluence_under_nielsen_moves():
    u, v = w("abA"), w("a2b")
    base = fold(F2, [u, v])
    assert fold(F2, [v, u]) == base
    assert fold(F2, [u.inv(), v]) == base
    assert fold(F2, [u * v, v]) == base
    assert fold(F2, [u, v * u.inv()]) == base


# -- membership --------------------------------------------------------------


def test_membership_a_in_a2():
    g = fold(F2, [w("a2")])
    assert not membership(g, w("a"))[0]
    ok, trace = membership(g, w("a2"))
    assert ok and trace[0] == trace[-1] == 0 and len(trace) == 3


def test_membership_kernel_exponent_sum():
    for p in (2, 3, 5):
        g = kernel_mod_p_cover(F2, p)
        for word in enumerate_reduced_words(F2, 4, include_empty=True):
            total = word.exponent_sum(1) + word.exponent_sum(2)
            assert membership(g, word)[0] == (total % p == 0)


# -- spanning trees and rewriting ---------------------------------------------


def test_basis_of_rose():
    g = fold(F2, [w("a"), w("b")])
    basis = basis_from_tree(g)
    assert [d for d in basis.dictionary] == [w("a"), w("b")]


def test_basis_count_kernel_cover():
    for p in (2, 3, 5):
        g = kernel_mod_p_cover(F2, p)
        basis = basis_from_tree(g)
        assert len(basis.dictionary) == p + 1  # Nielsen-Schreier: p(2-1)+1
        assert g.rank() == p + 1


def test_grid_chain_tree_basis():
    g = grid_cover(3, 2)
    basis = basis_from_tree(g, grid_chain_tree(g))
    assert len(basis.dictionary) == 7  # kn + 1
    # non-tree edges: the six a-edges plus the closing b-edge
    gens = [gen for _, gen, _ in basis.basis_edges]
    assert gens.count(1) == 6 and gens.count(2) == 1
    assert basis.dictionary[-1] == w("b6")  # B = b^{kn}


def test_transversal_is_prefix_closed_shortlex():
    g = grid_cover(3, 2)
    basis = basis_from_tree(g)
    words = {v: basis.transversal[v] for v in range(g.n_vertices)}
    for v, word in words.items():
        end, _ = g.trace(word)
        assert end == v
        for i in range(len(word) + 1):
            prefix = Word(F2, word.letters[:i])
            assert prefix in words.values()


def test_rewrite_single_generator():
    g = fold(F2, [w("a2")])
    basis = basis_from_tree(g)
    r = rewrite_in_basis(g, basis, w("a2"))
    assert len(r) == 1


def test_rewrite_tree_path_is_trivial():
    g = grid_cover(2, 2)
    basis = basis_from_tree(g, grid_chain_tree(g))
    # b^2 b^-2 traces down the tree and back: contributes nothing
    assert rewrite_in_basis(g, basis, w("b2") * w("b2").inv()) == Word(basis.basis_alphabet)


def test_rewrite_requires_membership():
    g = fold(F2, [w("a2")])
    basis = basis_from_tree(g)
    with pytest.raises(CoverError):
        rewrite_in_basis(g, basis, w("a"))


def test_rewrite_roundtrip_grid_lifts():
    k, n = 3, 2
    g = grid_cover(k, n)
    basis = basis_from_tree(g, grid_chain_tree(g))
    word = w("a3b2")
    for t in range(n):
        lift = (w("b") ** t) * word**k * (w("b") ** t).inv()
        r = rewrite_in_basis(g, basis, lift)
        assert basis.expand(r) == lift


@given(st.lists(st.sampled_from(["a2", "b", "abA", "aB2"]), min_size=1, max_size=3))
@settings(max_examples=60)
def test_rewrite_roundtrip_random(texts):
    gens = [w(t) for t in texts]
    g = fold(F2, gens)
    basis = basis_from_tree(g)
    rng = random.Random(7)
    for _ in range(5):
        word = Word(F2)
        for _ in range(3):
            s = gens[rng.randrange(len(gens))]
            word = word * (s if rng.random() < 0.5 else s.inv())
        r = rewrite_in_basis(g, basis, word)
        assert basis.expand(r) == word


# -- cover constructors --------------------------------------------------------


def test_kernel_p2_swaps():
    g = kernel_mod_p_cover(F2, 2)
    assert g.n_vertices == 2
    assert g.maps[0] == (1, 0) and g.maps[1] == (1, 0)


def test_grid_3_2():
    g = grid_cover(3, 2)
    assert g.n_vertices == 6
    assert g.maps[1] == tuple((j + 1) % 6 for j in range(6))
    assert g.maps[0] == tuple((j + 2) % 6 for j in range(6))
    assert g.is_complete()


def test_kernel_bswords_boundary_cycles():
    # on H = <x, c_1>, all generators to 1 mod p: boundary words close
    # only at the p-th power
    H = Alphabet(2)
    for p in (3, 5):
        g = kernel_mod_p_cover(H, p)
        for boundary in (parse_word("a", H), parse_word("b", H), parse_word("ab", H)):
            assert not membership(g, boundary)[0]
            exponents = [t for t in range(1, p + 1) if membership(g, boundary**t)[0]]
            assert exponents == [p] or boundary.exponent_sum(1) + boundary.exponent_sum(2) == 2
        v = parse_word("ab", H)  # x c_1, image 2 mod p, order p for odd p
        assert membership(g, v**p)[0]


def test_complete_cover_nielsen_schreier_rank():
    for rank, n in [(2, 2), (2, 3), (3, 2)]:
        g = kernel_mod_p_cover(Alphabet(rank), n)
        assert g.rank() == n * (rank - 1) + 1


def test_grid_is_normal_cover():
    g = grid_cover(3, 2)
    for text in ["a3b2", "ab", "a", "b3"]:
        word = w(text)
        closures = []
        for v in range(g.n_vertices):
            t = 1
            while True:
                end, _ = g.trace(word**t, start=v)
                if end == v:
                    closures.append(t)
                    break
                t += 1
        assert len(set(closures)) == 1


def test_make_cover_dispatch_and_errors():
    assert make_cover("grid", k=2, n=2).n_vertices == 4
    with pytest.raises(CoverError):
        make_cover("grid", k=0, n=2)
    with pytest.raises(CoverError):
        make_cover("kernel_mod_p", rank=2, p=1)
    with pytest.raises(CoverError):
        make_cover("kernel_mod_p", rank=2, p=4, targets=[2, 2])
    with pytest.raises(CoverError):
        make_cover("nope")


def test_explicit_cover_validation():
    with pytest.raises(CoverError):
        # not injective: both vertices map to 0 under a
        CoverGraph(F2, 2, [[0, 0], [1, 0]])
    with pytest.raises(CoverError):
        # disconnected
        CoverGraph(F2, 2, [[0, 1], [0, 1]])


# -- serialization ---------------------------------------------------------------


def test_json_roundtrip():
    g = grid_cover(3, 2)
    data = json.loads(json.dumps(cover_to_json(g)))
    assert cover_from_json(data) == g


def test_json_partial_cover():
    g = fold(F2, [w("a2"), w("b")])
    data = cover_to_json(g)
    assert data["maps"]["b"] == [0, None]
    assert cover_from_json(data) == g


def test_dot_export_counts():
    g = grid_cover(3, 2)
    dot = cover_to_dot(g)
    assert dot.count("->") == 12
    assert dot.count("label=") == 12
    assert dot.count("v0") >= 1


def test_dot_deterministic():
    g = grid_cover(2, 3)
    assert cover_to_dot(g) == cover_to_dot(grid_cover(2, 3))


def test_parse_cover_spec():
    assert parse_cover_spec("grid:3,2") == grid_cover(3, 2)
    assert parse_cover_spec("kernel:2,3") == kernel_mod_p_cover(F2, 3)
    with pytest.raises(CoverError):
        parse_cover_spec("grid:3")
