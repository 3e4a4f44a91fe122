import math

import pytest
from hypothesis import given, strategies as st

from anosov_tangent.errors import InvalidCut, TooLarge
from anosov_tangent.trees import (
    Cut,
    DerivativeTree,
    HalfLabeledKey,
    LabeledTree,
    break_tree,
    catalan,
    check_breaking_partition,
    count_derivative_trees,
    count_product_trees,
    cuts_of,
    enumerate_derivative_trees,
    enumerate_labelings,
    enumerate_product_trees,
    enumerate_reduced_labelings,
    enumerate_shapes,
    enumerate_sign_derivative,
    enumerate_signed_trees,
    main_stem,
    node_paths,
    perm_canonical,
    perm_class_size,
    perm_classes,
    size,
    subshape,
    unbreak,
)


@pytest.mark.parametrize("k", range(1, 8))
def test_shape_counts_are_catalan(k):
    shapes = enumerate_shapes(k)
    assert len(shapes) == catalan(k - 1)
    assert len(set(shapes)) == len(shapes)
    assert all(size(s) == k for s in shapes)


def test_four_node_shapes():
    assert len(enumerate_shapes(4)) == 5
    assert set(enumerate_shapes(4)) == {
        ((((),),),), (((), ()),), ((), ((),)), (((),), ()), ((), (), ())}


def test_too_many_nodes():
    with pytest.raises(TooLarge):
        enumerate_shapes(11)


def test_node_paths_preorder():
    assert node_paths(((), ((),))) == ((), (0,), (1,), (1, 0))


def test_label_ranges_validated():
    LabeledTree(((),), (1, -1), (0, -1))
    with pytest.raises(ValueError):
        LabeledTree(((),), (1, -1), (0, 0))
    with pytest.raises(ValueError):
        LabeledTree(((),), (1, 1), (-1, 0))
    with pytest.raises(ValueError):
        LabeledTree(((),), (1,), (0,))


def test_q_is_ancestor_label_sum():
    t = LabeledTree(((), ((),)), (1, -1, 1, -1), (3, -2, 1, -4))
    assert [t.q(v) for v in t.paths] == [3, 1, 4, 0]


@pytest.mark.parametrize("k", range(1, 5))
def test_sign_derivative_key_count(k):
    keys = enumerate_sign_derivative(k, 1)
    assert len(keys) == catalan(k - 1) * 2 ** (k - 1) * k
    assert all(key.top_sign == 1 for key in keys)


def test_signed_tree_count():
    assert len(list(enumerate_signed_trees(3, -1))) == 2 * 4


def _minus_stem_nodes(t):
    return sum(1 for v in main_stem(t)[1:] if t.tree.sign(v) < 0)


def _sample_trees(k, pmax=2):
    return list(enumerate_derivative_trees(k, 1, pmax))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_cut_count_is_power_of_two(k):
    for t in _sample_trees(k, 1):
        assert len(cuts_of(t)) == 2 ** _minus_stem_nodes(t)


trees3 = _sample_trees(3, 2)


@given(st.sampled_from(trees3), st.data())
def test_break_then_unbreak_is_identity(t, data):
    c = data.draw(st.sampled_from(cuts_of(t)))
    p = break_tree(t, c)
    assert p.s == len(c)
    assert p.n == t.size
    assert p.in_p_plus()
    # the cut position among siblings is not recorded, so equality holds up to Perm
    assert perm_canonical(unbreak(p)) == perm_canonical(t)
    if all(v[-1] == len(subshape(t.tree.shape, v[:-1])) - 1 for v in c.nodes):
        assert unbreak(p) == t


@given(st.sampled_from(trees3))
def test_distinct_cuts_give_distinct_products(t):
    products = [break_tree(t, c) for c in cuts_of(t)]
    assert len(set(products)) == len(products)


def test_invalid_cut():
    t = DerivativeTree(LabeledTree(((),), (1, 1), (0, 2)), (0,))
    with pytest.raises(InvalidCut):
        break_tree(t, Cut(((0,),), (1,)))


def test_break_two_node_chain():
    t = DerivativeTree(LabeledTree(((),), (1, -1), (2, -1)), (0,))
    p = break_tree(t, Cut(((0,),), (1,)))
    assert [f.tree.signs for f in p.factors] == [(1,), (-1,)]
    assert [f.deriv for f in p.factors] == [(), ()]
    assert [f.tree.labels for f in p.factors] == [(2,), (-1,)]


def _brute_perm_size(shape):
    import itertools

    def all_orders(sh):
        out = []
        for perm in itertools.permutations(sh):
            for combo in itertools.product(*[all_orders(c) for c in perm]):
                out.append(combo)
        return out

    return len(all_orders(shape))


@pytest.mark.parametrize("k", range(1, 6))
def test_perm_size_is_product_of_factorials(k):
    for shape in enumerate_shapes(k):
        expected = math.prod(math.factorial(len(subshape(shape, v))) for v in node_paths(shape))
        assert perm_class_size(LabeledTree(shape, (1,) * k)) == expected == _brute_perm_size(shape)


def test_perm_classes_cover_keys():
    classes = perm_classes(3)
    assert sum(len(v) for v in classes.values()) == len(enumerate_sign_derivative(3, 1))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_product_tree_count_matches_enumeration(n):
    assert count_product_trees(n, 2) == len(list(enumerate_product_trees(n, 2)))


def test_derivative_tree_count():
    assert count_derivative_trees(2, 1, 3) == len(list(enumerate_derivative_trees(2, 1, 3)))


def test_product_tree_counts_frozen():
    # derived by direct enumeration at label bound 3
    assert [count_product_trees(n, 3) for n in range(1, 5)] == [4, 68, 1548, 38468]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_breaking_classes_partition(n):
    rep = check_breaking_partition(n, 3)
    assert rep["overlaps"] == 0 and rep["missing"] == 0 and rep["extra"] == 0
    assert rep["covered"] == rep["product_trees"]


def test_symmetric_labelings_count():
    t = LabeledTree(((), ()), (1, -1, 1))
    assert len(list(enumerate_labelings(t, 3))) == 4 * 3 * 4


keys3 = [k for n in (1, 2, 3) for k in enumerate_sign_derivative(n, 1)]


@given(st.sampled_from(keys3), st.sampled_from(["all-minus", "stem-minus-only"]), st.integers(1, 4))
def test_reduced_labelings_keep_stem_shift_nonnegative(key, mode, pmax):
    for d in enumerate_reduced_labelings(key, pmax, mode):
        for v in main_stem(d):
            assert d.tree.q(v) >= 0
        if mode == "all-minus":
            assert all(d.tree.q(v) >= 0 for v in d.tree.paths)


def test_restrict_modes_differ_off_stem():
    # + top with a - child that is off the stem: only all-minus restricts it
    key = HalfLabeledKey(((),), (1, -1), ())
    stem_only = list(enumerate_reduced_labelings(key, 3, "stem-minus-only"))
    all_minus = list(enumerate_reduced_labelings(key, 3, "all-minus"))
    assert len(stem_only) == 4 * 3
    assert len(all_minus) == sum(p for p in range(4))


def test_reduced_minus_top_is_empty():
    key = HalfLabeledKey((), (-1,), ())
    assert list(enumerate_reduced_labelings(key, 3, "all-minus")) == []


def test_unknown_restrict_mode():
    with pytest.raises(ValueError):
        list(enumerate_reduced_labelings(HalfLabeledKey((), (1,), ()), 2, "bogus"))
