import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tractable_dyn as td
from oracles import closure_decomposition, prune_starved, reachability


def rel(labels, edges):
    return td.FiniteRelation.from_labels(tuple(labels), edges)


@st.composite
def relations(draw, max_elements=6):
    n = draw(st.integers(min_value=1, max_value=max_elements))
    pair = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    edges = draw(st.frozensets(pair, max_size=n * n))
    return td.FiniteRelation(tuple(f"e{i}" for i in range(n)), frozenset(edges))


# --- compose / inverse ---


def test_compose_identity_is_neutral():
    identity = rel("ab", [("a", "a"), ("b", "b")])
    r = rel("ab", [("a", "b")])
    assert td.compose(identity, r).edges == r.edges
    assert td.compose(r, identity).edges == r.edges


def test_compose_chains_single_path():
    r = rel("abc", [("a", "b")])
    s = rel("abc", [("b", "c")])
    assert td.compose(r, s).edges == frozenset({(0, 2)})
    # first argument applies first, so the flipped order has no match
    assert td.compose(s, r).edges == frozenset()


@given(relations(), relations())
def test_compose_matches_set_comprehension(r, s):
    if len(r.elements) != len(s.elements):
        with pytest.raises(td.ElementMismatchError):
            td.compose(r, s)
        return
    expected = {(i, k) for i, j in r.edges for j2, k in s.edges if j == j2}
    assert td.compose(r, s).edges == frozenset(expected)


@given(relations(), relations(), relations())
def test_compose_associative(r, s, t):
    n = len(r.elements)
    if len(s.elements) != n or len(t.elements) != n:
        return
    lhs = td.compose(td.compose(r, s), t)
    rhs = td.compose(r, td.compose(s, t))
    assert lhs.edges == rhs.edges


@given(relations())
def test_inverse_is_an_involution(r):
    assert td.inverse(td.inverse(r)) == r
    assert td.inverse(r).edges == frozenset((j, i) for i, j in r.edges)


# --- orbit closure ---


def test_orbit_closure_adds_the_chain_shortcut():
    chain = rel("abc", [("a", "b"), ("b", "c")])
    assert td.orbit_closure(chain).edges == frozenset({(0, 1), (1, 2), (0, 2)})


def test_orbit_closure_cycle_becomes_full():
    cycle = rel("abc", [("a", "b"), ("b", "c"), ("c", "a")])
    closed = td.orbit_closure(cycle)
    assert closed.edges == frozenset((i, j) for i in range(3) for j in range(3))


def test_orbit_closure_fixed_point_on_absorbing_example(relation_b):
    assert td.orbit_closure(relation_b).edges == relation_b.edges


@given(relations())
@settings(max_examples=60)
def test_orbit_closure_is_reachability(r):
    closed = td.orbit_closure(r)
    assert closed.edges >= r.edges
    assert td.orbit_closure(closed).edges == closed.edges
    reach = reachability(len(r.elements), r.edges)
    expected = {(i, j) for i in range(len(r.elements))
                for j in range(len(r.elements)) if reach[i][j]}
    assert closed.edges == frozenset(expected)


# --- restriction to the infinite domain ---


def test_restrict_starves_a_lone_arrow():
    r = rel("ab", [("a", "b")])
    kept_relation, kept = td.restrict_to_infinite_domain(r)
    assert kept == ()
    assert kept_relation.elements == ()


def test_restrict_keeps_a_cycle_drops_the_pendant():
    r = rel("abx", [("a", "b"), ("b", "a"), ("a", "x")])
    kept_relation, kept = td.restrict_to_infinite_domain(r)
    assert kept == ("a", "b")
    assert kept_relation.edges == frozenset({(0, 1), (1, 0)})


def test_restrict_leaves_full_domain_alone(relation_b):
    kept_relation, kept = td.restrict_to_infinite_domain(relation_b)
    assert kept == relation_b.elements
    assert kept_relation == relation_b


@given(relations())
def test_restrict_matches_iterated_pruning(r):
    n = len(r.elements)
    kept_relation, kept = td.restrict_to_infinite_domain(r)
    alive, live_edges = prune_starved(n, r.edges)
    assert kept == tuple(r.elements[i] for i in alive)
    relabel = {old: new for new, old in enumerate(alive)}
    assert kept_relation.edges == frozenset(
        (relabel[i], relabel[j]) for i, j in live_edges)


# --- basic sets ---


def test_basic_sets_two_self_loops():
    r = rel(("I1", "I2"), [("I1", "I1"), ("I2", "I2")])
    d = td.basic_sets(r)
    assert d.classes == ((0,), (1,))
    assert d.terminal_flags == (True, True)
    assert d.transient == ()
    assert d.order == frozenset()


def test_basic_sets_absorbing_example(relation_b):
    d = td.basic_sets(relation_b)
    assert d.classes == ((0,), (1,), (2,))
    assert d.terminal_flags == (True, False, True)
    assert d.transient == (1,)
    assert d.order == frozenset({(1, 2)})
    assert d.terminal_classes() == (0, 2)
    assert d.class_labels(1) == ("I2",)


def test_basic_sets_rejects_starved_elements():
    with pytest.raises(td.DomainError):
        td.basic_sets(rel("ab", [("a", "b")]))


def test_basic_sets_against_closure_oracle_seeded():
    rng = random.Random(11)
    checked = 0
    while checked < 60:
        n = rng.randint(1, 8)
        edges = {(i, j) for i in range(n) for j in range(n)
                 if rng.random() < 0.3}
        r = td.FiniteRelation(tuple(f"e{i}" for i in range(n)),
                              frozenset(edges))
        kept_relation, kept = td.restrict_to_infinite_domain(r)
        if not kept:
            continue
        d = td.basic_sets(kept_relation)
        classes, flags, transient, order = closure_decomposition(
            len(kept), kept_relation.edges)
        assert d.classes == classes
        assert d.terminal_flags == flags
        assert d.transient == transient
        assert d.order == order
        checked += 1


# --- endset certificates ---


def test_endset_determined_by_absorbing_step(relation_b):
    d = td.basic_sets(relation_b)
    assert td.endset_certificate(relation_b, d, (1, 2)) == 2
    assert td.endset_certificate(relation_b, d, (1, 1)) is None


def test_endset_stable_under_extension(relation_b):
    d = td.basic_sets(relation_b)
    rng = random.Random(5)
    for _ in range(50):
        word = [1]
        for _ in range(rng.randint(1, 12)):
            word.append(rng.choice(sorted(relation_b.successors(word[-1]))))
        cert = td.endset_certificate(relation_b, d, word)
        if cert is not None:
            longer = word + [rng.choice(sorted(relation_b.successors(word[-1])))]
            assert td.endset_certificate(relation_b, d, longer) == cert


def test_endset_rejects_non_words(relation_b):
    d = td.basic_sets(relation_b)
    with pytest.raises(td.WordError):
        td.endset_certificate(relation_b, d, (0, 1))


# --- serialization ---


def test_relation_json_round_trip(relation_b):
    data = td.relation_to_json(relation_b)
    assert td.relation_from_json(data) == relation_b


@pytest.mark.parametrize("mutation", [
    {"unknown": 1},
    {"edges": [["I1", "I1"], ["I1", "I1"]]},
    {"edges": [["I1", "nope"]]},
])
def test_relation_json_rejects_bad_input(relation_b, mutation):
    data = td.relation_to_json(relation_b)
    data.update(mutation)
    with pytest.raises(td.ValidationError):
        td.relation_from_json(data)
