import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fsbench.score import (
    RolePartition,
    _exact_alphas,
    compute_alphas,
    equivalence_partition,
    quotient_F,
    score,
    score_exact,
)
from fsbench.synth import ConfigurationError, build_schema

# universe used by the hand-worked examples: a=0, b=1, c=2 (irrelevant), a'=3 copying a
A, B, C, A2 = 0, 1, 2, 3
SMALL = RolePartition(frozenset({A, B}), frozenset({C}), {A2: A})


def test_alphas_four_four_four():
    w = compute_alphas(4, 4, 4, 1.0)
    assert (w.alpha_r, w.alpha_i, w.alpha_rr) == pytest.approx((6 / 11, 3 / 11, 2 / 11), abs=1e-12)
    assert _exact_alphas(4, 4, 4, 1) == (Fraction(6, 11), Fraction(3, 11), Fraction(2, 11))


def test_alphas_two_one_one():
    assert _exact_alphas(2, 1, 1, 1) == (Fraction(12, 17), Fraction(3, 17), Fraction(2, 17))
    # per-feature weight of the relevant role
    assert _exact_alphas(2, 1, 1, 1)[0] / 2 == Fraction(6, 17)


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.01])
def test_alphas_relevance_only(eps):
    assert _exact_alphas(4, 0, 0, eps) == (1, 0, 0)
    w = compute_alphas(4, 0, 0, eps)
    assert (w.alpha_r, w.alpha_i, w.alpha_rr) == (1.0, 0.0, 0.0)


def test_alpha_errors():
    with pytest.raises(ConfigurationError):
        compute_alphas(0, 1, 1)
    with pytest.raises(ConfigurationError):
        compute_alphas(2, 1, 1, epsilon=0)
    with pytest.raises(ConfigurationError):
        compute_alphas(2, 1, 1, epsilon=1.5)


@given(st.integers(1, 50), st.integers(0, 50), st.integers(0, 50),
       st.floats(min_value=1e-6, max_value=1.0, allow_nan=False))
@settings(max_examples=1000, deadline=None)
def test_alpha_properties(n_r, n_i, n_rr, eps):
    w = compute_alphas(n_r, n_i, n_rr, eps)
    assert w.alpha_r + w.alpha_i + w.alpha_rr == pytest.approx(1.0, abs=1e-12)
    if n_i == 0:
        assert w.alpha_i == 0
    if n_rr == 0:
        assert w.alpha_rr == 0
    if n_i and n_rr:
        a_r, a_i, a_rr = _exact_alphas(n_r, n_i, n_rr, eps)
        assert a_r / n_r > a_i / n_i > a_rr / n_rr


def test_alpha_to_relevance_as_epsilon_vanishes():
    values = [compute_alphas(4, 4, 4, eps).alpha_r for eps in (1.0, 0.1, 0.01, 1e-4, 1e-6)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(1.0, abs=1e-5)


def test_equivalence_partition_examples():
    rho_a, rho_x = equivalence_partition(SMALL, {A, A2, B})
    assert rho_a == {frozenset({A, A2}), frozenset({B})} == rho_x
    assert equivalence_partition(SMALL, set()) == (frozenset(), frozenset())
    rho_a, rho_x = equivalence_partition(SMALL, {A2})
    assert rho_a == {frozenset({A2})}
    assert rho_x == {frozenset({A, A2})}


def test_quotient_f_examples():
    assert quotient_F({frozenset({A, A2}), frozenset({B})}) == 1
    assert quotient_F({frozenset({1}), frozenset({2})}) == 0
    assert quotient_F({frozenset({1, 2, 3, 4})}) == 3


def test_score_examples():
    assert score_exact(SMALL, {A, B}) == 1
    assert score_exact(SMALL, {A, A2, B, C}) == Fraction(12, 17)
    assert score_exact(SMALL, {A, C}) == Fraction(8, 17)
    assert score(SMALL, {A, C}) == pytest.approx(0.4706, abs=1e-4)


def test_score_rejects_unknown_features():
    with pytest.raises(ValueError):
        score(SMALL, {7})


def test_partition_validation():
    with pytest.raises(ValueError):
        RolePartition(frozenset({0}), frozenset({0}), {})
    with pytest.raises(ValueError):
        RolePartition(frozenset({0}), frozenset({1}), {2: 1})


def random_partition(draw_counts, rng):
    n_r, n_i, n_rr = draw_counts
    indices = list(range(n_r + n_i + n_rr))
    rng.shuffle(indices)
    relevant = indices[:n_r]
    irrelevant = indices[n_r:n_r + n_i]
    sources = {f: rng.choice(relevant) for f in indices[n_r + n_i:]}
    return RolePartition(frozenset(relevant), frozenset(irrelevant), sources)


def all_subsets(n):
    for size in range(n + 1):
        for c in itertools.combinations(range(n), size):
            yield frozenset(c)


def check_propositions(partition, epsilon=1):
    correct = set(partition.correct_solutions())
    for subset in all_subsets(partition.n_total):
        s = score_exact(partition, subset, epsilon)
        assert 0 <= s <= 1
        assert (s == 0) == (subset == partition.irrelevant), subset
        assert (s == 1) == (subset in correct), subset


def test_propositions_on_small_universe():
    check_propositions(SMALL)
    check_propositions(RolePartition(frozenset({0, 1}), frozenset(), {}))
    check_propositions(RolePartition(frozenset({0}), frozenset(), {1: 0, 2: 0}))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_score_symmetry_and_monotone_penalty(seed):
    import random

    rng = random.Random(seed)
    counts = (rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3))
    part = random_partition(counts, rng)
    subset = frozenset(f for f in range(part.n_total) if rng.random() < 0.5)
    base = score_exact(part, subset)
    classes = part.classes()
    for f in subset - part.irrelevant:
        cls = classes[part.representative(f)]
        for g in cls - subset:
            assert score_exact(part, (subset - {f}) | {g}) == base
    for g in part.irrelevant - subset:
        assert score_exact(part, subset | {g}) < base


def test_from_schema_matches_generator_roles():
    schema = build_schema("parity", 4, 3, 2, seed=11)
    part = RolePartition.from_schema(schema)
    assert part.relevant == frozenset(schema.relevant_columns)
    assert len(part.irrelevant) == 3 and len(part.redundant) == 2
    classes = part.classes()
    assert sum(len(c) for c in classes.values()) == 6
    assert score(part, schema.relevant_columns) == 1.0
    assert score(part, part.irrelevant) == 0.0
