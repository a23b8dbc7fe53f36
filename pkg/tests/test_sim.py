import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_hmm, random_markov_mixture, rng
from chainmix.errors import InvalidModelError
from chainmix.exact_law import total_variation
from chainmix.model_core import (
    Alphabet,
    Distribution,
    HMMModel,
    IIDMixtureModel,
    StochasticMatrix,
    hmm_law,
)
from chainmix.sim import RandomSource, Trajectory, empirical_law, sample, sample_many


def one_state_emitter():
    return HMMModel(("s",), Alphabet.of(["a"]), Distribution(np.array([1.0])),
                    StochasticMatrix(np.eye(1), ("s",)), np.array([[1.0]]))


def two_cycle_hmm():
    hidden = ("s0", "s1")
    return HMMModel(hidden, Alphabet.of(["a", "b"]), Distribution(np.array([1.0, 0.0])),
                    StochasticMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), hidden),
                    np.eye(2))


def fair_coin():
    return IIDMixtureModel(Alphabet.of(["a", "b"]), Distribution(np.array([1.0])),
                           (Distribution(np.array([0.5, 0.5])),))


def test_deterministic_single_state():
    t = sample(one_state_emitter(), 5, RandomSource(0))
    assert t.symbols == ("a",) * 5


def test_same_seed_identical_trajectories():
    m = random_markov_mixture(rng(0))
    a = sample(m, 50, RandomSource(123, 4))
    b = sample(m, 50, RandomSource(123, 4))
    assert a.symbols == b.symbols
    c = sample(m, 50, RandomSource(123, 5))
    assert a.symbols != c.symbols


def test_two_cycle_alternates():
    t = sample(two_cycle_hmm(), 8, RandomSource(9), trace_hidden=True)
    assert t.symbols == ("a", "b", "a", "b", "a", "b", "a", "b")
    assert t.hidden == ("s0", "s1") * 4


@given(st.integers(0, 2 ** 63 - 1), st.integers(0, 2 ** 20))
@settings(max_examples=25, deadline=None)
def test_reproducibility_any_key(seed, stream):
    m = two_cycle_hmm()
    a = sample(m, 10, RandomSource(seed, stream))
    b = sample(m, 10, RandomSource(seed, stream))
    assert a.symbols == b.symbols


def test_invalid_model_rejected():
    bad = IIDMixtureModel(Alphabet.of(["a", "b"]), Distribution(np.array([1.0])),
                          (Distribution(np.array([0.5, 0.6])),))
    with pytest.raises(InvalidModelError):
        sample(bad, 3, RandomSource(0))


def test_trace_hidden_requires_hmm():
    with pytest.raises(ValueError, match="tracing requires an HMM"):
        sample(fair_coin(), 3, RandomSource(0), trace_hidden=True)


def test_component_fixed_per_trajectory():
    # stay/swap mixture: within one trajectory the realized matrix never changes,
    # so each trajectory is either constant-'a' or strictly alternating
    from chainmix.fixtures import two_component_mixture

    for t in sample_many(two_component_mixture(), 40, 50, RandomSource(3)):
        flips = sum(x != y for x, y in zip(t.symbols, t.symbols[1:]))
        assert flips in (0, len(t) - 1)


def test_empirical_law_single_trajectory():
    law = empirical_law([Trajectory(("a", "a"))], 2)
    assert law.prob(("a", "a")) == 1.0


def test_empirical_law_rejects_empty_and_short():
    with pytest.raises(ValueError):
        empirical_law([], 1)
    with pytest.raises(ValueError):
        empirical_law([Trajectory(("a",))], 2)


def test_coin_frequencies_within_tolerance():
    # binomial 3 sigma at 10^5 samples is ~0.0047; the stated budget is 0.01
    trajs = sample_many(fair_coin(), 2, 100_000, RandomSource(77))
    law = empirical_law(trajs, 1, fair_coin().alphabet)
    assert abs(law.prob(("a",)) - 0.5) < 0.01
    assert abs(law.prob(("b",)) - 0.5) < 0.01


def test_empirical_matches_exact_hmm_law():
    m = random_hmm(rng(11), n_hidden=3, n_symbols=2)
    samples = 100_000
    trajs = sample_many(m, 4, samples, RandomSource(5))
    emp = empirical_law(trajs, 4, m.alphabet)
    exact = hmm_law(m, 3)
    bound = 3.0 * np.sqrt(exact.table_size / samples)
    assert total_variation(emp, exact) <= bound


def test_empirical_tv_small_table_budget():
    # tables of <= 64 entries at 10^5 samples stay within TV 0.02
    m = random_markov_mixture(rng(12), n_symbols=2, n_components=2)
    trajs = sample_many(m, 7, 100_000, RandomSource(6))
    emp = empirical_law(trajs, 6, m.alphabet)
    from chainmix.model_core import markov_mixture_law
    from chainmix.exact_law import condition_on_first

    exact = markov_mixture_law(m, 5)
    assert exact.table_size <= 64
    assert total_variation(condition_on_first(emp, m.y0), exact) <= 0.02


def test_empirical_matches_partitioned_law():
    from chainmix.fixtures import two_cell_partitioned_mixture
    from chainmix.model_core import partitioned_mixture_law
    from chainmix.exact_law import condition_on_first

    m = two_cell_partitioned_mixture()
    samples = 40_000
    trajs = sample_many(m, 4, samples, RandomSource(13))
    emp = condition_on_first(empirical_law(trajs, 4, m.alphabet), m.y0)
    exact = partitioned_mixture_law(m, 3)
    assert total_variation(emp, exact) <= 3.0 * np.sqrt(exact.table_size / samples)


def test_stream_derivation_gives_distinct_draws():
    src = RandomSource(42)
    kids = {src.derive(i).stream for i in range(100)}
    assert len(kids) == 100
    a = src.derive(0).generator().random(4)
    b = src.derive(1).generator().random(4)
    assert not np.allclose(a, b)
