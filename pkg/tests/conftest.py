"""Shared random-model generators. All test randomness is seeded explicitly."""

import numpy as np

from chainmix.model_core import (
    Alphabet,
    Distribution,
    HMMModel,
    IIDMixtureModel,
    MarkovMixtureModel,
    Partition,
    PartitionedKernelMixture,
    StochasticMatrix,
)

SYMBOLS = ["a", "b", "c", "d", "e"]


def rng(seed):
    return np.random.default_rng(seed)


def random_distribution(r, k):
    return Distribution(r.dirichlet(np.ones(k)))


def random_stochastic_matrix(r, n, labels=()):
    return StochasticMatrix(r.dirichlet(np.ones(n), size=n), labels)


def random_iid_mixture(r, n_symbols=None, n_components=None):
    k = n_symbols or int(r.integers(2, 5))
    h = n_components or int(r.integers(1, 4))
    alphabet = Alphabet.of(SYMBOLS[:k])
    return IIDMixtureModel(alphabet, random_distribution(r, h),
                           tuple(random_distribution(r, k) for _ in range(h)))


def random_markov_mixture(r, n_symbols=None, n_components=None):
    """Components have strictly positive rows, hence are irreducible (recurrent)."""
    k = n_symbols or int(r.integers(2, 5))
    h = n_components or int(r.integers(1, 4))
    alphabet = Alphabet.of(SYMBOLS[:k])
    comps = tuple(StochasticMatrix(r.dirichlet(np.ones(k), size=k), alphabet.emittable)
                  for _ in range(h))
    y0 = SYMBOLS[int(r.integers(0, k))]
    return MarkovMixtureModel(alphabet, y0, random_distribution(r, h), comps)


def random_hmm(r, n_hidden=None, n_symbols=None):
    """Strictly positive transition rows: the underlying chain is recurrent."""
    x = n_hidden or int(r.integers(2, 5))
    k = n_symbols or int(r.integers(2, 4))
    hidden = tuple(f"s{i}" for i in range(x))
    return HMMModel(hidden, Alphabet.of(SYMBOLS[:k]),
                    random_distribution(r, x),
                    StochasticMatrix(r.dirichlet(np.ones(x), size=x), hidden),
                    r.dirichlet(np.ones(k), size=x))


def random_block_iid_hmm(r, n_blocks=2, max_block=3, n_symbols=3):
    """Identical rows within each block and an invariant initial law: the
    hypothesis under which class-lumping preserves the output law exactly."""
    sizes = [int(r.integers(1, max_block + 1)) for _ in range(n_blocks)]
    n = sum(sizes)
    P = np.zeros((n, n))
    pi = np.zeros(n)
    mu = r.dirichlet(np.ones(n_blocks))
    start = 0
    for h, size in enumerate(sizes):
        p = r.dirichlet(np.ones(size))
        P[start:start + size, start:start + size] = np.tile(p, (size, 1))
        pi[start:start + size] = mu[h] * p
        start += size
    hidden = tuple(f"s{i}" for i in range(n))
    return HMMModel(hidden, Alphabet.of(SYMBOLS[:n_symbols]),
                    Distribution(pi), StochasticMatrix(P, hidden),
                    r.dirichlet(np.ones(n_symbols), size=n))


def random_partitioned(r, n_symbols=None, n_cells=None, n_components=None):
    k = n_symbols or int(r.integers(3, 6))
    j = n_cells or int(r.integers(2, min(4, k + 1)))
    h = n_components or int(r.integers(1, 3))
    symbols = SYMBOLS[:k]
    perm = list(r.permutation(k))
    bounds = sorted(r.choice(np.arange(1, k), size=j - 1, replace=False)) if j > 1 else []
    cells, prev = [], 0
    for b in list(bounds) + [k]:
        cells.append(tuple(symbols[perm[i]] for i in range(prev, b)))
        prev = b
    alphabet = Alphabet.of(symbols)
    partition = Partition(tuple(cells))
    kernels = r.dirichlet(np.ones(k), size=(h, j))
    y0 = cells[0][int(r.integers(0, len(cells[0])))]
    return PartitionedKernelMixture(alphabet, partition, random_distribution(r, h),
                                    kernels, y0)
