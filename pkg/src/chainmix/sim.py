"""Deterministic seeded sampling of trajectories from any model type.

Randomness comes from numpy's Philox counter-based bit generator keyed on
``(seed, stream)``: identical keys give bit-identical draws on every platform,
and distinct stream ids give independent streams by construction. Every draw is
an inverse-CDF lookup against one uniform, in a documented order (component
index or initial hidden state first, then one or two uniforms per time step),
so trajectories are a pure function of ``(model, length, seed, stream)``.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .model_core import (
    Alphabet,
    FiniteLaw,
    HMMModel,
    IIDMixtureModel,
    MarkovMixtureModel,
    PartitionedKernelMixture,
    require_valid,
)


@dataclass(frozen=True)
class RandomSource:
    """(seed, stream) key for a Philox counter-based generator."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2 ** 64, self.stream % 2 ** 64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, k: int) -> "RandomSource":
        """Child source for batch element / substream ``k`` (k < 2**20 per level)."""
        return RandomSource(self.seed, self.stream * 0x100000 + k + 1)


@dataclass(frozen=True)
class Trajectory:
    """Finite symbol sequence, optionally with the aligned hidden-state sequence."""

    symbols: tuple[str, ...]
    hidden: tuple[str, ...] | None = None
    source: RandomSource | None = None

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if self.hidden is not None:
            object.__setattr__(self, "hidden", tuple(self.hidden))
            if len(self.hidden) != len(self.symbols):
                raise ValueError("hidden trace must align with the symbol sequence")

    def __len__(self) -> int:
        return len(self.symbols)


def _pick(cum: list[float], u: float) -> int:
    i = bisect_right(cum, u)
    return min(i, len(cum) - 1)


def _cumrows(rows: np.ndarray) -> list[list[float]]:
    return np.cumsum(rows, axis=1).tolist()


def sample(model, length: int, src: RandomSource, trace_hidden: bool = False) -> Trajectory:
    """Draw one trajectory of ``length`` symbols from a validated model.

    Mixtures draw their component index once per trajectory, then run that
    component; HMMs draw the hidden chain and emit through the read-outs.
    ``trace_hidden`` records the hidden states and is only meaningful for HMMs.
    """
    require_valid(model)
    return _sample_prevalidated(model, length, src, trace_hidden)


def sample_many(model, length: int, count: int, src: RandomSource,
                trace_hidden: bool = False) -> list[Trajectory]:
    """``count`` independent trajectories on derived streams ``src.derive(i)``."""
    require_valid(model)
    return [_sample_prevalidated(model, length, src.derive(i), trace_hidden)
            for i in range(count)]


def _sample_prevalidated(model, length, src, trace_hidden) -> Trajectory:
    if length < 1:
        raise ValueError("length must be >= 1")
    if trace_hidden and not isinstance(model, HMMModel):
        raise ValueError("hidden tracing requires an HMM")
    gen = src.generator()
    if isinstance(model, IIDMixtureModel):
        symbols = _sample_iid(model, length, gen)
        hidden = None
    elif isinstance(model, MarkovMixtureModel):
        symbols = _sample_markov(model, length, gen)
        hidden = None
    elif isinstance(model, PartitionedKernelMixture):
        symbols = _sample_partitioned(model, length, gen)
        hidden = None
    elif isinstance(model, HMMModel):
        symbols, hidden = _sample_hmm(model, length, gen)
        if not trace_hidden:
            hidden = None
    else:
        raise TypeError(f"cannot sample from {type(model).__name__}")
    return Trajectory(symbols, hidden, src)


def _sample_iid(m: IIDMixtureModel, length, gen):
    h = _pick(np.cumsum(m.weights.weights).tolist(), gen.random())
    cum = np.cumsum(m.components[h].weights)
    idx = np.minimum(np.searchsorted(cum, gen.random(length), side="right"), cum.size - 1)
    em = m.alphabet.emittable
    return tuple(em[i] for i in idx)


def _sample_markov(m: MarkovMixtureModel, length, gen):
    h = _pick(np.cumsum(m.weights.weights).tolist(), gen.random())
    cum = _cumrows(m.components[h].rows)
    em = m.alphabet.emittable
    cur = m.alphabet.emit_index(m.y0)
    out = [m.y0]
    for u in gen.random(length - 1):
        cur = _pick(cum[cur], u)
        out.append(em[cur])
    return tuple(out)


def _sample_partitioned(m: PartitionedKernelMixture, length, gen):
    h = _pick(np.cumsum(m.weights.weights).tolist(), gen.random())
    cum = _cumrows(m.kernels[h])
    cells = m.cell_index_array.tolist()
    em = m.alphabet.emittable
    j = m.partition.cell_index_of(m.y0)
    out = [m.y0]
    for u in gen.random(length - 1):
        nxt = _pick(cum[j - 1], u)
        out.append(em[nxt])
        j = cells[nxt]
    return tuple(out)


def _sample_hmm(m: HMMModel, length, gen):
    cum_p = _cumrows(m.P.rows)
    cum_f = _cumrows(m.readout)
    em = m.alphabet.emittable
    us = gen.random(2 * length)
    x = _pick(np.cumsum(m.pi.weights).tolist(), us[0])
    xs = [x]
    ys = [_pick(cum_f[x], us[1])]
    for t in range(1, length):
        x = _pick(cum_p[x], us[2 * t])
        xs.append(x)
        ys.append(_pick(cum_f[x], us[2 * t + 1]))
    hs = m.hidden_states
    return tuple(em[y] for y in ys), tuple(hs[x] for x in xs)


def empirical_law(trajectories, length: int, alphabet: Alphabet | None = None) -> FiniteLaw:
    """Relative frequencies of length-``length`` prefixes as a FiniteLaw."""
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("empirical_law needs at least one trajectory")
    for t in trajectories:
        if len(t) < length:
            raise ValueError(f"trajectory of length {len(t)} is shorter than {length}")
    if alphabet is None:
        seen = sorted({s for t in trajectories for s in t.symbols})
        alphabet = Alphabet.of(seen)
    counts = Counter(t.symbols[:length] for t in trajectories)
    total = sum(counts.values())
    return FiniteLaw.from_probs(alphabet, length,
                                {prefix: c / total for prefix, c in counts.items()})
