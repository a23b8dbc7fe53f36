"""Independent brute-force oracles the tests check the library against.

Everything here evaluates the defining sums directly by enumerating strings,
hidden paths, or cell paths with itertools -- no forward recursions, no closed
forms -- so the oracles share no code path with the implementations they check.
"""

from itertools import product

import numpy as np


def iid_law_by_paths(m, N):
    """{string: sum_h mu_h prod_n p_h(y_n)} over all strings y_0..y_N."""
    K = m.alphabet.size
    em = m.alphabet.emittable
    out = {}
    for idx in product(range(K), repeat=N + 1):
        p = 0.0
        for mu, comp in zip(m.weights.weights, m.components):
            term = mu
            for i in idx:
                term *= comp.weights[i]
            p += term
        out[tuple(em[i] for i in idx)] = p
    return out


def markov_law_by_paths(m, N):
    """{string: sum_h mu_h P^h[y0,y1]...P^h[y_{N-1},yN]} over strings y_1..y_N."""
    K = m.alphabet.size
    em = m.alphabet.emittable
    y0 = m.alphabet.emit_index(m.y0)
    out = {}
    for idx in product(range(K), repeat=N):
        p = 0.0
        for mu, comp in zip(m.weights.weights, m.components):
            term = mu
            prev = y0
            for i in idx:
                term *= comp.rows[prev, i]
                prev = i
            p += term
        out[tuple(em[i] for i in idx)] = p
    return out


def hmm_law_by_hidden_paths(m, N):
    """{string: sum over hidden paths of pi * prod f * prod P} over strings y_0..y_N."""
    K, X = m.alphabet.size, m.n_hidden
    em = m.alphabet.emittable
    out = {}
    for idx in product(range(K), repeat=N + 1):
        p = 0.0
        for xs in product(range(X), repeat=N + 1):
            term = m.pi.weights[xs[0]]
            for t, i in enumerate(idx):
                term *= m.readout[xs[t], i]
            for t in range(N):
                term *= m.P.rows[xs[t], xs[t + 1]]
            p += term
        out[tuple(em[i] for i in idx)] = p
    return out


def partitioned_law_by_cell_paths(m, N):
    """Direct evaluation of the cell-path double sum over strings y_1..y_N.

    For each string and each cell path j_1..j_N, a term survives only when
    every y_n lies in E_{j_n}; the kernel factors are t_h(j_{n-1}, y_n) with
    j_0 = 1 (the start symbol's cell).
    """
    K = m.alphabet.size
    em = m.alphabet.emittable
    J = m.partition.n_cells
    cell_of = [m.partition.cell_index_of(s) for s in em]
    out = {}
    for idx in product(range(K), repeat=N):
        p = 0.0
        for h in range(m.n_components):
            for js in product(range(1, J + 1), repeat=N):
                if any(cell_of[i] != j for i, j in zip(idx, js)):
                    continue
                term = m.weights[h]
                prev_j = 1
                for i, j in zip(idx, js):
                    term *= m.kernels[h, prev_j - 1, i]
                    prev_j = j
                p += term
        out[tuple(em[i] for i in idx)] = p
    return out


def law_to_dict(law):
    return {s: p for s, p in law.entries()}


def max_gap(law, oracle_table):
    """Largest |law - oracle| over the union of strings."""
    mine = law_to_dict(law)
    gap = 0.0
    for s in mine.keys() | oracle_table.keys():
        gap = max(gap, abs(mine.get(s, 0.0) - oracle_table.get(s, 0.0)))
    return gap


def cesaro_by_partial_average(P, n):
    """(1/n) * sum_{k=1}^{n} P^k, the defining partial average."""
    acc = np.zeros_like(P)
    power = np.eye(P.shape[0])
    for _ in range(n):
        power = power @ P
        acc += power
    return acc / n


def cesaro_by_halving(P, n):
    """Iterate A <- (A + A P)/2 from A = P; same limit, geometric convergence.

    The plain partial average converges like 1/n and cannot reach tight
    tolerances at moderate n; this iteration computes P ((I+P)/2)^n whose
    distance to the limit decays geometrically for every recurrent P.
    """
    A = P.copy()
    for _ in range(n):
        A = 0.5 * (A + A @ P)
    return A
