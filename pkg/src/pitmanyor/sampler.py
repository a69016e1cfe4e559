"""Random generation: Pitman-Yor partitions, stick-breaking weights,
i.i.d. and Poissonized species samples.

All randomness flows through RngStream, a (seed, stream_id) pair backing a
counter-based Philox generator, so replications can be parallelized with
stream_id = replication index and remain bit-reproducible under any schedule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import partition
from .likelihood import log_eppf

_POISSON_EXPLICIT_CUT = 1e-4


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def generator(self):
        return np.random.Generator(
            np.random.Philox(key=[self.seed & 0xFFFFFFFFFFFFFFFF,
                                  self.stream_id & 0xFFFFFFFFFFFFFFFF]))

    def substream(self, stream_id):
        if self.stream_id != 0:
            raise ValueError("substreams only split from a root stream")
        return RngStream(seed=self.seed, stream_id=stream_id)


@dataclass(frozen=True)
class OccupancyCounts:
    counts: dict  # species index -> positive occupancy
    regime: str  # "multinomial" or "poissonized"
    n: int  # nominal sample size (Poissonized: the intensity scale)

    def values(self):
        return np.fromiter(self.counts.values(), dtype=np.int64,
                           count=len(self.counts))

    def realized_size(self):
        return int(self.values().sum()) if self.counts else 0

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["species", "count"])
            for idx in sorted(self.counts):
                writer.writerow([idx, self.counts[idx]])


def sample_py_partition(sigma, M, n, rng):
    """Partition of n observations grown by the prediction rule:
    join block i with probability (N_i - sigma)/(M + k), open a new block
    with probability (M + K sigma)/(M + k)."""
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    if M < 0.0 or M + sigma <= 0.0:
        raise ValueError("need M >= 0 and M + sigma > 0")
    if n < 1:
        raise ValueError("n must be positive")
    gen = rng.generator()
    uniforms = gen.random(n)
    sizes = np.empty(n, dtype=np.int64)
    sizes[0] = 1
    K = 1
    for k in range(1, n):
        # threshold in [0, M + k): below the occupied mass joins a block
        u = uniforms[k] * (M + k)
        occupied = np.cumsum(sizes[:K]) - sigma * np.arange(1, K + 1)
        j = int(np.searchsorted(occupied, u, side="right"))
        if j < K:
            sizes[j] += 1
        else:
            sizes[K] = 1
            K += 1
    return partition.from_sizes(sizes[:K])


def ppf_weights(stats, sigma, M):
    """Prediction probabilities: ((N_i - sigma)/(M+n) for each block,
    (M + K sigma)/(M+n) for a new block).  All entries computed analytically;
    the exact sum-to-one identity is asserted."""
    if not 0.0 <= sigma < 1.0:
        raise ValueError("sigma must lie in [0, 1)")
    if M < 0.0:
        raise ValueError("M must be nonnegative")
    denom = M + stats.n
    w = np.empty(stats.K + 1)
    w[:stats.K] = (stats.N - sigma) / denom
    w[stats.K] = (M + stats.K * sigma) / denom
    if abs(float(w.sum()) - 1.0) > 1e-14:
        raise AssertionError("prediction weights do not sum to 1")
    return w


def stick_breaking_weights(sigma, M, k_trunc, rng):
    """First k_trunc stick-breaking weights and the residual mass.

    W_i = V_i prod_{j<i} (1 - V_j) with independent V_i ~ Beta(1-sigma,
    M + i sigma); Beta draws are built from two gamma variates for accuracy
    at extreme shapes.
    """
    if not 0.0 <= sigma < 1.0:
        raise ValueError("sigma must lie in [0, 1)")
    if M <= -sigma:
        raise ValueError("need M > -sigma")
    if k_trunc < 1:
        raise ValueError("k_trunc must be positive")
    gen = rng.generator()
    i = np.arange(1, k_trunc + 1, dtype=float)
    x = gen.standard_gamma(np.full(k_trunc, 1.0 - sigma))
    y = gen.standard_gamma(M + i * sigma)
    v = x / (x + y)
    stick = np.cumprod(1.0 - v)
    w = v * np.concatenate(([1.0], stick[:-1]))
    return w, float(stick[-1])


def sample_iid(pop, n, rng):
    """Multinomial occupancy counts of n i.i.d. draws from the population."""
    if n < 1:
        raise ValueError("n must be positive")
    gen = rng.generator()
    idx = pop.inverse_cdf(gen.random(n))
    species, counts = np.unique(idx, return_counts=True)
    return OccupancyCounts(
        counts=dict(zip(species.tolist(), counts.tolist())),
        regime="multinomial", n=int(n))


def sample_poissonized(pop, n, rng):
    """Independent Poisson(n p_j) occupancy counts.

    Atoms with intensity n p_j >= 1e-4 are drawn explicitly.  The remaining
    tail is drawn in aggregate: the number of tail species seen once (resp.
    twice) is Poisson with mean sum_j (1 - e^{-l_j} - l_j e^{-l_j}-corrected
    series), evaluated from analytic tail power sums; triple-or-more tail
    occupancies have total expectation below 1e-6 at the scales this library
    targets and are dropped.  Tail species receive fresh indices.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    counts = {}
    if n == 0:
        return OccupancyCounts(counts=counts, regime="poissonized", n=0)
    gen = rng.generator()
    # explicit head: atoms with n p_j >= cut
    limit = pop.n_atoms()
    head = 1 << 10
    while True:
        if limit is not None:
            head = min(head, limit)
        probs = pop.atom_probs(head)
        if (limit is not None and head == limit) \
                or n * probs[-1] < _POISSON_EXPLICIT_CUT:
            break
        head *= 2
    lam = n * probs
    explicit = lam >= _POISSON_EXPLICIT_CUT
    n_explicit = int(np.count_nonzero(explicit))
    drawn = gen.poisson(lam[:n_explicit])
    occupied = np.nonzero(drawn)[0]
    counts.update(zip(occupied.tolist(), drawn[occupied].tolist()))
    # aggregated tail beyond the explicit atoms
    tail_start = n_explicit
    s1 = float(np.sum(lam[tail_start:])) + n * pop.tail_power_sum(head, 1)
    s2 = float(np.sum(lam[tail_start:] ** 2)) \
        + n ** 2 * pop.tail_power_sum(head, 2)
    s3 = float(np.sum(lam[tail_start:] ** 3)) \
        + n ** 3 * pop.tail_power_sum(head, 3)
    mean_pairs = s2 / 2.0 - s3 / 3.0      # sum_j P(count_j = 2), small-lambda
    mean_singles = s1 - s2 + s3 / 2.0     # sum_j P(count_j = 1)
    singles = int(gen.poisson(max(mean_singles, 0.0)))
    pairs = int(gen.poisson(max(mean_pairs, 0.0)))
    fresh = head
    for _ in range(singles):
        counts[fresh] = 1
        fresh += 1
    for _ in range(pairs):
        counts[fresh] = 2
        fresh += 1
    return OccupancyCounts(counts=counts, regime="poissonized", n=int(n))


def write_sample_csv(path, labels):
    """One row per observation, single `species` column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["species"])
        for lab in labels:
            writer.writerow([lab])


def sample_iid_labels(pop, n, rng):
    """The raw label sequence of n i.i.d. draws (for CSV export)."""
    gen = rng.generator()
    return pop.inverse_cdf(gen.random(n))


def exact_partition_law(sigma, M, n):
    """Exact law of the sequential construction for small n.

    Enumerates every assignment path and aggregates path probabilities by the
    resulting set partition (frozenset of blocks).  Intended for n <= 8.
    """
    if n < 1 or n > 10:
        raise ValueError("exact enumeration supports 1 <= n <= 10")
    law = {}

    def recurse(assignment, prob):
        k = len(assignment)
        if k == n:
            blocks = {}
            for obs, b in enumerate(assignment):
                blocks.setdefault(b, []).append(obs)
            key = frozenset(frozenset(b) for b in blocks.values())
            law[key] = law.get(key, 0.0) + prob
            return
        if k == 0:
            recurse([0], prob)
            return
        K = max(assignment) + 1
        sizes = [assignment.count(b) for b in range(K)]
        for b in range(K):
            recurse(assignment + [b], prob * (sizes[b] - sigma) / (M + k))
        recurse(assignment + [K], prob * (M + K * sigma) / (M + k))

    recurse([], 1.0)
    return law
