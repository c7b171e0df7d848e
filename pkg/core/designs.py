"""
Exact block designs and brute-force computation of their parameters.

A design is stored as a ``(b, k)`` integer array whose rows are strictly
increasing point labels in ``0..v-1``; rows are kept in lexicographic order,
so repeated blocks are adjacent. Every lambda value is obtained by counting
blocks through subsets, never from a closed formula.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import chain, combinations

import numpy as np
from tqdm import tqdm

from core.errors import ConsistencyError, ParameterError, VerificationError
from core.settings import load_settings

logger = logging.getLogger(__name__)

BLOCK_DTYPE = np.int32

# A block is a strictly increasing tuple of point labels.
Block = tuple


def canonical_order(blocks):
    """Stable permutation that sorts the rows of ``blocks`` lexicographically."""
    if len(blocks) == 0:
        return np.arange(0, dtype=np.intp)
    return np.lexsort(blocks.T[::-1])


def _rows_non_decreasing(blocks):
    if len(blocks) < 2:
        return True
    diff = blocks[1:].astype(np.int64) - blocks[:-1]
    nonzero = diff != 0
    first = nonzero.argmax(axis=1)
    lead = diff[np.arange(len(diff)), first]
    return bool(np.all((lead > 0) | ~nonzero.any(axis=1)))


@dataclass(frozen=True, eq=False)
class Design:
    """A multiset of k-subsets of ``0..v-1`` in canonical (sorted) order."""

    v: int
    k: int
    blocks: np.ndarray

    def __post_init__(self):
        if self.k < 2 or self.v <= self.k:
            raise ParameterError(f"invalid design parameters v={self.v}, k={self.k}: need v > k >= 2")
        arr = np.asarray(self.blocks, dtype=BLOCK_DTYPE)
        if arr.size == 0:
            arr = arr.reshape(0, self.k)
        if arr.ndim != 2 or arr.shape[1] != self.k:
            raise ParameterError(f"blocks must have shape (b, {self.k}), got {arr.shape}")
        if len(arr):
            if arr.min() < 0 or arr.max() >= self.v:
                raise ParameterError(f"point labels must lie in 0..{self.v - 1}")
            if not np.all(arr[:, 1:] > arr[:, :-1]):
                bad = int(np.flatnonzero(~np.all(arr[:, 1:] > arr[:, :-1], axis=1))[0])
                raise ParameterError(f"block {tuple(int(x) for x in arr[bad])} is not strictly increasing")
        if not _rows_non_decreasing(arr):
            raise ParameterError("blocks are not in canonical order; use Design.from_blocks")
        arr.setflags(write=False)
        object.__setattr__(self, "blocks", arr)

    @classmethod
    def from_blocks(cls, v, k, blocks):
        """Build a design from blocks in any order (each row already sorted)."""
        arr = np.asarray(blocks, dtype=BLOCK_DTYPE)
        if arr.size == 0:
            arr = arr.reshape(0, k)
        return cls(v, k, arr[canonical_order(arr)])

    @property
    def b(self):
        return len(self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        for row in self.blocks:
            yield tuple(int(x) for x in row)

    def block(self, index):
        return tuple(int(x) for x in self.blocks[index])

    def __eq__(self, other):
        if not isinstance(other, Design):
            return NotImplemented
        return (self.v, self.k) == (other.v, other.k) and np.array_equal(self.blocks, other.blocks)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"Design(v={self.v}, k={self.k}, b={self.b})"


def complete_design(v, k):
    """All C(v,k) k-subsets of 0..v-1, each once, in lexicographic order."""
    if k < 2 or v <= k:
        raise ParameterError(f"complete design needs v > k >= 2, got v={v}, k={k}")
    count = math.comb(v, k)
    flat = np.fromiter(chain.from_iterable(combinations(range(v), k)), dtype=BLOCK_DTYPE, count=count * k)
    return Design(v, k, flat.reshape(count, k))


def union_copies(d, a):
    """The multiset union of ``a`` copies of ``d``."""
    if a < 1:
        raise ParameterError(f"number of copies must be >= 1, got a={a}")
    if a == 1:
        return d
    return Design(d.v, d.k, np.repeat(d.blocks, a, axis=0))


def translate(d, offset, new_v):
    """Shift every label by ``offset`` into a design on ``new_v`` points."""
    if offset < 0 or offset + d.v > new_v:
        raise ParameterError(f"cannot translate a design on {d.v} points by {offset} into {new_v} points")
    if offset == 0 and new_v == d.v:
        return d
    return Design(new_v, d.k, d.blocks.astype(BLOCK_DTYPE) + offset)


def incidence_matrix(d):
    """Boolean ``(b, v)`` matrix: entry (i, x) is set iff point x lies in block i."""
    inc = np.zeros((d.b, d.v), dtype=bool)
    if d.b:
        inc[np.repeat(np.arange(d.b), d.k), d.blocks.ravel()] = True
    return inc


# ============= SUBSET COUNTING =============

def _binomial_table(n, s):
    if math.comb(n, min(s, n // 2)) >= 2 ** 62:
        raise ParameterError(f"C({n},{s}) does not fit the 64-bit counting index")
    table = np.zeros((n + 1, s + 1), dtype=np.int64)
    for x in range(n + 1):
        for r in range(s + 1):
            table[x, r] = math.comb(x, r)
    return table


def unrank_subset(rank, s):
    """Inverse of the colexicographic rank sum(C(x_r, r+1))."""
    out = []
    for r in range(s, 0, -1):
        x = r - 1
        while math.comb(x + 1, r) <= rank:
            x += 1
        out.append(x)
        rank -= math.comb(x, r)
    return tuple(reversed(out))


@dataclass(frozen=True)
class LambdaWitness:
    s: int
    min_count: int
    max_count: int
    min_subset: Block
    max_subset: Block

    def __str__(self):
        return (f"{self.s}-subset {self.min_subset} lies in {self.min_count} blocks "
                f"but {self.max_subset} lies in {self.max_count}")


@dataclass(frozen=True)
class LambdaProfile:
    v: int
    k: int
    t: int
    lambdas: tuple
    is_design: tuple
    witnesses: dict = field(default_factory=dict)

    @property
    def b(self):
        return self.lambdas[0]

    def lambda_at(self, s):
        return self.lambdas[s]

    @property
    def is_t_design(self):
        return all(self.is_design)

    def describe(self):
        if self.is_t_design:
            return f"{self.t}-({self.v},{self.k},{self.lambdas[self.t]})"
        s = next(i for i, ok in enumerate(self.is_design) if not ok)
        return f"not a {self.t}-design on {self.v} points: {self.witnesses[s]}"

    def check_consistency(self):
        for s in range(1, self.t + 1):
            if self.is_design[s] and self.is_design[s - 1]:
                if self.lambdas[s - 1] * (self.k - s + 1) != self.lambdas[s] * (self.v - s + 1):
                    raise ConsistencyError(
                        f"lambda_{s - 1}={self.lambdas[s - 1]} and lambda_{s}={self.lambdas[s]} "
                        f"violate lambda_(s-1)(k-s+1) = lambda_s(v-s+1) for v={self.v}, k={self.k}"
                    )


class SubsetCounter:
    """
    Accumulates, over any number of block chunks, how many blocks contain
    each s-subset for s = 1..t. Counts for s > k are identically zero.
    """

    def __init__(self, v, k, t):
        if t < 1:
            raise ParameterError(f"strength t must be >= 1, got t={t}")
        self.v = v
        self.k = k
        self.t = t
        self.blocks_seen = 0
        top = min(t, k)
        self._table = _binomial_table(v, top)
        self._combos = {s: np.array(list(combinations(range(k), s)), dtype=np.intp) for s in range(1, top + 1)}
        self.counts = {s: np.zeros(math.comb(v, s), dtype=np.int64) for s in range(1, top + 1)}

    def _chunk_counts(self, chunk):
        out = {}
        for s, combos in self._combos.items():
            sub = chunk[:, combos]
            ranks = self._table[sub[..., 0], 1]
            for r in range(1, s):
                ranks = ranks + self._table[sub[..., r], r + 1]
            out[s] = np.bincount(ranks.ravel(), minlength=len(self.counts[s]))
        return out

    def add(self, blocks, threads=1, chunk_size=32768, progress=False):
        blocks = np.asarray(blocks)
        if blocks.size == 0:
            return self
        if blocks.shape[1] != self.k or blocks.min() < 0 or blocks.max() >= self.v:
            raise ParameterError(f"chunk does not hold {self.k}-subsets of 0..{self.v - 1}")
        chunks = [blocks[i:i + chunk_size] for i in range(0, len(blocks), chunk_size)]
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                partials = list(tqdm(pool.map(self._chunk_counts, chunks), total=len(chunks),
                                     desc="counting", disable=not progress))
        else:
            partials = (self._chunk_counts(c) for c in tqdm(chunks, desc="counting", disable=not progress))
        # chunk order is fixed, so the sums do not depend on the thread count
        for part in partials:
            for s, arr in part.items():
                self.counts[s] += arr
        self.blocks_seen += len(blocks)
        return self

    def profile(self):
        lambdas = [self.blocks_seen]
        is_design = [True]
        witnesses = {}
        for s in range(1, self.t + 1):
            if s > self.k:
                lambdas.append(0)
                is_design.append(True)
                continue
            counts = self.counts[s]
            lo, hi = int(counts.min()), int(counts.max())
            if lo == hi:
                lambdas.append(lo)
                is_design.append(True)
            else:
                lambdas.append(None)
                is_design.append(False)
                witnesses[s] = LambdaWitness(
                    s, lo, hi,
                    unrank_subset(int(counts.argmin()), s),
                    unrank_subset(int(counts.argmax()), s),
                )
        profile = LambdaProfile(self.v, self.k, self.t, tuple(lambdas), tuple(is_design), witnesses)
        profile.check_consistency()
        return profile

    def count_of(self, subset):
        """Number of blocks seen so far containing ``subset``."""
        s = len(subset)
        if s == 0:
            return self.blocks_seen
        if s > self.k:
            return 0
        rank = sum(math.comb(x, r + 1) for r, x in enumerate(sorted(subset)))
        return int(self.counts[s][rank])


def lambda_profile(d, t, threads=None, chunk_size=None, progress=False):
    """
    Count, for every s <= t, the blocks through each s-subset.

    ``is_design[s]`` is true iff all counts agree; otherwise ``lambdas[s]`` is
    None and ``witnesses[s]`` names a least- and a most-covered subset.
    """
    settings = load_settings()
    counter = SubsetCounter(d.v, d.k, t)
    counter.add(
        d.blocks,
        threads=threads or settings.threads,
        chunk_size=chunk_size or settings.chunk_size,
        progress=progress,
    )
    return counter.profile()


@dataclass(frozen=True)
class SimplicityReport:
    simple: bool
    witness: Block = None

    def __bool__(self):
        return self.simple


def is_simple(d):
    """True iff no block occurs twice; otherwise the first repeated block."""
    if d.b < 2:
        return SimplicityReport(True)
    same = np.all(d.blocks[1:] == d.blocks[:-1], axis=1)
    if not same.any():
        return SimplicityReport(True)
    return SimplicityReport(False, d.block(int(np.argmax(same))))


def triple_lambda(d, profile=None):
    """λ of ``d`` viewed as a 3-design (0 when k = 2)."""
    profile = profile or lambda_profile(d, 3)
    if not profile.is_design[3]:
        raise VerificationError(f"ingredient is not a 3-design: {profile.witnesses[3]}",
                                witness=profile.witnesses[3])
    return profile.lambdas[3]


def pair_lambda(d, profile=None):
    """Number of blocks through any two points, by counting."""
    profile = profile or lambda_profile(d, 2)
    if not profile.is_design[2]:
        raise VerificationError(f"ingredient is not a 2-design: {profile.witnesses[2]}",
                                witness=profile.witnesses[2])
    return profile.lambdas[2]


def expected_class_count(lam, v, k, t, s, sigma):
    """w = λ·C(v,t)·C(k,s) / (σ·C(v,s)·C(k,t)) for an (s,σ)-resolution of a t-design."""
    return Fraction(lam * math.comb(v, t) * math.comb(k, s), sigma * math.comb(v, s) * math.comb(k, t))
