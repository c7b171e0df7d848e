"""
(1,σ)-resolutions: generators and the exhaustive verifier.

Class indices are 1-based wherever they leave this module (distances,
``class_blocks``, error reports); internally classes are a tuple of index
arrays into ``design.blocks``.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import chain, combinations

import numpy as np

from core.designs import BLOCK_DTYPE, Design, canonical_order, is_simple, lambda_profile, union_copies
from core.errors import ParameterError, ResolutionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimpleCore:
    """The resolved simple design C_j behind a union of ``a`` copies."""

    t: int
    a: int

    @property
    def w(self):
        return self.a * self.t


@dataclass(frozen=True, eq=False)
class ResolvedDesign:
    design: Design
    classes: tuple
    sigma: int

    @property
    def v(self):
        return self.design.v

    @property
    def k(self):
        return self.design.k

    @property
    def w(self):
        return len(self.classes)

    @property
    def b_per_class(self):
        # σ·v/k_j: the block size of this ingredient, not of the assembled design
        return self.sigma * self.v // self.k

    @property
    def u(self):
        return self.sigma

    def class_blocks(self, i):
        """Blocks of class ``i`` (1-based) as a ``(b_per_class, k)`` array."""
        if not 1 <= i <= self.w:
            raise ParameterError(f"class index {i} out of range 1..{self.w}")
        return self.design.blocks[self.classes[i - 1]]

    def class_ids(self):
        """0-based class number of every block, in block order."""
        ids = np.empty(self.design.b, dtype=np.int64)
        for c, idx in enumerate(self.classes):
            ids[idx] = c
        return ids

    @cached_property
    def profile(self):
        return lambda_profile(self.design, 3)

    def __repr__(self):
        return f"ResolvedDesign(v={self.v}, k={self.k}, w={self.w}, sigma={self.sigma})"


def class_distance(w, i, j):
    """Circular distance min(|i-j|, w-|i-j|) between 1-based classes i and j."""
    if not (1 <= i <= w and 1 <= j <= w):
        raise ParameterError(f"class indices ({i}, {j}) out of range 1..{w}")
    gap = abs(i - j)
    return min(gap, w - gap)


# ============= VERIFICATION =============

def _check_partition(classes, b):
    sizes = [len(c) for c in classes]
    if sum(sizes) != b:
        raise ResolutionError(f"classes hold {sum(sizes)} block indices but the design has {b} blocks")
    flat = np.concatenate([np.asarray(c, dtype=np.int64) for c in classes]) if classes else np.empty(0, np.int64)
    if len(flat) and (flat.min() < 0 or flat.max() >= b):
        raise ResolutionError(f"block index out of range 0..{b - 1}")
    seen = np.bincount(flat, minlength=b)
    if np.any(seen != 1):
        bad = int(np.flatnonzero(seen != 1)[0])
        raise ResolutionError(f"block {bad} is listed {int(seen[bad])} times across classes")


def _point_counts(design, classes):
    ids = np.empty(design.b, dtype=np.int64)
    for c, idx in enumerate(classes):
        ids[np.asarray(idx, dtype=np.int64)] = c
    keys = ids[:, None] * design.v + design.blocks
    return np.bincount(keys.ravel(), minlength=len(classes) * design.v).reshape(len(classes), design.v)


def verify_resolution(r):
    """
    Check that the classes partition the blocks and that each class is a
    1-design with one common σ. Returns σ; raises ResolutionError naming the
    first offending (class, point, count) otherwise.
    """
    classes = r.classes if isinstance(r, ResolvedDesign) else r[1]
    design = r.design if isinstance(r, ResolvedDesign) else r[0]
    if len(classes) < 2:
        raise ResolutionError(f"a resolution needs at least two classes, got {len(classes)}")
    _check_partition(classes, design.b)
    counts = _point_counts(design, classes)
    sigma = int(counts[0, 0])
    off = np.argwhere(counts != sigma)
    if len(off):
        c, x = (int(y) for y in off[0])
        raise ResolutionError(
            f"class {c + 1}: point {x} lies in {int(counts[c, x])} blocks, expected {sigma}",
            class_index=c + 1, point=x, count=int(counts[c, x]),
        )
    if sigma == 0:
        raise ResolutionError("classes contain no blocks", class_index=1, point=0, count=0)
    logger.debug("verified %d classes with sigma=%d on %d points", len(classes), sigma, design.v)
    return sigma


def resolve(design, classes):
    """Attach ``classes`` to ``design`` after exhaustive verification."""
    classes = tuple(_frozen_index(c) for c in classes)
    sigma = verify_resolution((design, classes))
    return ResolvedDesign(design, classes, sigma)


def _frozen_index(idx):
    arr = np.asarray(idx, dtype=np.intp)
    arr.setflags(write=False)
    return arr


def from_class_blocks(v, k, class_blocks):
    """
    Build a verified resolution from explicit class blocks (rows sorted).
    The design is put in canonical order and classes become index lists.
    """
    class_blocks = [np.asarray(c, dtype=BLOCK_DTYPE).reshape(-1, k) for c in class_blocks]
    stacked = np.vstack(class_blocks) if class_blocks else np.empty((0, k), dtype=BLOCK_DTYPE)
    order = canonical_order(stacked)
    position = np.empty(len(order), dtype=np.intp)
    position[order] = np.arange(len(order))
    design = Design(v, k, stacked[order])
    bounds = np.cumsum([0] + [len(c) for c in class_blocks])
    classes = [np.sort(position[bounds[i]:bounds[i + 1]]) for i in range(len(class_blocks))]
    return resolve(design, classes)


# ============= GENERATORS =============

def round_robin_one_factorization(v):
    """
    Circle method: point v-1 is fixed, round r pairs it with r and pairs
    r+d with r-d (mod v-1) for d = 1..v/2-1.
    """
    if v < 4 or v % 2:
        raise ParameterError(f"a one-factorization of K_v needs v even and v >= 4, got v={v}")
    n = v - 1
    rounds = []
    for r in range(n):
        pairs = [(r, n)]
        for d in range(1, v // 2):
            x, y = (r + d) % n, (r - d) % n
            pairs.append((min(x, y), max(x, y)))
        rounds.append(pairs)
    return from_class_blocks(v, 2, rounds)


def _lex_leq(a, b):
    """Row-wise a <= b in lexicographic order."""
    diff = b.astype(np.int64) - a
    nonzero = diff != 0
    first = nonzero.argmax(axis=1)
    lead = diff[np.arange(len(diff)), first]
    return (lead > 0) | ~nonzero.any(axis=1)


def orbit_representatives(v, k):
    """
    Lexicographically least block of every orbit of x -> x+1 (mod v) on
    k-subsets, in increasing order. Needs gcd(v, k) = 1 so all orbits are full.
    """
    count = math.comb(v - 1, k - 1)
    tails = np.fromiter(chain.from_iterable(combinations(range(1, v), k - 1)),
                        dtype=BLOCK_DTYPE, count=count * (k - 1)).reshape(count, k - 1)
    rows = np.hstack([np.zeros((count, 1), dtype=BLOCK_DTYPE), tails])
    keep = np.ones(count, dtype=bool)
    for c in range(1, k):
        # rotate so that the c-th point becomes 0
        shifted = np.sort((rows - rows[:, c:c + 1]) % v, axis=1)
        keep &= _lex_leq(rows, shifted)
    return rows[keep]


def cyclic_orbit_resolution(v, k):
    """Classes are the orbits of x -> x+1 (mod v), ordered by least representative."""
    if not v > k >= 2:
        raise ParameterError(f"cyclic orbits need v > k >= 2, got v={v}, k={k}")
    if math.gcd(v, k) != 1:
        raise ParameterError(f"cyclic orbit resolution needs gcd(v,k)=1, got gcd({v},{k})={math.gcd(v, k)}")
    reps = orbit_representatives(v, k)
    shifts = np.arange(v, dtype=BLOCK_DTYPE)
    orbits = np.sort((reps[:, None, :] + shifts[None, :, None]) % v, axis=2)
    logger.debug("cyclic(%d,%d): %d orbits", v, k, len(reps))
    return from_class_blocks(v, k, list(orbits))


def baranyai_parallelism(v, k):
    """All k-subsets split into C(v-1,k-1) parallel classes; see core.baranyai."""
    from core.baranyai import baranyai_classes

    if not v > k >= 2:
        raise ParameterError(f"a parallelism needs v > k >= 2, got v={v}, k={k}")
    if v % k:
        raise ParameterError(f"a parallelism of all {k}-subsets needs k | v, got v={v}, k={k}")
    return from_class_blocks(v, k, baranyai_classes(v, k))


def concatenate_resolution(core, a):
    """
    Resolution of ``a`` copies of a simple resolved design: copy c of block
    idx sits at a*idx + c and the class list is P_1..P_t repeated a times.
    """
    if a < 1:
        raise ParameterError(f"number of copies must be >= 1, got a={a}")
    report = is_simple(core.design)
    if not report:
        raise ParameterError(f"concatenation needs a simple core; block {report.witness} is repeated")
    design = union_copies(core.design, a)
    classes = [a * np.asarray(idx, dtype=np.intp) + c for c in range(a) for idx in core.classes]
    resolved = resolve(design, classes)
    return resolved, SimpleCore(t=core.w, a=a)
