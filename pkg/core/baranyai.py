"""
Parallel classes of the complete k-uniform hypergraph by integral flows.

Points are added one at a time. Before point i is added, each of the
C(v-1,k-1) classes holds v/k parts (subsets of 0..i-1, possibly empty), and
every subset S appears as a part C(v-i, k-|S|) times over all classes.
Point i goes to exactly one part per class; the choice is an integral
maximum flow

    source -> class (cap 1) -> subset S (cap = copies of S in the class)
           -> sink (cap C(v-i-1, k-|S|-1))

which saturates every class because a fractional solution exists.
"""

import logging
import math
from collections import Counter

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow
from tqdm import tqdm

from core.designs import BLOCK_DTYPE
from core.errors import ConsistencyError

logger = logging.getLogger(__name__)


def _step(parts, i, v, k):
    n_classes = len(parts)
    multiplicity = [Counter(p for p in cls if p.bit_count() < k) for cls in parts]
    subsets = sorted({p for cls in multiplicity for p in cls}, key=lambda p: (p.bit_count(), p))
    node = {p: n_classes + 1 + n for n, p in enumerate(subsets)}
    sink = n_classes + len(subsets) + 1

    rows, cols, caps = [], [], []
    for c, counter in enumerate(multiplicity):
        rows.append(0)
        cols.append(c + 1)
        caps.append(1)
        for p, mult in counter.items():
            rows.append(c + 1)
            cols.append(node[p])
            caps.append(mult)
    for p in subsets:
        cap = math.comb(v - i - 1, k - p.bit_count() - 1)
        if cap:
            rows.append(node[p])
            cols.append(sink)
            caps.append(cap)

    graph = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(sink + 1, sink + 1))
    result = maximum_flow(graph, 0, sink, method="dinic")
    if result.flow_value != n_classes:
        raise ConsistencyError(
            f"point {i}: integral flow {result.flow_value} does not saturate {n_classes} classes (v={v}, k={k})"
        )

    flow = result.flow.tocoo()
    picked = (flow.data > 0) & (flow.row >= 1) & (flow.row <= n_classes) & (flow.col > n_classes)
    choice = {}
    for r, c in zip(flow.row[picked], flow.col[picked]):
        choice[int(r) - 1] = subsets[int(c) - n_classes - 1]
    if len(choice) != n_classes:
        raise ConsistencyError(f"point {i}: {n_classes - len(choice)} classes received no part")

    bit = 1 << i
    for c, cls in enumerate(parts):
        target = choice[c]
        cls[cls.index(target)] = target | bit


def baranyai_classes(v, k, progress=False):
    """
    Return C(v-1,k-1) arrays of shape (v/k, k); each one partitions 0..v-1.
    The caller checks k | v.
    """
    n_classes = math.comb(v - 1, k - 1)
    m = v // k
    parts = [[0] * m for _ in range(n_classes)]
    for i in tqdm(range(v), desc=f"baranyai({v},{k})", disable=not progress):
        _step(parts, i, v, k)
    logger.debug("baranyai(%d,%d): %d classes of %d blocks", v, k, n_classes, m)

    out = []
    for cls in parts:
        blocks = sorted(tuple(x for x in range(v) if p >> x & 1) for p in cls)
        out.append(np.array(blocks, dtype=BLOCK_DTYPE))
    return out
