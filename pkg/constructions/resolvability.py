"""
(1,σ)-resolutions of constructed designs without a filler.

Every cell B(i, j) of pair h is a 1-(2v,k,σ_h) design. Choosing m_h with
m_1 σ_1 = ... = m_n σ_n = σ and m_h | z_h w_h, each run of m_h consecutive
cells of pair h becomes one class of a (1,σ)-resolution.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from core.designs import expected_class_count
from core.errors import ConsistencyError, ParameterError, ResolutionError
from core.resolutions import resolve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairSigma:
    h: int
    sigma: int
    cell_count: int
    cell_size: int


@dataclass(frozen=True)
class MultiplierChoice:
    m: tuple
    sigma: int


@dataclass(frozen=True)
class ResolvabilityClaim:
    sigma: int
    m: tuple


def pair_sigmas(summary, spec=None):
    """σ_h = u_h b_n+h + u_n+h b_h for full pairs, u_n b_n for the half pair."""
    if summary.lam != 0:
        raise ParameterError(f"cell resolutions need Theta = Delta; here Lambda = {summary.lam}")
    out = []
    for p in summary.pairs:
        sigma = p.u_left * p.b_left if p.half else p.u_left * p.b_right + p.u_right * p.b_left
        out.append(PairSigma(p.h, sigma, p.cells, p.cell_size))
    return out


def find_multipliers(sigmas, cell_counts):
    """
    Least common σ with every m_h = σ/σ_h dividing its cell count. Any valid
    σ is a multiple of lcm(σ_h), and c*m_h | n forces m_h | n, so only the lcm
    itself needs checking.
    """
    sigmas = [int(s) for s in sigmas]
    if not sigmas or min(sigmas) <= 0:
        raise ParameterError(f"multipliers need positive sigmas, got {sigmas}")
    base = math.lcm(*sigmas)
    m = tuple(base // s for s in sigmas)
    if all(n % mh == 0 for mh, n in zip(m, cell_counts)):
        return MultiplierChoice(m, base)
    raise ResolutionError(f"no multipliers m_h with m_h*sigma_h equal and m_h | cells for sigmas={sigmas}, "
                          f"cells={list(cell_counts)}")


def _cell_groups(provenance):
    if (provenance["h"] == 0).any():
        raise ParameterError("the design holds filler blocks, which belong to no cell")
    groups = provenance.groupby(["h", "i", "j"], sort=True).indices
    by_pair = {}
    for (h, i, j), rows in groups.items():
        by_pair.setdefault(int(h), []).append(np.sort(rows))
    return by_pair


def cell_sigmas(design, provenance):
    """
    Count σ of every cell and check each cell is a 1-design; returns one
    PairSigma per pair, read off the blocks rather than the ingredients.
    """
    by_pair = _cell_groups(provenance)
    out = []
    for h in sorted(by_pair):
        cells = by_pair[h]
        ids = np.concatenate([np.full(len(rows), n, dtype=np.int64) for n, rows in enumerate(cells)])
        rows = np.concatenate(cells)
        keys = ids[:, None] * design.v + design.blocks[rows]
        counts = np.bincount(keys.ravel(), minlength=len(cells) * design.v).reshape(len(cells), design.v)
        sigma = int(counts[0, 0])
        bad = np.argwhere(counts != sigma)
        if len(bad):
            c, x = (int(y) for y in bad[0])
            raise ResolutionError(f"pair {h}, cell {c + 1}: point {x} lies in {int(counts[c, x])} blocks, "
                                  f"expected {sigma}", class_index=c + 1, point=x, count=int(counts[c, x]))
        sizes = {len(r) for r in cells}
        if len(sizes) != 1:
            raise ResolutionError(f"pair {h}: cells have unequal sizes {sorted(sizes)}")
        out.append(PairSigma(h, sigma, len(cells), sizes.pop()))
    return out


def partition_constructed(design, provenance, choice):
    """
    Group the cells of each pair, ordered by (i, j), into consecutive runs of
    m_h cells; every run is one class. The result is verified.
    """
    by_pair = _cell_groups(provenance)
    if len(choice.m) != len(by_pair):
        raise ParameterError(f"{len(choice.m)} multipliers for {len(by_pair)} pairs")
    classes = []
    for mh, h in zip(choice.m, sorted(by_pair)):
        cells = by_pair[h]
        if len(cells) % mh:
            raise ParameterError(f"pair {h}: m={mh} does not divide its {len(cells)} cells")
        for start in range(0, len(cells), mh):
            classes.append(np.concatenate(cells[start:start + mh]))
    resolved = resolve(design, classes)
    if resolved.sigma != choice.sigma:
        raise ConsistencyError(f"classes are 1-designs with sigma={resolved.sigma}, expected {choice.sigma}")
    logger.info("partitioned %d blocks into %d classes with sigma=%d", design.b, resolved.w, resolved.sigma)
    return resolved


def resolvability_claim(family, v, m, k=None):
    """
    The (σ, multipliers) stated for the filler-free families, or None when
    the statement does not cover (v, m).
    """
    if family == "thm3_3":
        return ResolvabilityClaim(7 * v // 2, (1, 2))
    if family == "cor_ab" and k == 3:
        return ResolvabilityClaim(8 * v, (1, 2))
    if family == "cor_ab" and k == 4:
        if m % 2 == 0 or (v - 7) % 16 == 0:
            return ResolvabilityClaim(10 * v, (1, 2))
        return None
    return None


def check_resolution_claims(resolved, choice, lam=None, claim=None):
    """
    Cross-check a built resolution. With the design's triple count ``lam`` the
    class count must equal the one every (1,σ)-resolution of a 3-design has;
    with a stated ``claim`` the chosen σ and multipliers must match it.
    """
    if lam is not None:
        expected = expected_class_count(lam, resolved.v, resolved.k, 3, 1, resolved.sigma)
        if expected != resolved.w:
            raise ConsistencyError(f"{resolved.w} classes, but a 3-({resolved.v},{resolved.k},{lam}) design "
                                   f"resolved with sigma={resolved.sigma} has {expected}")
    if claim is not None and (claim.sigma, tuple(claim.m)) != (choice.sigma, tuple(choice.m)):
        raise ConsistencyError(f"chose sigma={choice.sigma}, m={choice.m}; the family states "
                               f"sigma={claim.sigma}, m={claim.m}")
