"""
Tests for cell sigmas, multiplier search and partitioning constructed designs into classes.
Run with: pytest tests/test_resolvability.py
"""

import sys
import os
import math

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.errors import ConsistencyError, ParameterError, ResolutionError
from core.resolutions import cyclic_orbit_resolution
from constructions.engine import assemble, compute_counts
from constructions.families import admissible_cor_ab, compute_AB, family_thm_3_1, family_thm_3_3, family_thm_AB
from constructions.resolvability import (
    MultiplierChoice, PairSigma, ResolvabilityClaim, cell_sigmas, check_resolution_claims, find_multipliers,
    pair_sigmas, partition_constructed, resolvability_claim,
)


@pytest.fixture(scope="module")
def unfilled_thm_3_1():
    return assemble(family_thm_3_1(8, with_filler=False), check=False)


def test_find_multipliers_examples():
    assert find_multipliers([136, 68], [728, 2240]) == MultiplierChoice((1, 2), 136)
    assert find_multipliers([4, 6], [3, 10]) == MultiplierChoice((3, 2), 12)
    assert find_multipliers([2, 3], [6, 4]) == MultiplierChoice((3, 2), 6)
    assert find_multipliers([20], [14]) == MultiplierChoice((1,), 20)


def test_find_multipliers_no_larger_sigma_rescues_a_failure():
    # m=(2,3) misses 3 | 4, and every multiple of sigma=12 misses too
    with pytest.raises(ResolutionError):
        find_multipliers([6, 4], [6, 4])


def test_find_multipliers_failures():
    with pytest.raises(ResolutionError):
        find_multipliers([4, 6], [2, 10])
    with pytest.raises(ResolutionError):
        find_multipliers([2, 3], [4, 9])
    with pytest.raises(ParameterError):
        find_multipliers([0, 3], [4, 9])


def test_pair_sigmas_from_counts():
    summary = compute_counts(family_thm_AB(17, 3, 1))
    sigmas = pair_sigmas(summary)
    assert [s.sigma for s in sigmas] == [136, 68]
    assert [s.cell_count for s in sigmas] == [728, 2240]
    choice = find_multipliers([s.sigma for s in sigmas], [s.cell_count for s in sigmas])
    assert choice.m == (1, 2)
    assert sum(s.cell_count // m for s, m in zip(sigmas, choice.m)) == 1848


@pytest.mark.slow
def test_pair_sigmas_at_thm_3_3():
    sigmas = pair_sigmas(compute_counts(family_thm_3_3(32, 1)))
    assert [s.sigma for s in sigmas] == [112, 56]
    assert resolvability_claim("thm3_3", 32, 1).sigma == 112


def test_pair_sigmas_need_zero_lambda():
    summary = compute_counts(family_thm_3_1(8, with_filler=False))
    assert summary.lam == 10
    with pytest.raises(ParameterError, match="Lambda = 10"):
        pair_sigmas(summary)


def test_cell_sigmas_read_from_blocks(unfilled_thm_3_1):
    design, provenance = unfilled_thm_3_1
    assert design.b == 896
    assert cell_sigmas(design, provenance) == [PairSigma(1, 20, 14, 64)]


def test_partition_into_single_cells(unfilled_thm_3_1):
    design, provenance = unfilled_thm_3_1
    resolved = partition_constructed(design, provenance, MultiplierChoice((1,), 20))
    assert resolved.w == 14
    assert resolved.sigma == 20
    flat = np.sort(np.concatenate(resolved.classes))
    assert np.array_equal(flat, np.arange(design.b))


def test_partition_into_runs_of_cells(unfilled_thm_3_1):
    design, provenance = unfilled_thm_3_1
    resolved = partition_constructed(design, provenance, MultiplierChoice((2,), 40))
    assert resolved.w == 7
    assert resolved.b_per_class == 128


def test_partition_rejects_bad_choices(unfilled_thm_3_1):
    design, provenance = unfilled_thm_3_1
    with pytest.raises(ParameterError):
        partition_constructed(design, provenance, MultiplierChoice((3,), 60))
    with pytest.raises(ParameterError):
        partition_constructed(design, provenance, MultiplierChoice((1, 1), 20))


def test_filler_blocks_belong_to_no_cell():
    design, provenance = assemble(family_thm_3_1(8))
    with pytest.raises(ParameterError, match="filler"):
        cell_sigmas(design, provenance)


def test_resolvability_claims():
    assert resolvability_claim("cor_ab", 17, 1, k=3).sigma == 136
    assert resolvability_claim("cor_ab", 23, 1, k=4).sigma == 230
    assert resolvability_claim("cor_ab", 63, 1, k=4) is None
    assert resolvability_claim("cor_ab", 63, 2, k=4).m == (1, 2)
    assert resolvability_claim("thm3_1", 8, 1) is None


def test_halving_multiplier_needs_an_even_cell_count():
    s = 115
    for cells in (1, 3, 2241):
        with pytest.raises(ResolutionError):
            find_multipliers([2 * s, s], [728, cells])
    for cells in (2, 2240):
        assert find_multipliers([2 * s, s], [728, cells]) == MultiplierChoice((1, 2), 2 * s)


def test_cor_ab_k4_claim_agrees_with_half_pair_parity():
    # sigma = (10v, 5v); the half pair has w2 = C(v-1,4)/5 classes and z2 = m*A/B offsets
    seen = set()
    for v in range(9, 1200, 2):
        if not admissible_cor_ab(v, 4):
            continue
        w2 = math.comb(v - 1, 4) // 5
        a1 = math.comb(v - 2, 6) // 28
        for m in (1, 2, 3):
            z2 = int(m * compute_AB(v, 4).ratio)
            cells = [a1 * (v - 1) // 2 * m, w2 * z2]
            claim = resolvability_claim("cor_ab", v, m, k=4)
            if claim is None:
                assert cells[1] % 2 == 1
                with pytest.raises(ResolutionError):
                    find_multipliers([10 * v, 5 * v], cells)
            else:
                choice = find_multipliers([10 * v, 5 * v], cells)
                assert (choice.sigma, choice.m) == (claim.sigma, claim.m)
            seen.add(claim is None)
    assert seen == {True, False}
    assert resolvability_claim("cor_ab", 63, 1, k=4) is None


def test_class_count_cross_check():
    # the cyclic orbits of 3-subsets of 8 points resolve the complete 3-(8,3,1) design
    r = cyclic_orbit_resolution(8, 3)
    choice = MultiplierChoice((1,), 3)
    check_resolution_claims(r, choice, lam=1)
    with pytest.raises(ConsistencyError, match="has 14"):
        check_resolution_claims(r, choice, lam=2)


def test_stated_claim_cross_check():
    r = cyclic_orbit_resolution(8, 3)
    check_resolution_claims(r, MultiplierChoice((1, 2), 136), claim=ResolvabilityClaim(136, (1, 2)))
    with pytest.raises(ConsistencyError, match="states"):
        check_resolution_claims(r, MultiplierChoice((1, 2), 136), claim=ResolvabilityClaim(230, (1, 2)))
