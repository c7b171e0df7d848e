"""
Tests for the doubling construction: annulus arithmetic, counting,
validation, assembly and streaming verification.
Run with: pytest tests/test_engine.py
"""

import sys
import os
import math
import random
from dataclasses import replace
from itertools import combinations

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.designs import Design, SubsetCounter, complete_design, is_simple, lambda_profile
from core.errors import SpecViolation
from core.resolutions import (
    SimpleCore, baranyai_parallelism, class_distance, concatenate_resolution, cyclic_orbit_resolution,
    round_robin_one_factorization,
)
from constructions.engine import (
    MODE_I, MODE_II, TYPE_I, TYPE_II, TYPE_III, TYPE_IV, ConstructionSpec, HalfPair, PairSpec, annulus_offsets,
    annulus_width, assemble, choose_annulus, compute_counts, construct_and_verify, mirror,
    sampled_triple_coverage, stream_profile, validate_spec,
)
from constructions.families import family_cor_2k, family_thm_3_1, family_thm_AB


# ============= ANNULUS =============

def test_annulus_width_examples():
    assert annulus_width(7, 0, 2) == 5
    assert annulus_width(6, 0, 3) == 6
    assert annulus_width(10, 0, 0) == 1


def test_annulus_width_matches_direct_count():
    for w in range(1, 21):
        for epsilon in (0, 1):
            for s in range(epsilon, w // 2 + 1):
                for i in range(1, w + 1):
                    count = sum(1 for j in range(1, w + 1) if epsilon <= class_distance(w, i, j) <= s)
                    assert count == annulus_width(w, epsilon, s)
                assert len(annulus_offsets(w, epsilon, s)) == annulus_width(w, epsilon, s)


def test_choose_annulus_examples():
    assert choose_annulus(7, 5) == (0, 2)
    assert choose_annulus(7, 2) == (1, 1)
    assert choose_annulus(6, 6) == (0, 3)


def test_choose_annulus_round_trips():
    for w in range(1, 51):
        for z in range(1, w + 1):
            epsilon, s = choose_annulus(w, z)
            assert s <= w // 2
            assert annulus_width(w, epsilon, s) == z


# ============= COUNTING AND VALIDATION =============

def test_counts_thm_3_1_at_8():
    summary = compute_counts(family_thm_3_1(8))
    assert (summary.theta, summary.delta, summary.lam) == (18, 8, 10)
    p = summary.pairs[0]
    assert (p.b_left, p.b_right, p.u_left, p.u_right) == (4, 8, 1, 3)
    assert (p.lam2_left, p.lam2_right, p.lam_left, p.lam_right) == (1, 6, 0, 1)
    assert (p.z, p.w) == (2, 7)
    assert summary.expected_blocks == 1008


def test_counts_mode_ii_general_2k():
    summary = compute_counts(family_cor_2k(8, 3))
    assert (summary.theta, summary.delta, summary.lam) == (18, 8, 10)


def test_counts_thm_ab_balance():
    summary = compute_counts(family_thm_AB(17, 3, 1))
    assert summary.theta == summary.delta == 9996
    assert summary.lam == 0
    assert summary.expected_blocks == 1068144


def test_valid_family_spec_passes():
    assert validate_spec(family_thm_3_1(8)).ok


def test_w_mismatch_is_reported():
    rr = round_robin_one_factorization(8)
    bar = baranyai_parallelism(8, 4)
    pair = PairSpec(rr, bar, SimpleCore(rr.w, 1), SimpleCore(bar.w, 1), 0, 1)
    spec = ConstructionSpec(8, 6, MODE_I, (pair,))
    report = validate_spec(spec)
    assert "w-mismatch" in report.rules()
    assert [v.pair for v in report.violations if v.rule == "w-mismatch"] == [1]


def test_simplicity_guard():
    spec = family_thm_3_1(14)
    pair = spec.pairs[0]
    assert (pair.left_core.t, pair.left_core.a, pair.w) == (13, 2, 26)
    # z = 14 > t
    too_wide = replace(spec, pairs=(replace(pair, epsilon=1, s=7),))
    assert "simplicity-guard" in validate_spec(too_wide, check_filler=False).rules()
    # offsets -6..6 are distinct mod 13
    odd_t = replace(spec, pairs=(replace(pair, epsilon=0, s=6),))
    assert validate_spec(odd_t, check_filler=False).ok
    assert "simplicity-guard" not in validate_spec(too_wide, check_filler=False, simplicity_guard=False).rules()


def test_filler_rules():
    spec = family_thm_3_1(8)
    assert "filler-missing" in validate_spec(replace(spec, filler=None)).rules()
    wrong = replace(spec, filler=Design(8, 5, complete_design(8, 5).blocks[:-1]))
    assert "filler" in validate_spec(wrong).rules()
    balanced = family_thm_AB(17, 3, 1)
    with_filler = replace(balanced, filler=complete_design(17, 8))
    assert "filler" in validate_spec(with_filler).rules()


def test_compute_counts_rejects_structural_violations():
    rr = round_robin_one_factorization(8)
    cyc = cyclic_orbit_resolution(8, 3)
    pair = PairSpec(cyc, rr, SimpleCore(7, 1), SimpleCore(7, 1), 0, 1)
    with pytest.raises(SpecViolation) as info:
        compute_counts(ConstructionSpec(8, 5, MODE_I, (pair,)))
    assert "mode-I-below-half" in [v.rule for v in info.value.violations]


# ============= ASSEMBLY =============

def test_assemble_thm_3_1_at_8():
    design, provenance = assemble(family_thm_3_1(8))
    assert design.v == 16 and design.k == 5
    assert design.b == 1008
    by_type = provenance["btype"].value_counts().to_dict()
    assert by_type == {TYPE_I: 112, TYPE_II: 448, TYPE_III: 448}
    assert len(provenance) == design.b


def test_construct_and_verify_thm_3_1_at_8():
    result = construct_and_verify(family_thm_3_1(8))
    assert result.profile.describe() == "3-(16,5,18)"
    assert result.simplicity
    assert mirror(result.design) == result.design


def test_general_2k_at_8_has_only_type_iv_cross_blocks():
    result = construct_and_verify(family_cor_2k(8, 3))
    assert result.design.b == 504
    counts = result.provenance["btype"].value_counts().to_dict()
    assert counts == {TYPE_I: 56, TYPE_IV: 448}
    assert result.profile.lambdas[3] == 18


def test_provenance_respects_annulus():
    spec = family_thm_3_1(8)
    _, provenance = assemble(spec)
    pair = spec.pairs[0]
    cross = provenance[provenance["h"] > 0]
    for i, j in cross[["i", "j"]].drop_duplicates().itertuples(index=False):
        assert pair.epsilon <= class_distance(pair.w, i, j) <= pair.s


def test_stream_profile_matches_assembled_profile():
    spec = family_thm_3_1(8)
    design, _ = assemble(spec)
    assert stream_profile(spec, chunk_size=100) == lambda_profile(design, 3)


def test_sampled_coverage_matches_enumeration():
    spec = family_thm_3_1(8)
    design, _ = assemble(spec)
    counter = SubsetCounter(16, 5, 3).add(design.blocks)
    rng = random.Random(7)
    triples = [tuple(rng.sample(range(16), 3)) for _ in range(50)]
    expected = [counter.count_of(t) for t in triples]
    assert sampled_triple_coverage(spec, triples) == expected
    assert set(expected) == {18}


# ============= RANDOMIZED SPECS =============

_INGREDIENTS = {}


def _ingredients(v):
    """Resolved complete designs on v points that the generators can produce."""
    if v not in _INGREDIENTS:
        out = [round_robin_one_factorization(v) if v % 2 == 0 else cyclic_orbit_resolution(v, 2)]
        for k in range(3, min(v // 2 + 1, 6)):
            if math.gcd(v, k) == 1:
                out.append(cyclic_orbit_resolution(v, k))
            elif v % k == 0 and math.comb(v - 1, k - 1) <= 60:
                out.append(baranyai_parallelism(v, k))
        _INGREDIENTS[v] = out
    return _INGREDIENTS[v]


def _equalize(small, large, max_copies=6):
    """Concatenate whichever side has fewer classes so both have the same w."""
    lo, hi = sorted((small.w, large.w))
    if hi % lo or hi // lo > max_copies:
        return None
    a = hi // lo
    if small.w < large.w:
        left, left_core = concatenate_resolution(small, a)
        return left, left_core, large, SimpleCore(large.w, 1)
    if large.w < small.w:
        right, right_core = concatenate_resolution(large, a)
        return small, SimpleCore(small.w, 1), right, right_core
    return small, SimpleCore(small.w, 1), large, SimpleCore(large.w, 1)


def _random_spec(rng):
    while True:
        v = rng.randint(5, 12)
        ing = _ingredients(v)
        if rng.random() < 0.5:
            options = [(a, b) for a in ing for b in ing if a.k < b.k]
            if not options:
                continue
            sides = _equalize(*rng.choice(options))
            if sides is None:
                continue
            left, left_core, right, right_core = sides
            epsilon, s = choose_annulus(left.w, rng.randint(1, min(left.w, 6)))
            spec = ConstructionSpec(v, left.k + right.k, MODE_I,
                                    (PairSpec(left, right, left_core, right_core, epsilon, s),), label=f"random-I v={v}")
        else:
            half = rng.choice(ing)
            epsilon, s = choose_annulus(half.w, rng.randint(1, min(half.w, 6)))
            spec = ConstructionSpec(v, 2 * half.k, MODE_II, (),
                                    half_pair=HalfPair(half, SimpleCore(half.w, 1), epsilon, s), label=f"random-II v={v}")
        if validate_spec(spec, check_filler=False, check_resolutions=False).ok:
            return spec


def _split_mask(v):
    """Colex-indexed flags: True for triples of 0..2v-1 meeting both halves."""
    triples = np.array(list(combinations(range(2 * v), 3)), dtype=np.int64)
    x, y, z = triples[:, 0], triples[:, 1], triples[:, 2]
    ranks = x + y * (y - 1) // 2 + z * (z - 1) * (z - 2) // 6
    inside = (triples < v).sum(axis=1)
    mask = np.zeros(len(triples), dtype=bool)
    mask[ranks] = (inside % 3) != 0
    return mask


def _check_cross_counts(spec, summary):
    design, _ = assemble(spec, check=False)
    counts = SubsetCounter(2 * spec.v, spec.k, 3).add(design.blocks).counts[3]
    split = _split_mask(spec.v)
    assert np.all(counts[split] == summary.theta), spec.label
    assert np.all(counts[~split] == summary.delta), spec.label
    assert is_simple(design), spec.label


def test_randomized_specs_are_simple_designs():
    rng = random.Random(20240601)
    for _ in range(200):
        spec = _random_spec(rng)
        summary = compute_counts(spec)
        _check_cross_counts(spec, summary)
        if summary.lam == 0:
            assert construct_and_verify(spec).profile.lambdas[3] == summary.theta
        elif spec.k < spec.v and summary.lam == math.comb(spec.v - 3, spec.k - 3):
            result = construct_and_verify(replace(spec, filler=complete_design(spec.v, spec.k)))
            assert result.profile.lambdas[3] == summary.theta


def test_guard_violations_produce_duplicates():
    rng = random.Random(99)
    seen = 0
    for _ in range(60):
        v = rng.randint(5, 12)
        options = [(a, b) for a in _ingredients(v) for b in _ingredients(v) if a.k < b.k and a.w != b.w]
        if not options:
            continue
        sides = _equalize(*rng.choice(options))
        if sides is None:
            continue
        left, left_core, right, right_core = sides
        t = left_core.t if left_core.a > 1 else right_core.t
        z = rng.randint(t + 1, min(left.w, t + 3))
        epsilon, s = choose_annulus(left.w, z)
        spec = ConstructionSpec(v, left.k + right.k, MODE_I,
                                (PairSpec(left, right, left_core, right_core, epsilon, s),))
        assert "simplicity-guard" in validate_spec(spec, check_filler=False).rules()
        assert validate_spec(spec, check_filler=False, simplicity_guard=False).ok
        design, _ = assemble(spec, check=False)
        report = is_simple(design)
        assert not report
        assert report.witness is not None
        seen += 1
    assert seen > 0


def test_fixed_guard_counterexample():
    # cyclic pairs on 9 points, 7 copies, against the 28 parallel classes of triples
    left, left_core = concatenate_resolution(cyclic_orbit_resolution(9, 2), 7)
    right = baranyai_parallelism(9, 3)
    assert (left_core.t, left.w, right.w) == (4, 28, 28)
    pair = PairSpec(left, right, left_core, SimpleCore(28, 1), 0, 2)
    spec = ConstructionSpec(9, 5, MODE_I, (pair,))
    assert "simplicity-guard" in validate_spec(spec, check_filler=False).rules()
    design, _ = assemble(spec, check=False)
    assert not is_simple(design)

    # z = t = 4 with epsilon = 1: offsets +2 and -2 agree mod 4
    boundary = replace(spec, pairs=(replace(pair, epsilon=1, s=2),))
    assert "simplicity-guard" in validate_spec(boundary, check_filler=False).rules()
    design, _ = assemble(boundary, check=False)
    assert not is_simple(design)

    ok = replace(spec, pairs=(replace(pair, epsilon=0, s=1),))
    assert validate_spec(ok, check_filler=False).ok
    design, _ = assemble(ok, check=False)
    assert is_simple(design)
