"""
Named families of simple 3-designs on 2v points.

Each ``family_*`` function checks the family's conditions, generates the
resolved ingredients and returns a ConstructionSpec. Parameters such as
lambda, Theta and the class counts are never taken from the closed forms
here; ``closed_form_lambda`` exists only so tests can compare the two.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from core.designs import complete_design, is_simple, triple_lambda, lambda_profile
from core.errors import ParameterError, VerificationError
from core.resolutions import (
    SimpleCore, baranyai_parallelism, concatenate_resolution, cyclic_orbit_resolution,
    round_robin_one_factorization,
)
from constructions.engine import MODE_I, MODE_II, ConstructionSpec, HalfPair, PairSpec, choose_annulus

logger = logging.getLogger(__name__)

THM_3_2_FILLER_FACTOR = 10
THM_3_4_LAMBDAS = (10, 60, 70, 90, 100, 150, 160)
THM_3_3_RESIDUES = (4, 8, 28, 32, 44, 52)
COR_AB_RESIDUES = {
    3: (60, (5, 17, 35, 47)),
    4: (280, (7, 23, 63, 111, 167, 191, 223, 231, 247)),
}


# Ingredient generators are deterministic, so repeated family calls share them.
_round_robin = lru_cache(maxsize=None)(round_robin_one_factorization)
_cyclic = lru_cache(maxsize=None)(cyclic_orbit_resolution)
_baranyai = lru_cache(maxsize=None)(baranyai_parallelism)


@dataclass(frozen=True)
class ABPair:
    A: Fraction
    B: Fraction

    @property
    def ratio(self):
        return Fraction(self.A) / Fraction(self.B)


@dataclass(frozen=True)
class FamilyRequest:
    family: str
    v: int = None
    f: int = None
    k: int = None
    m: int = None
    z1: int = None
    lam: int = None
    ingredient: object = None


# ============= ADMISSIBILITY =============

def admissible_thm_3_1(v):
    return v % 6 == 2 and v > 5


def admissible_thm_3_2(f):
    return f > 1 and math.gcd(f, 6) == 1


def admissible_thm_3_3(v):
    return v % 60 in THM_3_3_RESIDUES


def admissible_thm_3_4(f):
    return admissible_thm_3_2(f)


def admissible_cor_2k(v, k):
    if k == 3:
        return v % 12 in (1, 4, 5, 8)
    if k == 4:
        return v % 20 in (1, 5, 7, 11, 15, 17)
    if k == 5:
        return math.gcd(v, 5) == 1 and v % 8 in (0, 1, 6, 7) and v % 7 in (0, 1, 2, 6)
    return False


def admissible_cor_ab(v, k):
    if k not in COR_AB_RESIDUES:
        return False
    modulus, residues = COR_AB_RESIDUES[k]
    return v % modulus in residues


def _require(condition, message):
    if not condition:
        raise ParameterError(message)


def _two_sided(v, left, left_core, right, right_core, z):
    epsilon, s = choose_annulus(left.w, z)
    return PairSpec(left, right, left_core, right_core, epsilon, s)


def _simple(resolved):
    return SimpleCore(t=resolved.w, a=1)


def _checked_filler(filler, v, k, lam, what):
    """The filler must be a simple 3-(v,k,lam) design; verified by counting."""
    if filler.v != v or filler.k != k:
        raise VerificationError(f"{what}: ingredient has v={filler.v}, k={filler.k}; need v={v}, k={k}")
    simple = is_simple(filler)
    if not simple:
        raise VerificationError(f"{what}: ingredient repeats block {simple.witness}", witness=simple.witness)
    profile = lambda_profile(filler, 3)
    if not profile.is_design[3]:
        raise VerificationError(f"{what}: ingredient is not a 3-design: {profile.witnesses[3]}",
                                witness=profile.witnesses[3])
    if profile.lambdas[3] != lam:
        raise VerificationError(f"{what}: ingredient has lambda={profile.lambdas[3]}, need {lam}",
                                witness=(lam, profile.lambdas[3]))
    return filler


# ============= CONSTRUCTION I FAMILIES =============

def family_thm_3_1(v, with_filler=True):
    """3-(2v,5,3(v-2)(v-4)/4) for v = 2 mod 6."""
    _require(admissible_thm_3_1(v), f"thm3_1 needs v = 2 (mod 6) and v > 5, got v={v} (v mod 6 = {v % 6})")
    a1 = (v - 2) // 6
    left, left_core = concatenate_resolution(_round_robin(v), a1)
    right = _cyclic(v, 3)
    pair = _two_sided(v, left, left_core, right, _simple(right), (v - 4) // 2)
    filler = complete_design(v, 5) if with_filler else None
    return ConstructionSpec(v, 5, MODE_I, (pair,), filler=filler, label=f"thm3_1(v={v})")


def family_thm_3_2(f, filler=None):
    """
    3-(2(2^f+1),5,15(2^f-1)) for gcd(f,6) = 1. The filler is an imported
    3-(2^f+1,5,10(2^f-2)) design; without it the construction spec is good for counting only.
    """
    _require(admissible_thm_3_2(f), f"thm3_2 needs gcd(f,6)=1 and f > 1, got f={f} (gcd={math.gcd(f, 6)})")
    v = 2 ** f + 1
    left, left_core = concatenate_resolution(_cyclic(v, 2), 2 ** f - 1)
    right = _baranyai(v, 3)
    pair = _two_sided(v, left, left_core, right, _simple(right), 5)
    if filler is not None:
        filler = _checked_filler(filler, v, 5, THM_3_2_FILLER_FACTOR * (2 ** f - 2), "thm3_2")
    return ConstructionSpec(v, 5, MODE_I, (pair,), filler=filler, label=f"thm3_2(f={f})")


def family_thm_3_3(v, m):
    """3-(2v,7,35v(v-2)(v-3)m/4) from two pairs; Theta = Delta so no filler."""
    _require(admissible_thm_3_3(v),
             f"thm3_3 needs v = 4, 8, 28, 32, 44 or 52 (mod 60), got v={v} (v mod 60 = {v % 60})")
    _require(m >= 1 and 30 * m <= v - 1, f"thm3_3 needs 1 <= m <= (v-1)/30, got m={m} for v={v}")
    a1, rem = divmod(math.comb(v - 2, 3), 20)
    _require(rem == 0, f"thm3_3 needs a1 = C(v-2,3)/20 to be an integer, got C({v - 2},3) = {math.comb(v - 2, 3)}")
    d1, d1_core = concatenate_resolution(_round_robin(v), a1)
    d3 = _cyclic(v, 5)
    d2, d2_core = concatenate_resolution(_cyclic(v, 3), v - 3)
    d4 = _baranyai(v, 4)
    pairs = (
        _two_sided(v, d1, d1_core, d3, _simple(d3), 30 * m),
        _two_sided(v, d2, d2_core, d4, _simple(d4), (v + 10) * m),
    )
    return ConstructionSpec(v, 7, MODE_I, pairs, label=f"thm3_3(v={v}, m={m})")


# ============= CONSTRUCTION II FAMILIES =============

def family_thm_3_4(f, lam, filler=None):
    """3-(2(2^f+1),6,(2^f-1)lam/2) with the Baranyai classes of all triples as half pair."""
    _require(admissible_thm_3_4(f), f"thm3_4 needs gcd(f,6)=1 and f > 1, got f={f} (gcd={math.gcd(f, 6)})")
    _require(lam in THM_3_4_LAMBDAS, f"thm3_4 needs lambda in {set(THM_3_4_LAMBDAS)}, got {lam}")
    v = 2 ** f + 1
    half = _baranyai(v, 3)
    epsilon, s = choose_annulus(half.w, lam // 2)
    if filler is not None:
        filler = _checked_filler(filler, v, 6, lam * (2 ** f - 2) // 3, "thm3_4")
    return ConstructionSpec(v, 6, MODE_II, (), half_pair=HalfPair(half, _simple(half), epsilon, s),
                            filler=filler, label=f"thm3_4(f={f}, lambda={lam})")


def _gen_2k_multiplier(v, k, lam):
    denominator = 2 * math.comb(v - 3, k - 2)
    if lam % denominator:
        raise ParameterError(f"m = Lambda/(2*C(v-3,k-2)) = {lam}/{denominator} is not an integer")
    m = lam // denominator
    bound = Fraction(math.comb(v - 1, k - 1), k)
    if not 1 <= m <= bound:
        raise ParameterError(f"m = {m} must satisfy 1 <= m <= C(v-1,k-1)/k = {bound}")
    return m


def _gen_2k_spec(v, k, lam, filler, label):
    _require(k >= 2 and v > 2 * k, f"needs v > 2k, got v={v}, k={k}")
    _require(math.gcd(v, k) == 1, f"needs gcd(v,k)=1, got gcd({v},{k})={math.gcd(v, k)}")
    m = _gen_2k_multiplier(v, k, lam)
    half = _cyclic(v, k)
    epsilon, s = choose_annulus(half.w, m)
    return ConstructionSpec(v, 2 * k, MODE_II, (), half_pair=HalfPair(half, _simple(half), epsilon, s),
                            filler=filler, label=label)


def family_gen_2k(v, k, filler):
    """Cyclic orbits of k-subsets as half pair; m is read off the filler's counted lambda."""
    _require(filler.v == v and filler.k == 2 * k,
             f"filler must be a 3-({v},{2 * k},Lambda) design, got v={filler.v}, k={filler.k}")
    simple = is_simple(filler)
    if not simple:
        raise VerificationError(f"gen2k filler repeats block {simple.witness}", witness=simple.witness)
    lam = triple_lambda(filler)
    return _gen_2k_spec(v, k, lam, filler, f"gen2k(v={v}, k={k}, Lambda={lam})")


def family_cor_2k(v, k, with_filler=True):
    """The general 2k family with the complete 3-(v,2k,C(v-3,2k-3)) design as filler."""
    _require(k in (3, 4, 5), f"cor2k covers k = 3, 4, 5, got k={k}")
    _require(admissible_cor_2k(v, k), {
        3: f"cor2k(k=3) needs v = 1, 4, 5, 8 (mod 12), got v={v}",
        4: f"cor2k(k=4) needs v = 1, 5, 7, 11, 15, 17 (mod 20), got v={v}",
        5: f"cor2k(k=5) needs gcd(v,5)=1, v = 0, 1, 6, 7 (mod 8) and v = 0, 1, 2, 6 (mod 7), got v={v}",
    }[k])
    lam = math.comb(v - 3, 2 * k - 3)
    filler = complete_design(v, 2 * k) if with_filler else None
    return _gen_2k_spec(v, k, lam, filler, f"cor2k(v={v}, k={k})")


def compute_AB(v, k):
    """
    A and B from their defining expressions; Theta* - Delta* = -A z1 + B z2
    for the two-pair family below.
    """
    _require(k >= 3 and v > k + 1, f"compute_AB needs k >= 3 and v > k+1, got v={v}, k={k}")
    _require(math.gcd(v, 2 * k) == 1, f"needs gcd(v,2k)=1, got gcd({v},{2 * k})={math.gcd(v, 2 * k)}")
    _require(math.gcd(v, k + 1) == 1, f"needs gcd(v,k+1)=1, got gcd({v},{k + 1})={math.gcd(v, k + 1)}")
    A = math.comb(v - 3, 2 * k - 3) * Fraction(v * (4 * k * k - 10 * k + 2) + 8 * k, (2 * k - 2) * (2 * k - 1))
    B = 2 * math.comb(v - 3, k - 2) * Fraction(v - k - 1, k - 1)
    return ABPair(A, B)


def family_thm_AB(v, k, z1):
    """
    Mode II, k_total = 2(k+1): copies of the cyclic (1,2)-resolution of K_v
    against cyclic 2k-orbits, and cyclic (k+1)-orbits as half pair with
    z2 = z1 * A/B so that Theta* = Delta*.
    """
    ab = compute_AB(v, k)
    _require(v > 2 * k, f"thm_ab needs v > 2k, got v={v}, k={k}")
    ratio = ab.ratio
    _require(ratio.denominator == 1, f"thm_ab needs A/B integral, got A/B = {ratio}")
    _require(1 <= z1 <= (v - 1) // 2, f"thm_ab needs 1 <= z1 <= (v-1)/2 = {(v - 1) // 2}, got z1={z1}")
    z2 = z1 * int(ratio)
    z2_max = Fraction(math.comb(v - 1, k), k + 1)
    _require(1 <= z2 <= z2_max, f"z2 = z1*A/B = {z2} must satisfy 1 <= z2 <= C(v-1,k)/(k+1) = {z2_max}")
    a1, rem = divmod(math.comb(v - 2, 2 * k - 2), k * (2 * k - 1))
    _require(rem == 0, f"a1 = C(v-2,2k-2)/(k(2k-1)) is not an integer for v={v}, k={k}")
    d1, d1_core = concatenate_resolution(_cyclic(v, 2), a1)
    d3 = _cyclic(v, 2 * k)
    half = _cyclic(v, k + 1)
    epsilon, s = choose_annulus(half.w, z2)
    return ConstructionSpec(
        v, 2 * (k + 1), MODE_II,
        (_two_sided(v, d1, d1_core, d3, _simple(d3), z1),),
        half_pair=HalfPair(half, _simple(half), epsilon, s),
        label=f"thm_ab(v={v}, k={k}, z1={z1})",
    )


def family_cor_ab(v, k, m):
    """thm_ab with z1 = m on the residues where A/B is integral."""
    _require(k in COR_AB_RESIDUES, f"cor_ab covers k = 3, 4, got k={k}")
    modulus, residues = COR_AB_RESIDUES[k]
    _require(admissible_cor_ab(v, k), f"cor_ab(k={k}) needs v mod {modulus} in {residues}, got v={v}")
    _require(1 <= m <= (v - 1) // 2, f"cor_ab needs 1 <= m <= (v-1)/2, got m={m}")
    if k == 3:
        direct, simplified = compute_AB(v, k).ratio, Fraction((v - 5) * (v - 3), 15)
        if direct != simplified:
            logger.warning("cor_ab(v=%d, k=3): A/B = %s from the defining A and B, but the simplified "
                           "form (v-5)(v-3)/15 gives %s; using %s", v, direct, simplified, direct)
    return family_thm_AB(v, k, m)


def solve_z(A, B, z1_max, z2_max):
    """All (z1, z2) with A z1 = B z2 inside the bounds, ascending."""
    A, B = Fraction(A), Fraction(B)
    if A <= 0 or B <= 0:
        raise ParameterError(f"solve_z needs A, B > 0, got A={A}, B={B}")
    ratio = A / B
    step1, step2 = ratio.denominator, ratio.numerator
    out = []
    z1, z2 = step1, step2
    while z1 <= z1_max and z2 <= z2_max:
        out.append((z1, z2))
        z1 += step1
        z2 += step2
    return out


# ============= CLOSED FORMS =============

def closed_form_lambda(request):
    """The lambda each family's statement promises, as an exact Fraction."""
    fam, v, f, k, m = request.family, request.v, request.f, request.k, request.m
    if fam == "thm3_1":
        return Fraction(3, 4) * (v - 2) * (v - 4)
    if fam == "thm3_2":
        return Fraction(15 * (2 ** f - 1))
    if fam == "thm3_3":
        return Fraction(35, 4) * v * (v - 2) * (v - 3) * m
    if fam == "thm3_4":
        return Fraction((2 ** f - 1) * request.lam, 2)
    if fam in ("gen2k", "cor2k"):
        lam = request.lam if fam == "gen2k" else math.comb(v - 3, 2 * k - 3)
        return Fraction(k * (v - 2) * lam, 2 * (v - k))
    if fam == "thm_ab":
        z1 = request.z1
        z2 = z1 * compute_AB(v, k).ratio
        a1 = Fraction(math.comb(v - 2, 2 * k - 2), k * (2 * k - 1))
        return ((2 * k * a1 + 2 * math.comb(v - 2, 2 * k - 2)) * z1
                + (k + 1) * math.comb(v - 2, k - 1) * z2)
    if fam == "cor_ab":
        if k == 3:
            return Fraction(7, 30) * v * (v - 2) * (v - 3) * (v - 5) * m
        return Fraction(81 * v * math.comb(v - 2, 6) * m, 7 * (v - 5))
    raise ParameterError(f"unknown family '{fam}'")
