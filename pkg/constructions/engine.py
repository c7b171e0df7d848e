"""
Doubling construction: a 3-design on 2v points from resolved ingredient
designs on v points.

Points 0..v-1 form X and v..2v-1 its copy X~. For an ingredient pair
(left, right) and every class pair (i, j) whose circular distance lies in
the annulus [epsilon, s], the cell B(i, j) holds

    type II   A u B~   A in left class i,  B in right class j
    type III  B u A~   (the same pair with the halves swapped)

and a half pair (block size k/2, used on both sides) contributes

    type IV   A u B~   A in class i, B in class j

only. When the cross blocks leave every X-internal triple short by
Lambda > 0, a filler 3-(v,k,Lambda) design and its copy on X~ are added
(type I).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from core.designs import (
    BLOCK_DTYPE, Design, SubsetCounter, canonical_order, incidence_matrix, is_simple, lambda_profile,
    pair_lambda, triple_lambda,
)
from core.errors import ConsistencyError, DesignError, ParameterError, SpecViolation
from core.resolutions import verify_resolution
from core.settings import load_settings

logger = logging.getLogger(__name__)

MODE_I = "I"
MODE_II = "II"

TYPE_I, TYPE_II, TYPE_III, TYPE_IV = 1, 2, 3, 4
BTYPE_NAMES = {TYPE_I: "I", TYPE_II: "II", TYPE_III: "III", TYPE_IV: "IV"}

PROVENANCE_COLUMNS = ["h", "i", "j", "btype"]


# ============= ANNULUS =============

def annulus_width(w, epsilon, s):
    """Number of classes j with epsilon <= d(i, j) <= s, for any fixed i."""
    if epsilon not in (0, 1):
        raise ParameterError(f"epsilon must be 0 or 1, got {epsilon}")
    if not epsilon <= s <= w // 2:
        raise ParameterError(f"annulus radius s={s} must satisfy {epsilon} <= s <= {w // 2} for w={w}")
    if 2 * s < w:
        return 2 * s + 1 - epsilon
    return 2 * s - epsilon


def choose_annulus(w, z):
    """Canonical (epsilon, s) with annulus_width(w, epsilon, s) == z."""
    if not 1 <= z <= w:
        raise ParameterError(f"annulus width z={z} must lie in 1..{w}")
    if z % 2:
        return 0, (z - 1) // 2
    if z < w:
        return 1, z // 2
    return 0, w // 2


def annulus_offsets(w, epsilon, s):
    """Sorted offsets delta in 0..w-1 such that class i pairs with class i+delta (mod w)."""
    annulus_width(w, epsilon, s)
    return sorted({d % w for d in range(-s, s + 1) if abs(d) >= epsilon})


# ============= SPEC TYPES =============

@dataclass(frozen=True)
class PairSpec:
    left: object
    right: object
    left_core: object
    right_core: object
    epsilon: int
    s: int

    @property
    def w(self):
        return self.left.w

    @property
    def z(self):
        return annulus_width(self.w, self.epsilon, self.s)

    @property
    def k_left(self):
        return self.left.k

    @property
    def k_right(self):
        return self.right.k


@dataclass(frozen=True)
class HalfPair:
    """D_n = D_2n with block size k/2; only type IV blocks are formed."""

    design: object
    core: object
    epsilon: int
    s: int

    @property
    def w(self):
        return self.design.w

    @property
    def z(self):
        return annulus_width(self.w, self.epsilon, self.s)


@dataclass(frozen=True)
class ConstructionSpec:
    v: int
    k: int
    mode: str
    pairs: tuple
    half_pair: HalfPair = None
    filler: Design = None
    label: str = ""

    def ingredients(self):
        """(h, left, right, epsilon, s, is_half) for every pair, half pair last."""
        out = [(h, p.left, p.right, p.epsilon, p.s, False) for h, p in enumerate(self.pairs, start=1)]
        if self.half_pair is not None:
            hp = self.half_pair
            out.append((len(self.pairs) + 1, hp.design, hp.design, hp.epsilon, hp.s, True))
        return out


@dataclass(frozen=True)
class Violation:
    pair: object
    rule: str
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, pair, rule, message):
        self.violations.append(Violation(pair, rule, message))

    def rules(self):
        return [v.rule for v in self.violations]

    def raise_if_failed(self):
        if self.violations:
            raise SpecViolation(self.violations)


@dataclass(frozen=True)
class PairCounts:
    h: int
    half: bool
    k_left: int
    k_right: int
    b_left: int
    b_right: int
    u_left: int
    u_right: int
    lam_left: int
    lam_right: int
    lam2_left: int
    lam2_right: int
    z: int
    w: int

    @property
    def theta_part(self):
        if self.half:
            return self.lam2_left * self.u_left * self.z
        return (self.lam2_left * self.u_right + self.lam2_right * self.u_left) * self.z

    @property
    def delta_part(self):
        if self.half:
            return self.lam_left * self.b_left * self.z
        return (self.lam_left * self.b_right + self.lam_right * self.b_left) * self.z

    @property
    def cell_size(self):
        return self.b_left * self.b_right if self.half else 2 * self.b_left * self.b_right

    @property
    def cells(self):
        return self.z * self.w


@dataclass(frozen=True)
class CountingSummary:
    v: int
    k: int
    mode: str
    pairs: tuple
    theta: int
    delta: int

    @property
    def lam(self):
        """Lambda = Theta - Delta, the filler's required index."""
        return self.theta - self.delta

    @property
    def cross_blocks(self):
        return sum(p.cells * p.cell_size for p in self.pairs)

    @property
    def expected_blocks(self):
        num = self.theta * math.comb(2 * self.v, 3)
        den = math.comb(self.k, 3)
        if num % den:
            raise ConsistencyError(f"Theta*C(2v,3)={num} is not divisible by C(k,3)={den}")
        return num // den


# ============= VALIDATION =============

def _offsets_residues_distinct(w, epsilon, s, t):
    offsets = annulus_offsets(w, epsilon, s)
    return len({d % t for d in offsets}) == len(offsets)


def _check_side(report, label, side, core, v):
    if side.v != v:
        report.add(label, "point-count", f"ingredient on {side.v} points, expected v={v}")
    if core.a * core.t != side.w:
        report.add(label, "concatenation", f"core t={core.t}, a={core.a} does not give w={side.w} classes")
    elif core.a > 1:
        # classes must repeat with period t
        for c in range(core.t, side.w):
            if not np.array_equal(side.design.blocks[side.classes[c]], side.design.blocks[side.classes[c % core.t]]):
                report.add(label, "concatenation", f"class {c + 1} does not repeat class {c % core.t + 1}")
                break


def _check_annulus(report, label, w, epsilon, s):
    try:
        z = annulus_width(w, epsilon, s)
    except ParameterError as e:
        report.add(label, "annulus", str(e))
        return None
    if not 1 <= z <= w:
        report.add(label, "z-range", f"z={z} outside 1..{w}")
    return z


def validate_spec(spec, check_filler=True, simplicity_guard=True, check_resolutions=True):
    """
    Check every construction hypothesis; returns a ValidationReport listing
    (pair, rule, message) for each failure. ``check_filler=False`` skips the
    filler rules so counts can be evaluated before a filler exists.
    """
    report = ValidationReport()
    if spec.mode not in (MODE_I, MODE_II):
        report.add(None, "mode", f"unknown mode {spec.mode!r}")
        return report
    if spec.mode == MODE_I and spec.half_pair is not None:
        report.add("half", "mode-II-half", "mode I takes no half pair")
    if spec.mode == MODE_II:
        if spec.k % 2:
            report.add("half", "mode-II-half", f"mode II needs k even, got k={spec.k}")
        if spec.half_pair is None:
            report.add("half", "mode-II-half", "mode II needs a half pair")
    if not spec.pairs and spec.half_pair is None:
        report.add(None, "block-size", "no ingredient pairs")

    sizes = []
    for h, pair in enumerate(spec.pairs, start=1):
        if pair.k_left + pair.k_right != spec.k:
            report.add(h, "block-size", f"k_left + k_right = {pair.k_left} + {pair.k_right} != k={spec.k}")
        if not 2 * pair.k_left < spec.k:
            report.add(h, "mode-I-below-half", f"k_left={pair.k_left} is not below k/2={spec.k / 2}")
        sizes.append(pair.k_left)
        _check_side(report, h, pair.left, pair.left_core, spec.v)
        _check_side(report, h, pair.right, pair.right_core, spec.v)
        if pair.left.w != pair.right.w:
            report.add(h, "w-mismatch", f"left has w={pair.left.w} classes, right has w={pair.right.w}")
            continue
        if pair.left_core.a > 1 and pair.right_core.a > 1:
            report.add(h, "simple-side", "both sides are concatenations; one must be simple")
        for side, core, name in ((pair.left, pair.left_core, "left"), (pair.right, pair.right_core, "right")):
            if core.a == 1 and not is_simple(side.design):
                report.add(h, "simple-side", f"{name} side declared simple but has repeated blocks")
        z = _check_annulus(report, h, pair.w, pair.epsilon, pair.s)
        if z is None or not simplicity_guard:
            continue
        for core, name in ((pair.left_core, "left"), (pair.right_core, "right")):
            if core.a > 1 and not _offsets_residues_distinct(pair.w, pair.epsilon, pair.s, core.t):
                report.add(h, "simplicity-guard",
                           f"z={z} (epsilon={pair.epsilon}, s={pair.s}) meets two copies of a {name} class "
                           f"(t={core.t}); need z <= t for epsilon=0 and z < t for epsilon=1")

    if spec.half_pair is not None:
        hp = spec.half_pair
        if 2 * hp.design.k != spec.k:
            report.add("half", "block-size", f"half pair block size {hp.design.k} is not k/2")
        sizes.append(hp.design.k)
        _check_side(report, "half", hp.design, hp.core, spec.v)
        if hp.core.a != 1 or not is_simple(hp.design.design):
            report.add("half", "simple-side", "the half pair design must be simple")
        _check_annulus(report, "half", hp.w, hp.epsilon, hp.s)
    if any(a >= b for a, b in zip(sizes, sizes[1:])):
        report.add(None, "distinct-sizes", f"pair block sizes {sizes} are not strictly increasing")

    if check_resolutions and report.ok:
        for h, left, right, _, _, half in spec.ingredients():
            for side in ((left,) if half else (left, right)):
                try:
                    sigma = verify_resolution(side)
                except DesignError as e:
                    report.add(h, "resolution", str(e))
                    continue
                if sigma != side.sigma:
                    report.add(h, "resolution", f"recorded sigma={side.sigma}, counted {sigma}")

    if check_filler and report.ok:
        _check_filler(report, spec)
    return report


def _check_filler(report, spec):
    summary = _counts(spec)
    lam = summary.lam
    if lam < 0:
        report.add(None, "negative-lambda", f"Theta={summary.theta} < Delta={summary.delta}")
        return
    if lam == 0:
        if spec.filler is not None:
            report.add(None, "filler", "Theta = Delta, so no filler design may be given")
        return
    if spec.filler is None:
        report.add(None, "filler-missing", f"a simple 3-({spec.v},{spec.k},{lam}) filler is required")
        return
    f = spec.filler
    if (f.v, f.k) != (spec.v, spec.k):
        report.add(None, "filler", f"filler has v={f.v}, k={f.k}; need v={spec.v}, k={spec.k}")
        return
    if not is_simple(f):
        report.add(None, "filler", "filler design is not simple")
    profile = lambda_profile(f, 3)
    if not profile.is_design[3]:
        report.add(None, "filler", f"filler is not a 3-design: {profile.witnesses[3]}")
    elif profile.lambdas[3] != lam:
        report.add(None, "filler", f"filler has lambda={profile.lambdas[3]}, need Lambda={lam}")


def require_valid(spec, **kwargs):
    validate_spec(spec, **kwargs).raise_if_failed()


# ============= COUNTING =============

def _pair_counts(h, left, right, epsilon, s, half):
    w = left.w
    return PairCounts(
        h=h, half=half, k_left=left.k, k_right=right.k,
        b_left=left.b_per_class, b_right=right.b_per_class,
        u_left=left.u, u_right=right.u,
        lam_left=triple_lambda(left.design, left.profile),
        lam_right=triple_lambda(right.design, right.profile),
        lam2_left=pair_lambda(left.design, left.profile),
        lam2_right=pair_lambda(right.design, right.profile),
        z=annulus_width(w, epsilon, s), w=w,
    )


def _counts(spec):
    pairs = tuple(_pair_counts(*ing) for ing in spec.ingredients())
    theta = sum(p.theta_part for p in pairs)
    delta = sum(p.delta_part for p in pairs)
    return CountingSummary(spec.v, spec.k, spec.mode, pairs, theta, delta)


def compute_counts(spec):
    """
    Exact Theta and Delta from the ingredients' counted lambda, lambda_2, u and
    b. Structural hypotheses are checked first; the filler is not needed.
    """
    require_valid(spec, check_filler=False, check_resolutions=False)
    summary = _counts(spec)
    logger.info("%s: Theta=%d Delta=%d Lambda=%d", spec.label or "spec", summary.theta, summary.delta, summary.lam)
    return summary


# ============= ASSEMBLY =============

def cross(first, second, v):
    """Every union A u (B + v) with A a row of ``first`` and B a row of ``second``."""
    return np.hstack([
        np.repeat(first, len(second), axis=0),
        np.tile(second.astype(BLOCK_DTYPE) + v, (len(first), 1)),
    ])


def iter_cells(spec):
    """
    Yield (h, i, j, blocks, btypes) for every cell, pairs in order, then i
    ascending, then j ascending. Class indices are 1-based.
    """
    v = spec.v
    for h, left, right, epsilon, s, half in spec.ingredients():
        w = left.w
        offsets = annulus_offsets(w, epsilon, s)
        for i in range(1, w + 1):
            left_i = left.class_blocks(i)
            for j in sorted((i - 1 + d) % w + 1 for d in offsets):
                if half:
                    blocks = cross(left_i, left.class_blocks(j), v)
                    btypes = np.full(len(blocks), TYPE_IV, dtype=np.int8)
                else:
                    right_j = right.class_blocks(j)
                    second = cross(right_j, left_i, v)
                    blocks = np.vstack([cross(left_i, right_j, v), second])
                    btypes = np.repeat(np.array([TYPE_II, TYPE_III], dtype=np.int8), len(second))
                yield h, i, j, blocks, btypes


def filler_blocks(spec):
    if spec.filler is None or spec.filler.b == 0:
        return np.empty((0, spec.k), dtype=BLOCK_DTYPE)
    f = spec.filler.blocks
    return np.vstack([f, f.astype(BLOCK_DTYPE) + spec.v])


def assemble(spec, check=True):
    """
    Build the design on 2v points with its provenance table (h, i, j, btype),
    both in canonical block order. ``check=False`` skips validate_spec.
    """
    if check:
        require_valid(spec)
    parts, tags = [], []
    fill = filler_blocks(spec)
    if len(fill):
        parts.append(fill)
        tags.append(np.tile(np.array([0, 0, 0, TYPE_I], dtype=np.int64), (len(fill), 1)))
    for h, i, j, blocks, btypes in iter_cells(spec):
        parts.append(blocks)
        tag = np.empty((len(blocks), 4), dtype=np.int64)
        tag[:, 0], tag[:, 1], tag[:, 2], tag[:, 3] = h, i, j, btypes
        tags.append(tag)
    blocks = np.vstack(parts) if parts else np.empty((0, spec.k), dtype=BLOCK_DTYPE)
    tag = np.vstack(tags) if tags else np.empty((0, 4), dtype=np.int64)
    order = canonical_order(blocks)
    design = Design(2 * spec.v, spec.k, blocks[order])
    provenance = pd.DataFrame(tag[order], columns=PROVENANCE_COLUMNS)
    if check:
        expected = _counts(spec).expected_blocks
        if design.b != expected:
            raise ConsistencyError(f"assembled {design.b} blocks, expected Theta*C(2v,3)/C(k,3) = {expected}")
    logger.info("%s: assembled %d blocks on %d points", spec.label or "spec", design.b, design.v)
    return design, provenance


@dataclass(frozen=True)
class ConstructionResult:
    design: Design
    provenance: pd.DataFrame
    profile: object
    simplicity: object
    summary: CountingSummary


def construct_and_verify(spec, threads=None, progress=False):
    """Assemble and confirm by exhaustive counting: a simple 3-design with lambda = Theta."""
    summary = compute_counts(spec)
    design, provenance = assemble(spec)
    profile = lambda_profile(design, 3, threads=threads, progress=progress)
    if not profile.is_design[3]:
        raise ConsistencyError(f"assembled design is not a 3-design: {profile.witnesses[3]}")
    if profile.lambdas[3] != summary.theta:
        raise ConsistencyError(f"assembled design has lambda={profile.lambdas[3]}, expected Theta={summary.theta}")
    simplicity = is_simple(design)
    if not simplicity:
        raise ConsistencyError(f"assembled design repeats block {simplicity.witness}")
    return ConstructionResult(design, provenance, profile, simplicity, summary)


# ============= STREAMING =============

def stream_profile(spec, threads=None, chunk_size=None, progress=False):
    """One pass over iter_cells and the filler; the design is never materialized."""
    settings = load_settings()
    threads = threads or settings.threads
    chunk_size = chunk_size or settings.chunk_size
    counter = SubsetCounter(2 * spec.v, spec.k, 3)
    fill = filler_blocks(spec)
    if len(fill):
        counter.add(fill, threads=threads, chunk_size=chunk_size)
    buffer, held = [], 0
    for _, _, _, blocks, _ in iter_cells(spec):
        buffer.append(blocks)
        held += len(blocks)
        if held >= chunk_size * max(threads, 1):
            counter.add(np.vstack(buffer), threads=threads, chunk_size=chunk_size, progress=progress)
            buffer, held = [], 0
    if buffer:
        counter.add(np.vstack(buffer), threads=threads, chunk_size=chunk_size, progress=progress)
    return counter.profile()


def _class_containment(resolved, points, class_ids, inc):
    if len(points) == 0:
        hits = np.ones(resolved.design.b, dtype=np.int64)
    else:
        hits = inc[:, points].all(axis=1).astype(np.int64)
    return np.bincount(class_ids, weights=hits, minlength=resolved.w).astype(np.int64)


def sampled_triple_coverage(spec, triples):
    """
    Exact number of blocks of the assembled design through each triple of
    0..2v-1, from per-class containment counts. No block is enumerated.
    """
    v = spec.v
    cache = {}

    def prepared(resolved):
        key = id(resolved)
        if key not in cache:
            cache[key] = (resolved.class_ids(), incidence_matrix(resolved.design))
        return cache[key]

    filler_inc = incidence_matrix(spec.filler) if spec.filler is not None else None
    results = []
    for triple in triples:
        pts = sorted(int(x) for x in triple)
        if len(set(pts)) != 3 or pts[0] < 0 or pts[-1] >= 2 * v:
            raise ParameterError(f"{tuple(triple)} is not a triple of 0..{2 * v - 1}")
        in_x = [x for x in pts if x < v]
        in_y = [x - v for x in pts if x >= v]
        total = 0
        for _, left, right, epsilon, s, half in spec.ingredients():
            offsets = annulus_offsets(left.w, epsilon, s)
            l_ids, l_inc = prepared(left)
            r_ids, r_inc = prepared(right)
            lx = _class_containment(left, in_x, l_ids, l_inc)
            ly = _class_containment(left, in_y, l_ids, l_inc)
            rx = _class_containment(right, in_x, r_ids, r_inc)
            ry = _class_containment(right, in_y, r_ids, r_inc)
            for d in offsets:
                # class i meets class i+d
                total += int(np.dot(lx, np.roll(ry, -d)))
                if not half:
                    total += int(np.dot(ly, np.roll(rx, -d)))
        if filler_inc is not None and (not in_x or not in_y):
            inside = in_x or in_y
            total += int(filler_inc[:, inside].all(axis=1).sum())
        results.append(total)
    return results


def mirror(design):
    """Image of ``design`` under x <-> x + v on its 2v points."""
    v = design.v // 2
    swapped = np.where(design.blocks < v, design.blocks + v, design.blocks - v)
    return Design.from_blocks(design.v, design.k, np.sort(swapped, axis=1))
