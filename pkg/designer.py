# designer.py
import argparse
import math
import sys

from core.designs import is_simple, lambda_profile
from core.errors import DesignError, DesignFormatError
from core.files import (
    read_design, read_provenance, read_resolution, write_design, write_provenance, write_resolution,
)
from core.resolutions import baranyai_parallelism, cyclic_orbit_resolution, round_robin_one_factorization
from core.settings import configure_logging, load_settings
from constructions.catalog import FAMILY_CATALOG, build_family
from constructions.engine import compute_counts, construct_and_verify
from constructions.families import FamilyRequest, compute_AB, solve_z
from constructions.resolvability import (
    check_resolution_claims, cell_sigmas, find_multipliers, partition_constructed, resolvability_claim,
)
from reporting.summary import DesignReport, summary_report


class DesignWorkbench:
    def __init__(self, settings=None, out=None, err=None):
        self.settings = settings or load_settings()
        self.out = out or sys.stdout
        self.err = err or sys.stderr

    def say(self, text=""):
        print(text, file=self.out)

    # ============= FAMILIES =============

    def _request(self, args):
        ingredient = None
        if getattr(args, "ingredient", None):
            ingredient = read_design(args.ingredient, threads=self.settings.threads)
            self.say(f"📁 Ingredient {args.ingredient}: {ingredient!r}")
        return FamilyRequest(family=args.family, v=args.v, f=args.f, k=args.k, m=args.m,
                             z1=args.z1, lam=args.lam, ingredient=ingredient)

    def construct(self, args):
        request = self._request(args)
        spec = build_family(request)
        self.say(f"🚀 Building {spec.label} ...")
        result = construct_and_verify(spec, threads=self.settings.threads, progress=True)
        declare = {"t": 3, "lambda": result.profile.lambdas[3], "simple": True}
        write_design(result.design, args.out, fmt=args.format, declare=declare)
        self.say(f"✅ {result.profile.describe()}, simple, {result.design.b} blocks")
        self.say(f"📁 Design saved to: {args.out}")
        if args.provenance:
            meta = {"family": spec.label, "v": result.design.v, "k": result.design.k,
                    "lambda": int(result.profile.lambdas[3]),
                    "request": {"family": request.family, "v": request.v, "k": request.k, "m": request.m}}
            write_provenance(result.provenance, args.provenance, meta=meta)
            self.say(f"📁 Provenance saved to: {args.provenance}")
        if args.report:
            path, _ = DesignReport(self.settings.output_dir).save(
                result.summary, result.profile, result.provenance, title=spec.label)
            self.say(f"📊 Report saved to: {path}")
        return 0

    def counts(self, args):
        spec = build_family(self._request(args), counts_only=True)
        summary = compute_counts(spec)
        theta = "Theta*" if summary.mode == "II" else "Theta"
        delta = "Delta*" if summary.mode == "II" else "Delta"
        self.say(f"📊 {spec.label}: {theta}={summary.theta} {delta}={summary.delta} Lambda={summary.lam}")
        if args.report:
            path, _ = DesignReport(self.settings.output_dir).save(summary, title=spec.label)
            self.say(f"📊 Report saved to: {path}")
        else:
            self.say(summary_report(summary, title=spec.label))
        return 0

    def solve_ab(self, args):
        ab = compute_AB(args.v, args.k)
        self.say(f"A={ab.A} B={ab.B} ratio={ab.ratio}")
        if ab.ratio <= 0 or ab.ratio.denominator != 1:
            self.say("⚠️ A/B is not a positive integer; no admissible z1")
            return 0
        pairs = solve_z(ab.A, ab.B, (args.v - 1) // 2, math.comb(args.v - 1, args.k) // (args.k + 1))
        if pairs:
            self.say(f"admissible z1: {pairs[0][0]}..{pairs[-1][0]} (z2 = {pairs[0][1]}..{pairs[-1][1]})")
        else:
            self.say("⚠️ no z1 keeps z2 within C(v-1,k)/(k+1)")
        return 0

    # ============= DESIGNS AND RESOLUTIONS =============

    def verify(self, args):
        design = read_design(args.file, fmt=args.format, threads=self.settings.threads)
        profile = lambda_profile(design, args.t, threads=self.settings.threads, progress=True)
        simple = is_simple(design)
        for s in range(args.t + 1):
            value = profile.lambdas[s] if profile.is_design[s] else "not constant"
            self.say(f"  lambda_{s}: {value}")
        label = "simple" if simple else f"not simple (block {simple.witness} repeated)"
        ok = profile.is_t_design and bool(simple)
        self.say(f"{'✅' if ok else '❌'} {profile.describe()}, {label}")
        return 0 if ok else 1

    def resolve_check(self, args):
        r = read_resolution(args.file, classes_path=args.classes, fmt=args.format)
        self.say(f"✅ {r.w} classes of {r.b_per_class} blocks, each a 1-({r.v},{r.k},{r.sigma}) design")
        return 0

    def resolve_build(self, args):
        design = read_design(args.file, fmt=args.format, threads=self.settings.threads)
        provenance, meta = read_provenance(args.spec_from)
        if len(provenance) != design.b:
            raise DesignFormatError(f"provenance has {len(provenance)} rows for {design.b} blocks")
        sigmas = cell_sigmas(design, provenance)
        for ps in sigmas:
            self.say(f"  pair {ps.h}: {ps.cell_count} cells of {ps.cell_size} blocks, sigma={ps.sigma}")
        choice = find_multipliers([p.sigma for p in sigmas], [p.cell_count for p in sigmas])
        resolved = partition_constructed(design, provenance, choice)
        req = meta.get("request") or {}
        claim = None
        if req.get("family") and req.get("m"):
            claim = resolvability_claim(req["family"], req["v"], req["m"], k=req.get("k"))
        check_resolution_claims(resolved, choice, lam=meta.get("lambda"), claim=claim)
        if claim is not None:
            self.say(f"  matches the stated (1,{claim.sigma})-resolvability with m={claim.m}")
        self._write_resolution(resolved, args)
        self.say(f"✅ {resolved.w} classes, sigma={resolved.sigma}, multipliers m={choice.m}")
        return 0

    def generate(self, args):
        if args.command == "baranyai":
            r = baranyai_parallelism(args.v, args.k)
        elif args.command == "orbits":
            r = cyclic_orbit_resolution(args.v, args.k)
        else:
            r = round_robin_one_factorization(args.v)
        self._write_resolution(r, args)
        self.say(f"✅ {r.w} classes of {r.b_per_class} blocks, sigma={r.sigma}")
        return 0

    def _write_resolution(self, r, args):
        classes = args.classes
        if classes is None and not str(args.out).endswith(".json") and args.format != "json":
            classes = f"{args.out}.classes"
        write_resolution(r, args.out, classes_path=classes, fmt=args.format)
        self.say(f"📁 Resolution saved to: {args.out}" + (f" (classes: {classes})" if classes else ""))

    def run(self, args):
        handlers = {
            "construct": self.construct, "counts": self.counts, "solve-ab": self.solve_ab,
            "verify": self.verify, "resolve-check": self.resolve_check, "resolve-build": self.resolve_build,
            "baranyai": self.generate, "orbits": self.generate, "onefactor": self.generate,
        }
        try:
            return handlers[args.command](args)
        except DesignError as e:
            print(f"error[{e.category}]: {e}", file=self.err)
            return e.exit_code
        except OSError as e:
            print(f"error[io]: {e}", file=self.err)
            return 2


def _family_options(p):
    p.add_argument("--family", required=True, choices=[e["id"] for e in FAMILY_CATALOG])
    for name in ("v", "f", "k", "m", "z1", "lam"):
        p.add_argument(f"--{name}", type=int, default=None)
    p.add_argument("--ingredient", default=None, help="filler design file for families that import one")
    p.add_argument("--report", action="store_true", help="write summary_report.txt to the output directory")


def build_parser():
    ap = argparse.ArgumentParser(description="Construct and verify simple 3-designs on 2v points.")
    ap.add_argument("--threads", type=int, default=None, help="worker threads for counting")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a family member, verify it and write it")
    _family_options(p)
    p.add_argument("--out", required=True)
    p.add_argument("--provenance", default=None)
    p.add_argument("--format", choices=["text", "json"], default=None)

    p = sub.add_parser("counts", help="print Theta, Delta and Lambda without assembling blocks")
    _family_options(p)

    p = sub.add_parser("solve-ab", help="print A, B, A/B and the admissible z1")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("verify", help="exhaustive lambda-profile and simplicity check")
    p.add_argument("file")
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--format", choices=["text", "json"], default=None)

    p = sub.add_parser("resolve-check", help="verify a resolution file")
    p.add_argument("file")
    p.add_argument("--classes", default=None)
    p.add_argument("--format", choices=["text", "json"], default=None)

    p = sub.add_parser("resolve-build", help="resolve a filler-free constructed design from its provenance")
    p.add_argument("file")
    p.add_argument("--spec-from", required=True, dest="spec_from")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", default=None)
    p.add_argument("--format", choices=["text", "json"], default=None)

    for name, needs_k in (("baranyai", True), ("orbits", True), ("onefactor", False)):
        p = sub.add_parser(name)
        p.add_argument("--v", type=int, required=True)
        if needs_k:
            p.add_argument("--k", type=int, required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--classes", default=None)
        p.add_argument("--format", choices=["text", "json"], default=None)
    return ap


def main(argv=None, out=None, err=None):
    args = build_parser().parse_args(argv)
    settings = load_settings().with_threads(args.threads)
    configure_logging(settings)
    return DesignWorkbench(settings, out=out, err=err).run(args)


if __name__ == "__main__":
    sys.exit(main())
