"""Command-line front end.

Every flag can also be set through an environment variable named
CLIFFRANK_<FLAG> (upper case, dashes as underscores), e.g.
CLIFFRANK_PRIME=97 or CLIFFRANK_BUDGET_DEG=3.  Command-line flags win.
"""

import argparse
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from .curve import CurveError, Divisor, riemann_roch_space, tower_h0, tower_h1
from .linser import (LineBundle, canonical_bundle, cliff_bundle, cliff_pair, h0_bundle,
                     mult_map, petri_sides, very_ample, base_point_free)
from .report import FAIL, INFO, PASS, Record, Report, verdict
from .specfile import CurveSpec, SpecError, TowerSpec, build_curve, build_tower, parse_file

ENV_PREFIX = "CLIFFRANK_"
COMMANDS = ("info", "rr", "cliff", "shiffer", "detpres", "secant", "koszul", "suite")


def _env(name, default, cast=str):
    val = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    return default if val is None else cast(val)


def bundled_specs():
    return sorted(p.name for p in resources.files("cliffrank").joinpath("data").iterdir()
                  if p.name.endswith((".curve", ".tower")))


def resolve_spec(path):
    p = Path(path)
    if p.exists():
        return p
    data = resources.files("cliffrank").joinpath("data")
    for name in (path, path + ".curve", path + ".tower"):
        cand = data.joinpath(name)
        if cand.is_file():
            return Path(str(cand))
    raise FileNotFoundError(f"no spec file {path!r} (bundled: {', '.join(bundled_specs())})")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", default=_env("spec", None), help="curve or tower spec (path or bundled name)")
    common.add_argument("--prime", type=int, default=_env("prime", None, int), help="override the characteristic")
    common.add_argument("--seed", type=int, default=_env("seed", 0, int))
    common.add_argument("--budget-deg", type=int, default=_env("budget_deg", None, int),
                        help="largest divisor degree in Clifford searches")
    common.add_argument("--trials", type=int, default=_env("trials", 200, int))
    common.add_argument("--parallel", type=int, default=_env("parallel", 1, int))
    common.add_argument("--cap", type=int, default=_env("cap", 10 ** 6, int),
                        help="candidate count below which searches are exhaustive")
    common.add_argument("--oversample", type=int, default=_env("oversample", 4, int))
    common.add_argument("--max-entries", type=int, default=_env("max_entries", 5 * 10 ** 7, int))
    common.add_argument("--json", default=_env("json", None), help="write the JSON mirror here")
    common.add_argument("--out", default=_env("out", None), help="write the text report here")

    parser = argparse.ArgumentParser(prog="cliffrank", description="Exact checks of linear-series, "
                                     "Shiffer-variation, secant and Koszul statements on y^n = f(x).")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("info", parents=[common], help="genus, infinity, canonical degree, point count")
    p = sub.add_parser("rr", parents=[common], help="Riemann-Roch dimensions of named divisors")
    p.add_argument("--divisor", action="append", default=None)
    p = sub.add_parser("cliff", parents=[common], help="Clifford index of K or K(D)")
    p.add_argument("--twist", default=None, help="named divisor D; the bundle is K(D)")
    p = sub.add_parser("shiffer", parents=[common], help="rank bounds and minimal-rank variations")
    p.add_argument("--divisor", required=False, default=None)
    p.add_argument("--twist", default=None)
    p = sub.add_parser("detpres", parents=[common], help="minors versus secant ideals")
    p.add_argument("--degrees", default="6,6")
    p.add_argument("--k", type=int, default=1)
    p = sub.add_parser("secant", parents=[common], help="secant points versus rank loci")
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--twist", default=None)
    p.add_argument("--hassett", default=None, help="named divisor D for a witness on K(D)")
    p = sub.add_parser("koszul", parents=[common], help="Koszul cohomology table")
    p.add_argument("--pmax", type=int, default=3)
    p.add_argument("--qmax", type=int, default=3)
    p.add_argument("--twist", default=None)
    sub.add_parser("suite", parents=[common], help="standard battery of checks for the spec")
    return parser


# ---------------------------------------------------------------------------
# context

class Context:
    def __init__(self, opts):
        if not opts.get("spec"):
            raise SpecError("<none>", 0, "no --spec given")
        self.opts = opts
        self.path = resolve_spec(opts["spec"])
        self.spec = parse_file(self.path)
        self.curve = self.divisors = self.tower = None
        if isinstance(self.spec, TowerSpec):
            self.tower = build_tower(self.spec)
        else:
            self.curve, self.divisors = build_curve(self.spec, opts.get("prime"))

    def divisor(self, name):
        if name not in self.divisors:
            raise SpecError(str(self.path), 0, f"no divisor named {name!r}")
        return self.divisors[name]

    def bundle(self, twist):
        K = canonical_bundle(self.curve)
        if twist is None:
            return K, None
        D = self.divisor(twist)
        return LineBundle(K.representative + D), D

    def need_curve(self):
        if self.curve is None:
            raise SpecError(str(self.path), 0, "this command needs a curve spec")


# ---------------------------------------------------------------------------
# checks; each returns a list of records

def check_info(ctx):
    if ctx.tower is not None:
        return _tower_info(ctx)
    C = ctx.curve
    seed = ctx.opts["seed"]
    recs = [Record("info.genus", "genus from Riemann-Hurwitz agrees with the closed form", PASS,
                   {"genus": C.genus, "n": C.n, "deg_f": C.m}, seed),
            Record("info.infinity", "structure over infinity", INFO,
                   {"kind": C.infinity_kind, "places": len(C.infinite_places)}, seed)]
    K = C.canonical_divisor()
    recs.append(Record("info.canonical", "deg K = 2g - 2 and h0(K) = g", verdict(
        K.degree == 2 * C.genus - 2 and riemann_roch_space(C, K).dim == C.genus),
        {"deg_K": K.degree, "h0_K": riemann_roch_space(C, K).dim}, seed))
    if C.field.char:
        recs.append(Record("info.points", "number of rational places", INFO,
                           {"p": C.field.char, "places": len(C.rational_places())}, seed, "exhaustive"))
    return recs


def _tower_info(ctx):
    T = ctx.tower
    seed = ctx.opts["seed"]
    recs = []
    for layer in range(len(T.layers)):
        g = T.genus(layer)
        recs.append(Record(f"info.tower.layer{layer + 1}.genus", "pushforward genus agrees with Riemann-Hurwitz",
                           verdict(g == T.hurwitz_genus(layer)), {"genus": g, "hurwitz": T.hurwitz_genus(layer),
                                                                  "pencil_degree": T.pencil_degree(layer)}, seed))
        dims = {f"h0_{k}F": tower_h0(T, k, layer) for k in (1, 2)}
        dims.update({f"h1_{k}F": tower_h1(T, k, layer) for k in (1, 2)})
        ok = all(tower_h0(T, k, layer) - tower_h1(T, k, layer) == k * T.pencil_degree(layer) - g + 1 for k in (1, 2))
        recs.append(Record(f"info.tower.layer{layer + 1}.rr", "h0(kF) - h1(kF) = k deg F - g + 1",
                           verdict(ok), dims, seed))
    return recs


def check_rr(ctx, names=None):
    ctx.need_curve()
    C = ctx.curve
    K = C.canonical_divisor()
    seed = ctx.opts["seed"]
    names = names or sorted(ctx.divisors)
    recs = []
    for name in names:
        D = ctx.divisor(name)
        a, b = riemann_roch_space(C, D).dim, riemann_roch_space(C, K - D).dim
        recs.append(Record(f"rr.{name}", "h0(D) - h0(K - D) = deg D - g + 1",
                           verdict(a - b == D.degree - C.genus + 1),
                           {"deg": D.degree, "h0": a, "h1": b}, seed))
    if not C.field.char:
        recs.append(Record("rr.random", "Riemann-Roch on random divisors", INFO,
                           {"reason": "sampling needs a prime field"}, seed))
        return recs
    rng = random.Random(seed)
    bad = 0
    trials = min(ctx.opts["trials"], 20)
    for _ in range(trials):
        pts = C.sample_places(3, rng.randrange(1 << 30))
        D = Divisor({P: rng.randint(-2, 3) for P in pts}) + Divisor({C.infinite_places[0]: rng.randint(-1, 2 * C.genus)})
        if riemann_roch_space(C, D).dim - riemann_roch_space(C, K - D).dim != D.degree - C.genus + 1:
            bad += 1
    recs.append(Record("rr.random", "Riemann-Roch on random divisors", verdict(bad == 0),
                       {"trials": trials, "failures": bad}, seed, "sampled"))
    return recs


def check_cliff(ctx, twist=None):
    ctx.need_curve()
    C = ctx.curve
    L, D = ctx.bundle(twist)
    seed = ctx.opts["seed"]
    va, _ = very_ample(C, L)
    res = cliff_bundle(C, L, ctx.opts.get("budget_deg"), cap=ctx.opts["cap"], seed=seed,
                       require_very_ample=False)
    mode = "exhaustive" if res.certified else "sampled"
    dims = {"value": res.value, "witness": res.witness, "candidates": res.candidates,
            "excluded_codim1": res.excluded_codim1, "very_ample": va}
    if D is None:
        ok = res.value is None or res.value >= 0
        return [Record("cliff.K", "Clifford index of K is nonnegative", verdict(ok), dims, seed, mode)]
    d = D.degree
    own = cliff_pair(C, L, D)
    dims["cliff_L_D"] = own
    ok = res.value == d - 2 and own == d - 2
    return [Record(f"cliff.K({twist})", "cliff(C, K(D)) = d - 2 attained by D", verdict(ok), dims, seed, mode)]


def check_quadratic_normality(ctx):
    from .koszul import KoszulComplex
    C = ctx.curve
    K = canonical_bundle(C)
    T = mult_map(C, K, K)
    k02 = KoszulComplex(C, K).dim(0, 2)
    hyper = C.n == 2
    # in genus 2 the multiplication map is an isomorphism, so only genus >= 3 is asserted
    expect = T.surjective == (not hyper) if C.genus >= 3 else T.surjective
    return [Record("qn.K", "Sym^2 H0(K) -> H0(2K) onto iff non-hyperelliptic (g >= 3); corank = dim K_{0,2}",
                   verdict(expect and T.corank == k02),
                   {"rank": T.rank, "h0_2K": T.dims[2], "K02": k02}, ctx.opts["seed"])]


def check_shiffer(ctx, name=None, twist=None):
    from .shiffer import (ShifferDatum, evaluation_functional, min_rank_witness, point_matrix,
                          rank_bounds_check, shiffer_matrix, NoConstruction)
    ctx.need_curve()
    C = ctx.curve
    seed = ctx.opts["seed"]
    L, _ = ctx.bundle(twist)
    recs = []
    T = mult_map(C, L, L)
    L2 = L * 2
    rng = random.Random(seed)
    agree = 0
    npts = 10
    for P in C.sample_places(npts, rng.randrange(1 << 30), avoid=L.representative.support()):
        A = shiffer_matrix(C, L, L, ShifferDatum.simple(Divisor.of(P))).matrix
        if A == point_matrix(T, evaluation_functional(C, L2, P)):
            agree += 1
    recs.append(Record("shiffer.cross_oracle", "residue matrix of a point equals the evaluation matrix",
                       verdict(agree == npts), {"points": npts, "agree": agree}, seed, "sampled"))
    if name is not None:
        D = ctx.divisor(name)
        overlap = any(L.representative[P] for P in D.support())
        rep = rank_bounds_check(C, L, L, D, ctx.opts["trials"], seed, allow_overlap=overlap)
        recs.append(Record(f"shiffer.bounds.{name}", "d - 2r <= rank <= d - r on random data",
                           verdict(rep.ok and rep.upper_attained),
                           {"d": rep.d, "r": rep.r1, "histogram": dict(sorted(rep.histogram.items()))},
                           seed, "sampled"))
        try:
            datum = min_rank_witness(C, L, D, seed=seed)
            rk = shiffer_matrix(C, L, L, datum, allow_overlap=True).rank
            recs.append(Record(f"shiffer.witness.{name}", "a variation of rank d - 2r exists on D",
                               verdict(rk == rep.lower), {"rank": rk, "lower": rep.lower}, seed))
        except NoConstruction as exc:
            recs.append(Record(f"shiffer.witness.{name}", "a variation of rank d - 2r exists on D", INFO,
                               {}, seed, detail=f"no construction applied: {exc}"))
    return recs


def check_detpres(ctx, degrees=(6, 6), k=1):
    from .secant import det_presented
    ctx.need_curve()
    C = ctx.curve
    seed = ctx.opts["seed"]
    rng = random.Random(seed)
    Ls = [LineBundle(Divisor.of(*C.sample_places(d, rng.randrange(1 << 30)))) for d in degrees]
    rep = det_presented(C, Ls[0], Ls[1], k, seed, ctx.opts["oversample"])
    in_range = rep.hypothesis_factors
    ok = rep.contained and (rep.verdict == "EQUAL" or not in_range)
    return [Record(f"detpres.k{k}", "(k+1)-minors span the degree k+1 equations of Sec^(k-1)",
                   verdict(ok) if in_range else (INFO if rep.contained else FAIL),
                   {"verdict": rep.verdict, "minors": rep.minors_dim, "ideal": rep.ideal_dim,
                    "degrees": list(degrees), "hypothesis_deg_Li": rep.hypothesis_factors,
                    "cloud": rep.cloud_size}, seed, "sampled")]


def check_secant(ctx, j=1, twist=None, hassett=None):
    from .secant import hassett_witness, rank_locus_vs_secant, secant_dim_probe
    ctx.need_curve()
    C = ctx.curve
    seed = ctx.opts["seed"]
    L, _ = ctx.bundle(twist)
    trials = ctx.opts["trials"]
    rep = rank_locus_vs_secant(C, L, j, trials, seed)
    recs = [Record(f"secant.containment.j{j}", "points of Sec^(j-1) give matrices of rank <= j",
                   verdict(rep.ok), {"trials": rep.trials, "max_rank": rep.max_rank,
                                     "violations": rep.violations}, seed, "sampled")]
    probe = secant_dim_probe(C, L, j - 1, min(trials, 50), seed)
    expect = 2 * j <= probe.ambient
    recs.append(Record(f"secant.disjoint_spans.j{j}", "spans of disjoint j-point divisors meet trivially",
                       verdict(probe.all_independent) if expect else INFO,
                       {"trials": probe.trials, "independent": probe.independent,
                        "ambient": probe.ambient}, seed, "sampled"))
    if hassett is not None:
        D = ctx.divisor(hassett)
        LD = LineBundle(canonical_bundle(C).representative + D)
        h = hassett_witness(C, LD, D, seed)
        recs.append(Record(f"secant.hassett.{hassett}", "rank d-2 variation whose plane misses the curve",
                           verdict(h.ok), {"d": h.d, "rank": h.rank, "checked": h.curve_points_checked,
                                           "on_plane": h.curve_points_on_plane}, seed, "exhaustive",
                           "evidence over F_p; " + h.secant_check))
    return recs


def check_koszul(ctx, pmax=3, qmax=3, twist=None):
    from .koszul import BudgetExceeded, KoszulComplex, composite_is_zero
    ctx.need_curve()
    C = ctx.curve
    seed = ctx.opts["seed"]
    L, _ = ctx.bundle(twist)
    Kc = KoszulComplex(C, L, budget=ctx.opts["max_entries"])
    try:
        table = Kc.betti_table(pmax, qmax)
        sq = all(composite_is_zero(Kc.boundary(p + 1, q), Kc.boundary(p, q + 1))
                 for p in range(pmax + 1) for q in range(qmax))
    except BudgetExceeded as exc:
        return [Record("koszul.budget", "Koszul window within the entry budget", FAIL, {}, seed,
                       detail=str(exc))]
    recs = [Record("koszul.delta_squared", "delta o delta = 0", verdict(sq), {}, seed),
            Record("koszul.table", "Koszul cohomology dimensions K_{p,q}", INFO,
                   {f"K{p}{q}": table[p, q] for q in range(qmax + 1) for p in range(pmax + 1)}, seed)]
    if twist is None and qmax >= 2:
        g = C.genus
        pairs = [(p, table[p, 2], Kc.dim(g - p - 2, 1)) for p in range(min(pmax, g - 2) + 1)]
        recs.append(Record("koszul.duality", "dim K_{p,2}(K) = dim K_{g-p-2,1}(K)",
                           verdict(all(a == b for _, a, b in pairs)),
                           {f"p{p}": f"{a}/{b}" for p, a, b in pairs}, seed))
        if g >= 3:
            recs.append(Record("koszul.K02", "K_{0,2}(C, K) = 0 iff C is not hyperelliptic",
                               verdict((table[0, 2] == 0) == (C.n != 2)), {"K02": table[0, 2]}, seed))
    return recs


def check_petri(ctx):
    C = ctx.curve
    seed = ctx.opts["seed"]
    F = C.infinity_divisor()
    if h0_bundle(C, LineBundle(F)) != 2:
        return []
    bpf, cert = base_point_free(C, F)
    a, b = petri_sides(C, F)
    return [Record("petri.x_pencil", "both sides of the pencil equivalence agree", verdict(bpf and a == b),
                   {"petri_surjective": a, "sym_surjective": b, "base_point_free": bpf}, seed,
                   "exhaustive" if cert else "sampled")]


def suite_checks(ctx):
    if ctx.tower is not None:
        return ["info"]
    names = ["info", "rr", "cliff", "qn", "shiffer", "koszul", "petri"]
    return names


def run_check(opts, name):
    ctx = Context(opts)
    fn = {"info": check_info, "rr": check_rr, "cliff": check_cliff, "qn": check_quadratic_normality,
          "shiffer": check_shiffer, "koszul": lambda c: check_koszul(c, 2, 2), "petri": check_petri}[name]
    return fn(ctx)


# ---------------------------------------------------------------------------

def run(opts):
    ctx = Context(opts)
    cmd = opts["command"]
    report = Report({"command": cmd, "spec": ctx.path.name, "prime": opts.get("prime") or
                     (ctx.spec.char if isinstance(ctx.spec, CurveSpec) else None), "seed": opts["seed"]})
    if cmd == "info":
        recs = check_info(ctx)
    elif cmd == "rr":
        recs = check_rr(ctx, opts.get("divisor"))
    elif cmd == "cliff":
        recs = check_cliff(ctx, opts.get("twist"))
    elif cmd == "shiffer":
        recs = check_shiffer(ctx, opts.get("divisor"), opts.get("twist"))
    elif cmd == "detpres":
        degrees = tuple(int(v) for v in opts["degrees"].split(","))
        recs = check_detpres(ctx, degrees, opts["k"])
    elif cmd == "secant":
        recs = check_secant(ctx, opts["j"], opts.get("twist"), opts.get("hassett"))
    elif cmd == "koszul":
        recs = check_koszul(ctx, opts["pmax"], opts["qmax"], opts.get("twist"))
    else:
        names = suite_checks(ctx)
        if opts["parallel"] > 1:
            with ProcessPoolExecutor(max_workers=opts["parallel"]) as ex:
                parts = list(ex.map(run_check, [opts] * len(names), names))
        else:
            parts = [run_check(opts, n) for n in names]
        recs = [r for part in parts for r in part]
    for r in recs:
        report.add(r)
    return report.sorted()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = vars(args)
    try:
        report = run(opts)
    except (SpecError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CurveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.text()
    if opts.get("out"):
        Path(opts["out"]).write_text(text)
    sys.stdout.write(text)
    if opts.get("json"):
        Path(opts["json"]).write_text(report.json())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
