"""Command-line front end: ``fgl-forge {fgl,euler,cyclic,bounds,morse} ...``.

Every job prints one report (text or JSON) and exits 0 exactly when all of
its certificates passed, 1 when one failed and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .ringcore import Kind, RingSpec, parse_coef

SCHEMA = "fgl-forge/1"

_KINDS = {
    "K": Kind.KPR, "Kpr": Kind.KPR, "KprRing": Kind.KPR,
    "E": Kind.EN, "En": Kind.EN, "EnRing": Kind.EN,
    "BP": Kind.BP, "BPTruncated": Kind.BP,
    "Q": Kind.RATIONAL, "RationalVPoly": Kind.RATIONAL,
}


class InputError(ValueError):
    """Malformed user input, reported with its location."""


@dataclass
class Report:
    title: str
    body: dict
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def pmap(fn, items, jobs: int):
    """Ordered map, optionally across processes; results keep input order."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _int_list(text: str, name: str) -> list[int]:
    if text is None or text.strip() == "":
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"--{name}: expected comma-separated integers, got {text!r}") from None


def _ring(args, kind=None) -> RingSpec:
    k = _KINDS.get(kind or args.kind)
    if k is None:
        raise InputError(f"--kind: unknown ring kind {args.kind!r} (use K, E, BP or Q)")
    cutoff = getattr(args, "degree_cutoff", None)
    return RingSpec(k, args.p, args.n, r=args.r if k is Kind.KPR else 1, degree_cutoff=cutoff)


# -- fgl -------------------------------------------------------------------------

def _lseries_job(arg):
    spec, T, l, cross = arg
    from .fgl import build_law, l_series
    law = build_law(spec, T)
    s = l_series(law, l)
    agree = None
    if cross:
        agree = s == l_series(law, l, method="chain")
    return l, s, agree


def run_fgl(args) -> Report:
    from .fgl import build_law, check_axioms, pseries_identity_rhs, l_series
    spec = _ring(args)
    T = args.T
    law = build_law(spec, T)
    small = T <= args.table_limit
    body = {"ring": spec.describe(), "provenance": law.provenance.value, "T": T}
    checks = {}
    if spec.kind is Kind.KPR and spec.r > 1:
        body["convention"] = "quotient law: E(n) law with v_1..v_{n-1} killed, reduced mod p^r"
    if small:
        body["law"] = law.F.to_json()
        axioms = check_axioms(law)
        body["axioms"] = axioms
        checks.update({f"axiom_{k}": v for k, v in axioms.items()})
        if spec.kind is not Kind.RATIONAL:
            ident = pseries_identity_rhs(law) == l_series(law, spec.p, method="chain")
            body["pseries_identity"] = ident
            checks["pseries_identity"] = ident
    ls = _int_list(args.l, "l")
    results = pmap(_lseries_job, [(spec, T, l, small) for l in ls], args.jobs)
    series = []
    for l, s, agree in results:
        entry = {"l": l, "series": s.to_json(), "text": s.to_text()}
        if agree is not None:
            entry["routes_agree"] = agree
            checks[f"l={l}_routes_agree"] = agree
        series.append(entry)
    body["l_series"] = series
    return Report("formal group law", body, checks)


def _text_fgl(body) -> list[str]:
    lines = [f"ring: {body['ring']}  provenance: {body['provenance']}  T: {body['T']}"]
    if "convention" in body:
        lines.append(f"convention: {body['convention']}")
    if "law" in body:
        lines.append("F(x, y) coefficients:")
        rows = [(f"x^{i} y^{j}", c) for i, j, c in body["law"]["terms"]]
        w = max((len(a) for a, _ in rows), default=0)
        lines += [f"  {a.ljust(w)}  {c}" for a, c in rows]
    for e in body["l_series"]:
        lines.append(f"[{e['l']}](u) = {e['text']}")
    return lines


# -- euler -----------------------------------------------------------------------

def run_euler(args) -> Report:
    from .euler import ab_injectivity_check, euler_of_weights, leading_form
    from .fgl import build_law
    spec = _ring(args)
    wts = _int_list(args.weights, "weights")
    law = build_law(spec, args.T)
    e = euler_of_weights(law, wts)
    lf = leading_form(e)
    body = {
        "ring": spec.describe(), "T": args.T, "weights": wts,
        "series": e.series.to_json(), "text": e.series.to_text(),
        "leading_form": {"k": lf.k, "x": lf.x.to_text(), "remainder_in_m0": lf.remainder_in_m0},
    }
    checks = {"remainder_in_m0": lf.remainder_in_m0}
    if args.rank:
        degs = _int_list(args.filtration, "filtration") or [0] * args.rank
        cert = ab_injectivity_check(e, args.rank, degs)
        body["injectivity"] = cert.to_json()
        checks["kernel_empty"] = cert.kernel_empty
    return Report("euler class", body, checks)


def _text_euler(body) -> list[str]:
    lf = body["leading_form"]
    lines = [f"ring: {body['ring']}  weights: {body['weights']}  T: {body['T']}",
             f"e(u) = {body['text']}",
             f"leading form: k = {lf['k']}, x = {lf['x']}, lower terms in m0: {lf['remainder_in_m0']}"]
    if "injectivity" in body:
        c = body["injectivity"]
        lines.append(f"injectivity through u^{c['checked_through_order']}: kernel empty = {c['kernel_empty']}"
                     f" ({c['specialization']})")
    return lines


# -- cyclic ----------------------------------------------------------------------

def run_cyclic(args) -> Report:
    from .cyclic import CyclicGroupDatum, cohomology_of_Bmu, leray_hirsch_presentation, minimal_u_truncation
    from .fgl import build_law
    spec = _ring(args)
    d = CyclicGroupDatum(args.l, args.p)
    N = d.rank(spec.n)
    r = spec.r
    T = args.T or minimal_u_truncation(r, N, 1) + (N if spec.kind is Kind.EN else 0)
    pres = cohomology_of_Bmu(build_law(spec, T), d, T, max_depth=args.max_depth)
    body = {"ring": spec.describe(), "l": d.l, "s": d.s, "l_prime": d.l_prime,
            "presentation": pres.to_json()}
    checks = {"rank": pres.rank == N}
    if spec.kind is Kind.KPR:
        checks["basis_independent"] = pres.certificates["basis_independent"]
        checks["exact"] = pres.residual_zero
    checks["nilpotency_index"] = pres.certificates["u_nilpotency_index_mod_m0"] == N
    text = [pres.to_text()]
    if args.T_omega and args.T_omega >= 2:
        Tu = args.T_u or minimal_u_truncation(r, N, args.T_omega) + (N if spec.kind is Kind.EN else 0)
        lh = leray_hirsch_presentation(build_law(spec, Tu), d, Tu, args.T_omega, max_depth=args.max_depth)
        body["leray_hirsch"] = lh.to_json()
        for k in ("omega_zero_coherent", "base_split_injective", "tautological_relation"):
            checks[k] = lh.certificates[k]
        text.append(lh.to_text())
    body["_text"] = text
    return Report("cyclic group cohomology", body, checks)


# -- bounds ----------------------------------------------------------------------

def run_bounds(args) -> Report:
    from . import bounds as bd
    what = args.bounds_cmd
    if what == "pi":
        s = bd.pi_series(args.p, args.h, args.j, args.T)
        return Report("pi series", {"p": args.p, "h": args.h, "j": args.j, "T": args.T,
                                    "series": s.to_json(), "_text": [f"pi_{args.h}[{args.j}] = {s.to_text()}"]})
    if what == "upowers":
        T = args.T or args.p ** (args.a * args.h) + args.p ** args.h
        c = bd.verify_upowers(args.p, args.h, args.a, T)
        status = "PASS" if c.equal else f"FAIL (first mismatch at u^{c.first_mismatch})"
        return Report("u-powers factorization", dict(c.to_json(), _text=[
            f"[{args.p}^{args.a}](u) factorization mod I_{args.h}, T = {T}: {status}"]), {"equal": c.equal})
    if what == "B":
        filt = bd.LandweberFiltration(tuple(_int_list(args.heights, "heights")))
        ws = _int_list(args.exponents, "exponents")
        B = bd.bound_B(ws, filt, args.p)
        return Report("constant B", {"p": args.p, "exponents": ws, "heights": list(filt.heights), "B": B,
                                     "_text": [f"B = {B}"]})
    if what == "lens":
        filt = bd.LandweberFiltration(tuple(_int_list(args.heights, "heights")))
        C, rmin = bd.lens_bound(args.q, args.s, filt, args.p)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            warn = bd.height_estimate_warnings(filt, args.p, args.q)
        return Report("lens bound", {"p": args.p, "q": args.q, "s": args.s, "heights": list(filt.heights),
                                     "C": C, "r_min": rmin, "warnings": warn,
                                     "_text": [f"C = {C}, r >= {rmin}"] + [f"warning: {w}" for w in warn]})
    if what == "height":
        n = bd.choose_height(args.m, args.p)
        return Report("height", {"m": args.m, "p": args.p, "n": n, "_text": [f"n = {n}"]})
    if what == "kernel":
        return _run_kernel(args)
    raise InputError(f"unknown bounds command {what!r}")


def _field(doc, path, key, conv):
    try:
        return conv(doc[key])
    except KeyError:
        raise InputError(f"{path}: missing field {key!r}") from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}.{key}: {exc}") from None


def _run_kernel(args):
    from . import bounds as bd
    from .series import USeries
    doc = _read_json(args.input)
    p = _field(doc, "model", "p", int)
    heights = _field(doc, "model", "heights", lambda v: tuple(int(x) for x in v))
    weights = _field(doc, "model", "weights", lambda v: tuple(int(x) for x in v))
    A = _field(doc, "model", "A", int)
    q = _field(doc, "model", "q", int)
    filt = bd.LandweberFiltration(heights)
    from .euler import LineBundleWeights
    B = bd.bound_B(LineBundleWeights(weights, p).exponents(), filt, p)
    W = A + q * B
    e = bd.euler_over_bp(weights, p, W)
    bp = e.series.spec
    conn = {}
    for i, ent in enumerate(doc.get("connecting", [])):
        path = f"connecting[{i}]"
        src = _field(ent, path, "src", int)
        tgt = _field(ent, path, "tgt", int)
        terms = _field(ent, path, "terms", list)
        try:
            conn[(src, tgt)] = USeries.from_terms(bp, W, {int(k): parse_coef(bp, str(c)) for k, c in terms})
        except (ValueError, TypeError) as exc:
            raise InputError(f"{path}.terms: {exc}") from None
    model = bd.FilteredModuleModel(p, filt, conn)
    cert = bd.kernel_vanishing_check(e, model, A, q)
    j = cert.to_json()
    text = [f"window A + qB = {A} + {q}*{B} = {W}",
            f"geometric-sum identity: {cert.identity_holds}",
            f"e_+^q = 0: {cert.nilpotent_vanishes}",
            f"kernel vanishes mod u^{A}: {cert.kernel_vanishes_mod_uA}",
            f"empirical minimal window: {cert.minimal_window}"]
    return Report("kernel vanishing", dict(j, _text=text), {"passed": cert.passed})


# -- morse -----------------------------------------------------------------------

def _morse_job(arg):
    from .morse import kernel_window_check
    comp, m, ring, data = arg
    return kernel_window_check(comp, m, ring, data=data)


def run_morse(args) -> Report:
    from .morse import MorseRing, assemble, bundled_example, morse_equality_check
    if args.example:
        data = bundled_example(args.example)
        source = f"bundled:{args.example}"
    else:
        source = args.input or "<stdin>"
        data = _components(_read_json(args.input), source)
    ring = MorseRing(args.p, args.r, args.n)
    mod = assemble(data, ring)
    eq = morse_equality_check(data, ring)
    grid = [(c, m, ring, data) for c in sorted(data, key=lambda c: c.moment_value)
            for m in range(args.m_max + 1)]
    windows = [w for w in pmap(_morse_job, grid, args.jobs) if not w.get("window_empty")]
    body = {"source": source, "assembled": mod.to_json(), "equality": eq, "kernel_windows": windows}
    checks = {"morse_equality": eq["passed"]}
    checks.update({f"{t['component']}_index_matches_weights": t["index_matches_negative_weights"]
                   for t in mod.trace})
    checks.update({f"{w['component']}@m={w['m']}": w["passed"] for w in windows})
    text = [f"source: {source}  ring: {ring.spec().describe()}",
            f"rank {mod.rank}, generator degrees {mod.degrees()}",
            f"|K(F)| = {eq['fixed_locus_cardinality']}, |K(M)| = {eq['assembled_cardinality']}"]
    for t in mod.trace:
        text.append(f"  step {t['step']}: {t['component']} (lambda = {t['morse_index']}) k = {t['k']}, unit {t['unit']}")
    for w in windows:
        text.append(f"  {w['component']} m = {w['m']}: kernel at u^{w['kernel_u_exponents']}, "
                    f"Euler bound {w['euler_injectivity']['lhs']} <= {w['euler_injectivity']['rhs']}, "
                    f"{'ok' if w['passed'] else 'FAIL'}")
    body["_text"] = text
    return Report("morse assembly", body, checks)


def _components(doc, source):
    from .morse import FixedComponentDatum
    comps = doc.get("components") if isinstance(doc, dict) else doc
    if not isinstance(comps, list):
        raise InputError(f"{source}: expected a list under 'components'")
    out = []
    for i, c in enumerate(comps):
        path = f"{source}: components[{i}]"
        if not isinstance(c, dict):
            raise InputError(f"{path}: expected an object")
        for key in ("name", "generator_degrees", "morse_index", "normal_weights", "moment_value"):
            if key not in c:
                raise InputError(f"{path}: missing field {key!r}")
        try:
            out.append(FixedComponentDatum.from_json(c))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{path}: {exc}") from None
    return out


# -- plumbing --------------------------------------------------------------------

def _read_json(path):
    try:
        text = sys.stdin.read() if path in (None, "-") else open(path).read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path or '<stdin>'}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _common(p):
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")


def _ring_args(p, kind="K"):
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--kind", default=kind, help="K (K_{p^r}(n)), E (E(n)), BP or Q")
    p.add_argument("--degree-cutoff", dest="degree_cutoff", type=int, default=None,
                   help="drop coefficient monomials below this degree in the non-inverted generators;"
                        " needed where inverses do not terminate, e.g. E(n) with n >= 2")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fgl-forge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fgl", help="build a law and its l-series")
    _ring_args(f)
    f.add_argument("--T", type=int, required=True)
    f.add_argument("--l", default="", help="comma-separated integers")
    f.add_argument("--table-limit", type=int, default=20,
                   help="print F and check the axioms only up to this truncation")
    _common(f)

    e = sub.add_parser("euler", help="Euler class of a weight list")
    _ring_args(e)
    e.add_argument("--weights", required=True)
    e.add_argument("--T", type=int, required=True)
    e.add_argument("--rank", type=int, default=0, help="run the injectivity check on a free module of this rank")
    e.add_argument("--filtration", default="")
    _common(e)

    c = sub.add_parser("cyclic", help="cohomology of a cyclic group")
    _ring_args(c)
    c.add_argument("--l", type=int, required=True)
    c.add_argument("--T", type=int, default=0, help="u-truncation (default: the minimal exact one)")
    c.add_argument("--T-omega", dest="T_omega", type=int, default=0)
    c.add_argument("--T-u", dest="T_u", type=int, default=0)
    c.add_argument("--max-depth", type=int, default=8)
    _common(c)

    b = sub.add_parser("bounds", help="pi-series and effective bounds")
    bsub = b.add_subparsers(dest="bounds_cmd", required=True)
    x = bsub.add_parser("pi")
    for a in ("p", "h", "j", "T"):
        x.add_argument(f"--{a}", type=int, required=True)
    _common(x)
    x = bsub.add_parser("upowers")
    for a in ("p", "h", "a"):
        x.add_argument(f"--{a}", type=int, required=True)
    x.add_argument("--T", type=int, default=0)
    _common(x)
    x = bsub.add_parser("B")
    x.add_argument("--p", type=int, required=True)
    x.add_argument("--exponents", default="")
    x.add_argument("--heights", default="")
    _common(x)
    x = bsub.add_parser("lens")
    for a in ("p", "q", "s"):
        x.add_argument(f"--{a}", type=int, required=True)
    x.add_argument("--heights", default="")
    _common(x)
    x = bsub.add_parser("height")
    x.add_argument("--p", type=int, required=True)
    x.add_argument("--m", type=int, required=True)
    _common(x)
    x = bsub.add_parser("kernel")
    x.add_argument("input", nargs="?", default=None, help="model JSON (default: stdin)")
    _common(x)

    m = sub.add_parser("morse", help="assemble from fixed-point data")
    m.add_argument("input", nargs="?", default=None, help="components JSON (default: stdin)")
    m.add_argument("--example", choices=("cp1", "cp2", "cp1xcp1"))
    m.add_argument("--p", type=int, default=2)
    m.add_argument("--r", type=int, default=1)
    m.add_argument("--n", type=int, default=1)
    m.add_argument("--m-max", dest="m_max", type=int, default=6)
    _common(m)
    return ap


_RUNNERS = {"fgl": run_fgl, "euler": run_euler, "cyclic": run_cyclic, "bounds": run_bounds, "morse": run_morse}
_TEXT = {"fgl": _text_fgl, "euler": _text_euler}


def render(cmd: str, rep: Report, fmt: str) -> str:
    body = {k: v for k, v in rep.body.items() if k != "_text"}
    if fmt == "json":
        doc = {"schema": SCHEMA, "command": cmd, "report": body,
               "certificates": rep.checks, "passed": rep.passed}
        return json.dumps(doc, indent=2)
    lines = [f"# {rep.title}"]
    lines += _TEXT[cmd](body) if cmd in _TEXT else rep.body.get("_text", [])
    for k, v in rep.checks.items():
        lines.append(f"check {k}: {'PASS' if v else 'FAIL'}")
    lines.append("PASS" if rep.passed else "FAIL")
    return "\n".join(lines)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
        rep = _RUNNERS[args.command](args)
    except (InputError, ValueError, ArithmeticError) as exc:
        print(f"fgl-forge {args.command}: {exc}", file=sys.stderr)
        return 2
    print(render(args.command, rep, args.format))
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
