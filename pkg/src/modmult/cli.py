"""Command-line front end: ``modmult <group> <command> [options]``.

Every command is a function ``(inputs, bits) -> (result, verdict)`` on a
self-contained ``inputs`` dict (file contents are inlined), so a stored
record can be re-derived later at another precision.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from fractions import Fraction

import mpmath

from . import (atypical, borcherds, modfunc, multdep, qseries, quadforms, specialpoints, witness)
from .balls import Ball, PrecisionCtx
from .config import RunConfig
from .errors import DomainError, ModmultError
from .quadforms import QuadForm, QuadSurd
from .store import CertificateRecord, Store, register_kind, replay_record

__all__ = ["main", "dispatch", "grammar"]

PROG = "modmult"


# ---------------------------------------------------------------------------
# serialization helpers

def _num(x, digits=30) -> str:
    return mpmath.nstr(x, digits)


def jsonable(obj):
    """Plain JSON data for library results; balls become decimal strings."""
    if isinstance(obj, Ball):
        return {"mid": [_num(obj.mid.real), _num(obj.mid.imag)], "rad": _num(obj.rad, 5)}
    if isinstance(obj, (QuadSurd, Fraction)):
        return str(obj)
    if isinstance(obj, QuadForm):
        return [int(x) for x in obj]
    if isinstance(obj, (mpmath.mpf, mpmath.mpc)):
        return _num(obj)
    if isinstance(obj, multdep.AlgebraicValue):
        return obj.desc
    if isinstance(obj, multdep.RelationCertificate):
        return obj.to_dict()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def _digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def _ctx(inputs, bits) -> PrecisionCtx:
    return PrecisionCtx(bits, inputs.get("tol"))


def _stable(ball: Ball, digits=12) -> str:
    # short enough to agree between a run and its doubled-precision replay
    return mpmath.nstr(ball.mid, digits)


def _fn(inputs) -> modfunc.ModularFunction:
    return modfunc.ModularFunction.from_text(inputs["function"])


def _complex(text: str):
    text = text.strip().replace(" ", "")
    if "," in text:
        re_, im = text.split(",")
        return mpmath.mpc(mpmath.mpf(re_), mpmath.mpf(im))
    return mpmath.mpc(complex(text.replace("i", "j"))) if "i" in text else mpmath.mpc(mpmath.mpf(text))


# ---------------------------------------------------------------------------
# command kinds

@register_kind("qseries.j")
def run_j(inputs, bits):
    text = qseries.j_series(inputs["order"]).to_text()
    return {"text": text}, _digest(text)


@register_kind("qseries.hurwitz")
def run_hurwitz(inputs, bits):
    text = qseries.hurwitz_table(inputs["max"]).to_text()
    return {"text": text}, _digest(text)


def _parse_pairs(spec: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(x) for x in item.split(":")) for item in spec.split(",") if item.strip()]
    except ValueError as exc:
        raise DomainError(f"bad spec {spec!r}; expected 'm:e,m:e'") from exc


@register_kind("qseries.eta")
def run_eta(inputs, bits):
    text = qseries.eta_quotient(_parse_pairs(inputs["spec"]), inputs["order"]).to_text()
    return {"text": text}, _digest(text)


@register_kind("forms.enum")
def run_forms_enum(inputs, bits):
    rows = [[int(x) for x in f] for f in quadforms.enumerate_T(inputs["disc"])]
    return {"forms": rows, "text": "".join(f"{a} {b} {c}\n" for a, b, c in rows)}, rows


@register_kind("forms.reduce")
def run_forms_reduce(inputs, bits):
    re_, im = (Fraction(x) for x in inputs["tau"].split(","))
    if im <= 0:
        raise DomainError("tau must lie in the upper half plane")
    tau, g = quadforms.reduce_to_Fj(QuadSurd(re_, im, -1))
    out = {"tau": str(tau), "re": str(tau.x), "im": str(tau.y), "g": [list(r) for r in g]}
    return out, out


def _divisor_rows(div):
    return [{"point": p.describe(), "exact": p.exact, "multiplicity": p.multiplicity} for p in div]


@register_kind("modfunc.divisor")
def run_divisor(inputs, bits):
    div = modfunc.zeros_poles_in_Fj(_fn(inputs), _ctx(inputs, bits))
    rows = _divisor_rows(div)
    verdict = [[r["point"] if r["exact"] else mpmath.nstr(p.w.mid, 10), r["multiplicity"]]
               for r, p in zip(rows, div)]
    return {"points": rows}, verdict


@register_kind("modfunc.check")
def run_check_divisor(inputs, bits):
    res = modfunc.divisor_condition_check(_fn(inputs), _ctx(inputs, bits))
    out = {"verdict": res.verdict, "witness": jsonable(res.witness), "certificate": jsonable(res.certificate)}
    if res.divisor is not None:
        out["divisor"] = _divisor_rows(res.divisor)
    return out, res.verdict


@register_kind("borcherds.fd")
def run_fd(inputs, bits):
    text = borcherds.build_fd(inputs["d"], inputs["order"]).to_text()
    return {"text": text}, _digest(text)


@register_kind("borcherds.lift")
def run_lift(inputs, bits):
    res = borcherds.lift(borcherds.PlusForm.from_text(inputs["form"]), inputs["order"])
    text = res.series().to_text()
    return {"h": str(res.h), "text": text}, _digest(text)


def _disc_range(text: str) -> range:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError as exc:
        raise DomainError(f"bad range {text!r}; expected 'lo..hi'") from exc
    return range(min(lo, hi), max(lo, hi) + 1)


@register_kind("borcherds.divisor")
def run_lift_divisor(inputs, bits):
    f = borcherds.PlusForm.from_text(inputs["form"])
    div = {D: m for D, m in borcherds.lift_divisor(f, _disc_range(inputs["disc_range"])).items() if m}
    out = {str(D): m for D, m in sorted(div.items(), reverse=True)}
    return {"orders": out}, out


@register_kind("borcherds.check-b0")
def run_check_b0(inputs, bits):
    exps = dict(_parse_pairs(inputs["exps"]))
    cert = borcherds.divisor_condition_b0(exps, numeric_check=inputs.get("numeric", False), ctx=_ctx(inputs, bits))
    out = {"verdict": cert.verdict, "d_k": cert.d_k, "tau_star": jsonable(cert.tau_star),
           "route": cert.route, "dominance": cert.dominance, "numeric": cert.numeric}
    if cert.route == "j":
        b0 = borcherds.B0Element(exps)
        power = b0.basis_exponents[3] if b0.support == [3] else None
        if power == 3:
            out["note"] = "j = Psi(f_3)^3: the element is j itself"
        elif power and power % 3 == 0:
            out["note"] = f"j^{power // 3} = Psi(f_3)^{power}"
        else:
            out["note"] = "top index 3: decided through j = Psi(f_3)^3"
    return out, cert.verdict


@register_kind("special.moduli")
def run_moduli(inputs, bits):
    pts = specialpoints.singular_moduli(inputs["disc"], _ctx(inputs, bits))
    rows = [{"form": jsonable(p.form), "tau": str(p.tau), "value": jsonable(p.value)} for p in pts]
    return {"moduli": rows}, [[r["form"], _stable(p.value, 8)] for r, p in zip(rows, pts)]


@register_kind("special.hcp")
def run_hcp(inputs, bits):
    coeffs = specialpoints.hilbert_class_poly(inputs["disc"], _ctx(inputs, bits))
    out = [str(c) for c in coeffs]
    return {"coefficients": out}, out


@register_kind("special.points")
def run_points(inputs, bits):
    pts = specialpoints.f_special_points(_fn(inputs), inputs["disc"], _ctx(inputs, bits))
    rows, verdict = [], []
    for p in pts:
        forms = [jsonable(s.form) for s in p.preimages]
        rows.append({"value": jsonable(p.value), "disc": p.disc, "preimages": forms})
        verdict.append([p.disc, sorted(forms), _stable(p.value, 8)])
    return {"points": rows}, verdict


@register_kind("special.isogeny")
def run_isogeny(inputs, bits):
    rel = specialpoints.modular_relation(_complex(inputs["x1"]), _complex(inputs["x2"]), inputs["nmax"],
                                         _ctx(inputs, bits))
    out = None if rel is None else {"N": rel[0], "g": [list(r) for r in rel[1]]}
    return {"relation": out}, out


def _relation_summary(cert) -> dict:
    return {"values": cert.values, "exponents": list(cert.exponents),
            "gamma_exponents": list(cert.gamma_exponents), "verdict": cert.verdict}


@register_kind("dep.search")
def run_dep_search(inputs, bits):
    gamma = [line.strip() for line in inputs.get("gamma", "").splitlines()
             if line.strip() and not line.strip().startswith("#")] or None
    rep = multdep.search_dependent_tuples(_fn(inputs), inputs["n"], inputs["max_disc"], gamma=gamma,
                                          ctx=_ctx(inputs, bits), cn=inputs["cn"], box_cap=inputs["box_cap"],
                                          workers=inputs.get("workers", 1))
    certs = [c.to_dict() for c in rep.certificates]
    verdict = {"certificates": [_relation_summary(c) for c in rep.certificates],
               "undecided": rep.coverage["undecided"], "discs": rep.coverage["discs"]}
    return {"certificates": certs, "coverage": rep.coverage}, verdict


@register_kind("relation")
def run_relation(inputs, bits):
    cert = multdep.replay_certificate(multdep.RelationCertificate.from_dict(inputs["certificate"]), bits)
    return cert.to_dict(), cert.verdict


def _family(inputs):
    return witness.TranslateFamily([witness.parse_matrix(g) for g in inputs["g"]])


@register_kind("witness")
def run_witness(inputs, bits):
    cert = witness.certify_witness(_fn(inputs), _family(inputs), ctx=_ctx(inputs, bits))
    out = {"verdict": cert.verdict, "z": jsonable(cert.z), "top": jsonable(cert.top),
           "composites": jsonable(cert.composites)}
    return out, cert.verdict


def _bounds(inputs) -> atypical.Bounds:
    import toml
    data = toml.loads(inputs["bounds"]) if inputs.get("bounds") else {}
    try:
        return atypical.Bounds(**data)
    except TypeError as exc:
        raise DomainError(f"bad bounds: {exc}") from exc


def _point(inputs):
    data = json.loads(inputs["point"])
    if isinstance(data, dict):
        data = list(data.get("x", [])) + list(data.get("t", []))
    return [str(v) for v in data]


@register_kind("zp.classify")
def run_classify(inputs, bits):
    reports = atypical.classify_point(_fn(inputs), _point(inputs), inputs["n"], _bounds(inputs),
                                      _ctx(inputs, bits))
    rows = [{"template": r.template.name, "modular": jsonable(r.template.modular_conditions),
             "multiplicative": jsonable(r.template.multiplicative_conditions),
             "dims": list(r.dims), "atypical": r.verdict} for r in reports]
    return {"templates": rows}, [r["template"] for r in rows]


@register_kind("zp.scan-roots")
def run_scan_roots(inputs, bits):
    hits = atypical.root_of_unity_scan(_fn(inputs), inputs["max_disc"], inputs["max_order"], _ctx(inputs, bits))
    rows = [{"disc": h.disc, "order": h.order, "value": jsonable(h.value),
             "certificate": h.certificate.to_dict()} for h in hits]
    return {"hits": rows}, [[r["disc"], r["order"], r["certificate"]["verdict"]] for r in rows]


@register_kind("zp.scan-modtors")
def run_scan_modtors(inputs, bits):
    found = atypical.modular_torsion_search(_fn(inputs), inputs["nmax"], inputs["max_order"],
                                            _ctx(inputs, bits), max_disc=inputs["max_disc"])
    rows = [{"x1": jsonable(t.x1), "x2": jsonable(t.x2), "zeta1": list(t.zeta1), "zeta2": list(t.zeta2),
             "N": t.N, "g": jsonable(t.g)} for t in found]
    return {"tuples": rows}, [[r["N"], r["zeta1"], r["zeta2"], r["g"]] for r in rows]


# ---------------------------------------------------------------------------
# argument grammar

def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{grammar()}")
        raise SystemExit(2)


def _globals() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--bits", type=int, default=argparse.SUPPRESS, help="working precision in bits")
    g.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="recognition tolerance")
    g.add_argument("--out", default=argparse.SUPPRESS, help="append certificate records to this JSONL file")
    g.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="worker processes for searches")
    g.add_argument("--config", default=argparse.SUPPRESS, help="TOML config (default: $MODMULT_CONFIG)")
    g.add_argument("--dry-run", action="store_true", default=argparse.SUPPRESS,
                   help="print the resolved config and exit")
    return p


# (group, command) -> (kind, [argument specs])
_COMMANDS = {
    ("qseries", "j"): ("qseries.j", [("--order", dict(type=int, required=True))]),
    ("qseries", "hurwitz"): ("qseries.hurwitz", [("--max", dict(type=int, required=True))]),
    ("qseries", "eta"): ("qseries.eta", [("--spec", dict(required=True)), ("--order", dict(type=int, required=True))]),
    ("forms", "enum"): ("forms.enum", [("--disc", dict(type=int, required=True))]),
    ("forms", "reduce"): ("forms.reduce", [("--tau", dict(required=True, help='"re,im" exact rationals'))]),
    ("modfunc", "divisor"): ("modfunc.divisor", [("--function", dict(required=True))]),
    ("modfunc", "check-divisor-condition"): ("modfunc.check", [("--function", dict(required=True))]),
    ("borcherds", "fd"): ("borcherds.fd", [("--d", dict(type=int, required=True)),
                                            ("--order", dict(type=int, required=True))]),
    ("borcherds", "lift"): ("borcherds.lift", [("--form", dict(required=True)),
                                                ("--order", dict(type=int, required=True))]),
    ("borcherds", "divisor"): ("borcherds.divisor", [("--form", dict(required=True)),
                                                      ("--disc-range", dict(required=True))]),
    ("borcherds", "check-b0"): ("borcherds.check-b0", [("--exps", dict(required=True)),
                                                        ("--numeric", dict(action="store_true"))]),
    ("special", "moduli"): ("special.moduli", [("--disc", dict(type=int, required=True))]),
    ("special", "hcp"): ("special.hcp", [("--disc", dict(type=int, required=True))]),
    ("special", "points"): ("special.points", [("--function", dict(required=True)),
                                                ("--disc", dict(type=int, required=True))]),
    ("special", "isogeny"): ("special.isogeny", [("--x1", dict(required=True)), ("--x2", dict(required=True)),
                                                  ("--nmax", dict(type=int, default=None))]),
    ("dep", "search"): ("dep.search", [("--function", dict(required=True)), ("--n", dict(type=int, required=True)),
                                       ("--max-disc", dict(type=int, default=None)), ("--gamma", dict()),
                                       ("--cn", dict(type=float, default=None)),
                                       ("--box-cap", dict(type=int, default=None))]),
    ("witness", None): ("witness", [("--function", dict(required=True)),
                                    ("--g", dict(action="append", required=True, help='"a,b;c,d"'))]),
    ("zp", "classify"): ("zp.classify", [("--function", dict(required=True)), ("--point", dict(required=True)),
                                         ("--n", dict(type=int, required=True)), ("--bounds", dict())]),
    ("zp", "scan-roots"): ("zp.scan-roots", [("--function", dict(required=True)),
                                             ("--max-disc", dict(type=int, default=None)),
                                             ("--max-order", dict(type=int, default=None))]),
    ("zp", "scan-modtors"): ("zp.scan-modtors", [("--function", dict(required=True)),
                                                 ("--nmax", dict(type=int, default=None)),
                                                 ("--max-order", dict(type=int, default=None)),
                                                 ("--max-disc", dict(type=int, default=None))]),
    ("store", "replay"): (None, [("store", dict(help="JSONL certificate file")),
                                 ("--index", dict(type=int, action="append", help="record index (default: all)")),
                                 ("--replay-bits", dict(type=int, help="default: twice the stored precision"))]),
}


def build_parser() -> argparse.ArgumentParser:
    common = _globals()
    parser = _Parser(prog=PROG, parents=[common], description="Modular functions, special points and "
                     "multiplicative dependence: exact series, certified numerics, replayable certificates.")
    groups = parser.add_subparsers(dest="group", metavar="GROUP", parser_class=_Parser)
    group_parsers = {}
    for (group, cmd), (kind, specs) in _COMMANDS.items():
        if cmd is None:
            leaf = groups.add_parser(group, parents=[common])
        else:
            if group not in group_parsers:
                gp = groups.add_parser(group, parents=[common])
                group_parsers[group] = gp.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
            leaf = group_parsers[group].add_parser(cmd, parents=[common])
        for name, kw in specs:
            leaf.add_argument(name, **kw)
        leaf.set_defaults(_key=(group, cmd))
    return parser


def grammar() -> str:
    """Usage line of every leaf command."""
    lines = [f"usage: {PROG} [global options] GROUP [COMMAND] [options]",
             "global options: --bits N --tol X --out FILE --workers N --config FILE --dry-run", "commands:"]
    for (group, cmd), (_, specs) in _COMMANDS.items():
        parts = [group] + ([cmd] if cmd else [])
        for name, kw in specs:
            meta = name.lstrip("-").upper().replace("-", "_")
            if kw.get("action") == "store_true":
                tok = name
            elif name.startswith("-"):
                tok = f"{name} {meta}"
            else:
                tok = meta
            if not kw.get("required") and name.startswith("-"):
                tok = f"[{tok}]"
            if kw.get("action") == "append":
                tok += " ..."
            parts.append(tok)
        lines.append("  " + " ".join(parts))
    return "\n".join(lines) + "\n"


def _inputs(kind: str, args, cfg: RunConfig) -> dict:
    a = vars(args)
    inp: dict = {"tol": cfg.tol}
    if "function" in a:
        inp["function"] = _read(a["function"])
    if "form" in a:
        inp["form"] = _read(a["form"])
    if kind == "dep.search":
        inp.update(n=args.n, max_disc=args.max_disc or cfg.max_disc, cn=args.cn or cfg.cn,
                   box_cap=args.box_cap or cfg.box_cap, workers=cfg.workers)
        if args.gamma:
            inp["gamma"] = _read(args.gamma)
        return inp
    if kind == "zp.classify":
        inp.update(point=_read(args.point), n=args.n, bounds=_read(args.bounds) if args.bounds else None)
        return inp
    if kind == "zp.scan-roots":
        inp.update(max_disc=args.max_disc or cfg.max_disc, max_order=args.max_order or cfg.max_order)
        return inp
    if kind == "zp.scan-modtors":
        inp.update(nmax=args.nmax or cfg.nmax, max_order=args.max_order or cfg.max_order,
                   max_disc=args.max_disc or cfg.max_disc)
        return inp
    if kind == "special.isogeny":
        inp.update(x1=args.x1, x2=args.x2, nmax=args.nmax or cfg.nmax)
        return inp
    skip = {"group", "command", "_key", "function", "form", "bits", "tol", "out", "workers", "config", "dry_run"}
    inp.update({k: v for k, v in a.items() if k not in skip})
    return inp


def _emit(kind, inputs, result, verdict, cfg: RunConfig) -> None:
    if kind in ("qseries.j", "qseries.hurwitz", "qseries.eta", "borcherds.fd", "forms.enum"):
        sys.stdout.write(result["text"])
    elif kind == "borcherds.lift":
        sys.stdout.write(f"# h = {result['h']}\n" + result["text"])
    elif kind == "dep.search":
        for c in result["certificates"]:
            print(json.dumps(c, sort_keys=True))
        cov = result["coverage"]
        print(json.dumps({"coverage": cov}, sort_keys=True))
        print(f"# {len(result['certificates'])} certificates; scanned discriminants: "
              + " ".join(str(D) for D in cov["discs"]), file=sys.stderr)
    else:
        print(json.dumps(jsonable(result), sort_keys=True, indent=None))
    if not cfg.out:
        return
    records = [CertificateRecord(kind, inputs, jsonable(result), jsonable(verdict), cfg.bits)]
    extra = []
    if kind == "dep.search":
        extra = result["certificates"]
    elif kind == "zp.scan-roots":
        extra = [h["certificate"] for h in result["hits"]]
    for c in extra:
        records.append(CertificateRecord("relation", {"certificate": c}, c, c["verdict"], c["bits"] or cfg.bits))
    with Store(cfg.out) as store:
        start = sum(1 for _ in store.records())
        for i, rec in enumerate(records):
            rec.replay = [PROG, "store", "replay", cfg.out, "--index", str(start + i)]
            store.append(rec)


def _replay(args, cfg: RunConfig) -> int:
    recs = list(Store(args.store).records())
    wanted = args.index if args.index is not None else range(len(recs))
    failures = 0
    for i in wanted:
        if not 0 <= i < len(recs):
            raise DomainError(f"no record {i} in {args.store}")
        rec = recs[i]
        bits = args.replay_bits or 2 * rec.bits
        try:
            replay_record(rec, bits)
            print(f"{i} {rec.kind} OK {json.dumps(rec.verdict) if isinstance(rec.verdict, str) else ''}".rstrip())
        except ModmultError as exc:
            failures += 1
            print(f"{i} {rec.kind} MISMATCH {type(exc).__name__}: {exc}")
    print(f"# replayed {len(list(wanted))} records, {failures} mismatches", file=sys.stderr)
    return 1 if failures else 0


def dispatch(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "_key", None):
        parser.error("missing command")
    a = vars(args)
    try:
        cfg = RunConfig.load(a.get("config"), bits=a.get("bits"), tol=a.get("tol"), out=a.get("out"),
                             workers=a.get("workers"))
        if a.get("dry_run"):
            sys.stdout.write(cfg.to_toml())
            return 0
        kind = _COMMANDS[args._key][0]
        if kind is None:
            return _replay(args, cfg)
        inputs = _inputs(kind, args, cfg)
        from .store import _KINDS
        result, verdict = _KINDS[kind](inputs, cfg.bits)
        _emit(kind, inputs, result, verdict, cfg)
        return 0
    except ModmultError as exc:
        print(f"{PROG}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
