"""Command-line front end: ``addicone report`` and ``addicone verify``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid target or
arguments, 3 a cone generator could not be certified.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Optional

from . import __version__
from .additivity import (
    AdditivityCone,
    coincidence_check,
    load_witness_library,
    multi_var_cone,
    one_var_cone,
    verify_certificate,
    witness_library,
    witness_row,
    zero_var_cone,
)
from .decouplings import (
    MERGED_CASES,
    CLASS_ORDER,
    DecouplingCode,
    DecouplingError,
    code_systems_table,
    cross_reference,
    enumerate_standard,
    esv_term,
    reduce_by_symmetry,
)
from .entropic import EntropyDomainError
from .formulas import AlphaSpace, composite_context, formula_context, parse_functional, simplify_functional
from .numlab import (
    IsometryChannel,
    OptimizerConfig,
    coherent_information,
    evaluate_formula,
    informational_degradability_check,
    numeric_delta_check,
    thread_count,
)
from .polyhedra import cones_equal

log = logging.getLogger("addicone")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNCERTIFIED = 0, 1, 2, 3
FORMATS = ("json", "markdown", "csv")
SUITES = ("witnesses", "certificates", "numeric", "coincidence", "all")
NUMERIC_TOL = 1e-8


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# manifest and output


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunManifest:
    command: list
    config: dict
    seeds: list
    version: str = __version__
    input_hashes: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _library_hash() -> str:
    data = resources.files("addicone").joinpath("data/witnesses.json").read_bytes()
    return _sha256(data)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, name: str, out_dir: Optional[str], manifest: RunManifest):
    if out_dir is None:
        sys.stdout.write(text)
        return
    manifest.outputs.append(name)
    _atomic_write(os.path.join(out_dir, name), text)


def _finish(manifest: RunManifest, out_dir: Optional[str]):
    if out_dir is not None:
        manifest.outputs.append("manifest.json")
        _atomic_write(os.path.join(out_dir, "manifest.json"), _dumps(manifest.to_json()))


# --------------------------------------------------------------------------
# report builders


def _cone_rows(cone: AdditivityCone) -> list[dict]:
    data = cone.to_json()
    return [{"kind": r["kind"], "vector": " ".join(r["vector"]), "formula": r["formula"],
             "certified": r["certificate"]["status"] == "certified"} for r in data["rays"]]


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in columns})
    return buf.getvalue()


def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c).replace("|", "\\|") for c in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _cone_markdown(title: str, cone: AdditivityCone) -> str:
    rows = [[f] for f in cone.facets_display()]
    out = f"## {title}\n\n" + _md_table(["facet"], rows) + "\n"
    out += _md_table(["extreme ray", "certified"],
                     [[d, "yes" if c.ok else "no"] for d, c in zip(_generator_names(cone), cone.certificates)])
    return out


def _generator_names(cone: AdditivityCone) -> list[str]:
    names = [r["formula"] + (" (-)" if r["kind"] == "lineality-" else "") for r in cone.to_json()["rays"]]
    return names


def report_zero_var(fmt: str):
    cone = zero_var_cone()
    if fmt == "json":
        return _dumps(cone.to_json()), "zero-var.json", [cone]
    if fmt == "csv":
        return _csv(_cone_rows(cone), ["kind", "vector", "formula", "certified"]), "zero-var.csv", [cone]
    return _cone_markdown("Zero auxiliary variables", cone), "zero-var.md", [cone]


def _one_var_rows() -> list[dict]:
    """Merged cases followed by the classes they absorb."""
    xref = {r["case"]: r for r in cross_reference()}
    rows = []
    for number, rep, _ in MERGED_CASES:
        rows.append({"case": str(number), "code": DecouplingCode.single(*rep),
                     "equivalents": xref[number]["equivalents"]})
    sm = {k.representative.pair: k for k in reduce_by_symmetry(enumerate_standard(1))}
    for pair in ((1, 0), (0, 0)):
        rows.append({"case": f"class {pair[0]},{pair[1]}", "code": DecouplingCode.single(*pair),
                     "equivalents": [list(m.pair) for m in sm[pair].equivalents]})
    return rows


def _cones_parallel(codes):
    workers = min(thread_count(), len(codes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one_var_cone, codes))
    return [one_var_cone(c) for c in codes]


def report_one_var(spec: str, fmt: str):
    if spec.upper() == "ALL":
        rows = _one_var_rows()
        cones = _cones_parallel([r["code"] for r in rows])
        if fmt == "json":
            data = []
            for r, cone in zip(rows, cones):
                d = cone.to_json()
                d["case"] = r["case"]
                d["equivalents"] = r["equivalents"]
                data.append(d)
            return _dumps(data), "one-var.json", cones
        if fmt == "csv":
            out = []
            for r, cone in zip(rows, cones):
                for g in _cone_rows(cone):
                    out.append({"case": r["case"], "class": cone.code.label(), **g})
            return _csv(out, ["case", "class", "kind", "vector", "formula", "certified"]), "one-var.csv", cones
        table = []
        for r, cone in zip(rows, cones):
            mh, mt = code_systems_table(cone.code)
            eq = ", ".join(f"({a},{b})" for a, b in r["equivalents"]) or "-"
            table.append([r["case"], cone.code.label(), mh, mt, eq, "; ".join(cone.facets_display()),
                          ", ".join(cone.rays_display())])
        header = ["case", "(a,b)", "M^_1", "M~_2", "equivalents", "additive cone", "extreme rays"]
        return "# One auxiliary variable\n\n" + _md_table(header, table), "one-var.md", cones
    try:
        code = DecouplingCode.parse(spec)
        if code.n_aux != 1:
            raise DecouplingError("one-var needs a single pair a,b")
    except (DecouplingError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    cone = one_var_cone(code)
    stem = f"one-var-{code.pair[0]}{code.pair[1]}"
    if fmt == "json":
        return _dumps(cone.to_json()), stem + ".json", [cone]
    if fmt == "csv":
        return _csv(_cone_rows(cone), ["kind", "vector", "formula", "certified"]), stem + ".csv", [cone]
    return _cone_markdown(f"Decoupling {code.label()}", cone), stem + ".md", [cone]


def report_multi_var(spec: str, fmt: str):
    try:
        n_text, code_text = spec.split(":", 1)
        n = int(n_text)
        code = DecouplingCode.parse(code_text)
        if code.n_aux != n:
            raise DecouplingError(f"code has {code.n_aux} variables, expected {n}")
        cone = multi_var_cone(n, code)
    except (DecouplingError, ValueError) as exc:
        raise UsageError(f"bad multi-var target {spec!r}: {exc}") from None
    stem = f"multi-var-{n}-{code.label().replace(',', '_')}"
    if fmt == "json":
        d = cone.to_json()
        d["class"] = code.to_json()
        return _dumps(d), stem + ".json", [cone]
    if fmt == "csv":
        return _csv(_cone_rows(cone), ["kind", "vector", "formula", "certified"]), stem + ".csv", [cone]
    return _cone_markdown(f"{n} auxiliary variables, code {code.label()}", cone), stem + ".md", [cone]


def report_decouplings(fmt: str, n_aux: int):
    codes = enumerate_standard(n_aux)
    if n_aux != 1:
        data = {"aux": n_aux, "codes": [c.to_json() for c in codes], "count": len(codes)}
        if fmt == "json":
            return _dumps(data), f"decouplings-{n_aux}.json", []
        if fmt == "csv":
            return _csv([{"code": c.label()} for c in codes], ["code"]), f"decouplings-{n_aux}.csv", []
        return (f"# Standard decouplings, {n_aux} auxiliary variables\n\n{len(codes)} codes\n\n"
                + _md_table(["code"], [[c.label()] for c in codes]), f"decouplings-{n_aux}.md", [])
    classes = reduce_by_symmetry(codes)
    merged = reduce_by_symmetry(codes, include_dual=True)
    xref = cross_reference()
    if fmt == "json":
        data = {"aux": 1, "count": len(codes), "codes": [c.to_json() for c in codes],
                "classes": [k.to_json() for k in classes], "merged_count": len(merged), "cross_reference": xref}
        return _dumps(data), "decouplings-1.json", []
    rows = []
    for i, k in enumerate(classes, 1):
        mh, mt = code_systems_table(k.representative)
        eq = ", ".join(m.label() for m in k.equivalents) or "-"
        rows.append({"class": str(i), "code": k.representative.label(), "M^_1": mh, "M~_2": mt, "equivalents": eq})
    cols = ["class", "code", "M^_1", "M~_2", "equivalents"]
    if fmt == "csv":
        return _csv(rows, cols), "decouplings-1.csv", []
    text = f"# Standard decouplings, one auxiliary variable\n\n{len(codes)} codes, {len(classes)} classes, "
    text += f"{len(merged)} after purification duality\n\n"
    text += _md_table(cols, [[r[c] for c in cols] for r in rows])
    text += "\n" + _md_table(
        ["case", "representative", "classes", "equivalents"],
        [[str(x["case"]), "({},{})".format(*x["representative"]),
          ", ".join("({},{})".format(*p) for p in x["classes"]),
          ", ".join("({},{})".format(*p) for p in x["equivalents"]) or "-"] for x in xref])
    return text, "decouplings-1.md", []


def esv_tables() -> dict:
    """``E_sV`` for ``s = B`` and ``s = E`` over all sixteen codes, in table order."""
    out = {}
    for s in ("B", "E"):
        bits = (0, 1, 2, 3) if s == "B" else (0, 2, 1, 3)  # s listed first within each block
        rows = []
        for b in bits:
            for a in bits:
                code = DecouplingCode.single(a, b)
                f = esv_term(s, code)
                mh, mt = code_systems_table(code)
                rows.append({"a": a, "b": b, "M^_1": mh, "M~_2": mt, "expression": simplify_functional(f),
                             "coefficients": {composite_context(1).label(m): str(c) for m, c in sorted(f.coeffs.items())}})
        out[s] = rows
    return out


def report_esv(fmt: str):
    tables = esv_tables()
    if fmt == "json":
        return _dumps(tables), "esv-tables.json", []
    if fmt == "csv":
        rows = [{"s": s, **{k: v for k, v in r.items() if k != "coefficients"}} for s, t in tables.items() for r in t]
        return _csv(rows, ["s", "a", "b", "M^_1", "M~_2", "expression"]), "esv-tables.csv", []
    text = ""
    for s, rows in tables.items():
        text += f"## E_sV for s = {s}\n\n"
        text += _md_table(["M^_1", "M~_2", "expression"], [[r["M^_1"], r["M~_2"], r["expression"]] for r in rows])
        text += "\n"
    return text, "esv-tables.md", []


def cmd_report(args, manifest: RunManifest) -> int:
    target = args.target
    fmt = args.format
    if args.class_ and target == "one-var":
        target = f"one-var:{args.class_}"
    if target == "zero-var":
        text, name, cones = report_zero_var(fmt)
    elif target.startswith("one-var:"):
        text, name, cones = report_one_var(target.split(":", 1)[1], fmt)
    elif target.startswith("multi-var:"):
        text, name, cones = report_multi_var(target.split(":", 1)[1], fmt)
    elif target == "decouplings":
        if not 0 <= args.aux <= 3:
            raise UsageError("--aux must lie in 0..3")
        text, name, cones = report_decouplings(fmt, args.aux)
    elif target == "esv-tables":
        text, name, cones = report_esv(fmt)
    else:
        raise UsageError(f"unknown report target {target!r}")
    _emit(text, name, args.out, manifest)
    _finish(manifest, args.out)
    if any(not c.certified for c in cones):
        log.error("some cone generators could not be certified")
        return EXIT_UNCERTIFIED
    return EXIT_OK


# --------------------------------------------------------------------------
# verification suites


def _check(name: str, expected, observed, tolerance, passed: bool) -> dict:
    return {"check": name, "expected": expected, "observed": observed, "tolerance": tolerance, "passed": bool(passed)}


def suite_witnesses() -> list[dict]:
    out = []
    for w in witness_library():
        exp = w.expected_vector()
        got = witness_row(w.distribution(), w.decoupling)
        out.append(_check(f"witness {w.name}", [str(x) for x in exp], [str(x) for x in got], "exact", exp == got))
    return out


def _shipped_cones() -> list[AdditivityCone]:
    return [zero_var_cone()] + _cones_parallel([DecouplingCode.single(*p) for p in CLASS_ORDER + ((3, 2),)])


def suite_certificates() -> list[dict]:
    out = []
    for cone in [zero_var_cone()] + _cones_parallel(enumerate_standard(1)):
        label = cone.code.label() if cone.code.n_aux else "zero-var"
        for k, c in enumerate(cone.certificates):
            ok = verify_certificate(c, cone.code, cone.space)
            out.append(_check(f"{label} generator {k} certificate", "certified",
                              "certified" if ok else "refuted", "exact", ok))
        eq = cones_equal(cone.h, cone.inner)
        out.append(_check(f"{label} outer = inner", True, bool(eq), "exact", bool(eq)))
        tight = cone.tight_witnesses()
        ok = all(tight)
        out.append(_check(f"{label} facets tight on witnesses", True, ok, "exact", ok))
    return out


def suite_numeric(samples: int, seed: int, extra_alpha: list, channel: Optional[IsometryChannel]) -> list[dict]:
    out = []
    for cone in _shipped_cones():
        label = cone.code.label() if cone.code.n_aux else "zero-var"
        full = AlphaSpace.full(cone.code.n_aux)
        for k, g in enumerate(cone.generators):
            alpha = cone.space.embed(g, full)
            for mode, n in (("classical", samples), ("quantum", max(1, samples // 5))):
                r = numeric_delta_check(alpha, cone.code, n, seed=seed, mode=mode)
                out.append(_check(f"{label} generator {k} {mode} ({n} samples)", f">= -{NUMERIC_TOL:g}",
                                  r.minimum, NUMERIC_TOL, r.passed(NUMERIC_TOL)))
    for item in extra_alpha:
        code = DecouplingCode.parse(str(item.get("code", "")))
        if "formula" in item:
            alpha = parse_functional(item["formula"], formula_context(code.n_aux))
        else:
            alpha = item["alpha"]
        r = numeric_delta_check(alpha, code, samples, seed=seed)
        out.append(_check(f"alpha {item.get('name', code.label())}", f">= -{NUMERIC_TOL:g}", r.minimum, NUMERIC_TOL,
                          r.passed(NUMERIC_TOL)))
    if channel is not None:
        cfg = OptimizerConfig(seed=seed)
        res = coherent_information(channel, cfg)
        again = evaluate_formula("H(B)-H(E)", channel, res.psi, res.input_dims)
        out.append(_check(f"{channel.name} coherent information reproducible", res.value, again, 1e-9,
                          abs(again - res.value) <= 1e-9))
        deg = informational_degradability_check(channel, cfg=cfg)
        out.append(_check(f"{channel.name} informational degradability", "reported", deg.verdict, None, True)
                   | {"margin": deg.margin})
    return out


def suite_coincidence() -> list[dict]:
    out = []
    for code in [None] + [DecouplingCode.single(*p) for p in CLASS_ORDER]:
        r = coincidence_check(code)
        label = code.label() if code is not None else "zero-var"
        out.append(_check(f"{label} classical = quantum", True, r.equal, "exact", r.equal)
                   | {"counterexample": r.to_json()["counterexample"]})
    return out


def cmd_verify(args, manifest: RunManifest) -> int:
    suites = SUITES[:-1] if args.suite == "all" else (args.suite,)
    extra = []
    if args.alpha:
        with open(args.alpha, encoding="utf-8") as fh:
            raw = fh.read()
        manifest.input_hashes[os.path.basename(args.alpha)] = _sha256(raw.encode())
        data = json.loads(raw)
        extra = data if isinstance(data, list) else [data]
    channel = None
    if args.channel:
        with open(args.channel, encoding="utf-8") as fh:
            raw = fh.read()
        manifest.input_hashes[os.path.basename(args.channel)] = _sha256(raw.encode())
        channel = IsometryChannel.from_json(raw)
    results = {}
    for s in suites:
        log.info("running suite %s", s)
        if s == "witnesses":
            results[s] = suite_witnesses()
        elif s == "certificates":
            results[s] = suite_certificates()
        elif s == "numeric":
            results[s] = suite_numeric(args.samples, args.seed, extra, channel)
        elif s == "coincidence":
            results[s] = suite_coincidence()
    failed = [c for checks in results.values() for c in checks if not c["passed"]]
    summary = {
        "suites": results,
        "total": sum(len(v) for v in results.values()),
        "failed": len(failed),
        "passed": not failed,
        "first_counterexample": failed[0] if failed else None,
    }
    _emit(_dumps(summary), "verify.json", args.out, manifest)
    _finish(manifest, args.out)
    return EXIT_OK if not failed else EXIT_FAIL


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="addicone", description="Uniform additivity cones of entropic formulas.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("report", help="emit a cone or table report")
    r.add_argument("target", help="zero-var | one-var:ALL | one-var:a,b | multi-var:n:code | decouplings | esv-tables")
    r.add_argument("--format", choices=FORMATS, default="json")
    r.add_argument("--out", metavar="DIR")
    r.add_argument("--aux", type=int, default=1)
    r.add_argument("--class", dest="class_", metavar="a,b")
    r.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--samples", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", metavar="DIR")
    v.add_argument("--channel", metavar="FILE")
    v.add_argument("--alpha", metavar="FILE")
    v.add_argument("--format", choices=("json",), default="json")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose",)}
    manifest = RunManifest(argv, config, [args.seed], input_hashes={
        "witnesses.json": _library_hash(),
        "witness_library_version": load_witness_library()[0],
    })
    try:
        if args.command == "report":
            return cmd_report(args, manifest)
        if getattr(args, "samples", 1) <= 0:
            raise UsageError("--samples must be positive")
        return cmd_verify(args, manifest)
    except UsageError as exc:
        sys.stderr.write(f"addicone: error: {exc}\n")
        return EXIT_USAGE
    except (OSError, EntropyDomainError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"addicone: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
