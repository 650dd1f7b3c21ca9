"""Command-line front end: map files in, JSON reports out.

    fibreapp analyze examples/breakpoint-d2.map --seed 0
    fibreapp corpus --only matrix
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import analysis as an
from .geometry import MapSpec, chart_expand, dimension
from .groebner import BudgetExceeded, DEFAULT_BUDGET, Ideal, step_budget
from .polycore import ParseError, Ring, parse_factors

REPORT_FORMAT = "fibreapp-report/1"

EXIT_OK, EXIT_CAVEATS, EXIT_ERROR = 0, 1, 2

ENV = {
    "seed": "FIBREAPP_SEED",
    "budget": "FIBREAPP_BUDGET",
    "slice_bound": "FIBREAPP_SLICE_BOUND",
    "slice_reps": "FIBREAPP_SLICE_REPS",
    "route": "FIBREAPP_ROUTE",
}


class MapFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# map files
# ---------------------------------------------------------------------------

_SINGLE = {
    "name",
    "target_vars",
    "fibre_vars",
    "source_ideal",
    "map",
    "target_locally_irreducible",
    "seed",
    "budget",
    "slice_bound",
    "slice_reps",
}
_REPEATED = {"projective_block", "source_component", "disjoint_part", "target_component"}
_OPTION_KEYS = ("seed", "budget", "slice_bound", "slice_reps")


@dataclass
class MapFile:
    spec: MapSpec
    options: dict = field(default_factory=dict)
    texts: dict = field(default_factory=dict)


def _split_polys(value: str) -> list[str]:
    parts = [p.strip() for p in value.split(",")]
    if any(not p for p in parts):
        raise ParseError("empty polynomial in list")
    return parts


def _bool(value: str, line: int) -> bool:
    v = value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise MapFileError(f"expected true or false, got {value!r}", line)


def parse_map_text(text: str, default_name: str = "") -> MapFile:
    """Parse the line-oriented ``key: value`` map format (see docs/format.md)."""
    single: dict[str, tuple[str, int]] = {}
    repeated: dict[str, list[tuple[str, int]]] = {k: [] for k in _REPEATED}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise MapFileError("expected 'key: value'", lineno)
        key, value = (s.strip() for s in line.split(":", 1))
        if key in _REPEATED:
            repeated[key].append((value, lineno))
        elif key in _SINGLE:
            if key in single:
                raise MapFileError(f"duplicate key {key!r}", lineno)
            single[key] = (value, lineno)
        else:
            raise MapFileError(f"unknown key {key!r}", lineno)

    for req in ("target_vars", "fibre_vars"):
        if req not in single:
            raise MapFileError(f"missing key {req!r}")
    target = tuple(single["target_vars"][0].split())
    fibre = tuple(single["fibre_vars"][0].split())
    names = target + fibre
    if len(set(names)) != len(names):
        raise MapFileError("variable names must be distinct")
    if not target:
        raise MapFileError("target_vars is empty")
    ring = Ring(names)
    T = ring.subring(target)

    def polys(value: str, line: int, r: Ring = ring):
        try:
            texts = _split_polys(value)
            return texts, [r.parse(t) for t in texts]
        except ParseError as exc:
            raise MapFileError(str(exc), line) from None

    kinds = [k for k in ("map", "source_ideal") if k in single]
    kinds += [k for k in ("source_component", "disjoint_part") if repeated[k]]
    if kinds[:2] == ["map", "source_ideal"]:
        kinds.remove("source_ideal")  # extra equations on the source
    if len(kinds) != 1:
        raise MapFileError(
            "give exactly one of source_ideal, source_component, disjoint_part or map"
        )
    kind = kinds[0]

    hints = []
    texts: dict = {}
    sources: list[Ideal] = []
    if kind == "map":
        value, line = single["map"]
        ftexts, fpolys = polys(value, line)
        if len(fpolys) != len(target):
            raise MapFileError("map needs one polynomial per target variable", line)
        for p in fpolys:
            if set(p.variables()) & set(target):
                raise MapFileError("map polynomials may only use fibre variables", line)
        gens = [ring.var(y) - p for y, p in zip(target, fpolys)]
        if "source_ideal" in single:
            v2, l2 = single["source_ideal"]
            _, extra = polys(v2, l2)
            for p in extra:
                if set(p.variables()) & set(target):
                    raise MapFileError(
                        "with map, source_ideal may only use fibre variables", l2
                    )
            gens += extra
        sources = [Ideal(ring, gens)]
        texts["map"] = ftexts
    elif kind == "source_ideal":
        value, line = single["source_ideal"]
        stexts, gens = polys(value, line)
        sources = [Ideal(ring, gens)]
        for t in stexts:
            hints += parse_factors(t, ring)
    else:
        for value, line in repeated[kind]:
            stexts, gens = polys(value, line)
            sources.append(Ideal(ring, gens))
            for t in stexts:
                hints += parse_factors(t, ring)

    comps = []
    for value, line in repeated["target_component"]:
        _, gens = polys(value, line, T)
        comps.append(Ideal(T, gens))

    blocks = []
    for value, line in repeated["projective_block"]:
        pair = value.split()
        if len(pair) != 2 or not set(pair) <= set(fibre):
            raise MapFileError("projective_block needs two fibre variables", line)
        blocks.append(tuple(pair))
    used = [v for b in blocks for v in b]
    if len(set(used)) != len(used):
        raise MapFileError("projective blocks must not share variables")

    loc_irr = None
    if "target_locally_irreducible" in single:
        value, line = single["target_locally_irreducible"]
        loc_irr = _bool(value, line)

    options = {}
    for key in _OPTION_KEYS:
        if key in single:
            value, line = single[key]
            try:
                options[key] = int(value)
            except ValueError:
                raise MapFileError(f"{key} must be an integer", line) from None

    name = single["name"][0] if "name" in single else default_name
    try:
        spec = MapSpec(
            ring=ring,
            target_vars=target,
            sources=tuple(sources),
            target_components=tuple(comps),
            projective_blocks=tuple(blocks),
            sources_irreducible=kind == "source_component",
            disjoint=kind == "disjoint_part",
            target_locally_irreducible=loc_irr,
            hints=tuple(dict.fromkeys(hints)),
            name=name,
        )
        chart_expand(spec)
    except ValueError as exc:
        raise MapFileError(str(exc)) from None
    return MapFile(spec, options, texts)


def load_map(path: str | Path) -> MapFile:
    path = Path(path)
    return parse_map_text(path.read_text(), default_name=path.stem)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _value(v):
    return "infinity" if v == an.INFINITY else int(v)


def _ideal_json(J: Ideal) -> list[str]:
    return [str(g) for g in J.groebner()]


def _stratum_json(s: an.Stratum) -> dict:
    return {
        "component": s.component,
        "chart": s.chart,
        "k": s.k,
        "r": s.r,
        "w": s.w,
        "h": s.h,
        "closure": _ideal_json(s.ideal),
        "excluded": None if s.excluded is None else _ideal_json(s.excluded),
        "image": _ideal_json(s.image),
    }


@dataclass
class Options:
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    slice_bound: int = 1000
    slice_reps: int = 3
    route: str = "both"


def build_report(mf: MapFile, opts: Options) -> dict:
    """Run every applicable analysis and assemble the JSON-ready report."""
    m = mf.spec
    caveats: list[str] = []
    errors: list[str] = []
    smooth = an.target_is_smooth(m)
    report: dict = {
        "format": REPORT_FORMAT,
        "map": {
            "name": m.name,
            "target_vars": list(m.target_vars),
            "fibre_vars": list(m.fibre_vars),
            "projective_blocks": [list(b) for b in m.projective_blocks],
            "sources": [[str(g) for g in P.gens] for P in m.sources],
            "source_kind": "disjoint" if m.disjoint else (
                "components" if m.sources_irreducible else "ideal"
            ),
            "target_components": [[str(g) for g in J.gens] for J in m.target_components],
            "target_locally_irreducible": m.target_locally_irreducible,
            "d": m.d,
            "D": m.D,
            "target_smooth": smooth,
        },
        "options": {
            "seed": opts.seed,
            "budget": opts.budget,
            "slice_bound": opts.slice_bound,
            "slice_reps": opts.slice_reps,
            "route": opts.route,
        },
        "app_direct": None,
        "app_formula": None,
        "discrepancy": None,
        "openness": None,
        "critical_values": None,
        "rank_partition": None,
        "fibre_count": None,
    }
    try:
        with step_budget(opts.budget):
            _fill(report, m, opts, smooth, caveats)
    except (BudgetExceeded, an.TheoremContradiction, an.InconsistentStrata) as exc:
        errors.append(f"{type(exc).__name__}: {exc}")
    report["caveats"] = sorted(set(caveats))
    report["errors"] = errors
    report["status"] = "error" if errors else ("caveats" if caveats else "complete")
    return report


def _fill(report: dict, m: MapSpec, opts: Options, smooth: bool, caveats: list[str]):
    direct = None
    if opts.route in ("direct", "both"):
        direct = an.app_direct(m)
        caveats += direct.caveats
        report["app_direct"] = {
            "value": _value(direct.value),
            "bound": direct.bound,
            "bound_kind": "D" if len(m.target_components) > 1 else "d",
            "interval": None
            if direct.interval is None
            else [direct.interval[0], _value(direct.interval[1])],
            "caveats": direct.caveats,
            "certificate": [
                {"i": c.i, "quasiopen": c.quasiopen, "pieces": c.pieces}
                for c in direct.certificate
            ],
        }

    part = None
    if opts.route in ("formula", "both"):
        part = an.rank_partition(m, seed=opts.seed, bound=opts.slice_bound, reps=opts.slice_reps)
        formula = an.app_formula(part.strata, m.d, target_smooth=smooth)
        if not part.stabilized:
            formula.caveats.append(an.RANDOMIZED)
        formula.caveats += sorted(set(part.caveats))
        caveats += formula.caveats
        report["rank_partition"] = {
            "randomized": True,
            "seed": opts.seed,
            "slice_bound": opts.slice_bound,
            "slice_reps": opts.slice_reps,
            "slices": part.slices,
            "stabilized": part.stabilized,
            "strata": [_stratum_json(s) for s in part.strata],
        }
        report["app_formula"] = {
            "value": _value(formula.value),
            "caveats": formula.caveats,
            "certificate": formula.certificate,
        }
        crit = an.critical_values(part.strata, m.d, target=m.target_ring)
        report["critical_values"] = (
            "empty" if crit.is_unit() else {"ideal": _ideal_json(crit), "dimension": dimension(crit)}
        )
        report["fibre_count"] = _fibre_count(m, part, opts, smooth)

    if direct is not None and part is not None and direct.value != formula.value:
        if smooth:
            raise an.TheoremContradiction(
                f"direct route gives {_value(direct.value)}, formula gives {_value(formula.value)}"
                " on a smooth target"
            )
        report["discrepancy"] = {
            "direct": _value(direct.value),
            "formula": _value(formula.value),
            "reason": "target is singular: the formula is only an estimate there",
        }

    verdict = an.openness(m, seed=opts.seed, bound=opts.slice_bound, reps=opts.slice_reps)
    report["openness"] = {
        "verdict": verdict.verdict,
        "reason": verdict.reason,
        "rank_check": verdict.rank_check,
        "power_check": verdict.power_check,
    }


def _fibre_count(m: MapSpec, part: an.RankPartition, opts: Options, smooth: bool) -> dict:
    out: dict = {"generic_count": None, "bound": None, "comparison": None, "note": None}
    tops = [s for s in part.strata if s.k == s.h]
    if not tops or any(s.w != 0 for s in tops):
        out["note"] = "generic fibre is not finite"
        return out
    if any(s.h != m.d for s in tops):
        out["note"] = "source is not of the target's dimension"
        return out
    try:
        out["generic_count"] = an.generic_fibre_count(m, seed=opts.seed)
    except an.SamplingError as exc:
        out["note"] = str(exc)
    bound = an.fibre_count_bound(part.strata, m.d)
    out["bound"] = "not-applicable" if bound is None else bound
    if bound is not None and out["generic_count"] is not None:
        c = out["generic_count"]
        out["comparison"] = "equal" if c == bound else ("above" if c > bound else "below")
        if c < bound:
            if smooth:
                raise an.TheoremContradiction(
                    f"generic fibre count {c} is below the bound {bound}"
                )
            out["note"] = "the bound need not hold over a singular target"
    out["seed"] = opts.seed
    return out


def summary(report: dict) -> dict:
    """Flat view of the headline numbers, used for corpus expectations."""
    out = {
        "status": report["status"],
        "caveats": report["caveats"],
    }
    if report["app_direct"] is not None:
        out["app_direct"] = report["app_direct"]["value"]
        out["direct_bound"] = report["app_direct"]["bound"]
    if report["app_formula"] is not None:
        out["app_formula"] = report["app_formula"]["value"]
    if report["openness"] is not None:
        out["openness"] = report["openness"]["verdict"]
    cv = report["critical_values"]
    if cv is not None:
        out["critical_values"] = cv if cv == "empty" else cv["ideal"]
    fc = report["fibre_count"]
    if fc is not None:
        out["generic_fibre_count"] = fc["generic_count"]
        out["fibre_count_bound"] = fc["bound"]
    if report["rank_partition"] is not None:
        out["strata"] = sorted(
            [s["k"], s["r"], s["w"], s["h"]] for s in report["rank_partition"]["strata"]
        )
    out["discrepancy"] = report["discrepancy"] is not None
    return out


def exit_code(report: dict) -> int:
    if report["status"] == "error":
        return EXIT_ERROR
    return EXIT_CAVEATS if report["status"] == "caveats" else EXIT_OK


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _human(report: dict) -> str:
    s = summary(report)
    lines = [f"map {report['map']['name']}: d = {report['map']['d']}, D = {report['map']['D']}"]
    for key in ("app_direct", "app_formula", "openness", "critical_values",
                "generic_fibre_count", "fibre_count_bound"):
        if key in s:
            lines.append(f"  {key}: {s[key]}")
    if report["caveats"]:
        lines.append("  caveats: " + ", ".join(report["caveats"]))
    for e in report["errors"]:
        lines.append("  error: " + e)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


def corpus_dir():
    return resources.files("fibreapp") / "corpus"


def corpus_entries() -> dict[str, str]:
    return {
        p.name[:-4]: p.read_text()
        for p in sorted(corpus_dir().iterdir(), key=lambda p: p.name)
        if p.name.endswith(".map")
    }


def default_expectations() -> dict:
    return json.loads((corpus_dir() / "expectations.json").read_text())


def check_expectations(report: dict, expected: dict) -> list[str]:
    """Mismatches between a report and expected headline values."""
    s = summary(report)
    diffs = []
    for key, want in expected.items():
        if key == "caveats_include":
            missing = [c for c in want if c not in s["caveats"]]
            if missing:
                diffs.append(f"caveats: missing {missing}, got {s['caveats']}")
            continue
        got = s.get(key, "<absent>")
        if got != want:
            diffs.append(f"{key}: expected {want!r}, got {got!r}")
    return diffs


def run_corpus(expectations: dict, only: list[str] | None, flags: dict, out=None) -> int:
    out = out or sys.stdout
    entries = corpus_entries()
    names = sorted(expectations)
    if only:
        unknown = [n for n in only if n not in entries]
        if unknown:
            print(f"unknown corpus entries: {', '.join(unknown)}", file=sys.stderr)
            return EXIT_ERROR
        names = [n for n in names if n in only]
    failed = 0
    for name in names:
        if name not in entries:
            print(f"FAIL {name}: no such corpus entry", file=out)
            failed += 1
            continue
        mf = parse_map_text(entries[name], default_name=name)
        report = build_report(mf, _merge(Options(), mf.options, flags))
        diffs = check_expectations(report, expectations[name])
        if diffs:
            failed += 1
            print(f"FAIL {name}", file=out)
            for d in diffs:
                print(f"    {d}", file=out)
        else:
            print(f"pass {name}", file=out)
    print(f"{len(names) - failed}/{len(names)} corpus entries pass", file=out)
    return EXIT_OK if failed == 0 else EXIT_CAVEATS


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _env_defaults() -> dict:
    out = {}
    for key, var in ENV.items():
        if var in os.environ:
            out[key] = os.environ[var] if key == "route" else int(os.environ[var])
    return out


def _merge(base: Options, file_opts: dict, flags: dict) -> Options:
    """Precedence: flags, then environment, then map file, then built-in defaults."""
    vals = vars(base).copy()
    vals.update(file_opts)
    vals.update(_env_defaults())
    vals.update({k: v for k, v in flags.items() if v is not None})
    if vals["route"] not in ("direct", "formula", "both"):
        raise ValueError(f"bad route {vals['route']!r}")
    if vals["seed"] < 0 or vals["seed"] >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return Options(**vals)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fibreapp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, help="RNG seed for slicing and sampling (default 0)")
        sp.add_argument("--budget", type=int, help="reduction-step budget")
        sp.add_argument("--slice-bound", type=int, help="coefficient bound for random slices")
        sp.add_argument("--slice-reps", type=int, help="minimum number of slices per locus")
        sp.add_argument("--route", choices=("direct", "formula", "both"))
        sp.add_argument("--verbose", action="store_true", help="human summary on stderr")

    a = sub.add_parser("analyze", help="analyze one map file")
    a.add_argument("path")
    a.add_argument("--out", help="write the JSON report here instead of stdout")
    common(a)

    c = sub.add_parser("corpus", help="run the built-in corpus against its expectations")
    c.add_argument("--only", action="append", help="restrict to this entry (repeatable)")
    c.add_argument("--expectations", help="JSON file replacing the shipped expectations")
    common(c)
    return p


def _flags(args) -> dict:
    return {
        "seed": args.seed,
        "budget": args.budget,
        "slice_bound": args.slice_bound,
        "slice_reps": args.slice_reps,
        "route": args.route,
    }


def cmd_analyze(args) -> int:
    try:
        mf = load_map(args.path)
        opts = _merge(Options(), mf.options, _flags(args))
    except (OSError, ValueError) as exc:
        print(f"fibreapp: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = build_report(mf, opts)
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.verbose:
        sys.stderr.write(_human(report))
    return exit_code(report)


def cmd_corpus(args) -> int:
    try:
        if args.expectations:
            expected = json.loads(Path(args.expectations).read_text())
        else:
            expected = default_expectations()
        _merge(Options(), {}, _flags(args))
    except (OSError, ValueError) as exc:
        print(f"fibreapp: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run_corpus(expected, args.only, _flags(args))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze":
        return cmd_analyze(args)
    return cmd_corpus(args)


if __name__ == "__main__":
    sys.exit(main())
