"""Command-line front end: list scenarios, run them, audit their claims.

Exit codes: 0 ok, 1 usage or input error, 3 claim mismatch under --strict,
4 internal invariant violation (norm drift, probability leak, no-signaling).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from math import sqrt

import numpy as np

from .protocol import (
    ConstraintError,
    InputFamily,
    Protocol,
    ProtocolError,
    execute,
    parse_protocol,
)
from .scenarios import SCENARIO_NAMES, builtin
from .statevec import InvariantViolation
from .verify import (
    CLAIM_TOL,
    NO_SIGNALING_TOL,
    VerificationReport,
    ledger,
    verify_scenario,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STRICT_MISMATCH = 3
EXIT_INVARIANT = 4


# ---------------------------------------------------------------------------
# Symbolic leaf-state rendering
# ---------------------------------------------------------------------------

def _symbol_trees(protocol: Protocol):
    """Branch trees at the family's symbol basis points, computed once."""
    return [execute(protocol, pt) for pt in protocol.family.symbol_basis_points()]


def _leaf_generators(protocol: Protocol, outcomes, regain: bool, trees=None):
    """Per-symbol unnormalized leaf vectors, from runs at the symbol basis points."""
    fam = protocol.family
    if trees is None:
        trees = _symbol_trees(protocol)
    rows = []
    labels = None
    for tree in trees:
        pool = tree.regain_leaves if regain else tree.leaves
        found = None
        for leaf in pool:
            if leaf.outcomes == outcomes:
                found = leaf
                break
        if found is None or found.bob_state is None:
            rows.append(None)
            continue
        labels = found.bob_state.labels
        rows.append(sqrt(found.probability) * found.bob_state.amps)
    if labels is None:
        return None, None
    dim = 2 ** len(labels)
    gens = [np.zeros(dim, dtype=complex) if r is None else r for r in rows]
    # undo the constraint scaling so generators correspond to unit symbols
    scaled = []
    for (_, bits), g in zip(fam.term_map, gens):
        scaled.append(g * sqrt(len(bits)))
    return labels, scaled


def _fmt_coeff(c: complex) -> str | None:
    """Render a coefficient as '', '-', 'i', '-i' or a compact number; None if ~0."""
    if abs(c) < 1e-9:
        return None
    for value, text in ((1, ""), (-1, "-"), (1j, "i"), (-1j, "-i")):
        if abs(c - value) < 1e-9:
            return text
    if abs(c.imag) < 1e-9:
        return f"({c.real:.3g})"
    return f"({c:.3g})"


def render_leaf_state(protocol: Protocol, outcomes, regain: bool = False, trees=None) -> str | None:
    """Express a leaf's residual state over the family symbols, Table style."""
    labels, gens = _leaf_generators(protocol, outcomes, regain, trees)
    if labels is None:
        return None
    scale = max(max(abs(g[k]) for g in gens) for k in range(len(gens[0])))
    if scale < 1e-12:
        return None
    terms = []
    n = len(labels)
    for k in range(2 ** n):
        ket = format(k, f"0{n}b")
        for sym, g in zip(protocol.family.symbols, gens):
            text = _fmt_coeff(g[k] / scale)
            if text is None:
                continue
            terms.append(f"{text}{sym}|{ket}⟩")
    if not terms:
        return None
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

def _point_doc(point) -> list:
    return [[float(v.real), float(v.imag)] for v in point]


def _leaf_doc(verdict, state_text) -> dict:
    return {
        "outcomes": [
            {"labels": list(labels), "outcome": outcome} for labels, outcome in verdict.outcomes
        ],
        "key": "·".join(verdict.key),
        "probability": [float(p) for p in verdict.probabilities],
        "success": verdict.success,
        "correction": str(verdict.correction) if verdict.correction is not None else None,
        "min_fidelity": verdict.min_fidelity,
        "failed_by_protocol": verdict.failed_by_protocol,
        "state": state_text,
    }


def _aggregate_doc(agg) -> dict:
    return {
        "per_param": [float(p) for p in agg.per_point],
        "mean": agg.mean,
        "min": agg.min,
        "max": agg.max,
    }


def _claim_doc(audit) -> dict | None:
    if audit is None:
        return None
    return {"value": audit.claimed, "citation": audit.citation}


def report_doc(rep: VerificationReport, protocol: Protocol) -> dict:
    trees = _symbol_trees(protocol)
    doc = {
        "scenario": rep.scenario,
        "params": [_point_doc(pt) for pt in rep.points],
        "leaves": [
            _leaf_doc(v, render_leaf_state(protocol, v.outcomes, trees=trees))
            for v in rep.leaves
        ],
        "aggregate": _aggregate_doc(rep.aggregate),
        "claim": _claim_doc(rep.claim),
        "discrepancy": (
            {"flag": not rep.claim.match, "delta": rep.claim.delta} if rep.claim else None
        ),
        "cbits": {"declared": rep.cbits.declared, "minimum": rep.cbits.minimum},
        "no_signaling_max": rep.no_signaling_max,
        "regain": None,
    }
    if rep.regain is not None:
        doc["regain"] = {
            "leaves": [
                _leaf_doc(v, render_leaf_state(protocol, v.outcomes, regain=True, trees=trees))
                for v in rep.regain.leaves
            ],
            "unconditional": _aggregate_doc(rep.regain.unconditional),
            "conditional": _aggregate_doc(rep.regain.conditional),
            "claim": _claim_doc(rep.regain.claim_conditional),
        }
    return doc


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=True) + "\n"


def report_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["scenario", "stage", "outcome", "probability_mean", "success", "correction",
         "failed_by_protocol", "state"]
    )

    def rows(leaves, stage):
        for leaf in leaves:
            probs = leaf["probability"]
            writer.writerow(
                [
                    doc["scenario"],
                    stage,
                    leaf["key"],
                    f"{sum(probs) / len(probs):.12g}",
                    leaf["success"],
                    leaf["correction"] or "",
                    leaf["failed_by_protocol"],
                    leaf["state"] or "",
                ]
            )

    rows(doc["leaves"], "main")
    if doc["regain"]:
        rows(doc["regain"]["leaves"], "regain")
    return buf.getvalue()


def report_table(doc: dict) -> str:
    lines = [f"scenario: {doc['scenario']}"]
    if doc["claim"]:
        lines.append(f"claim: {doc['claim']['value']:.6f}  ({doc['claim']['citation']})")
    agg = doc["aggregate"]
    lines.append(
        f"computed success probability: mean={agg['mean']:.6f} "
        f"min={agg['min']:.6f} max={agg['max']:.6f}"
    )
    if doc["discrepancy"] and doc["discrepancy"]["flag"]:
        lines.append(f"DISCREPANCY: |computed - claimed| = {doc['discrepancy']['delta']:.6f}")
    cb = doc["cbits"]
    declared = "unstated" if cb["declared"] is None else str(cb["declared"])
    lines.append(f"cbits: declared={declared} minimum={cb['minimum']}")
    lines.append(f"no-signaling max trace distance: {doc['no_signaling_max']:.3e}")
    lines.append("")

    def table(leaves, title):
        out = [title, f"{'outcome':<16} {'p(mean)':<10} {'ok':<4} {'correction':<10} state"]
        for leaf in leaves:
            probs = leaf["probability"]
            mark = "yes" if leaf["success"] else ("ABRT" if leaf["failed_by_protocol"] else "no")
            out.append(
                f"{leaf['key']:<16} {sum(probs) / len(probs):<10.6f} {mark:<4} "
                f"{leaf['correction'] or '-':<10} {leaf['state'] or '-'}"
            )
        return out

    lines += table(doc["leaves"], "branches (outcome → receiver state → correction):")
    if doc["regain"]:
        lines.append("")
        lines += table(doc["regain"]["leaves"], "recovery branches:")
        ru, rc = doc["regain"]["unconditional"], doc["regain"]["conditional"]
        lines.append(
            f"recovery success: unconditional mean={ru['mean']:.6f}, "
            f"conditional mean={rc['mean']:.6f}"
        )
    return "\n".join(lines) + "\n"


def ledger_table(rows) -> str:
    header = f"{'scenario':<30} {'claimed':<10} {'computed':<10} {'|Δ|':<10} {'match':<7} citation"
    lines = [header, "-" * len(header)]
    for r in rows:
        claimed = f"{r.claimed:.6f}" if r.claimed is not None else "-"
        delta = f"{r.delta:.6f}" if r.delta is not None else "-"
        match = {True: "yes", False: "NO", None: "-"}[r.match]
        lines.append(
            f"{r.scenario:<30} {claimed:<10} {r.computed:<10.6f} {delta:<10} {match:<7} {r.citation}"
        )
    return "\n".join(lines) + "\n"


def ledger_doc(rows, reports, protocols: dict[str, Protocol]) -> dict:
    return {
        "ledger": [
            {
                "scenario": r.scenario,
                "claimed": r.claimed,
                "computed": r.computed,
                "delta": r.delta,
                "match": r.match,
                "citation": r.citation,
            }
            for r in rows
        ],
        "reports": [report_doc(rep, protocols[rep.scenario]) for rep in reports],
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _write_out(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_list(_args) -> int:
    for name in SCENARIO_NAMES:
        sd = builtin(name)
        claim = sd.protocol.claim
        summary = (
            f"claims {claim.probability:.6f} ({claim.citation})" if claim else "no stated claim"
        )
        print(f"{name:<14} {sd.description}; {summary}")
    return EXIT_OK


def _load_protocol(ref: str) -> Protocol:
    if ref in SCENARIO_NAMES:
        return builtin(ref).protocol
    try:
        with open(ref) as fh:
            text = fh.read()
    except OSError:
        raise ProtocolError(
            f"{ref!r} is neither a builtin scenario ({', '.join(SCENARIO_NAMES)}) "
            "nor a readable protocol file"
        ) from None
    return parse_protocol(text)


def _parse_point(text: str, family: InputFamily):
    try:
        raw = json.loads(text)
        point = tuple(complex(re, im) for re, im in raw)
    except (json.JSONDecodeError, TypeError, ValueError):
        raise ConstraintError(
            "--params must be a JSON list of [re, im] pairs, one per family parameter"
        ) from None
    family.check_point(point)
    return point


def cmd_run(args) -> int:
    protocol = _load_protocol(args.scenario)
    points = None
    if args.params is not None:
        points = [_parse_point(args.params, protocol.family)]
    rep = verify_scenario(
        protocol, n_samples=args.samples, seed=args.seed, points=points
    )
    if rep.no_signaling_max >= NO_SIGNALING_TOL:
        raise InvariantViolation(
            f"no-signaling distance {rep.no_signaling_max:.3e} for {protocol.name}"
        )
    doc = report_doc(rep, protocol)
    if args.format == "json":
        _write_out(_dump_json(doc), args.out)
    elif args.format == "csv":
        _write_out(report_csv(doc), args.out)
    else:
        _write_out(report_table(doc), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = SCENARIO_NAMES if args.all else (args.scenario,)
    reports = []
    protocols = {}
    for name in names:
        proto = _load_protocol(name)
        protocols[proto.name] = proto
        rep = verify_scenario(
            proto, n_samples=args.samples, seed=args.seed, tolerance=args.tolerance
        )
        if rep.no_signaling_max >= NO_SIGNALING_TOL:
            raise InvariantViolation(
                f"no-signaling distance {rep.no_signaling_max:.3e} for {proto.name}"
            )
        reports.append(rep)
    rows = ledger(reports).rows
    if args.format == "json":
        _write_out(_dump_json(ledger_doc(rows, reports, protocols)), args.out)
    else:
        _write_out(ledger_table(rows), args.out)
    if args.strict and any(r.match is False for r in rows):
        return EXIT_STRICT_MISMATCH
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleaudit",
        description="Enumerate teleportation-protocol branches and audit success-probability claims.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list builtin scenarios")

    run = sub.add_parser("run", help="run one scenario or protocol file")
    run.add_argument("scenario", help="builtin name or path to a protocol JSON file")
    run.add_argument("--params", help="explicit parameter point as JSON [[re,im],...]")
    run.add_argument("--samples", type=int, default=6, help="seeded sample count (default 6)")
    run.add_argument("--seed", type=int, default=7, help="sampling seed (default 7)")
    run.add_argument("--format", choices=("table", "json", "csv"), default="table")
    run.add_argument("--out", help="write output to a file instead of stdout")

    ver = sub.add_parser("verify", help="audit claims for one or all scenarios")
    ver.add_argument("scenario", nargs="?", help="builtin scenario name")
    ver.add_argument("--all", action="store_true", help="verify every builtin scenario")
    ver.add_argument("--strict", action="store_true", help="exit 3 on any claim mismatch")
    ver.add_argument(
        "--tolerance", type=float, default=CLAIM_TOL, help="claim match tolerance (default 1e-6)"
    )
    ver.add_argument("--samples", type=int, default=6)
    ver.add_argument("--seed", type=int, default=7)
    ver.add_argument("--format", choices=("table", "json"), default="table")
    ver.add_argument("--out", help="write output to a file instead of stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    if args.command == "verify" and not args.all and args.scenario is None:
        print("error: verify needs a scenario name or --all", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "list":
            return cmd_list(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_verify(args)
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ProtocolError, ConstraintError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def entry():  # console-script wrapper
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
