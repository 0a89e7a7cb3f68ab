"""Command-line surface: generate instances, compute MMS values and gaps,
verify negative examples, and run the max-gap search.

Every command prints one JSON report to stdout with all numbers exact
(integers or "p/q" strings).  Exit codes: 0 success or confirmed, 1
counterexample or violation, 2 usage error, 3 capacity or budget
exhaustion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

from . import constructions
from .maxgap import (
    CD,
    PD,
    MaxGapConfig,
    SolveBudget,
    build_mip,
    build_root_lp,
    emit_lp_file,
    search_max_gap,
)
from .model import (
    CHORES,
    GOODS,
    CapacityError,
    Instance,
    ParseError,
    emit_instance,
    fraction_to_str,
    parse_instance,
)
from .mms import gap, mms, verify_negative
from .structure import detect_structure

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3


def _digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def _report(command: str, inputs: dict, result: dict, started: float) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "result": result,
        "elapsed_ms": int((time.perf_counter() - started) * 1000),
    }


def _print(report: dict, out) -> None:
    json.dump(report, out, sort_keys=True)
    out.write("\n")


def _read_instance(path: str) -> tuple:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    return parse_instance(text), _digest(text.encode("utf-8"))


def _write_text(text: str, out_path, stdout) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        stdout.write(text)
        if not text.endswith("\n"):
            stdout.write("\n")


def cmd_generate(args, stdout) -> int:
    name = args.name
    if name == "theorem1":
        instance = constructions.theorem1_instance()
    elif name == "chores9":
        instance = constructions.chores_instance()
    elif name == "base-matrix":
        layout = constructions.base_matrix(args.n)
        doc = {
            "kind": "base-matrix-layout",
            "n": layout.n,
            "target_sum": fraction_to_str(layout.target_sum),
            "items": [
                {"row": r, "col": c, "value": fraction_to_str(v)}
                for (r, c), v in zip(layout.item_positions, layout.values)
            ],
        }
        _write_text(json.dumps(doc, sort_keys=True) + "\n", args.out, stdout)
        return EXIT_OK
    elif name == "vrvc":
        instance = constructions.vr_vc_instance(args.n, args.row_agents, args.col_agents)
    elif name == "extended":
        instance = constructions.extended_instance(args.N)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(name)
    _write_text(emit_instance(instance) + "\n", args.out, stdout)
    return EXIT_OK


def cmd_mms(args, stdout) -> int:
    started = time.perf_counter()
    instance, digest = _read_instance(args.instance)
    agents = [args.agent] if args.agent is not None else list(range(instance.n))
    certs = [mms(instance, i) for i in agents]
    result = {
        "mode": instance.mode,
        "agents": agents,
        "mms": [fraction_to_str(c.value) for c in certs],
        "witness_partitions": [[sorted(b) for b in c.partition] for c in certs],
    }
    _print(_report("mms", {"instance_sha256": digest, "agent": args.agent}, result,
                   started), stdout)
    return EXIT_OK


def cmd_gap(args, stdout) -> int:
    started = time.perf_counter()
    instance, digest = _read_instance(args.instance)
    report = gap(instance)
    _print(_report("gap", {"instance_sha256": digest}, report.to_json_dict(), started),
           stdout)
    return EXIT_OK


def cmd_verify(args, stdout) -> int:
    started = time.perf_counter()
    instance, digest = _read_instance(args.instance)
    if args.claimed_mms:
        claimed = [Fraction(part) for part in args.claimed_mms.split(",")]
    else:
        claimed = [mms(instance, i).value for i in range(instance.n)]
    check = verify_negative(instance, claimed, Fraction(args.bound),
                            symmetry=args.symmetry)
    result = check.to_json_dict()
    if instance.n == 3 and instance.m == 9 and instance.mode == GOODS:
        result["structure"] = detect_structure(instance).to_json_dict()
    _print(_report("verify",
                   {"instance_sha256": digest, "bound": args.bound,
                    "claimed_mms": args.claimed_mms, "symmetry": args.symmetry},
                   result, started), stdout)
    return EXIT_OK if check.confirmed else EXIT_COUNTEREXAMPLE


def cmd_search(args, stdout) -> int:
    started = time.perf_counter()
    config = MaxGapConfig(
        mode=CHORES if args.mode == "chores" else GOODS,
        max_cuts_per_round=args.cuts_per_round,
        max_rounds=args.max_rounds,
    )
    budget = SolveBudget(max_nodes=args.budget_nodes, time_limit=args.budget_seconds)
    if args.emit_lp:
        model = build_root_lp(args.structure, mode=config.mode)
        with open(args.emit_lp, "w", encoding="utf-8") as handle:
            handle.write(emit_lp_file(model))
    if args.emit_mip:
        model = build_mip(args.structure, config)
        with open(args.emit_mip, "w", encoding="utf-8") as handle:
            handle.write(emit_lp_file(model))
    log = None
    log_handle = None
    if args.log:
        log_handle = open(args.log, "w", encoding="utf-8")

        def log(event):
            json.dump(event, log_handle, sort_keys=True)
            log_handle.write("\n")

    try:
        result = search_max_gap(args.structure, budget, config, log=log)
    finally:
        if log_handle is not None:
            log_handle.close()
    inputs = {"structure": args.structure, "mode": args.mode,
              "budget_nodes": args.budget_nodes, "budget_seconds": args.budget_seconds}
    _print(_report("search", inputs, result.to_json_dict(), started), stdout)
    if result.status == "verified":
        return EXIT_OK
    return EXIT_CAPACITY if result.status == "budget" else EXIT_COUNTEREXAMPLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmsgap",
        description="Exact maximin-share fair division toolkit: instance "
                    "generators, MMS and gap computation, negative-example "
                    "verification, and the exact LP/MIP max-gap search.")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized subcommands (reserved; the "
                             "shipped commands are deterministic)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker hint; results are independent of it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a named instance as JSON")
    p.add_argument("name", choices=["theorem1", "chores9", "base-matrix", "vrvc",
                                    "extended"])
    p.add_argument("--n", type=int, default=4, help="grid size for base-matrix/vrvc")
    p.add_argument("--N", type=int, default=6, help="agent count for extended")
    p.add_argument("--row-agents", type=int, default=2)
    p.add_argument("--col-agents", type=int, default=2)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("mms", help="per-agent MMS values and witness partitions")
    p.add_argument("instance", help="instance JSON path, or - for stdin")
    p.add_argument("--agent", type=int, default=None)
    p.set_defaults(func=cmd_mms)

    p = sub.add_parser("gap", help="exact MMS gap by exhaustive search")
    p.add_argument("instance")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("verify", help="check that every allocation leaves some "
                                      "agent at or below the bound")
    p.add_argument("instance")
    p.add_argument("--bound", required=True)
    p.add_argument("--claimed-mms", default=None,
                   help="comma-separated expected MMS values")
    p.add_argument("--symmetry", action="store_true",
                   help="skip permutations of identical agents")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="max-gap search over a 3x9 structure class")
    p.add_argument("--structure", choices=[PD, CD], required=True)
    p.add_argument("--mode", choices=["goods", "chores"], default="goods",
                   help="chores mode is exploratory: its model mirrors the "
                        "goods inequalities without the goods-only order "
                        "machinery and is not an acceptance target")
    p.add_argument("--budget-nodes", type=int, default=200_000)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--cuts-per-round", type=int, default=25)
    p.add_argument("--max-rounds", type=int, default=64)
    p.add_argument("--emit-lp", default=None, help="write the root LP file here")
    p.add_argument("--emit-mip", default=None, help="write the MIP (before lazy "
                                                    "cuts) file here")
    p.add_argument("--log", default=None, help="write JSON-line solver events here")
    p.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args, sys.stdout)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
