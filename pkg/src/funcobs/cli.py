"""Command-line front end.

Every subcommand reads one JSON input file and prints a report on stdout.
Exit codes: 0 when the analysis ran (whatever the verdict), 2 for usage or
input errors, 3 when the request is well formed but outside what the tool
decides (non-diagonalizable design, oversize exhaustive search, |S| = n).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

import numpy as np

from funcobs import __version__
from funcobs.errors import FuncObsError, InvalidInputError, NumericalDegeneracyError, UnsupportedError
from funcobs.functional import analyze, is_functionally_observable, modal_functional_observability_jordan
from funcobs.io import load_pattern, load_system
from funcobs.numeric import (
    DEFAULT_POLICY,
    PRIME,
    RankPolicy,
    SystemTriple,
    field_observability_matrix,
    prime_field_rank,
)
from funcobs.placement import (
    PlacementProblem,
    diagonal_spectrum,
    group_ranks,
    certify,
    construct_min_C,
    greedy_place,
)
from funcobs.structural import (
    field_target_rank,
    is_sfo,
    random_realization,
    realize_triple,
    target_controllability_bracket,
    target_controllable_nminus1,
)

EXIT_OK, EXIT_USAGE, EXIT_UNSUPPORTED = 0, 2, 3
DIGITS = 10
SAMPLES = 100


def _num(x: float) -> float:
    v = round(float(x), DIGITS)
    return 0.0 if v == 0 else v


def _complex(z: complex) -> dict[str, float]:
    return {"re": _num(z.real), "im": _num(z.imag)}


def _matrix(M: np.ndarray) -> list[list[float]]:
    return [[_num(v) for v in row] for row in np.asarray(M, dtype=float)]


def _plain(obj):
    """Convert numpy scalars and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _one_based(idx) -> list[int]:
    return [int(i) + 1 for i in idx]


def _parse_index_list(text: str, name: str) -> list[int]:
    if text.strip() == "":
        return []
    try:
        vals = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise InvalidInputError(f"--{name} expects comma-separated integers, got {text!r}") from None
    if any(v < 1 for v in vals):
        raise InvalidInputError(f"--{name} indices are 1-based")
    return [v - 1 for v in vals]


def _policy(args) -> RankPolicy:
    if args.tolerance is None:
        return DEFAULT_POLICY
    if args.tolerance < 0:
        raise InvalidInputError("--tolerance must be nonnegative")
    return RankPolicy(args.tolerance_mode, args.tolerance)


# --- subcommands ----------------------------------------------------------------


def cmd_check_fo(args) -> dict[str, Any]:
    loaded = load_system(args.file)
    sys_ = loaded.system
    rep = analyze(sys_, _policy(args), args.margin)
    out: dict[str, Any] = {
        "functionally_observable": rep.functionally_observable,
        "functionally_detectable": rep.functionally_detectable,
        "rank_o": rep.rank_o,
        "rank_of": rep.rank_of,
        "diagonalizable": rep.diagonalizable,
        "condition": None if rep.condition is None else _num(rep.condition),
        "routes_agree": rep.routes_agree,
        "method": rep.method,
        "modal_table": None if rep.modal_table is None else [
            {"eigenvalue": _complex(r.eigenvalue), "multiplicity": r.multiplicity,
             "observable": r.observable, "unstable": r.unstable}
            for r in rep.modal_table
        ],
        "pbh_table": [
            {"eigenvalue": _complex(r.eigenvalue), "holds": r.holds, "necessary_only": r.necessary_only}
            for r in rep.pbh_table
        ],
    }
    if loaded.jordan is not None:
        rows = modal_functional_observability_jordan(sys_, loaded.jordan, _policy(args))
        out["jordan_modal_table"] = [{"eigenvalue": _complex(lam), "observable": ok} for lam, ok in rows]
    if any(r.necessary_only for r in rep.pbh_table):
        out["note"] = "A is not diagonalizable: PBH rows are necessary conditions only"
    if args.oracle:
        out["oracle"] = _integer_rank_oracle(sys_, rep)
    return out


def _integer_rank_oracle(sys_, rep) -> dict[str, Any]:
    # exact modular ranks, only meaningful when every entry is an integer
    mats = (sys_.A, sys_.C, sys_.F)
    if not all(np.array_equal(M, np.round(M)) for M in mats):
        return {"skipped": "non-integer entries"}
    A, C, F = (np.round(M).astype(np.int64) for M in mats)
    r_o = prime_field_rank(field_observability_matrix(A, C))
    r_of = prime_field_rank(np.vstack([field_observability_matrix(A, C), F % PRIME]))
    return {"field_rank_o": r_o, "field_rank_of": r_of, "agrees": (r_o, r_of) == (rep.rank_o, rep.rank_of)}


def _field_oracle(triple, seed) -> dict[str, Any]:
    rng = np.random.default_rng(seed)
    A = random_realization(triple.Abar, rng)[0]
    C = random_realization(triple.Cbar, rng)[0].reshape(-1, triple.n)
    F = random_realization(triple.Fbar, rng)[0].reshape(-1, triple.n)
    r_o = prime_field_rank(field_observability_matrix(A, C))
    r_ocf = prime_field_rank(field_observability_matrix(A, np.vstack([C, F])))
    return {"field_rank_o": r_o, "field_rank_ocf": r_ocf}


def cmd_check_sfo(args) -> dict[str, Any]:
    triple = load_pattern(args.file).triple
    rep = is_sfo(triple)
    out: dict[str, Any] = {
        "sfo": rep.sfo,
        "generic_rank_o": rep.generic_rank_o,
        "generic_rank_ocf": rep.generic_rank_ocf,
        "functional_states": _one_based(triple.functional_states),
        "per_state": [
            {"state": r.state + 1, "reached_by_every_max_family": r.reached_by_every_max_family,
             "output_reachable": r.output_reachable}
            for r in rep.per_state
        ],
        "fast_path_used": rep.fast_path_used,
    }
    if args.oracle:
        oracle = _field_oracle(triple, args.seed)
        rng = np.random.default_rng(args.seed)
        fo_count = sum(is_functionally_observable(realize_triple(triple, rng))[0] for _ in range(SAMPLES))
        oracle["agrees"] = (oracle["field_rank_o"], oracle["field_rank_ocf"]) == (rep.generic_rank_o, rep.generic_rank_ocf)
        oracle["real_samples"] = SAMPLES
        oracle["real_samples_fo"] = int(fo_count)
        out["oracle"] = oracle
    return out


def _placement_payload(args):
    if args.mode == "sfo":
        return "structural-sfo", load_pattern(args.file).triple
    return {"fo": "numeric-fo", "fd": "numeric-fd"}[args.mode], load_system(args.file).system


def cmd_place(args) -> dict[str, Any]:
    kind, payload = _placement_payload(args)
    candidates = None if args.candidates is None else _parse_index_list(args.candidates, "candidates")
    problem = PlacementProblem(kind, payload, candidates, _policy(args), args.margin)
    result = greedy_place(problem)
    out: dict[str, Any] = {
        "kind": kind,
        "candidates": _one_based(problem.candidates),
        "selected": _one_based(result.selected),
        "size": len(result.selected),
        "gain_trace": [{"sensor": a + 1, "gain": g} for a, g in result.gain_trace],
        "residual": result.residual,
        "feasible": result.feasible,
        "notes": result.notes,
    }
    if args.validate_bound:
        cert = certify(problem, result)
        out["bound_certificate"] = None if cert is None else {
            "optimum": cert.optimum, "bound": _num(cert.bound), "holds": cert.holds,
            "parameter": problem.bound_parameter(),
        }
    return out


def cmd_design_min(args) -> dict[str, Any]:
    sys_ = load_system(args.file).system
    policy = _policy(args)
    spec = diagonal_spectrum(sys_.A, policy)
    ranks = group_ranks(spec, sys_.F, policy)
    C = construct_min_C(sys_.A, sys_.F, policy)
    fo, r_o, r_of = is_functionally_observable(SystemTriple(sys_.A, C, sys_.F), policy)
    return {
        "p_star": C.shape[0],
        "groups": [
            {"eigenvalue": _complex(g.eigenvalue), "multiplicity": g.multiplicity, "rank_F_T": r}
            for g, r in zip(spec.groups, ranks)
        ],
        "C": _matrix(C),
        "verification": {"functionally_observable": fo, "rank_o": r_o, "rank_of": r_of},
        "condition": _num(spec.condition),
    }


def cmd_check_target_ctrl(args) -> dict[str, Any]:
    loaded = load_pattern(args.file)
    Abar = loaded.triple.Abar
    n = Abar.rows
    Bbar = loaded.Bbar
    if Bbar is None:
        raise InvalidInputError(f"{args.file}: check-target-ctrl needs field 'B'")
    targets = sorted(set(_parse_index_list(args.targets, "targets")))
    if any(t >= n for t in targets):
        raise InvalidInputError(f"--targets indices must lie in 1..{n}")
    out: dict[str, Any] = {"targets": _one_based(targets), "n": n}
    if len(targets) == n:
        raise UnsupportedError("|S| = n is plain structural controllability; test the dual pair with check-sfo instead")
    if len(targets) == n - 1:
        verdict = target_controllable_nminus1(Abar, Bbar, targets)
        out.update({"decided": True, "target_controllable": verdict})
    else:
        br = target_controllability_bracket(Abar, Bbar, targets)
        out.update({
            "decided": br.verdict is not None,
            "target_controllable": br.verdict,
            "bracket": {"low": br.low, "high": br.high, "generic_rank_c": br.generic_rank_c},
        })
    if args.oracle:
        r = field_target_rank(Abar, Bbar, targets, trials=50, seed=args.seed)
        oracle = {"field_rank_majority": r, "trials": 50}
        if out["target_controllable"] is not None:
            oracle["agrees"] = (r == len(targets)) == out["target_controllable"]
        out["oracle"] = oracle
    return out


COMMANDS = {
    "check-fo": cmd_check_fo,
    "check-sfo": cmd_check_sfo,
    "place": cmd_place,
    "design-min": cmd_design_min,
    "check-target-ctrl": cmd_check_target_ctrl,
}


# --- output -------------------------------------------------------------------------


def _text_value(v) -> str:
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        return f"{v['re']:g}{v['im']:+g}i" if v["im"] else f"{v['re']:g}"
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    if isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v):
        return "[" + ", ".join(_text_value(x) for x in v) + "]"
    return str(v)


def _table(rows: list[dict]) -> list[str]:
    if not rows:
        return ["  (empty)"]
    keys = list(rows[0])
    cells = [[_text_value(r[k]) for k in keys] for r in rows]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    fmt = "  " + "  ".join(f"{{:<{w}}}" for w in widths)
    return [fmt.format(*keys), *(fmt.format(*c) for c in cells)]


def render_text(report: dict[str, Any]) -> str:
    lines = []
    width = max(len(k) for k in report)
    for key, val in report.items():
        if isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{key}:")
            lines.extend(_table(val))
        elif isinstance(val, list) and val and isinstance(val[0], list):
            lines.append(f"{key}:")
            lines.extend("  " + "  ".join(f"{x:>10.6g}" for x in row) for row in val)
        elif isinstance(val, dict) and set(val) != {"re", "im"}:
            lines.append(f"{key}:")
            lines.extend(f"  {k}: {_text_value(v)}" for k, v in val.items())
        else:
            lines.append(f"{key:<{width}}  {_text_value(val)}")
    return "\n".join(lines)


def execute(args: argparse.Namespace) -> dict[str, Any]:
    result = _plain(COMMANDS[args.command](args))
    policy = _policy(args)
    return {
        "tool": "funcobs",
        "version": __version__,
        "command": args.command,
        "input": str(args.file),
        "seed": args.seed,
        "tolerance": {"mode": policy.mode, "value": policy.tolerance},
        "margin": args.margin,
        "result": result,
    }


def run(argv: Sequence[str] | None = None) -> dict[str, Any]:
    """Parse arguments and return the report dict; errors propagate."""
    return execute(build_parser().parse_args(argv))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="input JSON file")
    common.add_argument("--tolerance", type=float, default=None,
                        help="rank tolerance (default: machine-precision relative threshold)")
    common.add_argument("--tolerance-mode", choices=("relative", "absolute"), default="relative")
    common.add_argument("--margin", type=float, default=0.0,
                        help="eigenvalues with real part >= -margin count as unstable")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--oracle", action="store_true", help="add prime-field cross-checks")

    parser = argparse.ArgumentParser(prog="funcobs", description="Functional observability analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check-fo", parents=[common], help="numeric functional observability and detectability")
    sub.add_parser("check-sfo", parents=[common], help="structural functional observability of a pattern")
    place = sub.add_parser("place", parents=[common], help="greedy minimal sensor placement")
    place.add_argument("--mode", choices=("fo", "sfo", "fd"), default="fo")
    place.add_argument("--candidates", default=None, help="comma-separated 1-based rows of C")
    place.add_argument("--validate-bound", action="store_true", help="compare with the exhaustive optimum")
    sub.add_parser("design-min", parents=[common], help="closed-form minimal C for diagonalizable A")
    tc = sub.add_parser("check-target-ctrl", parents=[common], help="structural target controllability")
    tc.add_argument("--targets", required=True, help="comma-separated 1-based target states")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        report = execute(args)
    except (UnsupportedError, NumericalDegeneracyError) as exc:
        print(f"funcobs: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except FuncObsError as exc:
        print(f"funcobs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "text":
        header = {"command": report["command"], "version": report["version"], "seed": report["seed"],
                  "tolerance": report["tolerance"]["value"]}
        print(render_text(header | report["result"]))
    else:
        print(json.dumps(report, indent=2))
    return EXIT_OK
