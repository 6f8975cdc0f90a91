"""
bfcalc command-line front end
Every subcommand prints one JSON report; exit 0 = true, 1 = false, 2 = input or cap error
"""

import argparse
import logging
import sys
import time
from typing import Callable, Dict, List, Optional, Tuple

from chains import colimit_of_chain, verify_ladder, verify_smooth_composition
from config_utils import get_config
from data_manager import get_data_manager, load_family, load_workspace
from embeddings import check_embedding_condition, check_purity
from errors import BackForthError, TheoremViolation
from functor_transport import BUILTIN_FUNCTORS, functor_by_name, transport_direct, transport_image
from report_utils import (
    build_report,
    density_payload,
    error_report,
    family_payload,
    render_report,
    summarize_run_log,
)
from span_calculus import (
    check_density,
    enumerate_spans,
    greatest_dense_family,
    star_compose,
)
from structures import CategoryMode, check_caps, check_mode, classify_morphism, is_mono_in
from symbolic_set import (
    CardToken,
    SymChain,
    sym_chain_colimit,
    sym_density_check,
    sym_embedding,
    sym_embedding_witnesses,
    sym_equivalent,
    sym_verify_ladder,
)
from theory import abelian_group_theory, group_theory, satisfies

logger = logging.getLogger(__name__)

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2

BUILTIN_THEORIES = {"groups": group_theory, "abelian-groups": abelian_group_theory}

Outcome = Tuple[Optional[bool], Dict]


# ---------- HELPERS ----------
def _mode(args) -> CategoryMode:
    return CategoryMode(args.mode)


def _pair(args):
    ws = load_workspace(args.workspace)
    X, Y = ws.structure(args.left), ws.structure(args.right)
    mode = _mode(args)
    check_mode(X.signature, mode)
    check_caps(X, Y, cap=args.cap)
    return ws, X, Y, mode


def _theory(ws, name: str):
    if name in ws.theories:
        return ws.theory(name)
    if name in BUILTIN_THEORIES:
        return BUILTIN_THEORIES[name]()
    return ws.theory(name)


def _save(args, S) -> Dict:
    if not args.save:
        return {}
    get_data_manager().save_family(args.save, S)
    logger.info("saved %d spans to %s", len(S), args.save)
    return {"saved": args.save}


# ---------- COMMANDS ----------
def cmd_check(args) -> Outcome:
    ws = load_workspace(args.workspace)
    morphisms = {name: classify_morphism(f).label for name, f in sorted(ws.morphisms.items())}
    payload = {"workspace": ws.summary(), "morphisms": morphisms}
    if not args.theory:
        return True, payload
    T = _theory(ws, args.theory)
    readable = {name: X for name, X in sorted(ws.structures.items()) if T.applies_to(X.signature)}
    checks = {name: satisfies(X, T).to_dict() for name, X in readable.items()}
    payload["theory"] = T.to_dict()
    payload["models"] = checks
    payload["skipped"] = sorted(set(ws.structures) - set(readable))
    return all(c["holds"] for c in checks.values()), payload


def cmd_equiv(args) -> Outcome:
    _, X, Y, mode = _pair(args)
    S = greatest_dense_family(X, Y, mode, args.cap, args.budget)
    return len(S) > 0, {"family": family_payload(S), **_save(args, S)}


def cmd_dense(args) -> Outcome:
    _, X, Y, mode = _pair(args)
    S = load_family(args.family, X, Y, mode) if args.family else enumerate_spans(X, Y, mode, args.cap)
    verdict = check_density(S, args.budget)
    return verdict.dense, {"density": density_payload(verdict, S), "family": family_payload(S)}


def cmd_embed(args) -> Outcome:
    ws = load_workspace(args.workspace)
    f = ws.morphism(args.morphism)
    mode = _mode(args)
    check_mode(f.source.signature, mode)
    check_caps(f.source, f.target, cap=args.cap)
    payload: Dict = {"morphism": f.to_dict(), "class": classify_morphism(f).label}
    S = greatest_dense_family(f.source, f.target, mode, args.cap)
    payload["family"] = family_payload(S)
    if is_mono_in(f, mode):
        payload["purity"] = check_purity(f, mode, args.cap).to_dict()
    if not S.spans:
        payload["verdict"] = {"holds": False, "reason": "no dense family between the endpoints"}
        return False, payload
    verdict = check_embedding_condition(f, S)
    payload["verdict"] = verdict.to_dict(mode)
    return verdict.holds, payload


def cmd_compose(args) -> Outcome:
    ws = load_workspace(args.workspace)
    mode = _mode(args)
    X, Y, Z = ws.structure(args.left), ws.structure(args.middle), ws.structure(args.right)
    check_mode(X.signature, mode)
    check_caps(X, Y, Z, cap=args.cap)
    families = args.family or []
    if len(families) not in (0, 2):
        raise BackForthError("compose takes either no --family or exactly two")
    if families:
        S1, S2 = load_family(families[0], X, Y, mode), load_family(families[1], Y, Z, mode)
    else:
        S1, S2 = greatest_dense_family(X, Y, mode, args.cap), greatest_dense_family(Y, Z, mode, args.cap)
    composite = star_compose(S1, S2)
    verdict = check_density(composite)
    payload = {"composite": family_payload(composite), "density": density_payload(verdict, composite)}
    return verdict.dense, {**payload, **_save(args, composite)}


def cmd_transport(args) -> Outcome:
    _, X, Y, mode = _pair(args)
    keep = [s.strip() for s in (args.keep or "").split(",") if s.strip()]
    F = functor_by_name(args.functor, X.signature, mode, keep)
    S = greatest_dense_family(X, Y, mode, args.cap)
    route = args.route or ("direct" if F.preserves_monos else "image")
    payload: Dict = {"functor": F.to_dict(), "route": route}
    if route == "direct":
        T = transport_direct(F, S)
    else:
        transported = transport_image(F, S)
        T = transported.family
        payload["certificates"] = [c.to_dict(S.mode) for c in transported.certificates]
    verdict = check_density(T)
    payload["transported"] = family_payload(T)
    payload["density"] = density_payload(verdict, T)
    return verdict.dense, payload


def _harness_outcome(report) -> Optional[bool]:
    # no claim is made when the hypothesis fails
    return report.conclusion_ok if report.hypothesis_ok else None


def cmd_chain(args) -> Outcome:
    ws = load_workspace(args.workspace)
    C = ws.chain(args.chain)
    mode = _mode(args)
    check_caps(*C.objects, cap=args.cap)
    report = verify_smooth_composition(C, mode, args.cap)
    payload = {"chain": C.to_dict(), "report": report.to_dict()}
    if report.hypothesis_ok:
        payload["colimit"] = colimit_of_chain(C, mode).to_dict()
    return _harness_outcome(report), payload


def cmd_ladder(args) -> Outcome:
    ws = load_workspace(args.workspace)
    L = ws.ladder(args.ladder)
    mode = _mode(args)
    check_caps(*L.lower.objects, *L.upper.objects, cap=args.cap)
    report = verify_ladder(L, mode, args.cap)
    return _harness_outcome(report), {"ladder": L.name, "report": report.to_dict()}


def cmd_setcalc(args) -> Outcome:
    op, tokens = args.operation, args.tokens
    expected = {"equiv": 2, "dense": 2, "embed": 2, "chain": 1, "ladder": 2}
    if len(tokens) != expected[op]:
        raise BackForthError(f"setcalc {op} takes {expected[op]} arguments, got {len(tokens)}")
    if op == "equiv":
        a, b = (CardToken.parse(t) for t in tokens)
        return sym_equivalent(a, b), {"left": str(a), "right": str(b)}
    if op == "dense":
        verdict = sym_density_check(*tokens)
        return verdict.dense, verdict.to_dict()
    if op == "embed":
        src, dst = (CardToken.parse(t) for t in tokens)
        holds = sym_embedding(src, dst, args.bijective)
        witnesses = sym_embedding_witnesses(src, dst, args.bijective)
        return holds, {
            "source": str(src),
            "target": str(dst),
            "bijective": args.bijective,
            "search": witnesses is not None,
            "witnesses": [w.to_dict() for w in witnesses or []],
        }
    if op == "chain":
        C = SymChain.parse(tokens[0])
        return True, {"chain": str(C), "colimit": str(sym_chain_colimit(C))}
    lower, upper = SymChain.parse(tokens[0]), SymChain.parse(tokens[1])
    report = sym_verify_ladder(lower, upper)
    return _harness_outcome(report), {"lower": str(lower), "upper": str(upper), "report": report.to_dict()}


def cmd_selftest(args) -> Outcome:
    from report_utils import render_summary, summary_table
    from selftest import run_acceptance

    rows = run_acceptance(quick=args.quick, cap=args.cap)
    table = summary_table(rows)
    print(render_summary(table), file=sys.stderr)
    return bool(table["passed"].all()), {"criteria": table.to_dict(orient="records")}


def cmd_runs(args) -> Outcome:
    manager = get_data_manager()
    if not manager.run_log:
        raise BackForthError("no run log configured (set BFCALC_RUN_LOG)")
    return True, {"run_log": manager.run_log, "commands": summarize_run_log(manager.load_run_log())}


# ---------- PARSER ----------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[m.value for m in CategoryMode], default=CategoryMode.EMB.value)
    common.add_argument("--cap", type=int, default=None, help="carrier size cap (overrides BFCALC_MAX_CARRIER)")
    common.add_argument("--json", action="store_true", help="indented report")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="bfcalc", description="Back-and-forth calculus over finite structures")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable, help_text: str, workspace: bool = True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if workspace:
            p.add_argument("workspace")
        p.set_defaults(handler=handler)
        return p

    p = add("check", cmd_check, "validate a workspace and classify its morphisms")
    p.add_argument("--theory")
    for name, handler, help_text in (
        ("equiv", cmd_equiv, "decide equivalence via the greatest dense family"),
        ("dense", cmd_dense, "check density of a span family"),
        ("transport", cmd_transport, "transport the greatest family along a functor"),
    ):
        p = add(name, handler, help_text)
        p.add_argument("--left", required=True)
        p.add_argument("--right", required=True)
        if name in ("equiv", "dense"):
            p.add_argument("--budget", type=int, default=None, help="only test objects generated by fewer elements")
        if name == "equiv":
            p.add_argument("--save", help="write the greatest family to a JSON file")
        if name == "dense":
            p.add_argument("--family")
        if name == "transport":
            p.add_argument("--functor", choices=BUILTIN_FUNCTORS, required=True)
            p.add_argument("--keep", help="comma-separated symbols kept by the reduct")
            p.add_argument("--route", choices=["direct", "image"])
    p = add("embed", cmd_embed, "decide whether a morphism is an embedding in the back-and-forth sense")
    p.add_argument("--morphism", required=True)
    p = add("compose", cmd_compose, "compose greatest (or given) families over a middle object")
    p.add_argument("--left", required=True)
    p.add_argument("--middle", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--family", action="append")
    p.add_argument("--save", help="write the composite family to a JSON file")
    p = add("chain", cmd_chain, "colimit of a chain and the composite into it")
    p.add_argument("--chain", required=True)
    p = add("ladder", cmd_ladder, "verify a ladder between two chains")
    p.add_argument("--ladder", required=True)
    p = add("setcalc", cmd_setcalc, "symbolic cardinalities", workspace=False)
    p.add_argument("operation", choices=["equiv", "dense", "embed", "chain", "ladder"])
    p.add_argument("tokens", nargs="*")
    p.add_argument("--bijective", action="store_true")
    p = add("selftest", cmd_selftest, "run the acceptance suite", workspace=False)
    p.add_argument("--quick", action="store_true")
    add("runs", cmd_runs, "summarize the run log per subcommand", workspace=False)
    return parser


def _configure_logging(verbosity: int):
    level = get_config().log_level
    if verbosity == 1:
        level = "INFO"
    elif verbosity >= 2:
        level = "DEBUG"
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and print its report; returns the exit code"""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if e.code in (0, None):
            return EXIT_TRUE
        print(render_report(error_report(argv, BackForthError("invalid command line"))))
        return EXIT_ERROR
    _configure_logging(args.verbose)
    started = time.perf_counter()
    try:
        result, payload = args.handler(args)
        elapsed = (time.perf_counter() - started) * 1000
        report = build_report(argv, result, payload, None, elapsed)
        code = EXIT_FALSE if result is False else EXIT_TRUE
    except TheoremViolation as e:
        logger.error("engine invariant violated: %s", e)
        elapsed = (time.perf_counter() - started) * 1000
        report, code = error_report(argv, e, elapsed), EXIT_ERROR
    except (BackForthError, OSError, ValueError) as e:
        logger.warning("%s: %s", type(e).__name__, e)
        elapsed = (time.perf_counter() - started) * 1000
        report, code = error_report(argv, e, elapsed), EXIT_ERROR
    print(render_report(report, pretty=args.json))
    get_data_manager().log_run(argv, code, report["result"], report["timing_ms"])
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
