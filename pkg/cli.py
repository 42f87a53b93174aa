"""
Command-line front end: solve, predict, sweep and validate
Exit codes: 0 success, 1 error, 2 max iterations reached or sweep entries failed
"""
from dataclasses import replace
from typing import List, Optional, Sequence
import argparse
import logging
import sys

from artifact_store import ArtifactStore
from orchestrator import RendezvousOrchestrator
from rendezvous import __version__
from rendezvous.errors import RendezvousError
from rendezvous.scenarios import PRESETS, Scenario, get_preset, load_scenario_file
from rendezvous.settings import configure_logging, get_settings
from workers.worker_validate import SUITES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPLETE = 2

DEFAULT_SWEEP = "0,0.25,0.5,0.75,1"


def parse_k_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("empty k_aggr list")
    return values


def resolve_scenario(args: argparse.Namespace, k_aggr: Optional[float] = None) -> Scenario:
    """Preset or file scenario with the command-line overrides applied and validated"""
    if args.scenario.startswith("file:"):
        scenario = load_scenario_file(args.scenario[len("file:"):])
    else:
        scenario = get_preset(args.scenario)
    if k_aggr is not None:
        scenario = scenario.with_k(k_aggr)

    options = scenario.options
    if getattr(args, "max_newton", None) is not None:
        options = replace(options, max_newton=args.max_newton)
    if getattr(args, "grad_tol", None) is not None:
        options = replace(options, grad_tol=args.grad_tol)
    step = scenario.step if getattr(args, "step", None) is None else args.step
    scenario = replace(scenario, options=options, step=step)
    scenario.spec.validate(scenario.limits)
    return scenario


def _orchestrator(args: argparse.Namespace) -> RendezvousOrchestrator:
    return RendezvousOrchestrator(ArtifactStore(args.out or get_settings().output_dir))


def cmd_solve(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args, args.k_aggr)
    result = _orchestrator(args).run_solve(scenario, strict=args.strict, seed=args.seed)
    if not result["success"]:
        print(f"ERROR: {result['message']}: {result['error']}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{result['message']}")
    print(f"artifacts in {result['run_dir']}")
    if result["status"] != "converged":
        print(f"WARNING: solver stopped with status '{result['status']}'", file=sys.stderr)
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    result = _orchestrator(args).run_predict(scenario, args.k_aggr)
    if not result["success"]:
        print(f"ERROR: {result['message']}", file=sys.stderr)
        return EXIT_ERROR
    print(result["message"])
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    for k in args.k_aggr:
        scenario.with_k(k).spec.validate(scenario.limits)
    result = _orchestrator(args).run_sweep(scenario, args.k_aggr, strict=args.strict, seed=args.seed)
    for row, entry in zip(result["rows"], result["results"]):
        achieved = "-" if row["T_achieved"] is None else f"{row['T_achieved']:.2f} s"
        print(f"k={row['k']:.2f}: {entry.get('status', 'failed')}, rendezvous {achieved}")
    print(f"summary written to {result['summary_file']}")
    if not result["success"]:
        print(f"WARNING: {result['message']}", file=sys.stderr)
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    orchestrator = RendezvousOrchestrator(ArtifactStore(get_settings().output_dir))
    result = orchestrator.run_validate(fd_tol=args.fd_tol, seed=args.seed, suites=args.suites)
    for suite in result.get("suites", []):
        line = f"{'PASS' if suite['passed'] else 'FAIL'}  {suite['suite']:<22} value={suite['value']:.3e}"
        if suite.get("detail"):
            line += f"  ({suite['detail']})"
        print(line)
    if not result["success"]:
        print(f"ERROR: {result['message']}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def _scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", default="straight",
                        help=f"{' | '.join(PRESETS)} | file:PATH (default: straight)")
    parser.add_argument("--out", default=None, help="output directory (default: RENDEZVOUS_OUTPUT_DIR or runs)")


def _solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-newton", type=int, default=None, help="Newton iterations per barrier stage")
    parser.add_argument("--grad-tol", type=float, default=None, help="relative descent tolerance")
    parser.add_argument("--step", type=float, default=None, help="grid step h [s]")
    parser.add_argument("--seed", type=int, default=None, help="recorded in the manifest")
    parser.add_argument("--strict", action="store_true", help="treat the iteration cap as an error")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rendezvous", description="UAV-UGV rendezvous trajectory optimization")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="optimize one rendezvous and write its artifacts")
    _scenario_flags(solve)
    solve.add_argument("--k-aggr", type=float, default=None, help="aggressiveness index in [0, 1]")
    _solver_flags(solve)
    solve.set_defaults(handler=cmd_solve)

    predict = commands.add_parser("predict", help="closed-form descent angle, rendezvous space and time")
    _scenario_flags(predict)
    predict.add_argument("--k-aggr", type=parse_k_list, default=parse_k_list(DEFAULT_SWEEP),
                         help=f"comma separated list (default: {DEFAULT_SWEEP})")
    predict.set_defaults(handler=cmd_predict)

    sweep = commands.add_parser("sweep", help="independent solves over a list of k_aggr")
    _scenario_flags(sweep)
    sweep.add_argument("--k-aggr", type=parse_k_list, default=parse_k_list(DEFAULT_SWEEP),
                       help=f"comma separated list (default: {DEFAULT_SWEEP})")
    _solver_flags(sweep)
    sweep.set_defaults(handler=cmd_sweep)

    validate = commands.add_parser("validate", help="run the model invariant suites")
    validate.add_argument("--fd-tol", type=float, default=1e-5, help="finite-difference tolerance")
    validate.add_argument("--seed", type=int, default=0)
    validate.add_argument("--suites", type=lambda s: [x for x in s.split(",") if x], default=None,
                          help=f"comma separated subset of {', '.join(SUITES)}")
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (RendezvousError, ValueError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
