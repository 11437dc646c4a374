"""Command-line front end: solve, check, reduce, crosscheck and export-dot."""
import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError as ModelValidationError

from src.config import AppConfig, ConfigLoader, configure_logging
from src.domain.errors import (
    CrosscheckError,
    NotFoundError,
    ResourceLimitError,
    UndecidableObjectiveError,
    ValidationError,
    WindowGameError,
)
from src.domain.models import Objective, ObjectiveKind, SafetySpec, Winner
from src.domain.policies import require_decidable
from src.infra.charts.chart_builder import create_progress_chart, save_chart
from src.infra.dot.dot_builder import DotBuilder
from src.infra.formats.lasso_codec import parse_lasso, serialize_lasso
from src.infra.formats.wfa_codec import parse_automaton
from src.infra.formats.wga_codec import serialize_arena
from src.infra.storage.file_store import ArtifactStore
from src.services.arena_service import ArenaService
from src.services.crosscheck_service import CrosscheckService
from src.services.oracle_service import OracleService
from src.services.parity_service import PARITY_ENGINES
from src.services.reduction_service import ReductionService
from src.services.report_service import REPORT_FORMATS, ReportService
from src.services.solver_service import ENGINES, SolverService
from src.version import __version__

logger = logging.getLogger(__name__)

EXIT_EVE = 0
EXIT_ADAM = 1
EXIT_ERROR = 2
EXIT_UNDECIDABLE = 3
EXIT_INVALID = 4
EXIT_RESOURCE = 5
EXIT_MISMATCH = 6

KINDS = [kind.value for kind in ObjectiveKind]


def parse_threshold(text: str) -> Fraction:
    """
    Parse a threshold given as a/b, an integer or a decimal.

    Raises:
        ValidationError: If the text is not a rational number
    """
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"invalid threshold '{text}' (expected a/b)")


def build_objective(kind: str, lmax: Optional[int], nu: str) -> Objective:
    threshold = parse_threshold(nu)
    try:
        objective_kind = ObjectiveKind(kind)
    except ValueError:
        raise ValidationError(f"unknown objective '{kind}'")
    require_decidable(objective_kind)
    return Objective(
        kind=objective_kind,
        lmax=lmax,
        numerator=threshold.numerator,
        denominator=threshold.denominator,
    )


def read_text(path: str) -> str:
    """Read an input file; a missing file is reported as an unknown identifier."""
    file_path = Path(path)
    if not file_path.exists():
        raise NotFoundError(f"file not found: {path}")
    return file_path.read_text(encoding="utf-8")


def emit(text: str, out: Optional[str], store: ArtifactStore) -> None:
    if out:
        store.write_text(out, text)
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


# Subcommands


def cmd_solve(args: argparse.Namespace, config: AppConfig) -> int:
    settings = config.solver.model_copy(
        update={
            key: value
            for key, value in (
                ("maxStates", args.max_states),
                ("parityEngine", args.parity_engine),
            )
            if value is not None
        }
    )
    arena = ArenaService().parse_arena(read_text(args.file))
    objective = build_objective(args.objective, args.lmax, args.nu)
    solver = SolverService(settings)
    outcome = solver.solve(arena, objective, args.engine, arena_name=Path(args.file).stem)
    store = ArtifactStore()

    sys.stdout.write(ReportService().render(outcome.report, args.report_format))

    if args.strategy_out:
        if outcome.strategy is None:
            reason = "Adam wins" if outcome.winner == Winner.ADAM else "engine builds none"
            logger.warning("no strategy written to %s: %s", args.strategy_out, reason)
        else:
            store.write_model(args.strategy_out, outcome.strategy)
            logger.info("strategy written to %s", args.strategy_out)

    if args.dot_out:
        builder = DotBuilder()
        if outcome.dirfix is not None:
            dot = builder.safety_game(outcome.dirfix.game, outcome.dirfix.solution.winning)
        elif outcome.parity is not None:
            dot = builder.parity_game(outcome.parity.game, outcome.parity.solution.regions)
        else:
            dot = builder.arena(arena, Path(args.file).stem)
        store.write_text(args.dot_out, dot)
        logger.info("graph written to %s", args.dot_out)

    if args.chart_out:
        sizes, step_label, title = outcome.progress()
        save_chart(create_progress_chart(sizes, step_label, title), args.chart_out)
        logger.info("chart written to %s", args.chart_out)

    return EXIT_EVE if outcome.winner == Winner.EVE else EXIT_ADAM


def cmd_check(args: argparse.Namespace, config: AppConfig) -> int:
    arena_service = ArenaService()
    arena = arena_service.parse_arena(read_text(args.file))
    lasso = parse_lasso(args.lasso)
    arena_service.validate_lasso(arena, lasso)
    oracle = OracleService(arena_service)

    verdicts = []
    for kind in args.objective.split(","):
        kind = kind.strip()
        lmax = args.lmax if kind in ("dirfix", "ufix", "fix") else None
        verdicts.append(oracle.check_lasso(arena, lasso, build_objective(kind, lmax, args.nu)))
    logger.info("checked %s", serialize_lasso(lasso))
    sys.stdout.write(ReportService().render_verdicts(verdicts, args.report_format))
    return EXIT_EVE if all(v.member for v in verdicts) else EXIT_ADAM


def cmd_reduce(args: argparse.Namespace, config: AppConfig) -> int:
    reductions = ReductionService()
    store = ArtifactStore()

    if args.reduction == "safety":
        arena = ArenaService().parse_arena(read_text(args.file))
        spec = SafetySpec(arena=arena, unsafe=frozenset(args.unsafe.split(",")))
        winner = reductions.solve_safety_spec(spec)
        logger.info("safety game: %s wins", winner.value)
        emit(serialize_arena(reductions.safety_to_dirfix(spec)), args.output, store)
        return EXIT_EVE

    automaton = parse_automaton(read_text(args.file))
    if args.reduction == "universality":
        emit(serialize_arena(reductions.universality_gadget(automaton)), args.output, store)
        return EXIT_EVE
    if args.reduction == "simulation":
        emit(serialize_arena(reductions.simulation_gadget(automaton)), args.output, store)
        return EXIT_EVE

    if args.reduction == "universal":
        result = reductions.is_universal_bounded(automaton, args.max_length)
        if result.universal:
            sys.stdout.write(f"universal up to length {args.max_length}\n")
            return EXIT_EVE
        word = " ".join(result.counterexample) or "(empty word)"
        sys.stdout.write(f"counterexample: {word} (cost {result.cost})\n")
        return EXIT_ADAM

    # certify
    word = [letter for letter in args.word.split(",") if letter]
    result = reductions.certify_separator_strategy(automaton, word)
    cert = result.certificate
    lines = [
        f"word={' '.join(result.word)}",
        f"epsilon={cert.epsilon}",
        f"certified={'yes' if cert.certified else 'no'}",
        f"mu={'' if cert.mu is None else cert.mu}",
        f"productSize={cert.productSize}",
        f"lassosChecked={result.lassos_checked}",
        f"dirfixConfirmed={'yes' if result.dirfix_confirmed else 'no'}",
    ]
    if cert.cycleMean is not None:
        lines.append(f"cycleMean={cert.cycleMean}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_EVE if cert.certified and result.dirfix_confirmed else EXIT_ADAM


def cmd_crosscheck(args: argparse.Namespace, config: AppConfig) -> int:
    settings = config.crosscheck.model_copy(
        update={
            key: value
            for key, value in (("seed", args.seed), ("count", args.count))
            if value is not None
        }
    )
    repro_dir = Path(args.repro_dir or config.artifacts.reproDir)
    service = CrosscheckService(
        settings,
        config.solver,
        repro_dir=repro_dir,
        solve_parity=not args.no_parity,
    )
    summary = service.run()
    sys.stdout.write(summary.render())
    summary.raise_for_failures()
    return EXIT_EVE


def cmd_export_dot(args: argparse.Namespace, config: AppConfig) -> int:
    arena = ArenaService().parse_arena(read_text(args.file))
    solver = SolverService(config.solver)
    builder = DotBuilder()
    store = ArtifactStore()
    name = Path(args.file).stem

    if args.graph == "arena":
        text = builder.arena(arena, name)
    elif args.lmax is None:
        raise ValidationError(f"--graph {args.graph} requires --lmax")
    elif args.graph == "safety":
        game = solver.dirfix_service.build_safety_game(arena, args.lmax)
        text = builder.safety_game(game)
    else:
        observers = solver.observer_service
        if args.objective == "ufix":
            nba = observers.build_ufix_nba(arena, args.lmax)
        else:
            nba = observers.build_fix_nba(arena, args.lmax)
        det = solver.parity_service.determinization.determinize(nba).complement()
        if args.graph == "observer":
            text = builder.observer(det)
        else:
            game = solver.parity_service.product_game(
                arena, det, with_belief=args.objective == "ufix"
            )
            text = builder.parity_game(game)
    emit(text, args.output, store)
    return EXIT_EVE


# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="window-games",
        description="Window mean-payoff games under partial observation.",
        epilog="Exit codes: 0 Eve wins / member, 1 Adam wins / non-member, 2 error, "
        "3 undecidable objective, 4 invalid input, 5 resource limit, 6 crosscheck mismatch.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--config", help="application config YAML (default: bundled)")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="decide the winner of a window objective")
    solve.add_argument("file", help="arena in .wga format")
    solve.add_argument("--objective", choices=KINDS, required=True)
    solve.add_argument("--lmax", type=int, help="window bound")
    solve.add_argument("--nu", default="0", help="threshold a/b (default 0)")
    solve.add_argument("--engine", choices=ENGINES, help="DirFix engine")
    solve.add_argument("--parity-engine", choices=PARITY_ENGINES, help="Fix/UFix parity solver")
    solve.add_argument("--max-states", type=int, help="resource guard on constructed states")
    solve.add_argument("--report-format", choices=REPORT_FORMATS, default="text")
    solve.add_argument("--strategy-out", help="write Eve's Moore strategy as JSON")
    solve.add_argument("--dot-out", help="write the solved game as DOT")
    solve.add_argument("--chart-out", help="write a progress chart (.html or .json)")
    solve.set_defaults(handler=cmd_solve)

    check = sub.add_parser("check", help="decide membership of an abstract lasso")
    check.add_argument("file", help="arena in .wga format")
    check.add_argument("--lasso", required=True, help="'{obs} action ... | {obs} action ...'")
    check.add_argument(
        "--objective", default="dirfix,ufix,fix", help="comma-separated kinds (default: all fixed)"
    )
    check.add_argument("--lmax", type=int, help="window bound for the window kinds")
    check.add_argument("--nu", default="0", help="threshold a/b (default 0)")
    check.add_argument("--report-format", choices=REPORT_FORMATS, default="text")
    check.set_defaults(handler=cmd_check)

    reduce = sub.add_parser("reduce", help="build reduction arenas and bounded demonstrations")
    reductions = reduce.add_subparsers(dest="reduction", required=True)
    safety = reductions.add_parser("safety", help="safety game (.wga + unsafe states) to DirFix")
    safety.add_argument("file")
    safety.add_argument("--unsafe", required=True, help="comma-separated trapping unsafe states")
    safety.add_argument("-o", "--output")
    for name, text in (
        ("universality", "blind gadget arena of a weighted automaton (.wfa)"),
        ("simulation", "simulation gadget of a weighted automaton (.wfa)"),
    ):
        gadget = reductions.add_parser(name, help=text)
        gadget.add_argument("file")
        gadget.add_argument("-o", "--output")
    universal = reductions.add_parser("universal", help="bounded universality check")
    universal.add_argument("file")
    universal.add_argument("--max-length", type=int, default=6)
    certify = reductions.add_parser("certify", help="certify the separator strategy for a word")
    certify.add_argument("file")
    certify.add_argument("--word", required=True, help="comma-separated letters")
    reduce.set_defaults(handler=cmd_reduce)

    crosscheck = sub.add_parser("crosscheck", help="differential test on random arenas")
    crosscheck.add_argument("--seed", type=int)
    crosscheck.add_argument("--count", type=int)
    crosscheck.add_argument("--repro-dir", help="where minimized failing arenas go")
    crosscheck.add_argument(
        "--no-parity", action="store_true", help="skip the Fix/UFix parity pipelines"
    )
    crosscheck.set_defaults(handler=cmd_crosscheck)

    export = sub.add_parser("export-dot", help="dump an arena, game or observer")
    export.add_argument("file", help="arena in .wga format")
    export.add_argument(
        "--graph", choices=("arena", "safety", "parity", "observer"), default="arena"
    )
    export.add_argument("--objective", choices=("fix", "ufix"), default="fix")
    export.add_argument("--lmax", type=int)
    export.add_argument("-o", "--output")
    export.set_defaults(handler=cmd_export_dot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Exit code
    """
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.verbose)
        config = ConfigLoader.load(args.config)
        return args.handler(args, config)
    except UndecidableObjectiveError as e:
        return _fail(EXIT_UNDECIDABLE, e)
    except (ValidationError, NotFoundError, ModelValidationError) as e:
        return _fail(EXIT_INVALID, e)
    except ResourceLimitError as e:
        return _fail(EXIT_RESOURCE, e)
    except CrosscheckError as e:
        return _fail(EXIT_MISMATCH, e)
    except (WindowGameError, OSError, ValueError) as e:
        return _fail(EXIT_ERROR, e)


def _fail(code: int, error: Exception) -> int:
    sys.stderr.write(f"error: {error}\n")
    return code
