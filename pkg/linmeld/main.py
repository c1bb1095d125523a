# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.progress import Progress
from rich.table import Table

from linmeld.__version__ import __version__
from linmeld.checker.checker import compile_program, parse_override
from linmeld.corpus.fixtures import fixtures, verify_fixture
from linmeld.corpus.generators import GENERATORS, generate
from linmeld.errors import (
    CheckError,
    LexError,
    LinearMeldError,
    NonTermination,
    ParseError,
)
from linmeld.language.parser import parse
from linmeld.language.printer import dump_ast
from linmeld.models.values import Value
from linmeld.oracle.verify import Verifier
from linmeld.runtime.graph import Graph
from linmeld.runtime.scheduler import RunOptions, run_to_quiescence

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NON_TERMINATION = 2

logger = logging.getLogger(__name__)


def _read_sources(files: Sequence[str]) -> list[str]:
    return [Path(name).read_text(encoding="utf8") for name in files]


def _overrides(constants: Optional[list[str]]) -> dict[str, Value]:
    return dict(parse_override(text) for text in constants or [])


def _add_const(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--const",
        action="append",
        metavar="NAME=VALUE",
        help="Override a program constant. Can be given several times.",
    )


def _print_lines(console: Console, text: str) -> None:
    console.out(text.rstrip("\n"), highlight=False)


def run(args: Namespace, console: Console, error_console: Console) -> int:
    sources = _read_sources(args.files)
    if args.dump_ast:
        _print_lines(console, dump_ast(parse("\n".join(sources))))

    program = compile_program(sources, _overrides(args.const))
    graph = Graph.load(program)
    options = RunOptions(
        workers=args.workers,
        seed=args.seed,
        max_steps=args.max_steps,
        trace=args.trace,
        audit=args.audit,
        self_check=args.self_check,
    )

    def trace(line: str) -> None:
        console.out(line, highlight=False)

    try:
        statistics = run_to_quiescence(graph, options, trace)
    except NonTermination as e:
        error_console.print(f"{args.files[0]}: {e}", markup=False)
        if args.dump_db:
            _print_lines(console, graph.dump())
        return EXIT_NON_TERMINATION

    logger.info(
        "Rule applications per worker: %s",
        ", ".join(str(fired) for fired in statistics.fired),
    )
    if args.dump_db:
        _print_lines(console, graph.dump())
    return EXIT_OK


def check(args: Namespace, console: Console, error_console: Console) -> int:
    program = compile_program(
        _read_sources(args.files), _overrides(args.const)
    )
    console.out(
        f"{args.files[0]}: {len(program.predicates)} predicates, "
        f"{len(program.rules)} rules, {len(program.axioms)} axioms",
        highlight=False,
    )
    return EXIT_OK


def verify(args: Namespace, console: Console, error_console: Console) -> int:
    source = None
    if args.program:
        source = "\n".join(_read_sources([args.program]))
    verifier = Verifier(
        bound=args.bound,
        source=source,
        overrides=_overrides(args.const),
        comprehensions=not args.no_comprehensions,
    )

    with Progress(console=error_console, transient=True) as progress:
        task_id = progress.add_task("Sampling", total=args.samples)
        report = verifier.run(
            args.samples,
            seed=args.seed,
            progress=lambda: progress.advance(task_id),
        )

    table = Table(title="Engine against oracle")
    table.add_column("Samples", justify="right")
    table.add_column("Fired", justify="right")
    table.add_column("Quiescent", justify="right")
    table.add_column("Skipped", justify="right")
    table.add_column("Failures", justify="right")
    table.add_row(
        str(report.samples),
        str(report.firings),
        str(report.quiescent),
        str(report.skipped),
        str(len(report.failures)),
    )
    console.print(table)

    for counterexample in report.failures:
        error_console.print(counterexample.describe(), markup=False)
        error_console.print()
    return EXIT_OK if report.passed else EXIT_ERROR


def gen(args: Namespace, console: Console, error_console: Console) -> int:
    _print_lines(console, generate(args.kind, args.size, args.seed))
    return EXIT_OK


def corpus(args: Namespace, console: Console, error_console: Console) -> int:
    selected = fixtures(names=args.names)
    if not selected:
        error_console.print("No matching fixtures found.")
        return EXIT_ERROR

    table = Table(title="Corpus", show_lines=False, expand=True)
    table.add_column("Fixture")
    table.add_column("Workers", justify="right")
    table.add_column("Seed", justify="right")
    table.add_column("Steps", justify="right")
    table.add_column("Result")

    failed = 0
    for fixture in selected:
        for result in verify_fixture(fixture, args.workers, args.seeds):
            if result.passed:
                verdict = "[green]pass[/green]"
            else:
                failed += 1
                verdict = f"[red]fail[/red] {result.error}"
            table.add_row(
                result.name,
                str(result.workers),
                str(result.seed),
                str(result.steps),
                verdict,
            )
    console.print(table)
    return EXIT_ERROR if failed else EXIT_OK


def _numbers(text: str) -> list[int]:
    return [int(item) for item in text.split(",") if item.strip()]


def parse_args(args: Optional[Sequence[str]] = None) -> Namespace:
    parser = ArgumentParser(
        prog="lm", description="Run and verify LM programs"
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log more details. Use twice for debug output.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="Run a program")
    run_parser.add_argument("files", nargs="+", metavar="FILE")
    run_parser.add_argument("--workers", type=int, default=1)
    run_parser.add_argument("--seed", type=int, default=0)
    _add_const(run_parser)
    run_parser.add_argument("--max-steps", type=int)
    run_parser.add_argument(
        "--trace", action="store_true", help="Print every rule application"
    )
    run_parser.add_argument(
        "--dump-db", action="store_true", help="Print the final databases"
    )
    run_parser.add_argument(
        "--dump-ast", action="store_true", help="Print the syntax tree"
    )
    run_parser.add_argument(
        "--audit",
        action="store_true",
        help="Check the database after every rule application",
    )
    run_parser.add_argument(
        "--self-check",
        action="store_true",
        help="Compare comprehension results against a naive evaluation",
    )
    run_parser.set_defaults(function=run)

    check_parser = subparsers.add_parser(
        "check", help="Parse and type check a program"
    )
    check_parser.add_argument("files", nargs="+", metavar="FILE")
    _add_const(check_parser)
    check_parser.set_defaults(function=check)

    verify_parser = subparsers.add_parser(
        "verify", help="Compare the engine against the exhaustive oracle"
    )
    verify_parser.add_argument(
        "program",
        nargs="?",
        help="Program to sample databases for. Random programs are "
        "generated if omitted.",
    )
    verify_parser.add_argument("--bound", type=int, default=6)
    verify_parser.add_argument("--samples", type=int, default=200)
    verify_parser.add_argument("--seed", type=int, default=0)
    verify_parser.add_argument(
        "--no-comprehensions",
        action="store_true",
        help="Generate programs without comprehensions and aggregates",
    )
    _add_const(verify_parser)
    verify_parser.set_defaults(function=verify)

    gen_parser = subparsers.add_parser(
        "gen", help="Print generated axioms for a corpus program"
    )
    gen_parser.add_argument("kind", choices=sorted(GENERATORS))
    gen_parser.add_argument("--size", type=int, required=True)
    gen_parser.add_argument("--seed", type=int, default=0)
    gen_parser.set_defaults(function=gen)

    corpus_parser = subparsers.add_parser(
        "corpus", help="Run the shipped example programs"
    )
    corpus_parser.add_argument("names", nargs="*", metavar="NAME")
    corpus_parser.add_argument(
        "--workers", type=_numbers, help="Comma separated worker counts"
    )
    corpus_parser.add_argument(
        "--seeds", type=_numbers, help="Comma separated seeds"
    )
    corpus_parser.set_defaults(function=corpus)

    return parser.parse_args(args)


def _setup_logging(verbose: int, console: Console) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG

    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _file_name(args: Namespace) -> str:
    files = getattr(args, "files", None)
    if files:
        return files[0]
    return getattr(args, "program", None) or "<input>"


def main(argv: Optional[Sequence[str]] = None) -> int:
    console = Console()
    error_console = Console(file=sys.stderr)

    args = parse_args(argv)
    _setup_logging(args.verbose, error_console)
    file_name = _file_name(args)

    try:
        return args.function(args, console, error_console)
    except CheckError as e:
        for diagnostic in e.diagnostics:
            error_console.print(diagnostic.format(file_name), markup=False)
    except (LexError, ParseError) as e:
        error_console.print(f"{file_name}:{e}", markup=False)
    except (LinearMeldError, OSError, UnicodeDecodeError) as e:
        error_console.print(f"{file_name}: {e}", markup=False)
    except KeyboardInterrupt:
        pass
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
