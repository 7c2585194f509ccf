import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional
from .checks import available_checks, run_checks
from .config import RunConfig, load_config
from .exceptions import SlaterError, ToleranceExceeded
from .exit_codes import EXIT_OK
from .runner import (
    run_compare,
    run_density,
    run_exact_grid,
    run_exact_pct,
    run_figures,
    run_semiclassical,
    write_rows,
)

logger = logging.getLogger(__name__)

Handler = Callable[[RunConfig, argparse.Namespace], None]


class Command:
    def __init__(self, name: str, handler: Handler, help: str = "") -> None:
        self.name = name
        self.handler = handler
        self.help = help


class SlaterApp:
    '''
    Command-line application. Subcommands are registered with a decorator::

        @app.command("compare", help="...")
        def compare(config, args):
            ...
    '''
    def __init__(self, prog: str = "pdm-slater") -> None:
        self.prog = prog
        self._commands: Dict[str, Command] = {}

    def add_command(self, name: str, handler: Handler, help: str = "") -> None:
        if name in self._commands:
            raise ValueError(f"Command '{name}' is already registered.")
        self._commands[name] = Command(name, handler, help)

    def command(self, name: str, help: str = ""):
        def wrapper(function: Handler) -> Handler:
            self.add_command(name, function, help)
            return function
        return wrapper

    def build_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--config", help="JSON run configuration")
        common.add_argument("--out", help="output file (directory for 'figures'); stdout when omitted")
        common.add_argument("--tolerance", type=float, help="relative tolerance overriding compare.tolerance")
        common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        common.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
        parser = argparse.ArgumentParser(
            prog=self.prog,
            description="Semiclassical Slater sums for position-dependent-mass Hamiltonians.",
        )
        sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
        for c in self._commands.values():
            p = sub.add_parser(c.name, help=c.help, parents=[common])
            if c.name == "check":
                p.add_argument("--only", action="append", choices=available_checks(), help="run only this check")
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        args = self.build_parser().parse_args(argv)
        configure_logging(args.verbose, args.quiet)
        command = self._commands[args.command]
        try:
            config = load_config(args.config) if args.config else RunConfig()
            command.handler(config.with_tolerance(args.tolerance), args)
        except SlaterError as e:
            logger.error("%s", e)
            return e.exit_code
        return EXIT_OK


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


app = SlaterApp()


@app.command("semiclassical", help="order-hbar^2 Slater sum over the run grid")
def semiclassical(config: RunConfig, args: argparse.Namespace) -> None:
    write_rows(args.out, run_semiclassical(config), config.columns)


@app.command("density", help="semiclassical density at run.lambda")
def density(config: RunConfig, args: argparse.Namespace) -> None:
    write_rows(args.out, run_density(config), ("x", "lam", "V", "density", "region"))


@app.command("exact-pct", help="closed-form Slater sum of the pct model")
def exact_pct(config: RunConfig, args: argparse.Namespace) -> None:
    write_rows(args.out, run_exact_pct(config), ("beta", "x", "C_exact"))


@app.command("exact-grid", help="Slater sum from the spectrum of the discretised Hamiltonian")
def exact_grid(config: RunConfig, args: argparse.Namespace) -> None:
    write_rows(args.out, run_exact_grid(config), ("beta", "x", "C_exact"))


@app.command("compare", help="semiclassical against an exact oracle")
def compare(config: RunConfig, args: argparse.Namespace) -> None:
    report = run_compare(config)
    write_rows(args.out, report.rows, config.columns)
    print(report.summary(), file=sys.stderr)
    if not report.passed:
        raise ToleranceExceeded(f"max_rel_err {report.max_rel_err:.6g} > {report.tolerance:g} at x={report.argmax_x:g}")


@app.command("figures", help="mass ratio, Slater sums and correction curves for several gamma")
def figures(config: RunConfig, args: argparse.Namespace) -> None:
    for path in run_figures(config, args.out or "figures"):
        print(path)


@app.command("check", help="identity and convergence suite")
def check(config: RunConfig, args: argparse.Namespace) -> None:
    results = run_checks(args.only)
    for r in results:
        print(r)
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise ToleranceExceeded(f"{len(failed)} check(s) failed: {', '.join(failed)}")


def main(argv: Optional[List[str]] = None) -> int:
    return app.run(argv)


if __name__ == "__main__":
    sys.exit(main())
