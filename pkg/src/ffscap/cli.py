"""Command-line front end: scenario configs and the five subcommands.

Scenario files are flat ``key = value`` documents (``#`` comments and
blank lines allowed) over the 18 scalar knobs of a run: the nine
ModelParams constants, the five BonusPolicy fields (``xi = inf`` for
the unbounded cut-off), the two SolveSettings fields, plus ``rounds``
and ``inflation_rate``.  Missing keys take the baseline defaults, so an
empty document reproduces the headline scenario.

Subcommands::

    solve       [--config FILE] [--json]
    repeat      --rounds N [--config FILE] [--trace FILE.csv] [--plot FILE.png]
    sweep-alpha --min A --max B --step S [--rounds N] [--config FILE]
                [--out FILE.csv] [--plot FILE.png]
    threshold   [--config FILE]
    oracle-check [--config FILE] [--grid R]

Exit statuses: 0 success, 1 usage or parse error, 2 invariant
violation, 3 oracle disagreement (deviation above twice the oracle's
grid resolution).  Fractions print to 4 decimals and money to 2; the
``--json`` flag on ``solve`` emits one self-describing document with
the resolved configuration and full-precision results.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .analysis import h_eps_threshold, sweep_alpha
from .model import (
    BonusPolicy,
    ConstraintError,
    EquilibriumReport,
    GameTrace,
    ModelParams,
)
from .oracle import oracle_stackelberg
from .solver import SolveSettings, play_repeated, solve_stackelberg

__all__ = [
    "ScenarioConfig",
    "ConfigError",
    "parse_config",
    "render_config",
    "run_cli",
    "main",
]


class ConfigError(ValueError):
    """A scenario document or command line could not be understood."""


#: Recognized configuration keys, in canonical emission order.
_CONFIG_KEYS = (
    "p", "n_f", "n_c", "r_f", "r_c", "h_f", "h_c", "c_d", "c_n",
    "alpha", "xi", "kappa", "exp_f1", "exp_f2",
    "rounds", "inflation_rate", "grid_points", "refine_tol",
)

_INT_KEYS = frozenset({"rounds", "grid_points"})


@dataclass(frozen=True)
class ScenarioConfig:
    """One flat scenario: model constants, bonus policy, solver knobs,
    and the shape of the run.  Defaults are the baseline: the estimated
    annual constants of :class:`~ffscap.model.ModelParams` with the
    headline bonus scale alpha = 682,000 and an unbounded cut-off."""

    p: float = 1684.0
    n_f: float = 2.24
    n_c: float = 3.44
    r_f: float = 140.41
    r_c: float = 346.32
    h_f: float = 9954.00
    h_c: float = 9861.85
    c_d: float = 63.56
    c_n: float = 24.04
    alpha: float = 682000.0
    xi: float = math.inf
    kappa: float = 0.113
    exp_f1: float = 0.5
    exp_f2: float = 2.0
    rounds: int = 1
    inflation_rate: float = 1.0
    grid_points: int = 10001
    refine_tol: float = 1e-8

    def model_params(self) -> ModelParams:
        return ModelParams(p=self.p, n_f=self.n_f, n_c=self.n_c,
                           r_f=self.r_f, r_c=self.r_c, h_f=self.h_f,
                           h_c=self.h_c, c_d=self.c_d, c_n=self.c_n)

    def bonus_policy(self) -> BonusPolicy:
        return BonusPolicy(alpha=self.alpha, xi=self.xi, kappa=self.kappa,
                           exp_f1=self.exp_f1, exp_f2=self.exp_f2)

    def solve_settings(self) -> SolveSettings:
        return SolveSettings(grid_points=self.grid_points,
                             refine_tol=self.refine_tol)

    def validate(self) -> "ScenarioConfig":
        """Raise ConstraintError unless every derived object is legal."""
        self.model_params()
        self.bonus_policy()
        self.solve_settings()
        if self.rounds < 1:
            raise ConstraintError("constraint violated: rounds >= 1")
        if not self.inflation_rate > 0:
            raise ConstraintError("constraint violated: inflation_rate > 0")
        return self


def parse_config(text: str) -> ScenarioConfig:
    """Parse a ``key = value`` scenario document.

    Unknown keys and unparsable values raise :class:`ConfigError`
    naming the offending line; values that parse but violate a model
    invariant raise :class:`~ffscap.model.ConstraintError`.
    """
    values: dict[str, float | int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(
                f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r} (line {lineno})")
        try:
            values[key] = int(value) if key in _INT_KEYS else float(value)
        except ValueError:
            raise ConfigError(
                f"cannot parse value for {key!r} (line {lineno}): {value!r}"
            ) from None
    return ScenarioConfig(**values).validate()


def render_config(config: ScenarioConfig) -> str:
    """The inverse of :func:`parse_config`: a document that reparses to
    an identical configuration (floats via repr, ``xi = inf``)."""
    lines = []
    for key in _CONFIG_KEYS:
        lines.append(f"{key} = {_config_value_text(key, getattr(config, key))}")
    return "\n".join(lines) + "\n"


def _config_value_text(key: str, value) -> str:
    if key in _INT_KEYS:
        return str(int(value))
    value = float(value)
    return "inf" if math.isinf(value) else repr(value)


def _config_mapping(config: ScenarioConfig) -> dict:
    """The resolved configuration as a JSON-safe mapping (xi -> "inf")."""
    out: dict[str, float | int | str] = {}
    for key in _CONFIG_KEYS:
        value = getattr(config, key)
        if key not in _INT_KEYS and math.isinf(value):
            out[key] = "inf"
        else:
            out[key] = value
    return out


# ---------------------------------------------------------------------------
# output formatting
# ---------------------------------------------------------------------------

def _format_report(report: EquilibriumReport) -> str:
    fp = report.fractions
    return "\n".join([
        f"f1 = {fp.f1:.4f}",
        f"f2 = {fp.f2:.4f}",
        f"z = {report.z_value:.6f}",
        f"bonus = {report.bonus:.2f}",
        f"insurer_cost_full = {report.insurer_cost_full:.2f}",
        f"insurer_cost_reduced = {report.insurer_cost_reduced:.2f}",
        f"practice_profit_full = {report.practice_profit_full:.2f}",
        f"practice_profit_reduced = {report.practice_profit_reduced:.2f}",
        f"regime = {report.regime}",
    ])


def _report_mapping(report: EquilibriumReport) -> dict:
    return {
        "f1": report.fractions.f1,
        "f2": report.fractions.f2,
        "z": report.z_value,
        "bonus": report.bonus,
        "insurer_cost_full": report.insurer_cost_full,
        "insurer_cost_reduced": report.insurer_cost_reduced,
        "practice_profit_full": report.practice_profit_full,
        "practice_profit_reduced": report.practice_profit_reduced,
        "regime": report.regime,
    }


def _sweep_csv(rows) -> str:
    lines = ["alpha,f1,f2,z,bonus,regime"]
    for r in rows:
        lines.append(f"{r.alpha!r},{r.f1!r},{r.f2!r},{r.z_value!r},"
                     f"{r.bonus!r},{r.regime}")
    return "\n".join(lines) + "\n"


def _trace_csv(trace: GameTrace) -> str:
    lines = ["round,f1,f2,z,bonus,insurer_cost_reduced,practice_profit_reduced"]
    for rec in trace.rounds:
        rep = rec.report
        lines.append(f"{rec.round_index},{rep.fractions.f1!r},{rep.fractions.f2!r},"
                     f"{rep.z_value!r},{rep.bonus!r},"
                     f"{rep.insurer_cost_reduced!r},{rep.practice_profit_reduced!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _cmd_solve(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    report = solve_stackelberg(config.model_params(), config.bonus_policy(),
                               config.solve_settings())
    if args.json:
        doc = {
            "command": "solve",
            "config": _config_mapping(config),
            "result": _report_mapping(report),
        }
        print(json.dumps(doc, indent=2))
    else:
        print(_format_report(report))
    return 0


def _cmd_repeat(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    rounds = config.rounds if args.rounds is None else args.rounds
    trace = play_repeated(rounds, config.model_params(), config.bonus_policy(),
                          config.solve_settings(), config.inflation_rate)
    last = trace.final()
    print(f"round = {last.round_index}")
    print(_format_report(last.report))
    fp = last.fractions
    print(f"final: f1 = {fp.f1:.4f}, f2 = {fp.f2:.4f}")
    if args.trace:
        Path(args.trace).write_text(_trace_csv(trace), encoding="utf-8")
    if args.plot:
        from .plotting import trace_figure
        trace_figure(trace, args.plot)
    return 0


def _cmd_sweep_alpha(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    rounds = config.rounds if args.rounds is None else args.rounds
    rows = sweep_alpha(args.min, args.max, args.step, rounds=rounds,
                       params=config.model_params(),
                       settings=config.solve_settings(),
                       base_policy=config.bonus_policy(),
                       inflation_rate=config.inflation_rate)
    text = _sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    if args.plot:
        from .plotting import sweep_figure
        sweep_figure(rows, args.plot)
    return 0


def _cmd_threshold(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    print(f"{h_eps_threshold(config.model_params()):.2f}")
    return 0


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    report = oracle_stackelberg(config.model_params(), config.bonus_policy(),
                                args.grid)
    print("\n".join([
        f"grid_resolution = {report.grid_resolution!r}",
        f"oracle_f1 = {report.oracle_f1:.4f}",
        f"oracle_f2 = {report.oracle_f2:.4f}",
        f"oracle_objective = {report.oracle_objective:.2f}",
        f"solver_f1 = {report.solver_f1:.4f}",
        f"solver_f2 = {report.solver_f2:.4f}",
        f"max_deviation = {report.max_deviation:.3e}",
    ]))
    return 0 if report.max_deviation <= 2.0 * report.grid_resolution else 3


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)
    instead of its default SystemExit(2)."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ffscap",
                     description="Insurer/practice FFS-capitation contract games.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="one-round Stackelberg equilibrium")
    solve.add_argument("--config", metavar="FILE", help="scenario document")
    solve.add_argument("--json", action="store_true",
                       help="emit resolved config and results as JSON")
    solve.set_defaults(func=_cmd_solve)

    repeat = sub.add_parser("repeat", help="repeated game, printing the final round")
    repeat.add_argument("--rounds", type=int, metavar="N", default=None,
                        help="number of rounds (default: config value)")
    repeat.add_argument("--config", metavar="FILE")
    repeat.add_argument("--trace", metavar="FILE.csv",
                        help="write a per-round CSV trace")
    repeat.add_argument("--plot", metavar="FILE.png",
                        help="render the trace as a figure")
    repeat.set_defaults(func=_cmd_repeat)

    sweep = sub.add_parser("sweep-alpha",
                           help="equilibrium vs. bonus scale, as CSV")
    sweep.add_argument("--min", type=float, required=True, metavar="A")
    sweep.add_argument("--max", type=float, required=True, metavar="B")
    sweep.add_argument("--step", type=float, required=True, metavar="S")
    sweep.add_argument("--rounds", type=int, metavar="N", default=None)
    sweep.add_argument("--config", metavar="FILE")
    sweep.add_argument("--out", metavar="FILE.csv",
                       help="write CSV here instead of stdout")
    sweep.add_argument("--plot", metavar="FILE.png",
                       help="render the sweep as a figure")
    sweep.set_defaults(func=_cmd_sweep_alpha)

    thresh = sub.add_parser("threshold",
                            help="hospitalization-gap threshold for f1 = 1")
    thresh.add_argument("--config", metavar="FILE")
    thresh.set_defaults(func=_cmd_threshold)

    oracle = sub.add_parser("oracle-check",
                            help="compare the solver against the lattice oracle")
    oracle.add_argument("--config", metavar="FILE")
    oracle.add_argument("--grid", type=float, default=1e-4, metavar="R",
                        help="oracle lattice resolution (default 1e-4)")
    oracle.set_defaults(func=_cmd_oracle_check)

    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else 0
    try:
        return int(args.func(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConstraintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv: Sequence[str] | None = None) -> None:
    raise SystemExit(run_cli(argv))


if __name__ == "__main__":
    main()
