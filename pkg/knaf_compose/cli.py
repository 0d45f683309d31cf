"""Command-line interface for knaf-compose."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import IO

from .compose import (
    DEFAULT_MAX_PASSES,
    CandidateSet,
    DensityMode,
    all_compositions,
    compose,
    compose_traced,
    composition_label,
)
from .exceptions import ConfigError, KnafError
from .harness import DEFAULT_EVAL_STEPS, cross_validate, evaluate, resolve_map, resolve_maps
from .knaf import NAFPolicy, train
from .lidar_sim import LidarEnv, save_map
from .maps import ALL_MAPS, MAP_REGISTRY, MAP_SETS, MapName, get_map_sets_for_map
from .models import PolicyProvenance, TrainConfig, load_train_config
from .output import (
    load_policy,
    metrics_writer,
    save_policy,
    write_json_lines,
    write_reward_matrix_csv,
)
from .utils import configure_logging, unique_ordered


DEFAULT_COMPOSE_EPSILON = TrainConfig().epsilon


class CommaSeparatedListAction(argparse.Action):
    """Parse comma-separated values and accumulate across repeated flags."""

    def __call__(self, parser, namespace, values, option_string=None) -> None:
        option_string = option_string or self.option_strings[0]
        current = list(getattr(namespace, self.dest, []) or [])
        raw_values = values if isinstance(values, list) else [values]
        tokens = [part.strip() for token in raw_values for part in token.split(",") if part.strip()]
        if not tokens:
            parser.error(f"{option_string} requires at least one value.")
        setattr(namespace, self.dest, [*current, *tokens])


@contextmanager
def open_output(path: str | None) -> Iterator[IO[str]]:
    """The named file (parents created) or stdout when no path or '-' is given."""
    if not path or path == "-":
        yield sys.stdout
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        yield handle


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog="knaf-compose",
        description="Train, compose and evaluate sparse kernel NAF policies on lidar robot worlds.",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress to stderr (-v for INFO, -vv for DEBUG).",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    train_parser = commands.add_parser("train", help="Train a policy with KNAF Q-learning.")
    train_parser.add_argument(
        "--map",
        default=MapName.ROUND.value,
        help="Built-in map name or map file (default: round).",
    )
    train_parser.add_argument("--config", default="", help="JSON file with training hyperparameters.")
    train_parser.add_argument("--out", required=True, help="Where to write the policy file.")
    train_parser.add_argument("--steps", type=int, default=None, help="Override max_steps from the config.")
    train_parser.add_argument("--seed", type=int, default=None, help="Override the config seed.")
    train_parser.add_argument("--epsilon", type=float, default=None, help="Override the compression budget.")
    train_parser.add_argument(
        "--metrics",
        default="-",
        help="Per-step metrics CSV path (default: stdout).",
    )
    train_parser.set_defaults(handler=run_train)

    eval_parser = commands.add_parser("eval", help="Evaluate a policy greedily on one map.")
    eval_parser.add_argument("--policy", required=True, help="Policy file to evaluate.")
    eval_parser.add_argument("--map", default=MapName.ROUND.value, help="Built-in map name or map file.")
    eval_parser.add_argument(
        "--steps",
        type=int,
        default=DEFAULT_EVAL_STEPS,
        help=f"Evaluation steps (default: {DEFAULT_EVAL_STEPS}).",
    )
    eval_parser.add_argument("--seed", type=int, default=0, help="Spawn selection seed (default: 0).")
    eval_parser.add_argument("--trace", action="store_true", help="Include the per-step action/observation trace.")
    eval_parser.add_argument("--out", default="-", help="JSON-lines output path (default: stdout).")
    eval_parser.set_defaults(handler=run_eval)

    compose_parser = commands.add_parser("compose", help="Merge trained policies into one.")
    compose_parser.add_argument("policies", nargs="+", metavar="POLICY", help="Policy files to compose.")
    compose_parser.add_argument("--out", required=True, help="Where to write the composite policy file.")
    compose_parser.add_argument(
        "--density",
        choices=[mode.value for mode in DensityMode],
        default=DensityMode.KME.value,
        help="Density used for conflict resolution (default: kme).",
    )
    compose_parser.add_argument(
        "--epsilon",
        type=float,
        default=DEFAULT_COMPOSE_EPSILON,
        help=f"Compression budget of the composite (default: {DEFAULT_COMPOSE_EPSILON:g}).",
    )
    compose_parser.add_argument("--seed", type=int, default=0, help="Visitation order seed (default: 0).")
    compose_parser.add_argument(
        "--passes",
        type=int,
        default=1,
        help=f"Interpolation passes over accepted points (default: 1, at most {DEFAULT_MAX_PASSES}).",
    )
    compose_parser.set_defaults(handler=run_compose)

    crossval_parser = commands.add_parser("crossval", help="Evaluate policies on several maps (CSV matrix).")
    crossval_parser.add_argument(
        "--maps",
        dest="maps",
        action=CommaSeparatedListAction,
        metavar="MAP",
        default=[],
        help="Comma-separated map names, map sets or map files (defaults to 'all').",
    )
    crossval_parser.add_argument(
        "--policies",
        dest="policies",
        action=CommaSeparatedListAction,
        metavar="POLICY",
        default=[],
        help="Comma-separated policy files.",
    )
    crossval_parser.add_argument(
        "--compositions",
        action="store_true",
        help="Also evaluate every composition of two or more of the given policies.",
    )
    crossval_parser.add_argument(
        "--density",
        choices=[mode.value for mode in DensityMode],
        default=DensityMode.KME.value,
        help="Density used when composing (default: kme).",
    )
    crossval_parser.add_argument(
        "--epsilon",
        type=float,
        default=DEFAULT_COMPOSE_EPSILON,
        help="Compression budget used when composing.",
    )
    crossval_parser.add_argument("--steps", type=int, default=DEFAULT_EVAL_STEPS, help="Evaluation steps per cell.")
    crossval_parser.add_argument("--seed", type=int, default=0, help="Seed shared by every cell (default: 0).")
    crossval_parser.add_argument("--out", default="-", help="CSV output path (default: stdout).")
    crossval_parser.set_defaults(handler=run_crossval)

    maps_parser = commands.add_parser("maps", help="List built-in maps or export one as a map file.")
    maps_parser.add_argument(
        "--export",
        choices=[name.value for name in MAP_REGISTRY],
        default="",
        help="Built-in map to export.",
    )
    maps_parser.add_argument("--out", default="", help="Destination of the exported map file.")
    maps_parser.set_defaults(handler=run_maps)
    return parser


def resolve_train_config(args: argparse.Namespace) -> TrainConfig:
    """Config file (or defaults) with the command-line overrides applied."""
    cfg = load_train_config(Path(args.config)) if args.config else TrainConfig()
    return cfg.with_overrides(max_steps=args.steps, seed=args.seed, epsilon=args.epsilon)


def run_train(args: argparse.Namespace) -> int:
    cfg = resolve_train_config(args)
    world = resolve_map(args.map)
    env = LidarEnv(world)
    with open_output(args.metrics) as stream:
        writer = metrics_writer(stream)
        policy, metrics = train(env, cfg, on_step=lambda *row: writer.writerow(row))
    provenance = PolicyProvenance(map_name=world.name, steps=cfg.max_steps, seed=cfg.seed)
    save_policy(policy, Path(args.out), provenance)
    average = metrics.average_episode_reward()
    summary = f", average episode reward {average:g}" if average is not None else ""
    print(f"Wrote {args.out} (model order {policy.model_order}{summary})", file=sys.stderr)
    return 0


def run_eval(args: argparse.Namespace) -> int:
    policy = load_policy(Path(args.policy)).policy
    world = resolve_map(args.map)
    report = evaluate(policy, world, args.steps, args.seed, record_trace=args.trace)
    record = {"policy": args.policy, "map": world.name, "seed": args.seed, **report.to_dict()}
    with open_output(args.out) as stream:
        write_json_lines([record], stream)
    return 0


def run_compose(args: argparse.Namespace) -> int:
    if not 1 <= args.passes <= DEFAULT_MAX_PASSES:
        raise ConfigError(f"--passes must lie in [1, {DEFAULT_MAX_PASSES}], got {args.passes}")
    files = [load_policy(Path(path)) for path in args.policies]
    cands = CandidateSet(tuple(f.policy for f in files), seed=args.seed)
    result = compose_traced(cands, args.epsilon, args.density, passes=args.passes)
    provenance = PolicyProvenance(
        map_name=" / ".join(unique_ordered([f.provenance.map_name for f in files if f.provenance.map_name])),
        steps=sum(f.provenance.steps for f in files),
        seed=args.seed,
        components=tuple(args.policies),
    )
    save_policy(result.policy, Path(args.out), provenance)
    record = {
        "out": args.out,
        "candidates": len(files),
        "visited": len(result.decisions),
        "accepted": result.accepted,
        "ties": result.ties,
        "passes": result.passes,
        "model_order": result.policy.model_order,
    }
    write_json_lines([record], sys.stdout)
    return 0


def labelled_policies(
    policies: Sequence[NAFPolicy],
    labels: Sequence[str],
    build_composite: Callable[[tuple[int, ...]], NAFPolicy] | None,
) -> dict[str, NAFPolicy]:
    """Singles under their own labels, then (optionally) every larger composition as "1 / 2 / ..."."""
    if build_composite is None:
        return dict(zip(labels, policies, strict=True))
    rows: dict[str, NAFPolicy] = {}
    for indices in all_compositions(len(policies)):
        policy = policies[indices[0]] if len(indices) == 1 else build_composite(indices)
        rows[composition_label(indices)] = policy
    return rows


def row_labels(paths: Sequence[str]) -> list[str]:
    """File stems, or the full path where two policies share a stem."""
    stems = [Path(path).stem for path in paths]
    return [stem if stems.count(stem) == 1 else path for stem, path in zip(stems, paths, strict=True)]


def run_crossval(args: argparse.Namespace) -> int:
    if not args.policies:
        raise ConfigError("crossval needs at least one policy (--policies)")
    paths = unique_ordered(args.policies)
    policies = [load_policy(Path(path)).policy for path in paths]
    worlds = resolve_maps(args.maps or ["all"])

    def build_composite(indices: tuple[int, ...]) -> NAFPolicy:
        cands = CandidateSet(tuple(policies[i] for i in indices), seed=args.seed)
        return compose(cands, args.epsilon, args.density)

    rows = labelled_policies(
        policies,
        row_labels(paths),
        build_composite if args.compositions else None,
    )
    matrix = cross_validate(rows, worlds, args.steps, args.seed)
    with open_output(args.out) as stream:
        write_reward_matrix_csv(matrix, stream)
    return 0


def list_maps() -> int:
    """List built-in maps and exit."""
    print("Available maps:")
    for builder in ALL_MAPS:
        sets = ", ".join(get_map_sets_for_map(builder))
        print(f"  {builder.name:<12} sets: {sets} - {builder.short_description()}")
    print("Available map sets:")
    for name in sorted(MAP_SETS):
        print(f"  {name:<12} {MAP_SETS[name]['description']}")
    return 0


def run_maps(args: argparse.Namespace) -> int:
    if not args.export:
        return list_maps()
    if not args.out:
        print("Cannot export a map without a destination. Provide --out.", file=sys.stderr)
        return 1
    world = MAP_REGISTRY[MapName(args.export)].build()
    save_map(world, Path(args.out))
    print(f"Wrote {args.out}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the knaf-compose command."""
    parser = build_argument_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (KnafError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
