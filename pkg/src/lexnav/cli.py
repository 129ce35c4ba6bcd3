"""Command line entry point: ``lexnav <command> ...``.

Exit status is 0 on success, 1 for invalid input (bad config, unknown word,
malformed file) and 2 for failures while running.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from collections import defaultdict

from . import harness, qlearn
from .embedding import EmbeddingError, OutOfVocabulary, default_store, load_embeddings, similarity_report
from .gridworld import GLYPH_OF, MapError, load_map
from .nn import CheckpointError

VALIDATION_ERRORS = (harness.ConfigError, MapError, EmbeddingError, OutOfVocabulary,
                     CheckpointError, FileNotFoundError, KeyError)


class UsageError(Exception):
    pass


class OutputError(RuntimeError):
    pass


def _writing(path, write):
    """Run ``write(path)``; a failure here is a runtime error, not bad input."""
    try:
        write(path)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _split(value: str) -> list:
    return [w for w in re.split(r"[,\s]+", value) if w]


def _write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _store(path):
    return default_store() if path in (None, "default") else load_embeddings(path)


def cmd_train(args):
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    metrics = harness.run_training(cfg)
    _writing(args.out, metrics.write_csv)
    if args.save_policy:
        _writing(args.save_policy, lambda p: qlearn.save_policy(metrics.agent, p))
    _summary(metrics)


def cmd_transfer(args):
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.prior is not None:
        cfg.prior = args.prior
    if args.prior_checkpoint:
        cfg.prior_checkpoint = args.prior_checkpoint
    metrics = harness.run_transfer(cfg)
    _writing(args.out, metrics.write_csv)
    print(f"prior goal: {metrics.prior_goal or 'none'}")
    _summary(metrics)


def _summary(metrics):
    if metrics.reached_criterion:
        print(f"steps_to_criterion: {metrics.steps_to_criterion}")
    else:
        print(f"steps_to_criterion: budget-exhausted ({metrics.env_steps} steps)")
    print(f"episodes: {len(metrics.episodes)}")


def cmd_eval(args):
    amap = load_map(args.map)
    store = _store(args.embedding) if args.embedding else None
    policy = qlearn.load_policy(args.policy, store if store is not None else _maybe_default_store(args.policy))
    goals = _split(args.goals)
    for g in goals:
        amap.object_cell(g)
    rate, length = harness.evaluate(policy, amap, goals, args.episodes, args.seed)
    print(f"success_rate: {rate:.4f}")
    print(f"mean_episode_length: {length:.2f}")
    if args.per_spawn:
        for g in goals:
            lengths = harness.greedy_lengths(policy, amap, g, args.seed)
            optimal = sum(1 for c, n in lengths.items() if n == amap.bfs_distance(c, g))
            print(f"{g}: optimal from {optimal}/{len(lengths)} spawn cells")


def _maybe_default_store(path):
    with open(path, encoding="utf-8") as fh:
        head = fh.read(4096)
    return default_store() if "goal_mode embedding" in head else None


def cmd_similarity(args):
    store = _store(args.embedding)
    report = similarity_report(store, args.target, _split(args.priors))
    print(report.format_table())
    if args.csv == "-":
        sys.stdout.write(report.to_csv())
    elif args.csv:
        _writing(args.csv, lambda p: _write_text(p, report.to_csv()))


def cmd_render_map(args):
    amap = load_map(args.map)
    print(amap.render())
    print(f"{amap.width}x{amap.height}, {len(amap.spawn_cells)} spawn cells")
    for word, (x, y) in amap.object_index.items():
        n = len(amap.success_cells(word))
        print(f"  {GLYPH_OF[word]} {word:<11} at ({x:2d},{y:2d})  success cells: {n}")


def cmd_plot(args):
    from .plotting import emit_plot

    groups = defaultdict(list)
    labels = args.labels or [re.sub(r"[-_.]?seed[-_]?\d+$", "", _stem(p)) for p in args.inputs]
    if len(labels) != len(args.inputs):
        raise UsageError("--labels must give one label per input")
    for label, path in zip(labels, args.inputs):
        groups[label].append(harness.read_csv(path))
    series = {label: harness.aggregate_runs(runs) for label, runs in groups.items()}
    _writing(args.out, lambda p: emit_plot(series, p, title=args.title))
    print(f"wrote {args.out}")


def _stem(path):
    name = path.replace("\\", "/").rsplit("/", 1)[-1]
    return name[:-4] if name.endswith(".csv") else name


def build_parser():
    p = _Parser(prog="lexnav", description="Goal-conditional navigation with word-vector transfer.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("train", help="train an agent from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True, help="metrics CSV path")
    s.add_argument("--save-policy", help="write the trained policy checkpoint here")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("transfer", help="train on a new goal with a frozen prior policy")
    s.add_argument("--config", required=True)
    s.add_argument("--prior", help="prior goal word, 'auto' (nearest in word space) or 'none'")
    s.add_argument("--prior-checkpoint")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_transfer)

    s = sub.add_parser("eval", help="greedy evaluation of a saved policy")
    s.add_argument("--policy", required=True)
    s.add_argument("--goals", required=True)
    s.add_argument("--map", default="default")
    s.add_argument("--embedding")
    s.add_argument("--episodes", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--per-spawn", action="store_true", help="also check optimality from every spawn cell")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("similarity", help="rank prior goals by cosine similarity to a target")
    s.add_argument("--target", required=True)
    s.add_argument("--priors", required=True)
    s.add_argument("--embedding", default="default")
    s.add_argument("--csv", help="also write word,score CSV to this path ('-' for stdout)")
    s.set_defaults(func=cmd_similarity)

    s = sub.add_parser("render-map", help="validate and print a map")
    s.add_argument("--map", default="default")
    s.set_defaults(func=cmd_render_map)

    s = sub.add_parser("plot", help="plot success-rate curves from metrics CSVs")
    s.add_argument("--inputs", nargs="+", required=True)
    s.add_argument("--labels", nargs="+")
    s.add_argument("--out", required=True)
    s.add_argument("--title")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (UsageError, ValueError, *VALIDATION_ERRORS) as exc:
        print(f"lexnav: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"lexnav: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
