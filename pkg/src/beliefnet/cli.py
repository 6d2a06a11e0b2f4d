"""Command-line driver: generate, sample, learn, evaluate, condition, test.

Every command is deterministic given its flags and seed, and every report
embeds the full run configuration in its ``#config`` line.  Reports are TSV
with ``#``-prefixed header and section lines.  Output files are written
atomically (temporary file plus rename).

Exit codes: 0 success, 2 validation error, 3 numerical failure (conflict,
no solution, inconclusive test, failed equivalence), 4 capacity exceeded.
"""

from __future__ import annotations

import argparse
import sys
from typing import Iterable, Sequence

from .dependence import ScoreContext
from .errors import (
    BeliefNetError,
    CapacityError,
    ConflictError,
    FormatError,
    FrameError,
    GenerationError,
    GraphError,
    MassError,
    NoSolutionError,
    ScopeError,
)
from .frames import Frame
from .learners import LearnedStructure, compare_structures, learn_polytree, learn_tree
from .mass import condition, conflict, l1_distance
from .network import joint_distribution, random_network, random_polytree, random_tree, read_network, write_network
from .population import (
    atomic_write_text,
    condition_dataset,
    empirical_mass,
    parse_event,
    read_dataset,
    sample_dataset,
    write_dataset,
)

_EQUIVALENCE_TOL = 1e-12
_LABELS = "abcdefghijklmnopqrstuvwxyz"


def _config_line(pairs: Sequence[tuple[str, object]]) -> str:
    return "#config\t" + "\t".join(f"{k}={v}" for k, v in pairs)


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _gen_frame(n_vars: int, sizes: Sequence[int]) -> Frame:
    return Frame(
        [(f"X{i + 1}", list(_LABELS[: sizes[i]])) for i in range(n_vars)]
    )


def _parse_sizes(text: str, n_vars: int) -> list[int]:
    parts = [p.strip() for p in text.split(",")]
    try:
        sizes = [int(p) for p in parts]
    except ValueError:
        raise FormatError(f"bad domain sizes {text!r}") from None
    if len(sizes) == 1:
        sizes = sizes * n_vars
    if len(sizes) != n_vars:
        raise FormatError(f"need 1 or {n_vars} domain sizes, got {len(sizes)}")
    for s in sizes:
        if not 2 <= s <= len(_LABELS):
            raise FormatError(f"domain size {s} outside [2, {len(_LABELS)}]")
    return sizes


def cmd_gen(args: argparse.Namespace) -> int:
    sizes = _parse_sizes(args.domain_sizes, args.vars)
    frame = _gen_frame(args.vars, sizes)
    if args.kind == "tree":
        dag = random_tree(args.vars, args.seed)
    else:
        dag = random_polytree(args.vars, args.seed)
    net = random_network(dag, frame, args.focal_budget, args.seed)
    write_network(net, args.out)
    # summary: fold the joint while tracking the largest single-step conflict
    acc = None
    max_conflict = 0.0
    from .mass import combine, extend

    for node in dag.topological_order:
        v = net.valuations[node]
        if acc is None:
            acc = v
        else:
            max_conflict = max(max_conflict, conflict(acc, v))
            acc = combine(acc, v)
    joint = extend(acc, frame.full_scope)
    colliders = sum(1 for i in range(dag.n) if len(dag.parents(i)) >= 2)
    lines = [
        "#beliefnet-report gen",
        _config_line(
            [
                ("subcommand", "gen"),
                ("kind", args.kind),
                ("vars", args.vars),
                ("domain_sizes", ",".join(map(str, sizes))),
                ("focal_budget", args.focal_budget),
                ("seed", args.seed),
                ("out", args.out),
            ]
        ),
        "#network\tvars\tedges\tcolliders\tjoint_focal_count\tmax_step_conflict",
        f"{dag.n}\t{len(dag.edges)}\t{colliders}\t{joint.focal_count}\t{max_conflict:.17g}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    net = read_network(args.net)
    joint = joint_distribution(net)
    ds = sample_dataset(joint, args.n, args.seed)
    write_dataset(ds, args.out)
    lines = [
        "#beliefnet-report sample",
        _config_line(
            [
                ("subcommand", "sample"),
                ("net", args.net),
                ("n", args.n),
                ("seed", args.seed),
                ("out", args.out),
            ]
        ),
        "#sample\trecords\tdistinct_records",
        f"{len(ds)}\t{len(set(r.mask for r in ds.records))}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _learn_context(args: argparse.Namespace) -> tuple[ScoreContext, str]:
    if bool(args.data) == bool(args.net):
        raise FormatError("give exactly one of --data or --net")
    if args.net and not args.exact:
        raise FormatError("--net requires --exact (exact marginals of the network's joint)")
    if args.data and args.exact:
        raise FormatError("--exact needs --net, not --data")
    if args.data:
        return ScoreContext.from_dataset(read_dataset(args.data)), args.data
    net = read_network(args.net)
    return ScoreContext.from_joint(joint_distribution(net)), args.net


def _format_learn_report(config: str, learned: LearnedStructure) -> str:
    lines = ["#beliefnet-report learn", config]
    lines.append("#variables\t" + "\t".join(learned.variables))
    lines.append("#edges\ta\tb\tweight\torientation")
    oriented = {tuple(sorted(e)): e for e in learned.oriented}
    for a, b in learned.skeleton:
        direction = oriented.get(tuple(sorted((a, b))))
        text = f"{direction[0]}->{direction[1]}" if direction else "--"
        lines.append(f"{a}\t{b}\t{learned.edge_weights[(a, b)]:.17g}\t{text}")
    lines.append("#colliders\tx1\tx2\tcenter\tscore")
    for (x1, x2, center), score in sorted(learned.collider_scores.items()):
        lines.append(f"{x1}\t{x2}\t{center}\t{score:.17g}")
    lines.append("#warnings")
    for w in learned.warnings:
        lines.append(w.replace("\t", " "))
    lines.append("#end")
    return "\n".join(lines) + "\n"


def cmd_learn(args: argparse.Namespace) -> int:
    ctx, source = _learn_context(args)
    if args.mode == "tree":
        learned = learn_tree(ctx)
    else:
        learned = learn_polytree(ctx, theta=args.theta)
    config = _config_line(
        [
            ("subcommand", "learn"),
            ("source", source),
            ("mode", args.mode),
            ("exact", str(bool(args.exact)).lower()),
            ("theta", args.theta),
            ("out", args.out or "-"),
        ]
    )
    _emit(_format_learn_report(config, learned), args.out)
    return 0


def read_learn_report(path: str) -> LearnedStructure:
    """Parses a learn report back into a structure (for evaluation)."""
    variables: tuple[str, ...] | None = None
    skeleton: list[tuple[str, str]] = []
    oriented: list[tuple[str, str]] = []
    weights: dict[tuple[str, str], float] = {}
    scores: dict[tuple[str, str, str], float] = {}
    notes: list[str] = []
    section = ""
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                head = line.split("\t", 1)[0]
                if head == "#variables":
                    variables = tuple(line.split("\t")[1:])
                elif head in ("#edges", "#colliders", "#warnings"):
                    section = head
                elif head == "#end":
                    section = ""
                continue
            cells = line.split("\t")
            if section == "#edges":
                if len(cells) != 4:
                    raise FormatError(f"{path}:{lineno}: edge row needs 4 columns")
                a, b, weight, direction = cells
                skeleton.append((a, b))
                weights[(a, b)] = float(weight)
                if direction != "--":
                    parent, _, child = direction.partition("->")
                    if not child:
                        raise FormatError(f"{path}:{lineno}: bad orientation {direction!r}")
                    oriented.append((parent, child))
            elif section == "#colliders":
                if len(cells) != 4:
                    raise FormatError(f"{path}:{lineno}: collider row needs 4 columns")
                x1, x2, center, score = cells
                scores[(x1, x2, center)] = float(score)
            elif section == "#warnings":
                notes.append(line)
            else:
                raise FormatError(f"{path}:{lineno}: data row outside any section")
    if variables is None:
        raise FormatError(f"{path}: missing #variables line")
    return LearnedStructure(
        variables=variables,
        skeleton=tuple(skeleton),
        oriented=tuple(oriented),
        edge_weights=weights,
        collider_scores=scores,
        warnings=tuple(notes),
    )


def cmd_eval(args: argparse.Namespace) -> int:
    truths = [p.strip() for p in args.truth.split(",")]
    reports = [p.strip() for p in args.learned.split(",")]
    if len(truths) != len(reports):
        raise FormatError("--truth and --learned need the same number of paths")
    lines = [
        "#beliefnet-report eval",
        _config_line(
            [
                ("subcommand", "eval"),
                ("truth", args.truth),
                ("learned", args.learned),
                ("out", args.out or "-"),
            ]
        ),
        "#metrics\ttruth\tlearned\tskeleton_precision\tskeleton_recall\torientation_accuracy\tspurious_colliders",
    ]
    rows = []
    for truth_path, report_path in zip(truths, reports):
        net = read_network(truth_path)
        learned = read_learn_report(report_path)
        metrics = compare_structures(net.dag, learned, net.frame.names)
        rows.append(metrics)
        lines.append(
            f"{truth_path}\t{report_path}\t{metrics.skeleton_precision:.17g}"
            f"\t{metrics.skeleton_recall:.17g}\t{metrics.orientation_accuracy:.17g}"
            f"\t{metrics.spurious_colliders}"
        )
    if len(rows) > 1:
        mean = lambda xs: sum(xs) / len(xs)  # noqa: E731
        lines.append(
            "(mean)\t(mean)"
            f"\t{mean([m.skeleton_precision for m in rows]):.17g}"
            f"\t{mean([m.skeleton_recall for m in rows]):.17g}"
            f"\t{mean([m.orientation_accuracy for m in rows]):.17g}"
            f"\t{mean([m.spurious_colliders for m in rows]):.17g}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_condition(args: argparse.Namespace) -> int:
    ds = read_dataset(args.data)
    event = parse_event(ds.frame, args.event)
    conditioned = condition_dataset(ds, event)
    write_dataset(conditioned, args.out)
    full = ds.frame.full_scope
    via_data = empirical_mass(conditioned, full)
    via_mass = condition(empirical_mass(ds, full), event)
    gap = l1_distance(via_data, via_mass)
    lines = [
        "#beliefnet-report condition",
        _config_line(
            [
                ("subcommand", "condition"),
                ("data", args.data),
                ("event", args.event),
                ("out", args.out),
            ]
        ),
        "#result\trecords_in\trecords_out\trejected\tl1_gap",
        f"{len(ds)}\t{len(conditioned)}\t{len(ds) - len(conditioned)}\t{gap:.17g}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    if gap > _EQUIVALENCE_TOL:
        print(
            f"error: conditioning equivalence violated (gap {gap!r} > {_EQUIVALENCE_TOL})",
            file=sys.stderr,
        )
        return 3
    return 0


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def cmd_indep(args: argparse.Namespace) -> int:
    from .network import independence_test

    if bool(args.data) == bool(args.net):
        raise FormatError("give exactly one of --data or --net")
    if args.net:
        m = joint_distribution(read_network(args.net))
        source = args.net
    else:
        ds = read_dataset(args.data)
        m = empirical_mass(ds, ds.frame.full_scope)
        source = args.data
    statement = independence_test(
        m, _name_list(args.j), _name_list(args.k), _name_list(args.l), eps=args.epsilon
    )
    if statement.independent is None:
        verdict = "inconclusive"
    else:
        verdict = "independent" if statement.independent else "dependent"
    residual = "-" if statement.residual is None else f"{statement.residual:.17g}"
    lines = [
        "#beliefnet-report indep",
        _config_line(
            [
                ("subcommand", "indep"),
                ("source", source),
                ("J", ",".join(statement.j)),
                ("K", ",".join(statement.k)),
                ("L", ",".join(statement.l) or "-"),
                ("epsilon", args.epsilon),
                ("out", args.out or "-"),
            ]
        ),
        "#statement\tj\tk\tl\tverdict\tresidual\tdetail",
        f"{','.join(statement.j)}\t{','.join(statement.k)}\t{','.join(statement.l) or '-'}"
        f"\t{verdict}\t{residual}\t{statement.detail}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 3 if statement.independent is None else 0


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefnet",
        description="Belief-function calculus, set-valued data, and structure learning.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", help="generate a random tree or polytree network file")
    p.add_argument("kind", choices=("tree", "polytree"))
    p.add_argument("--vars", type=_positive_int, required=True)
    p.add_argument("--domain-sizes", default="2", help="one size for all, or a comma list")
    p.add_argument("--focal-budget", type=_positive_int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sample", help="sample a dataset from a network's joint")
    p.add_argument("--net", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("learn", help="learn a tree or polytree structure")
    p.add_argument("--data", help="dataset file (empirical marginals)")
    p.add_argument("--net", help="network file; needs --exact")
    p.add_argument("--exact", action="store_true", help="use exact marginals of the network joint")
    p.add_argument("--mode", choices=("tree", "polytree"), default="tree")
    p.add_argument("--theta", type=float, default=0.0, help="collider positivity threshold")
    p.add_argument("--out")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("eval", help="compare learned structures with true networks")
    p.add_argument("--truth", required=True, help="network file(s), comma separated")
    p.add_argument("--learned", required=True, help="learn report(s), comma separated")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("condition", help="condition a dataset on an event")
    p.add_argument("--data", required=True)
    p.add_argument(
        "--event",
        required=True,
        help="per-variable constraints like 'X=a|b,Y=c', or 'J:' plus configurations",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_condition)

    p = sub.add_parser("indep", help="test conditional independence of variable sets")
    p.add_argument("--data")
    p.add_argument("--net")
    p.add_argument("-J", "--j", required=True, help="comma-separated variable names")
    p.add_argument("-K", "--k", required=True)
    p.add_argument("-L", "--l", default="", help="conditioning set (may be empty)")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_indep)
    return parser


def main(argv: Iterable[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ConflictError, NoSolutionError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BeliefNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
