"""Command-line interface.

Commands: distort, ncd, cluster, metrics, grammar-gen, project, and
experiment {distortion|order-sweep|grammar}. Every flag can also be set in
an INI-style config file (--config): section [common] applies everywhere,
a section named after the command applies to it, and explicit command-line
flags win over both. Exit codes: 0 success, 2 input error, 3 external
codec failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .codec import parse_codec_spec
from .dendro import UnrootedBinaryTree, build_tree_agglomerative, refine_tree, tree_score
from .errors import CodecUnavailableError, NcdstructError
from .grammar import (
    CorpusSpec,
    enumerate_distribution,
    format_distribution,
    generate_corpus,
    parse_grammar,
)
from .metrics import ClusterAssignment, clustering_error, dsc
from .ncd import DistanceMatrix, ncd
from .pipelines import (
    ExperimentConfig,
    load_dataset,
    cached_matrix,
    run_distort,
    run_experiment_distortion,
    run_experiment_grammar,
    run_experiment_order_sweep,
)
from .projection import emit_plot, mds_project, silhouette_euclidean


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI config file; CLI flags win")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--workers", type=int, default=1)


def _codec_arg(p: argparse.ArgumentParser, multiple: bool = False) -> None:
    kwargs = dict(type=parse_codec_spec, metavar="ppm:N|lz|bwt|ext:<cmd>")
    if multiple:
        p.add_argument("--codec", action="append", dest="codecs", **kwargs)
    else:
        p.add_argument("--codec", default=parse_codec_spec("ppm:6"), **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncdstruct")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distort", help="write distorted corpora")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--freq", type=Path, required=True)
    p.add_argument("--technique", action="append", dest="techniques",
                   choices=["oo", "rpa", "rprw", "rpe"])
    p.add_argument("--degrees", type=float, nargs="+",
                   default=[round(0.1 * k, 1) for k in range(1, 11)])
    p.add_argument("--repetitions", type=int, default=12)
    p.add_argument("--rpa-any-slot", action="store_true")
    _add_common(p)

    p = sub.add_parser("ncd", help="pairwise distance or full matrix")
    p.add_argument("files", nargs="*", type=Path, help="two files for a single pair")
    p.add_argument("--dataset", type=Path, help="directory-per-class corpus")
    p.add_argument("--matrix-out", type=Path, help="where to write the matrix CSV")
    _codec_arg(p)
    _add_common(p)

    p = sub.add_parser("cluster", help="build and refine a dendrogram")
    p.add_argument("--matrix", type=Path, required=True)
    p.add_argument("--iterations", type=int, default=300)
    p.add_argument("--tree-out", type=Path)
    _add_common(p)

    p = sub.add_parser("metrics", help="score a dendrogram against class labels")
    p.add_argument("--tree", type=Path, required=True)
    p.add_argument("--labels", type=Path, help="TSV id<TAB>label; default derives from ids")
    p.add_argument("--label-split", default=None,
                   help="id prefix separator when --labels is absent")
    _add_common(p)

    p = sub.add_parser("grammar-gen", help="generate corpora from a grammar")
    p.add_argument("--grammar", type=Path, required=True)
    p.add_argument("--bind", action="append", default=[],
                   metavar="NAME=RATIONAL", help="parameter binding, repeatable")
    p.add_argument("--size", type=int, default=16000)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--class-label", default="")
    p.add_argument("--enumerate", dest="enumerate_to", type=Path,
                   help="also write the exact sentence distribution")
    _add_common(p)

    p = sub.add_parser("project", help="2D projection of a distance matrix")
    p.add_argument("--matrix", type=Path, required=True)
    p.add_argument("--labels", type=Path)
    p.add_argument("--label-split", default=None)
    _add_common(p)

    p = sub.add_parser("experiment", help="full study pipelines")
    p.add_argument("which", choices=["distortion", "order-sweep", "grammar"])
    p.add_argument("--dataset", type=Path)
    p.add_argument("--freq", type=Path)
    p.add_argument("--grammar", type=Path)
    p.add_argument("--technique", action="append", dest="techniques",
                   choices=["oo", "rpa", "rprw", "rpe"])
    p.add_argument("--degrees", type=float, nargs="*",
                   default=[round(0.1 * k, 1) for k in range(1, 11)])
    p.add_argument("--repetitions", type=int, default=12)
    p.add_argument("--orders", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    p.add_argument("--iterations", type=int, default=300)
    p.add_argument("--files-per-class", type=int, default=4)
    p.add_argument("--corpus-size", type=int, default=16000)
    p.add_argument("--rpa-any-slot", action="store_true")
    _codec_arg(p, multiple=True)
    _add_common(p)
    return parser


def _explicit_dests(parser: argparse.ArgumentParser, argv: list[str],
                    command: str) -> set[str]:
    """Option dests the user actually typed, so config values never shadow them.

    Only the selected command's subparser is consulted: the same option
    string can map to different dests on different commands (--codec is
    scalar on ncd but a list on experiment).
    """
    option_map = {}

    def collect(p: argparse.ArgumentParser) -> None:
        for action in p._actions:
            for opt in action.option_strings:
                option_map[opt] = action.dest

    collect(parser)
    for sub_action in parser._actions:
        if isinstance(sub_action, argparse._SubParsersAction):
            chosen = sub_action.choices.get(command)
            if chosen is not None:
                collect(chosen)
    explicit = set()
    for token in argv:
        name = token.split("=", 1)[0]
        if name in option_map:
            explicit.add(option_map[name])
    return explicit


_LIST_DESTS = {"degrees", "orders", "techniques", "codecs", "files", "bind"}


def _convert(dest: str, raw: str):
    if dest in ("dataset", "freq", "grammar", "matrix", "tree", "labels", "out",
                "matrix_out", "tree_out", "enumerate_to"):
        return Path(raw)
    if dest == "codecs":
        return [parse_codec_spec(c) for c in raw.replace(",", " ").split()]
    if dest in ("degrees",):
        return [float(x) for x in raw.replace(",", " ").split()]
    if dest in ("orders",):
        return [int(x) for x in raw.replace(",", " ").split()]
    if dest in ("techniques", "bind", "files"):
        return raw.replace(",", " ").split()
    if dest in ("seed", "workers", "repetitions", "iterations", "size", "count",
                "files_per_class", "corpus_size"):
        return int(raw)
    if dest in ("rpa_any_slot",):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if dest == "codec":
        return parse_codec_spec(raw)
    return raw


def _apply_config(args: argparse.Namespace, explicit: set[str]) -> None:
    if not getattr(args, "config", None):
        return
    path = Path(args.config)
    if not path.exists():
        raise NcdstructError(f"config file {path} does not exist")
    cp = configparser.ConfigParser()
    cp.read(path)
    sections = ["common", args.command]
    if getattr(args, "which", None):
        sections.append(f"{args.command}.{args.which}")
    merged: dict[str, str] = {}
    for section in sections:
        if cp.has_section(section):
            merged.update(cp[section])
    for key, raw in merged.items():
        dest = key.replace("-", "_")
        if dest in explicit or not hasattr(args, dest):
            continue
        setattr(args, dest, _convert(dest, raw))


def _derive_labels(ids: list[str], split: str | None) -> ClusterAssignment:
    if split is None:
        split = "/" if any("/" in i for i in ids) else "."
    return ClusterAssignment.from_ids(ids, split=split)


def _read_labels(path: Path) -> ClusterAssignment:
    labels = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise NcdstructError(f"{path}:{lineno}: expected 'id<TAB>label'")
        labels[parts[0]] = parts[1]
    return ClusterAssignment(labels)


def _labels_for(args, ids: list[str]) -> ClusterAssignment:
    if getattr(args, "labels", None):
        return _read_labels(args.labels)
    return _derive_labels(ids, getattr(args, "label_split", None))


def _cmd_ncd(args) -> None:
    if args.files and len(args.files) == 2:
        x, y = (f.read_bytes() for f in args.files)
        print(f"{ncd(x, y, args.codec):.6f}")
        return
    if args.files:
        raise NcdstructError("ncd takes exactly two files, or --dataset for a matrix")
    if not args.dataset:
        raise NcdstructError("ncd needs two files or --dataset")
    docs = load_dataset(args.dataset)
    out = args.matrix_out or (args.out / "matrix.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    matrix = cached_matrix(docs, args.codec, args.out / "cache", workers=args.workers)
    out.write_text(matrix.to_csv())
    print(out)


def _cmd_cluster(args) -> None:
    matrix = DistanceMatrix.from_csv(args.matrix.read_text())
    tree = build_tree_agglomerative(matrix)
    tree = refine_tree(matrix, tree, iterations=args.iterations, seed=args.seed)
    newick = tree.to_newick()
    if args.tree_out:
        args.tree_out.parent.mkdir(parents=True, exist_ok=True)
        args.tree_out.write_text(newick + "\n")
    print(newick)
    print(f"score {tree_score(tree, matrix):.6f}", file=sys.stderr)


def _cmd_metrics(args) -> None:
    tree = UnrootedBinaryTree.from_newick(args.tree.read_text())
    labels = _labels_for(args, tree.leaves)
    print(f"clustering_error {clustering_error(tree, labels)}")
    print(f"dsc {dsc(tree, labels):.6f}")


def _cmd_grammar_gen(args) -> None:
    bindings = {}
    for item in args.bind:
        name, sep, value = item.partition("=")
        if not sep:
            raise NcdstructError(f"--bind expects NAME=RATIONAL, got {item!r}")
        bindings[name.strip()] = Fraction(value.strip())
    g = parse_grammar(args.grammar.read_text().splitlines(), bindings)
    args.out.mkdir(parents=True, exist_ok=True)
    if args.enumerate_to:
        args.enumerate_to.parent.mkdir(parents=True, exist_ok=True)
        args.enumerate_to.write_text(format_distribution(enumerate_distribution(g)))
    label = args.class_label or ",".join(f"{k}={v}" for k, v in sorted(bindings.items()))
    for k in range(args.count):
        doc = generate_corpus(CorpusSpec(
            grammar=g, target_size_bytes=args.size, seed=f"{args.seed}:{k}",
            doc_id=f"doc{k:02d}.txt", class_label=label,
        ))
        (args.out / doc.id).write_bytes(doc.body)
    print(args.out)


def _cmd_project(args) -> None:
    matrix = DistanceMatrix.from_csv(args.matrix.read_text())
    labels = _labels_for(args, matrix.ids)
    projection = mds_project(matrix, labels=labels.labels)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = emit_plot(projection, args.out / "projection")
    print(csv_path)
    print(svg_path)
    print(f"stress {projection.stress:.6f}", file=sys.stderr)
    print(f"silhouette {silhouette_euclidean(projection):.6f}", file=sys.stderr)


def _experiment_config(args) -> ExperimentConfig:
    config = ExperimentConfig(
        dataset=args.dataset, freq_path=args.freq, grammar_path=args.grammar,
        out=args.out, techniques=args.techniques or ["oo", "rpa", "rprw", "rpe"],
        degrees=list(args.degrees), repetitions=args.repetitions, seed=args.seed,
        workers=args.workers, orders=list(args.orders),
        refine_iterations=args.iterations, rpa_any_slot=args.rpa_any_slot,
        files_per_class=args.files_per_class, corpus_size=args.corpus_size,
    )
    if args.codecs:
        config.codecs = list(args.codecs)
    return config


def _cmd_experiment(args) -> None:
    config = _experiment_config(args)
    if args.which == "distortion":
        run_experiment_distortion(config)
    elif args.which == "order-sweep":
        run_experiment_order_sweep(config)
    else:
        run_experiment_grammar(config)
    print(config.out)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, _explicit_dests(parser, argv, args.command))
        if args.command == "distort":
            config = ExperimentConfig(
                dataset=args.dataset, freq_path=args.freq, out=args.out,
                techniques=args.techniques or ["oo", "rpa", "rprw", "rpe"],
                degrees=list(args.degrees), repetitions=args.repetitions,
                seed=args.seed, rpa_any_slot=args.rpa_any_slot,
            )
            print(run_distort(config))
        elif args.command == "ncd":
            _cmd_ncd(args)
        elif args.command == "cluster":
            _cmd_cluster(args)
        elif args.command == "metrics":
            _cmd_metrics(args)
        elif args.command == "grammar-gen":
            _cmd_grammar_gen(args)
        elif args.command == "project":
            _cmd_project(args)
        elif args.command == "experiment":
            _cmd_experiment(args)
    except CodecUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NcdstructError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
