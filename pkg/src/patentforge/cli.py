"""Command-line front end.

Subcommands mirror the pipeline stages: parse claims, ingest drawing text,
score a single pair, suggest or evaluate mappings, build a training corpus,
and serve the HTTP API. Domain errors print to stderr and exit 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .claims import all_features, parse_claims
from .config import load_config
from .dataset import DatasetConfig, build_corpus
from .drawings import ComponentPair, all_components, ingest_drawing_text
from .errors import PatentforgeError
from .mapping import load_gold, precision_at_k, suggest_mappings
from .similarity import score_pair


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_pages(inputs: list[str]) -> list[tuple[str, str]]:
    """Resolve page arguments (files or directories of files) to labeled pages."""
    paths: list[Path] = []
    for raw in inputs:
        path = Path(raw)
        if path.is_dir():
            paths.extend(sorted(p for p in path.iterdir() if p.suffix.lower() == ".txt"))
        else:
            paths.append(path)
    if not paths:
        raise FileNotFoundError(f"no page files found in {inputs}")
    return [(p.stem, p.read_text(encoding="utf-8")) for p in paths]


def _cmd_claims_parse(args: argparse.Namespace) -> int:
    claims = parse_claims(_read_text(args.input))
    if args.json:
        print(json.dumps([c.to_dict() for c in claims], indent=2))
        return 0
    for claim in claims:
        dep = f" (depends on {claim.depends_on})" if claim.depends_on else ""
        print(f"claim {claim.number}: {claim.kind}{dep}, "
              f"{len(claim.features)} feature(s)")
        for feature in claim.features:
            print(f"  {feature.claim_number}.{feature.index}: {feature.text}")
    return 0


def _cmd_drawings_ingest(args: argparse.Namespace) -> int:
    figures = ingest_drawing_text(_load_pages(args.inputs))
    if args.json:
        print(json.dumps([f.to_dict() for f in figures], indent=2))
        return 0
    for figure in figures:
        print(f"figure {figure.figure_number}: {len(figure.components)} component(s)")
        for pair in figure.components:
            print(f"  {pair.number}: {pair.name}")
        for note in figure.warnings:
            print(f"  warning: {note}", file=sys.stderr)
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    component = ComponentPair(name=args.component, number=args.number, figure=1)
    score = score_pair(args.feature, component)
    print(json.dumps(score.to_dict(), indent=2))
    return 0


def _load_corpus(args: argparse.Namespace):
    claims = parse_claims(_read_text(args.claims))
    figures = ingest_drawing_text(_load_pages(args.drawings))
    return all_features(claims), all_components(figures)


def _cmd_map_suggest(args: argparse.Namespace) -> int:
    features, components = _load_corpus(args)
    mappings = suggest_mappings(
        features, components, threshold=args.threshold, k=args.k
    )
    if args.json:
        print(json.dumps(mappings.to_dict(), indent=2))
        return 0
    for feature in features:
        entries = mappings.entries_for(feature.feature_id)
        label = f"{feature.feature_id[0]}.{feature.feature_id[1]}"
        if not entries:
            print(f"{label}: (no suggestions)")
            continue
        print(f"{label}: {feature.text}")
        for entry in entries:
            figure, number = entry.component_ref
            print(f"  {figure}:{number} combined={entry.score.combined:.3f}")
    return 0


def _cmd_map_eval(args: argparse.Namespace) -> int:
    features, components = _load_corpus(args)
    mappings = suggest_mappings(
        features, components, threshold=args.threshold, k=args.k
    )
    gold = load_gold(json.loads(_read_text(args.gold)))
    value = precision_at_k(mappings, gold, args.k)
    print(f"precision@{args.k} = {value:.4f} over {len(gold)} gold feature(s)")
    return 0


def _cmd_dataset_build(args: argparse.Namespace) -> int:
    config = DatasetConfig(
        max_tokens=args.max_tokens,
        threshold=args.threshold,
        top_k=args.top_k,
        cpc_filter=args.cpc_filter,
    )
    stats = build_corpus(
        args.input_dir, args.output, config=config, parallelism=args.parallelism
    )
    stats_path = args.stats or (args.output + ".stats.json")
    Path(stats_path).write_text(
        json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(
        f"{stats['documents_accepted']}/{stats['documents_seen']} document(s) accepted, "
        f"{stats['tuples_emitted']} tuple(s) -> {args.output}"
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    if args.data_dir:
        config.data_dir = args.data_dir
    if args.frontend_dir:
        config.frontend_dir = args.frontend_dir
    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patentforge",
        description="Patent drafting pipeline: claims, drawings, mappings, datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    claims = sub.add_parser("claims", help="claim text operations")
    claims_sub = claims.add_subparsers(dest="subcommand", required=True)
    claims_parse = claims_sub.add_parser("parse", help="parse a claims file")
    claims_parse.add_argument("input", help="claims text file")
    claims_parse.add_argument("--json", action="store_true", help="emit JSON")
    claims_parse.set_defaults(func=_cmd_claims_parse)

    drawings = sub.add_parser("drawings", help="drawing text operations")
    drawings_sub = drawings.add_subparsers(dest="subcommand", required=True)
    drawings_ingest = drawings_sub.add_parser(
        "ingest", help="extract components from drawing text pages"
    )
    drawings_ingest.add_argument(
        "inputs", nargs="+", help="page text files, or a directory of .txt pages"
    )
    drawings_ingest.add_argument("--json", action="store_true", help="emit JSON")
    drawings_ingest.set_defaults(func=_cmd_drawings_ingest)

    score = sub.add_parser("score", help="score one feature/component pair")
    score.add_argument("--feature", required=True, help="claim feature text")
    score.add_argument("--component", required=True, help="component name")
    score.add_argument("--number", default="100", help="reference numeral (display only)")
    score.set_defaults(func=_cmd_score)

    map_cmd = sub.add_parser("map", help="mapping operations")
    map_sub = map_cmd.add_subparsers(dest="subcommand", required=True)
    for name, func in (("suggest", _cmd_map_suggest), ("eval", _cmd_map_eval)):
        cmd = map_sub.add_parser(name)
        cmd.add_argument("--claims", required=True, help="claims text file")
        cmd.add_argument(
            "--drawings", required=True, nargs="+", help="drawing text files"
        )
        cmd.add_argument("--threshold", type=float, default=0.1)
        cmd.add_argument("--k", type=int, default=5)
        if name == "suggest":
            cmd.add_argument("--json", action="store_true", help="emit JSON")
        else:
            cmd.add_argument("--gold", required=True, help="gold mapping JSON file")
        cmd.set_defaults(func=func)

    dataset = sub.add_parser("dataset", help="training corpus operations")
    dataset_sub = dataset.add_subparsers(dest="subcommand", required=True)
    dataset_build = dataset_sub.add_parser("build", help="build a JSONL tuple corpus")
    dataset_build.add_argument(
        "--in", dest="input_dir", required=True,
        help="directory of patent .xml/.json files",
    )
    dataset_build.add_argument(
        "--out", dest="output", required=True, help="output JSONL path"
    )
    dataset_build.add_argument("--max-tokens", type=int, default=512)
    dataset_build.add_argument("--threshold", type=float, default=0.1)
    dataset_build.add_argument("--top-k", type=int, default=5)
    dataset_build.add_argument("--cpc", dest="cpc_filter", default="G06F")
    dataset_build.add_argument("--parallelism", type=int, default=1)
    dataset_build.add_argument("--stats", help="stats sidecar path")
    dataset_build.set_defaults(func=_cmd_dataset_build)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--config", help="JSON config file")
    serve.add_argument("--data-dir", help="override the project data directory")
    serve.add_argument(
        "--frontend-dir", help="serve a built UI from this directory at /ui"
    )
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PatentforgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
