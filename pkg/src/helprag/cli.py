"""Command-line surface: index, query, bench, and gen-synthetic subcommands.

Exit codes: 0 on success, 2 for configuration or input errors, 3 when an
external service (embeddings or chat) fails. All defaults match the engine's
standard configuration (hops=2, seeds=3, beam=50, quota=4, context=5).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .encoding import encoder_from_spec
from .errors import (
    EncoderFailure,
    EncoderMismatch,
    HelpRagError,
    InvalidParams,
    ServiceUnreachable,
)
from .evaluation import gen_synthetic, load_qa, run_benchmark
from .expansion import ExpansionConfig
from .ingestion import build_and_embed, extract_triples, load_corpus, load_index, save_index
from .localization import HybridConfig, retrieve_result
from .services import ServiceConfig

QUERY_SCHEMA = "helprag-query/1"


def _add_encoder_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--encoder",
        default="hash",
        help="encoder backend: hash | oracle:<vectors.json> | remote (default: hash)",
    )


def _add_retrieval_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--hops", type=int, default=2, help="expansion hops (default 2)")
    parser.add_argument("--seeds", type=int, default=3, help="initial seed triple count (default 3)")
    parser.add_argument("--beam", type=int, default=50, help="beam width per hop (default 50)")
    parser.add_argument("--quota", type=int, default=4, help="path-channel context quota (default 4)")
    parser.add_argument("--topk", type=int, default=5, help="total context size (default 5)")


def _expansion_from(args: argparse.Namespace) -> ExpansionConfig:
    return ExpansionConfig(hops=args.hops, seed_size=args.seeds, beam_size=args.beam)


def _hybrid_from(args: argparse.Namespace) -> HybridConfig:
    return HybridConfig(quota=args.quota, context_size=args.topk)


def cmd_index(args: argparse.Namespace) -> int:
    corpus_path = Path(args.corpus)
    if not corpus_path.exists():
        print(f"error: corpus file not found: {corpus_path}", file=sys.stderr)
        return 2
    encoder = encoder_from_spec(args.encoder)
    records = load_corpus(corpus_path)
    if args.extract:
        service = ServiceConfig.from_env("HELP_LLM")
        records = extract_triples(records, service)
    elif any(r.triples is None for r in records):
        missing = sum(r.triples is None for r in records)
        print(
            f"error: {missing} record(s) carry no triples; pass --extract or precompute them",
            file=sys.stderr,
        )
        return 2
    graph = build_and_embed(records, encoder)
    manifest = save_index(args.out, graph)
    print(
        f"wrote index bundle to {args.out}: "
        f"{manifest['counts']['passages']} passages, {manifest['counts']['triplets']} triplets, "
        f"encoder {manifest['encoder_id']}, dim {manifest['dim']}"
    )
    return 0


def _result_to_dict(result) -> dict:
    return {
        "schema": QUERY_SCHEMA,
        "query": result.query,
        "hypernodes": [
            {
                "triplets": [[t.head, t.relation, t.tail] for t in sorted(node.triplets)],
                "distance": node.query_distance,
            }
            for node in result.hypernodes
        ],
        "passages": [
            {
                "id": p.id,
                "score": p.score,
                "channel": p.channel,
                "supporting_triplets": [[t.head, t.relation, t.tail] for t in p.supporting_triplets],
            }
            for p in result.passages
        ],
        "timings_ms": result.timings_ms,
    }


def cmd_query(args: argparse.Namespace) -> int:
    encoder = encoder_from_spec(args.encoder)
    graph = load_index(args.index)
    if graph.embeddings.encoder_id != encoder.encoder_id:
        raise EncoderMismatch(
            f"bundle was embedded with {graph.embeddings.encoder_id!r}, got {encoder.encoder_id!r}"
        )
    result = retrieve_result(graph, encoder, args.question, _expansion_from(args), _hybrid_from(args))

    if args.format == "json":
        print(json.dumps(_result_to_dict(result), indent=2, sort_keys=True))
        return 0

    print(f"query: {result.query}")
    print(f"paths ({len(result.hypernodes)}):")
    for node in result.hypernodes:
        print(f"  dist={node.query_distance:.6f}  {node.serialized}")
    print("passages:")
    for rank, p in enumerate(result.passages, start=1):
        support = f", {len(p.supporting_triplets)} supporting triplet(s)" if p.supporting_triplets else ""
        print(f"  {rank}. {p.id}  score={p.score:.6f}  [{p.channel}]{support}")
    timings = ", ".join(f"{k}={v:.1f}ms" for k, v in result.timings_ms.items())
    print(f"timings: {timings}")
    return 0


def _parse_values(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _parse_grid(spec: str) -> dict[str, list[int]]:
    """Parse 'seed=1..5,beam=30,50,70' into {'seed': [1..5], 'beam': [30, 50, 70]}."""
    groups: dict[str, list[int]] = {}
    current: str | None = None
    for segment in spec.split(","):
        if "=" in segment:
            key, value = segment.split("=", 1)
            current = key.strip()
            if current in groups:
                raise InvalidParams(f"duplicate grid parameter {current!r}")
            groups[current] = _parse_values(value)
        elif current is not None:
            groups[current].extend(_parse_values(segment))
        else:
            raise InvalidParams(f"bad sweep/grid spec {spec!r}")
    if not groups:
        raise InvalidParams(f"bad sweep/grid spec {spec!r}")
    return groups

_SWEEPABLE = {"hops", "quota", "seed", "beam"}


def _configs_for_point(args: argparse.Namespace, point: dict[str, int]):
    hops = point.get("hops", args.hops)
    seeds = point.get("seed", args.seeds)
    beam = point.get("beam", args.beam)
    quota = point.get("quota", args.quota)
    expansion = ExpansionConfig(hops=hops, seed_size=seeds, beam_size=beam)
    hybrid = HybridConfig(quota=quota, context_size=args.topk)
    return expansion, hybrid


def cmd_bench(args: argparse.Namespace) -> int:
    encoder = encoder_from_spec(args.encoder)
    qa_records = load_qa(args.qa)
    generation = ServiceConfig.from_env("HELP_LLM") if args.generate else None

    if args.sweep and args.grid:
        raise InvalidParams("use --sweep or --grid, not both")
    if args.sweep:
        groups = _parse_grid(args.sweep)
        if len(groups) != 1:
            raise InvalidParams("--sweep takes exactly one parameter, e.g. quota=0..5")
    elif args.grid:
        groups = _parse_grid(args.grid)
    else:
        groups = {}

    unknown = set(groups) - _SWEEPABLE
    if unknown:
        raise InvalidParams(f"cannot sweep over {sorted(unknown)}; choose from {sorted(_SWEEPABLE)}")

    # cartesian product over swept parameters; a single empty point when none
    points: list[dict[str, int]] = [{}]
    for key, values in groups.items():
        points = [dict(p, **{key: v}) for p in points for v in values]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for point in points:
        expansion, hybrid = _configs_for_point(args, point)
        report = run_benchmark(args.index, qa_records, expansion, hybrid, encoder, generation)
        suffix = "_".join(f"{k}{v}" for k, v in sorted(point.items())) or "single"
        path = out_dir / f"report_{suffix}.json"
        report.write(path)
        agg = report.aggregates
        extras = f" mean_f1={agg['mean_f1']:.4f} em={agg['em_rate']:.4f}" if "mean_f1" in agg else ""
        label = ", ".join(f"{k}={v}" for k, v in sorted(point.items())) or "defaults"
        print(
            f"[{label}] recall@{agg['k']}={agg['recall_at_k']:.4f} "
            f"mean_latency={agg['mean_latency_s']:.4f}s{extras} -> {path}"
        )
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    fixture = gen_synthetic(args.chains, args.hops, args.distractors, args.seed)
    fixture.write(args.out)
    print(
        f"wrote synthetic fixture to {args.out}: "
        f"{len(fixture.corpus)} passages, {len(fixture.qa)} questions, "
        f"oracle dim {fixture.oracle_table['dim']}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helprag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist an index bundle from a JSONL corpus")
    p.add_argument("--corpus", required=True, help="input corpus (JSONL with id/text/triples)")
    p.add_argument("--out", required=True, help="output bundle directory")
    p.add_argument("--extract", action="store_true", help="extract missing triples via HELP_LLM_* service")
    _add_encoder_flag(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="retrieve context passages for one question")
    p.add_argument("--index", required=True, help="index bundle directory")
    p.add_argument("--question", required=True)
    p.add_argument("--format", choices=("json", "text"), default="json")
    _add_encoder_flag(p)
    _add_retrieval_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run retrieval benchmark over a QA set")
    p.add_argument("--index", required=True, help="index bundle directory")
    p.add_argument("--qa", required=True, help="QA set (JSONL)")
    p.add_argument("--out", default="bench_reports", help="directory for report JSON files")
    p.add_argument("--sweep", help="one-parameter sweep, e.g. quota=0..5 or hops=1..4")
    p.add_argument("--grid", help="multi-parameter grid, e.g. seed=1..5,beam=30,50,70,100")
    p.add_argument("--generate", action="store_true", help="generate answers via HELP_LLM_* service")
    _add_encoder_flag(p)
    _add_retrieval_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-synthetic", help="emit a deterministic multi-hop fixture")
    p.add_argument("--chains", type=int, default=100)
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--distractors", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output fixture directory")
    p.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EncoderFailure, ServiceUnreachable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except KeyError as exc:
        print(f"error: missing configuration: {exc}", file=sys.stderr)
        return 2
    except (HelpRagError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
