"""Command-line entry point: ``nsrdf <subcommand> ...``.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 equivalence violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from .bench import EquivalenceViolation, run_bench
from .engine import evaluate, format_json, format_tsv, load
from .generator import generate_social
from .metadata import StatsError, build_set_trie, read_stats
from .pipeline import DEFAULT_DELTA, stats_path_for, summarize, write_summary
from .rdf import NTriplesError, TermError, read_ntriples, write_ntriples
from .rewriter import RewriteConfig, RewriteError, rewrite_text
from .sparql import QueryParseError, parse_query
from .summarizer import DEFAULT_PIVOT_PREDICATE, CatalogError, read_catalog

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_EQUIVALENCE = 0, 1, 2, 3

log = logging.getLogger("nsrdf")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_text(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_config(path) -> dict:
    if path is None:
        return {}
    data = json.loads(_read_text(path))
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


def cmd_summarize(args) -> int:
    t0 = time.perf_counter()
    data = read_ntriples(args.input)
    summary = summarize(data, args.max_entries, args.delta, args.pivot_predicate)
    write_summary(summary, args.out_ns, args.out_catalog, args.out_stats)
    log.info("%d triples, %d pivots, %d catalog entries in %.2fs", len(data), summary.catalog.total_pivots,
             len(summary.catalog), time.perf_counter() - t0)
    return EXIT_OK


def cmd_rewrite(args) -> int:
    catalog, header = read_catalog(args.catalog)
    stats = read_stats(args.stats or stats_path_for(args.catalog))
    raw = _load_config(args.config)
    raw.setdefault("pivotPredicate", header.get("pivotPredicate", DEFAULT_PIVOT_PREDICATE))
    if args.beta is not None:
        raw["beta"] = args.beta
    if args.max_union is not None:
        raw["maxUnionLabels"] = args.max_union
    config = RewriteConfig.from_json(raw)
    text, report = rewrite_text(_read_text(args.query), catalog, build_set_trie(catalog), stats, config)
    _write_text(args.out, text)
    if args.report:
        _write_text(args.report, report.dumps())
    return EXIT_OK


def cmd_exec(args) -> int:
    data = read_ntriples(args.data)
    ns = read_ntriples(args.ns) if args.ns else None
    store = load(data, ns, args.pivot_predicate)
    query = parse_query(_read_text(args.query))
    rows, stats = evaluate(store, query)
    out = format_tsv(store, query, rows) if args.format == "tsv" else format_json(store, query, rows)
    if args.out:
        _write_text(args.out, out)
    else:
        sys.stdout.write(out)
    if args.stats_out:
        _write_text(args.stats_out, json.dumps(stats.to_json(), indent=2) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    raw = _load_config(args.config)
    config = RewriteConfig.from_json(raw)
    delta = config.delta if config.delta is not None else raw.get("delta", DEFAULT_DELTA)
    max_entries = raw.get("maxEntries")
    env = {"configFile": args.config, "maxEntries": max_entries}
    if args.data:
        data = read_ntriples(args.data)
        env.update(dataset=args.data, seed=None, scale=None)
    else:
        data = generate_social(args.seed, args.users)
        env.update(dataset="gen-social", seed=args.seed, scale=args.users)
    summary = summarize(data, max_entries, delta, config.pivot_predicate)
    store = load(data, summary.ns_triples, config.pivot_predicate)
    names = sorted(f for f in os.listdir(args.queries) if f.endswith((".rq", ".sparql")))
    if not names:
        raise UsageError(f"no .rq files in {args.queries}")
    queries = [(n, _read_text(os.path.join(args.queries, n))) for n in names]
    report = run_bench(store, summary, queries, config, repeats=args.repeats, environment=env)
    _write_text(args.out, report.dumps())
    return EXIT_OK


def cmd_gen_social(args) -> int:
    write_ntriples(generate_social(args.seed, args.users), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsrdf", description="Neighborhood-summary query rewriting for RDF BGP queries.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("summarize", help="build NS-Triples, catalog and statistics")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-ns", required=True)
    p.add_argument("--out-catalog", required=True)
    p.add_argument("--out-stats", help="statistics file (default: stats.jsonl beside the catalog)")
    p.add_argument("--max-entries", type=int)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--pivot-predicate", default=DEFAULT_PIVOT_PREDICATE)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("rewrite", help="inject NS-Patterns into a query")
    p.add_argument("--catalog", required=True)
    p.add_argument("--stats", help="statistics file (default: stats.jsonl beside the catalog)")
    p.add_argument("--query", required=True)
    p.add_argument("--config")
    p.add_argument("--beta", type=float)
    p.add_argument("--max-union", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("exec", help="evaluate a query on the embedded engine")
    p.add_argument("--data", required=True)
    p.add_argument("--ns")
    p.add_argument("--query", required=True)
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--stats-out")
    p.add_argument("--out", help="result file (default: stdout)")
    p.add_argument("--pivot-predicate")
    p.set_defaults(func=cmd_exec)

    p = sub.add_parser("bench", help="compare original and rewritten queries")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data")
    src.add_argument("--seed", type=int, help="generate gen-social data instead of reading --data")
    p.add_argument("--users", type=int, default=2000)
    p.add_argument("--queries", required=True)
    p.add_argument("--config")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-social", help="write a synthetic social graph")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_social)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except EquivalenceViolation as exc:
        print(f"nsrdf: {exc}\n{exc.dump()}", file=sys.stderr)
        return EXIT_EQUIVALENCE
    except (NTriplesError, QueryParseError, CatalogError, StatsError, TermError, json.JSONDecodeError) as exc:
        print(f"nsrdf: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, RewriteError, ValueError, OSError) as exc:
        print(f"nsrdf: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
