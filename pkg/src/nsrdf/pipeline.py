"""Offline summarization in one call, plus the on-disk layout used by the CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from .metadata import FrequencyTable, SetTrie, build_frequent_stats, build_set_trie, write_stats
from .rdf import Dataset, gc_paused, write_ntriples
from .summarizer import (DEFAULT_PIVOT_PREDICATE, SummaryCatalog, build_catalog, build_pivot_map,
                         emit_ns_triples, refine_catalog, write_catalog)

DEFAULT_DELTA = 0.001


@dataclass
class Summary:
    catalog: SummaryCatalog
    trie: SetTrie
    stats: FrequencyTable
    ns_triples: Dataset
    pivot_predicate: str


def summarize(dataset: Dataset, max_entries: Optional[int] = None, delta: float = DEFAULT_DELTA,
              pivot_predicate: str = DEFAULT_PIVOT_PREDICATE) -> Summary:
    with gc_paused():
        pivots = build_pivot_map(dataset)
        catalog = build_catalog(pivots, len(dataset), dataset.num_predicates)
        if max_entries is not None:
            catalog = refine_catalog(catalog, max_entries)
        return Summary(catalog, build_set_trie(catalog), build_frequent_stats(dataset, delta),
                       emit_ns_triples(catalog, pivot_predicate), pivot_predicate)


def stats_path_for(catalog_path: str) -> str:
    """Statistics file that sits beside a catalog file."""
    return os.path.join(os.path.dirname(os.path.abspath(catalog_path)), "stats.jsonl")


def write_summary(summary: Summary, ns_path: str, catalog_path: str, stats_path: Optional[str] = None) -> None:
    write_ntriples(summary.ns_triples, ns_path)
    write_catalog(summary.catalog, catalog_path, summary.pivot_predicate)
    write_stats(summary.stats, stats_path or stats_path_for(catalog_path))
