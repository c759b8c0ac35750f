"""Data collection: crawling, source-input derivation, manual scripts and the data pool."""

from ..distance import levenshtein, page_equal
from .crawler import CrawlError, Edge, State, StateGraph, candidate_actions, crawl
from .derive import derive_inputs, dfs_tree, path_pages
from .htmlparse import parse_html
from .pool import DataPool, PoolError, collect
from .script import ScriptParseError, ingest_script

__all__ = [
    "CrawlError",
    "DataPool",
    "Edge",
    "PoolError",
    "ScriptParseError",
    "State",
    "StateGraph",
    "candidate_actions",
    "collect",
    "crawl",
    "derive_inputs",
    "dfs_tree",
    "ingest_script",
    "levenshtein",
    "page_equal",
    "parse_html",
    "path_pages",
]
