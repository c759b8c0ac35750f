"""Source inputs from a state graph: one per root-to-leaf path of its depth-first tree."""

from __future__ import annotations

from typing import Optional

from ..model import InputSequence, Provenance
from .crawler import Edge, StateGraph


def dfs_tree(graph: StateGraph) -> dict[str, list[Edge]]:
    """Tree edges per state. Children follow edge insertion order; an edge to a
    state already visited (back, cross or self edge) is not part of the tree."""
    children: dict[str, list[Edge]] = {s.id: [] for s in graph.states}
    out: dict[str, list[Edge]] = {s.id: [] for s in graph.states}
    for e in graph.edges:
        out[e.source].append(e)
    visited = {graph.root}
    stack = [(graph.root, iter(out[graph.root]))]
    while stack:
        sid, it = stack[-1]
        for e in it:
            if e.target not in visited:
                visited.add(e.target)
                children[sid].append(e)
                stack.append((e.target, iter(out[e.target])))
                break
        else:
            stack.pop()
    return children


def derive_inputs(graph: StateGraph, prefix: Optional[str] = None) -> list[InputSequence]:
    prefix = prefix or graph.owner
    children = dfs_tree(graph)
    seqs: list[InputSequence] = []

    def visit(sid: str, path: list[Edge]) -> None:
        if not children[sid]:
            if path:
                seqs.append(
                    InputSequence(f"{prefix}-{len(seqs) + 1:03d}", tuple(e.action for e in path), Provenance.CRAWLED)
                )
            return
        for e in children[sid]:
            visit(e.target, path + [e])

    visit(graph.root, [])
    return seqs


def path_pages(graph: StateGraph, seq: InputSequence) -> list:
    """Pages recorded while crawling the edges that make up ``seq``."""
    children = dfs_tree(graph)
    pages = []
    sid = graph.root
    for action in seq.actions:
        edge = next(e for e in children[sid] if e.action == action)
        pages.append(edge.page)
        sid = edge.target
    return pages
