"""Dominator and postdominator sets via the classic intersection fixpoint.

Works on plain successor mappings so both the fact extractor and tests can
feed it arbitrary graphs.  Results are reflexive and cover only nodes
reachable from the entry; for postdominators, only nodes that can reach
some exit.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Mapping, TypeVar

N = TypeVar("N", bound=Hashable)


def reachable_nodes(successors: Mapping[N, Iterable[N]], entry: N) -> list[N]:
    """Nodes reachable from entry, in a deterministic discovery order."""
    seen = {entry}
    order = [entry]
    frontier = [entry]
    while frontier:
        node = frontier.pop()
        for succ in sorted(successors.get(node, ()), key=repr):
            if succ not in seen:
                seen.add(succ)
                order.append(succ)
                frontier.append(succ)
    return order


def compute_dominators(
    successors: Mapping[N, Iterable[N]], entry: N
) -> dict[N, set[N]]:
    """Map each reachable node to the set of nodes that dominate it.

    Every node dominates itself.  Unreachable nodes are absent from the
    result entirely.
    """
    order = reachable_nodes(successors, entry)
    node_set = set(order)
    preds: dict[N, set[N]] = {n: set() for n in order}
    for node in order:
        for succ in successors.get(node, ()):
            if succ in node_set:
                preds[succ].add(node)

    dom: dict[N, set[N]] = {n: node_set.copy() for n in order}
    dom[entry] = {entry}
    changed = True
    while changed:
        changed = False
        for node in order:
            if node == entry:
                continue
            incoming = [dom[p] for p in preds[node]]
            if incoming:
                new = set.intersection(*incoming)
            else:
                new = set()
            new.add(node)
            if new != dom[node]:
                dom[node] = new
                changed = True
    return dom


def reverse_graph(
    successors: Mapping[N, Iterable[N]], nodes: Iterable[N]
) -> dict[N, set[N]]:
    reversed_succ: dict[N, set[N]] = {n: set() for n in nodes}
    for node in reversed_succ:
        for succ in successors.get(node, ()):
            if succ in reversed_succ:
                reversed_succ[succ].add(node)
    return reversed_succ


_VIRTUAL_EXIT = "__exit__"


def compute_postdominators(
    successors: Mapping[N, Iterable[N]], nodes: Iterable[N]
) -> dict[N, set[N]]:
    """Map each node to the nodes that postdominate it, joining every
    node without successors to one virtual exit first.  Nodes that cannot
    reach any exit are absent."""
    node_list = list(nodes)
    node_set = set(node_list)
    assert _VIRTUAL_EXIT not in node_set
    reversed_succ = reverse_graph(successors, node_list)
    exits = [
        n
        for n in node_list
        if not any(s in node_set for s in successors.get(n, ()))
    ]
    graph: dict[Hashable, set[Hashable]] = dict(reversed_succ)
    graph[_VIRTUAL_EXIT] = set(exits)
    dom = compute_dominators(graph, _VIRTUAL_EXIT)
    result: dict[N, set[N]] = {}
    for node, dominators in dom.items():
        if node == _VIRTUAL_EXIT:
            continue
        result[node] = {d for d in dominators if d != _VIRTUAL_EXIT}
    return result
