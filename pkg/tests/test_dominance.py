from __future__ import annotations

import random

from hypothesis import given, settings, strategies as st

from evmsleuth.dominance import (
    compute_dominators,
    compute_postdominators,
    reachable_nodes,
)


def oracle_dominators(successors, entry):
    """Brute force: a node d dominates n when every simple path from the
    entry to n passes through d.  Any walk to n contains a simple path to
    n over a subset of its nodes, so checking simple paths suffices."""
    order = reachable_nodes(successors, entry)
    result = {entry: {entry}}
    for target in order:
        if target == entry:
            continue
        meet: set | None = None

        def dfs(node, visited):
            nonlocal meet
            if node == target:
                meet = set(visited) if meet is None else meet & visited
                return
            for succ in successors.get(node, ()):
                if succ not in visited:
                    dfs(succ, visited | {succ})

        dfs(entry, {entry})
        assert meet is not None
        result[target] = meet
    return result


def test_diamond() -> None:
    graph = {0: {1, 2}, 1: {3}, 2: {3}, 3: set()}
    dom = compute_dominators(graph, 0)
    assert dom == {0: {0}, 1: {0, 1}, 2: {0, 2}, 3: {0, 3}}


def test_chain_accumulates() -> None:
    graph = {0: {1}, 1: {2}, 2: set()}
    dom = compute_dominators(graph, 0)
    assert dom[2] == {0, 1, 2}


def test_loop_back_edge() -> None:
    graph = {0: {1}, 1: {2}, 2: {1, 3}, 3: set()}
    dom = compute_dominators(graph, 0)
    assert dom[1] == {0, 1}
    assert dom[3] == {0, 1, 2, 3}


def test_unreachable_nodes_absent() -> None:
    graph = {0: {1}, 1: set(), 9: {0}}
    dom = compute_dominators(graph, 0)
    assert set(dom) == {0, 1}


def test_postdominators_diamond() -> None:
    graph = {0: {1, 2}, 1: {3}, 2: {3}, 3: set()}
    pdom = compute_postdominators(graph, [0, 1, 2, 3])
    assert pdom == {0: {0, 3}, 1: {1, 3}, 2: {2, 3}, 3: {3}}


def test_postdominators_skip_nodes_stuck_in_loop() -> None:
    graph = {0: {1, 2}, 1: {1}, 2: set()}
    pdom = compute_postdominators(graph, [0, 1, 2])
    assert 1 not in pdom
    assert pdom[0] == {0, 2}


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_matches_all_paths_oracle(data) -> None:
    count = data.draw(st.integers(min_value=2, max_value=8))
    nodes = list(range(count))
    edges = data.draw(
        st.sets(
            st.tuples(st.sampled_from(nodes), st.sampled_from(nodes)),
            max_size=count * 3,
        )
    )
    graph = {n: set() for n in nodes}
    for a, b in edges:
        graph[a].add(b)
    assert compute_dominators(graph, 0) == oracle_dominators(graph, 0)


def test_matches_oracle_on_seeded_batch() -> None:
    rng = random.Random(20210907)
    for _ in range(30):
        count = rng.randint(2, 12)
        graph = {n: set() for n in range(count)}
        for _ in range(rng.randint(1, count * 2)):
            graph[rng.randrange(count)].add(rng.randrange(count))
        assert compute_dominators(graph, 0) == oracle_dominators(graph, 0)
