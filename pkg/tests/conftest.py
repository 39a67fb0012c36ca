"""Shared fixtures and builders."""

from __future__ import annotations

from typing import Iterable, Mapping

import pytest

from tsna.graph import Interaction, InteractionStore, Kind, Snapshot, TimeWindow, snapshot


def make_store(events: Iterable[tuple]) -> InteractionStore:
    """Store from (src, dst, timestamp) or (src, dst, timestamp, kind) tuples."""
    store = InteractionStore()
    records = []
    for event in events:
        src, dst, ts = event[:3]
        kind = event[3] if len(event) > 3 else Kind.CALL
        records.append(Interaction(src, dst, ts, kind))
    store.add_interactions(records)
    return store


def snap_from_edges(
    edges: Mapping[tuple[str, str], int], extra_nodes: Iterable[str] = ()
) -> Snapshot:
    """Snapshot with the given edge weights; extra nodes appear isolated."""
    records = []
    ts = 0
    for (src, dst), weight in edges.items():
        for _ in range(weight):
            records.append(Interaction(src, dst, ts, Kind.CALL))
            ts += 1
    for node in extra_nodes:
        records.append(Interaction(node, node, ts, Kind.CALL))
        ts += 1
    store = InteractionStore()
    store.add_interactions(records)
    return snapshot(store, TimeWindow(0, max(ts, 1)))


@pytest.fixture
def path_graph() -> Snapshot:
    """a -> b -> c"""
    return snap_from_edges({("a", "b"): 1, ("b", "c"): 1})
