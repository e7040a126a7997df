from __future__ import annotations

from typing import List

import pytest

from vipar.sansio import measures, network, synth
from vipar.sansio.engine import ViparEngine
from vipar.sansio.events import EventRecord
from vipar.sansio.identity import EventStore

engine = ViparEngine()

SIZES = {"1k": 1_000, "5k": 5_000, "10k": 10_000}


def _corpus(n_persons: int) -> List[EventRecord]:
    config = synth.SynthConfig(seed=1, n_persons=n_persons, n_groups=n_persons * 12 // 100)
    return synth.generate(config).all_events()


@pytest.fixture(scope="session")
def corpora():
    return {name: _corpus(n) for name, n in SIZES.items()}


@pytest.fixture(scope="session")
def stores(corpora):
    snapshot = engine.window_info.snapshot
    return {
        name: EventStore.build([e for e in events if e.date <= snapshot], snapshot=snapshot)
        for name, events in corpora.items()
    }


@pytest.fixture(scope="session")
def graphs(stores):
    return {
        name: network.build_graph(store.events, store.persons)
        for name, store in stores.items()
    }


@pytest.fixture(scope="session")
def benches(corpora, stores, graphs):
    targets = {}
    for size in SIZES:
        targets[f"score-{size}"] = (corpora[size], bench_score)
        targets[f"build-graph-{size}"] = (stores[size], bench_build_graph)
        targets[f"components-{size}"] = (graphs[size], bench_components)
        targets[f"reference-pagerank-{size}"] = (graphs[size], bench_reference_pagerank)
    return targets


@pytest.fixture(
    params=[
        f"{stage}-{size}"
        for stage in ("score", "build-graph", "components", "reference-pagerank")
        for size in SIZES
    ]
)
def bench_target(request, benches):
    return request.param, benches[request.param]


def bench_score(events: List[EventRecord]):
    return engine.score(events)


def bench_build_graph(store: EventStore):
    return network.build_graph(store.events, store.persons)


def bench_components(graph: network.CoOffendingGraph):
    return network.components(graph)


def bench_reference_pagerank(graph: network.CoOffendingGraph):
    return measures.reference_pagerank(graph)
