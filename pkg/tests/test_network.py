from __future__ import annotations

import collections
import itertools
import random

import networkx as nx
import pytest

from tests.factories import SNAPSHOT, event
from vipar.sansio import identity, network
from vipar.sansio.exceptions import NetworkError, UnknownPersonError
from vipar.sansio.types import EventType, Role


def random_events(seed: int, n_events: int = 200, n_people: int = 150):
    rng = random.Random(seed)
    events = []
    for i in range(n_events):
        size = rng.choice((1, 1, 2, 2, 3, 4))
        people = rng.sample(range(n_people), size)
        events.append(
            event(
                f"E{i}",
                f"2013-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}",
                *((f"P{p:04d}", Role.SUSPECT) for p in people),
            )
        )
    return events


def oracle_events(seed: int):
    """A random corpus of 100 to 1,000 people."""
    n_people = random.Random(seed).randint(100, 1_000)
    return random_events(seed, n_events=n_people * 4 // 3, n_people=n_people)


def build(events):
    persons, index = identity.resolve_persons(events, snapshot=SNAPSHOT)
    return network.build_graph(events, persons), persons, index


def as_networkx(graph: network.CoOffendingGraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(graph.nodes)
    g.add_edges_from(graph.edges)
    return g


def chain():
    events = [
        event("E1", "2014-01-01", ("A", Role.SUSPECT), ("B", Role.SUSPECT)),
        event("E2", "2014-01-02", ("B", Role.SUSPECT), ("C", Role.SUSPECT)),
        event("E3", "2014-01-03", ("C", Role.SUSPECT), ("D", Role.SUSPECT)),
    ]
    graph, persons, _ = build(events)
    ids = {p.key.full_name: p.person_id for p in persons}
    return graph, ids


def test_clique_expansion():
    graph, persons, _ = build(
        [event("E1", "2014-01-01", *((n, Role.SUSPECT) for n in "ABC"))]
    )
    assert graph.edges == {(0, 1): 1, (0, 2): 1, (1, 2): 1}
    assert graph.event_count == {0: 1, 1: 1, 2: 1}


def test_repeated_pairs_count_events():
    graph, _, _ = build(
        [
            event("E1", "2014-01-01", ("A", Role.SUSPECT), ("B", Role.SUSPECT)),
            event("E2", "2014-02-01", ("A", Role.SUSPECT), ("B", Role.VICTIM)),
            event("E3", "2014-03-01", ("A", Role.SUSPECT)),
        ]
    )
    assert graph.edges == {(0, 1): 2}
    assert graph.event_count == {0: 3, 1: 2}
    assert graph.degree(0) == 1


@pytest.mark.parametrize(argnames="seed", argvalues=range(100))
def test_build_graph_matches_pair_enumeration(seed):
    events = oracle_events(seed)
    graph, persons, _ = build(events)
    ids = {p.key: p.person_id for p in persons}
    expected = collections.Counter()
    for e in events:
        people = sorted({ids[p.key] for p in e.participants})
        for u, v in itertools.combinations(people, 2):
            expected[(u, v)] += 1
    assert graph.edges == dict(expected)
    assert set(graph.nodes) == set(ids.values())


def keyed(graph, persons):
    keys = {p.person_id: p.key for p in persons}
    edges = {frozenset((keys[u], keys[v])): n for (u, v), n in graph.edges.items()}
    counts = {keys[pid]: n for pid, n in graph.event_count.items()}
    return edges, counts


@pytest.mark.parametrize(argnames="seed", argvalues=range(5))
def test_build_graph_is_monotone(seed):
    events = random_events(seed)
    before, before_persons, _ = build(events[:-20])
    after, after_persons, _ = build(events)
    edges, counts = keyed(before, before_persons)
    later_edges, later_counts = keyed(after, after_persons)
    for pair, n in edges.items():
        assert later_edges.get(pair, 0) >= n
    for person, n in counts.items():
        assert later_counts[person] >= n


def test_degree_is_bounded_by_events():
    events = random_events(4)
    graph, _, _ = build(events)
    widest = max(len(e.participants) for e in events)
    for pid in graph.nodes:
        assert graph.degree(pid) <= graph.event_count[pid] * (widest - 1)


def test_k_neighborhood_survives_relabeling():
    events = random_events(6)
    originals = sorted({p.key.full_name for e in events for p in e.participants})
    shuffled = originals[:]
    random.Random(6).shuffle(shuffled)
    rename = dict(zip(originals, (f"Q{n}" for n in shuffled)))
    relabeled = [
        event(
            e.event_id,
            e.date.isoformat(),
            *((rename[p.key.full_name], p.role) for p in e.participants),
        )
        for e in events
    ]
    graph, persons, _ = build(events)
    other, other_persons, _ = build(relabeled)
    other_ids = {p.key.full_name: p.person_id for p in other_persons}
    assert any(other_ids[rename[p.key.full_name]] != p.person_id for p in persons)
    names = {p.person_id: p.key.full_name for p in persons}
    other_names = {p.person_id: p.key.full_name for p in other_persons}
    for person in persons:
        twin = other_ids[rename[person.key.full_name]]
        for k in (1, 2, 3):
            found = network.k_neighborhood(graph, person.person_id, k)
            mapped = {
                other_names[n] for n in network.k_neighborhood(other, twin, k)
            }
            assert mapped == {rename[names[n]] for n in found}


@pytest.mark.parametrize(argnames="k,expected", argvalues=[(1, "B"), (2, "BC"), (3, "BCD")])
def test_k_neighborhood_chain(k, expected):
    graph, ids = chain()
    assert network.k_neighborhood(graph, ids["A"], k) == {ids[n] for n in expected}


def test_k_neighborhood_errors():
    graph, ids = chain()
    with pytest.raises(UnknownPersonError):
        network.k_neighborhood(graph, 99, 1)
    with pytest.raises(NetworkError):
        network.k_neighborhood(graph, ids["A"], 4)


@pytest.mark.parametrize(argnames="seed", argvalues=range(100))
def test_k_neighborhood_matches_bfs(seed):
    graph, _, _ = build(oracle_events(seed))
    g = as_networkx(graph)
    for person in graph.nodes[::11]:
        nested = []
        for k in (1, 2, 3):
            expected = set(nx.single_source_shortest_path_length(g, person, cutoff=k))
            found = network.k_neighborhood(graph, person, k)
            assert found == expected - {person}
            nested.append(found)
        assert nested[0] <= nested[1] <= nested[2]


def test_components_examples():
    graph, _, _ = build(
        [
            event("E1", "2014-01-01", ("A", Role.SUSPECT), ("B", Role.SUSPECT)),
            event("E2", "2014-01-01", ("C", Role.SUSPECT), ("D", Role.SUSPECT)),
        ]
    )
    groups = network.components(graph)
    assert [set(g.members) for g in groups] == [{0, 1}, {2, 3}]
    assert [g.group_id for g in groups] == [0, 2]

    isolated, _, _ = build(
        [event(f"E{n}", "2014-01-01", (n, Role.SUSPECT)) for n in "XYZ"]
    )
    assert [set(g.members) for g in network.components(isolated)] == [{0}, {1}, {2}]


@pytest.mark.parametrize(argnames="seed", argvalues=range(100))
def test_components_match_bfs_labeling(seed):
    graph, _, _ = build(oracle_events(seed))
    expected = sorted(
        (min(c), frozenset(c)) for c in nx.connected_components(as_networkx(graph))
    )
    groups = network.components(graph)
    assert [(g.group_id, g.members) for g in groups] == expected


def test_components_independent_of_event_order():
    events = random_events(5)
    shuffled = list(reversed(events))
    first, _, _ = build(events)
    second, _, _ = build(shuffled)
    assert network.components(first) == network.components(second)


def test_source_summary():
    events = [
        event("E1", "2014-01-01", ("A", Role.SUSPECT), ("B", Role.SUSPECT)),
        event(
            "E2",
            "2014-01-02",
            ("A", Role.ARRESTEE),
            ("B", Role.ARRESTEE),
            ("C", Role.ARRESTEE),
            event_type=EventType.ARREST,
        ),
    ]
    persons, index = identity.resolve_persons(events, snapshot=SNAPSHOT)
    summary = {s.source: s for s in network.source_summary(events, index)}
    assert list(summary) == ["arrest", "offense", "total"]
    assert (summary["offense"].individuals, summary["offense"].relationships) == (2, 1)
    assert (summary["arrest"].individuals, summary["arrest"].relationships) == (3, 3)
    assert (summary["total"].individuals, summary["total"].relationships) == (3, 3)
    assert summary["total"].average_relationships == 1.0
