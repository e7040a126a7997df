"""The co-offending network: construction, neighborhoods and groups."""
from __future__ import annotations

import collections
import itertools
import logging
from typing import Deque, Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

import attr

from vipar.sansio.constants import MAX_NEIGHBORHOOD_DEGREE
from vipar.sansio.events import EventRecord, Person
from vipar.sansio.exceptions import NetworkError, UnknownPersonError
from vipar.sansio.types import EventType, GroupIdT, ParticipationIndexT, PersonIdT

logger = logging.getLogger(__name__)

__all__ = (
    "CoOffendingGraph",
    "Group",
    "SourceSummary",
    "build_graph",
    "components",
    "group_index",
    "k_neighborhood",
    "source_summary",
)


@attr.define(kw_only=True)
class CoOffendingGraph:
    """An undirected multigraph of persons.

    Edge weights count the distinct events a pair shares. Every person is a node, so
    someone who only ever appears alone is an isolated node with an event count.
    """

    __hash__ = None

    adjacency: Dict[PersonIdT, Dict[PersonIdT, int]] = attr.Factory(dict)
    """``adjacency[u][v]`` is the number of distinct events shared by ``u`` and ``v``."""
    event_count: Dict[PersonIdT, int] = attr.Factory(dict)
    """The number of distinct events each person appears in."""

    @property
    def nodes(self) -> List[PersonIdT]:
        return sorted(self.adjacency)

    @property
    def edges(self) -> Dict[Tuple[PersonIdT, PersonIdT], int]:
        return {
            (u, v): count
            for u, nbrs in self.adjacency.items()
            for v, count in nbrs.items()
            if u < v
        }

    def __len__(self) -> int:
        return len(self.adjacency)

    def __contains__(self, person: PersonIdT) -> bool:
        return person in self.adjacency

    def add_node(self, person: PersonIdT):
        self.adjacency.setdefault(person, {})
        self.event_count.setdefault(person, 0)

    def add_event(self, participants: Iterable[PersonIdT]):
        """Record one event: +1 event for each distinct participant, +1 per pair."""
        present = sorted(set(participants))
        for person in present:
            self.add_node(person)
            self.event_count[person] += 1
        adj = self.adjacency
        for u, v in itertools.combinations(present, 2):
            adj[u][v] = adj[u].get(v, 0) + 1
            adj[v][u] = adj[v].get(u, 0) + 1

    def neighbors(self, person: PersonIdT) -> Mapping[PersonIdT, int]:
        try:
            return self.adjacency[person]
        except KeyError:
            raise UnknownPersonError(f"person {person!r} is not in the graph") from None

    def degree(self, person: PersonIdT) -> int:
        """Degree centrality: the number of distinct immediate neighbors."""
        return len(self.neighbors(person))


@attr.frozen(kw_only=True)
class Group:
    """A co-offending group: one connected component of the network."""

    group_id: GroupIdT
    """The lowest member person id."""
    members: FrozenSet[PersonIdT]


def build_graph(
    events: Iterable[EventRecord], persons: Sequence[Person]
) -> CoOffendingGraph:
    """Build the co-offending network.

    Every event with two or more distinct participants adds one to each participant
    pair's edge count; single-participant events only count towards the person's
    event total.
    """
    ids = {p.key: p.person_id for p in persons}
    graph = CoOffendingGraph()
    for person in persons:
        graph.add_node(person.person_id)
    for event in events:
        graph.add_event(ids[p.key] for p in event.participants)
    logger.info(
        "Built co-offending network: %d persons, %d relationships.",
        len(graph),
        sum(len(n) for n in graph.adjacency.values()) // 2,
    )
    return graph


def k_neighborhood(
    graph: CoOffendingGraph, person: PersonIdT, k: int
) -> set[PersonIdT]:
    """All persons within ``k`` hops of ``person``, excluding ``person`` itself.

    Args:
        graph: The co-offending network.
        person: The person whose neighborhood is wanted.
        k: The degree of the network to search, from 1 to 3.

    Raises:
        UnknownPersonError: ``person`` is not in the graph.
        NetworkError: ``k`` is outside 1..3.
    """
    if not 1 <= k <= MAX_NEIGHBORHOOD_DEGREE:
        raise NetworkError(
            f"Neighborhood degree must be between 1 and {MAX_NEIGHBORHOOD_DEGREE}, "
            f"got {k!r}."
        )
    graph.neighbors(person)
    return set(bfs_depths(graph, person, k)) - {person}


def bfs_depths(
    graph: CoOffendingGraph, source: PersonIdT, k: int
) -> Dict[PersonIdT, int]:
    depth = {source: 0}
    queue: Deque[PersonIdT] = collections.deque((source,))
    adj = graph.adjacency
    while queue:
        node = queue.popleft()
        d = depth[node]
        if d == k:
            continue
        for nbr in adj[node]:
            if nbr not in depth:
                depth[nbr] = d + 1
                queue.append(nbr)
    return depth


class _UnionFind:
    """Disjoint sets over person ids with path compression and union by size."""

    __slots__ = ("parents", "sizes")

    def __init__(self, elements: Iterable[PersonIdT]):
        self.parents = {e: e for e in elements}
        self.sizes = {e: 1 for e in self.parents}

    def find(self, elem: PersonIdT) -> PersonIdT:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        while elem != root:
            self.parents[elem], elem = root, self.parents[elem]
        return root

    def union(self, a: PersonIdT, b: PersonIdT):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.sizes[ra] < self.sizes[rb]:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.sizes[ra] += self.sizes[rb]


def components(graph: CoOffendingGraph) -> List[Group]:
    """Partition the network into groups, ordered by group id."""
    sets = _UnionFind(graph.adjacency)
    for (u, v) in graph.edges:
        sets.union(u, v)
    members: Dict[PersonIdT, list] = collections.defaultdict(list)
    for node in graph.adjacency:
        members[sets.find(node)].append(node)
    groups = sorted(
        (Group(group_id=min(m), members=frozenset(m)) for m in members.values()),
        key=lambda g: g.group_id,
    )
    logger.info("Found %d co-offending groups.", len(groups))
    return groups


def group_index(groups: Iterable[Group]) -> Dict[PersonIdT, GroupIdT]:
    return {pid: g.group_id for g in groups for pid in g.members}


@attr.frozen(kw_only=True)
class SourceSummary:
    source: str
    individuals: int
    relationships: int

    @property
    def average_relationships(self) -> float:
        return self.relationships / self.individuals if self.individuals else 0.0


def source_summary(
    events: Iterable[EventRecord], index: ParticipationIndexT
) -> List[SourceSummary]:
    """Individuals and relationships contributed by each dataset, plus a total row.

    A relationship is a distinct pair of persons linked by at least one event.
    """
    people: Dict[str, set] = collections.defaultdict(set)
    pairs: Dict[str, set] = collections.defaultdict(set)
    for event in events:
        ids = sorted({pid for pid, _ in index[event.event_id]})
        for source in (event.event_type.value, "total"):
            people[source].update(ids)
            pairs[source].update(itertools.combinations(ids, 2))
    order = [t.value for t in EventType if t.value in people] + ["total"]
    return [
        SourceSummary(
            source=s,
            individuals=len(people[s]),
            relationships=len(pairs[s]),
        )
        for s in order
    ]
