"""Per-person network measures and per-group structural aggregates."""
from __future__ import annotations

import collections
import datetime
import logging
from typing import AbstractSet, Dict, Iterable, Mapping

import attr
import numpy as np
from scipy import sparse

from vipar.sansio import constants
from vipar.sansio.events import EventRecord
from vipar.sansio.exceptions import ConvergenceError, MeasureError
from vipar.sansio.history import is_recent
from vipar.sansio.network import CoOffendingGraph, Group, bfs_depths, group_index
from vipar.sansio.types import (
    OFFENDER_ROLES,
    VICTIM_ROLES,
    CrimeFlag,
    GroupIdT,
    ParticipationIndexT,
    PersonIdT,
)

logger = logging.getLogger(__name__)

__all__ = (
    "GroupMeasures",
    "PersonMeasures",
    "PositionalFlags",
    "compute_measures",
    "group_aggregates",
    "positional_flags",
    "reference_pagerank",
    "simplified_pagerank",
)


def simplified_pagerank(degree_centrality: int, event_count: int) -> float:
    """The network measure ``(degree / 2 + events) / 10``.

    Events weigh twice as much as immediate friends; ten is the usual ceiling on how
    many events one person accumulates, so typical values fall below one.
    """
    if degree_centrality < 0 or event_count < 0:
        raise MeasureError(
            f"Degree and event count must be non-negative, "
            f"got {degree_centrality!r} and {event_count!r}."
        )
    return (degree_centrality / 2 + event_count) / constants.PAGERANK_SCALE


def reference_pagerank(
    graph: CoOffendingGraph,
    damping: float = constants.PAGERANK_DAMPING,
    tol: float = constants.PAGERANK_TOL,
    *,
    max_iter: int = constants.PAGERANK_MAX_ITER,
) -> Dict[PersonIdT, float]:
    """Standard PageRank by power iteration, rescaled so the mean value is 1.

    Each undirected edge is a pair of arcs. Isolated persons spread their mass
    uniformly. Iteration stops once no value (on the mean-1 scale) moves by ``tol``.

    Raises:
        MeasureError: The graph is empty or ``damping`` is outside (0, 1).
        ConvergenceError: ``max_iter`` was reached first.
    """
    if not len(graph):
        raise MeasureError("PageRank needs a non-empty graph.")
    if not 0 < damping < 1:
        raise MeasureError(f"Damping must lie in (0, 1), got {damping!r}.")
    nodes = graph.nodes
    n = len(nodes)
    position = {pid: i for i, pid in enumerate(nodes)}
    rows, cols, vals = [], [], []
    out_degree = np.zeros(n)
    for u in nodes:
        i = position[u]
        nbrs = graph.adjacency[u]
        out_degree[i] = len(nbrs)
        for v in nbrs:
            rows.append(position[v])
            cols.append(i)
            vals.append(1.0 / len(nbrs))
    transition = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    dangling = out_degree == 0

    rank = np.full(n, 1.0 / n)
    residual = float("inf")
    for iteration in range(1, max_iter + 1):
        spread = rank[dangling].sum() / n
        updated = damping * (transition @ rank + spread) + (1 - damping) / n
        residual = float(np.abs(updated - rank).max()) * n
        rank = updated
        if residual < tol:
            logger.debug("PageRank converged after %d iterations.", iteration)
            break
    else:
        raise ConvergenceError(
            f"PageRank did not converge in {max_iter} iterations "
            f"(residual {residual:.3g}, tolerance {tol:.3g}).",
            residual=residual,
            iterations=max_iter,
        )
    scaled = rank * (n / rank.sum())
    return {pid: float(scaled[position[pid]]) for pid in nodes}


@attr.frozen(kw_only=True)
class PositionalFlags:
    high_pr_friend_d1: bool = False
    cirv_friend_d1: bool = False
    cirv_friend_d2: bool = False
    cirv_friend_d3: bool = False
    shooting_friend_d1: bool = False
    shooting_friend_d2: bool = False


def positional_flags(
    graph: CoOffendingGraph,
    person: PersonIdT,
    cirv_roster: AbstractSet[PersonIdT],
    shooting_roster: AbstractSet[PersonIdT],
    pr_threshold: float = constants.PR_THRESHOLD,
    *,
    pageranks: Mapping[PersonIdT, float],
) -> PositionalFlags:
    """Flags describing who a person sits close to in the network.

    Args:
        graph: The co-offending network.
        person: The person to describe.
        cirv_roster: Persons on the CIRV list.
        shooting_roster: Persons who appear in any shooting, in either role.
        pr_threshold: The simplified PageRank above which a friend is "high PageRank".
        pageranks: Simplified PageRank of every person.
    """
    graph.neighbors(person)
    depth = bfs_depths(graph, person, constants.MAX_NEIGHBORHOOD_DEGREE)
    del depth[person]
    nearest_cirv = min((d for p, d in depth.items() if p in cirv_roster), default=None)
    nearest_shooting = min(
        (d for p, d in depth.items() if p in shooting_roster), default=None
    )
    return PositionalFlags(
        high_pr_friend_d1=any(
            pageranks[p] > pr_threshold for p in graph.adjacency[person]
        ),
        cirv_friend_d1=_within(nearest_cirv, 1),
        cirv_friend_d2=_within(nearest_cirv, 2),
        cirv_friend_d3=_within(nearest_cirv, 3),
        shooting_friend_d1=_within(nearest_shooting, 1),
        shooting_friend_d2=_within(nearest_shooting, 2),
    )


def _within(distance: int | None, k: int) -> bool:
    return distance is not None and distance <= k


@attr.frozen(kw_only=True)
class PersonMeasures:
    degree_centrality: int
    event_count: int
    simplified_pagerank: float
    reference_pagerank: float | None = None
    high_pr_friend_d1: bool = False
    cirv_friend_d1: bool = False
    cirv_friend_d2: bool = False
    cirv_friend_d3: bool = False
    shooting_friend_d1: bool = False
    shooting_friend_d2: bool = False


def compute_measures(
    graph: CoOffendingGraph,
    *,
    cirv_roster: AbstractSet[PersonIdT],
    shooting_roster: AbstractSet[PersonIdT],
    pr_threshold: float = constants.PR_THRESHOLD,
    reference: bool = True,
    damping: float = constants.PAGERANK_DAMPING,
    tol: float = constants.PAGERANK_TOL,
    max_iter: int = constants.PAGERANK_MAX_ITER,
) -> Dict[PersonIdT, PersonMeasures]:
    """Every person's measures. Pure in the frozen graph and the two rosters."""
    pageranks = {
        pid: simplified_pagerank(len(graph.adjacency[pid]), graph.event_count[pid])
        for pid in graph.nodes
    }
    references: Mapping[PersonIdT, float] = (
        reference_pagerank(graph, damping, tol, max_iter=max_iter)
        if reference and len(graph)
        else {}
    )
    measures = {
        pid: PersonMeasures(
            degree_centrality=len(graph.adjacency[pid]),
            event_count=graph.event_count[pid],
            simplified_pagerank=pageranks[pid],
            reference_pagerank=references.get(pid),
            **attr.asdict(
                positional_flags(
                    graph,
                    pid,
                    cirv_roster,
                    shooting_roster,
                    pr_threshold,
                    pageranks=pageranks,
                )
            ),
        )
        for pid in graph.nodes
    }
    logger.info("Computed network measures for %d persons.", len(measures))
    return measures


@attr.frozen(kw_only=True)
class GroupMeasures:
    """Counts over the distinct events that touch a group's members.

    A violent crime is a violent event with a member offending; a violent
    victimization is a violent event with a member victimized; shootings count a
    member in either role. An event shared by several members counts once.
    """

    member_count: int
    violent_crime_count: int = 0
    violent_victimization_count: int = 0
    recent_violent_victimization_count: int = 0
    shooting_count: int = 0
    recent_shooting_count: int = 0


def group_aggregates(
    groups: Iterable[Group],
    events: Iterable[EventRecord],
    index: ParticipationIndexT,
    *,
    snapshot: datetime.date,
    recency_days: int = constants.RECENCY_DAYS,
) -> Dict[GroupIdT, GroupMeasures]:
    """Aggregate event counts per group over events dated on or before ``snapshot``."""
    groups = list(groups)
    membership = group_index(groups)
    counts: Dict[GroupIdT, collections.Counter] = {
        g.group_id: collections.Counter() for g in groups
    }
    for event in events:
        if event.date > snapshot:
            continue
        roles: Dict[GroupIdT, set] = collections.defaultdict(set)
        for pid, role in index[event.event_id]:
            roles[membership[pid]].add(role)
        recent = is_recent(event.date, snapshot=snapshot, recency_days=recency_days)
        violent = event.has(CrimeFlag.VIOLENT)
        shooting = event.has(CrimeFlag.SHOOTING)
        for gid, held in roles.items():
            tally = counts[gid]
            if violent and held & OFFENDER_ROLES:
                tally["violent_crime_count"] += 1
            if violent and held & VICTIM_ROLES:
                tally["violent_victimization_count"] += 1
                tally["recent_violent_victimization_count"] += recent
            if shooting:
                tally["shooting_count"] += 1
                tally["recent_shooting_count"] += recent
    return {
        g.group_id: GroupMeasures(member_count=len(g.members), **counts[g.group_id])
        for g in groups
    }
