import os
from collections import deque
from dataclasses import dataclass
from scripts.app_logger import get_logger
from typing import Deque, Dict, List, NamedTuple, Optional, Tuple
from scripts.settings import InputError, InvariantViolation
from scripts.core import START, Coloring, Event, Instance, NormalizedInstance, normalize

logger = get_logger(os.path.basename(__file__).replace(".py", ""))

START_SIDE: str = "⊢"
END_SIDE: str = "⊣"


class EventPair(NamedTuple):
    first: Event
    second: Event


class ChainEdge(NamedTuple):
    u: int
    v: int
    label: str
    pair: EventPair


class ChainPartition(object):
    """
    Union-find over interval ids. Intervals merged by a start/end substitution share a chain,
    and the chain is named by its lowest interval id.
    """

    def __init__(self, n: int):
        self.parent: List[int] = list(range(n))
        self.rank: List[int] = [0] * n
        self.lowest: List[int] = list(range(n))

    def find(self, x: int) -> int:
        """
        Returns the canonical representative (lowest id) of the chain holding x.
        """
        return self.lowest[self._root(x)]

    def _root(self, x: int) -> int:
        root: int = x
        while self.parent[root] != root:
            root = self.parent[root]
        # path compression
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        root_a, root_b = self._root(a), self._root(b)
        if root_a == root_b:
            return
        if self.rank[root_a] < self.rank[root_b]:
            root_a, root_b = root_b, root_a
        self.parent[root_b] = root_a
        self.lowest[root_a] = min(self.lowest[root_a], self.lowest[root_b])
        if self.rank[root_a] == self.rank[root_b]:
            self.rank[root_a] += 1

    def chains(self) -> Dict[int, List[int]]:
        result: Dict[int, List[int]] = {}
        for x in range(len(self.parent)):
            result.setdefault(self.find(x), []).append(x)
        return result


@dataclass(frozen=True)
class ConstraintGraph2:
    vertices: Tuple[int, ...]
    edges: Tuple[ChainEdge, ...]

    def adjacency(self) -> Dict[int, List[int]]:
        neighbours: Dict[int, List[int]] = {vertex: [] for vertex in self.vertices}
        for edge in self.edges:
            neighbours[edge.u].append(edge.v)
            neighbours[edge.v].append(edge.u)
        return neighbours


def pair_events(norm: NormalizedInstance) -> List[EventPair]:
    """
    Pairs events of rank 2i-1 and 2i: these are the two events enclosing every odd region.
    """
    events: Tuple[Event, ...] = norm.events
    return [EventPair(events[i], events[i + 1]) for i in range(0, len(events), 2)]


def build_constraint_graph(pairs: List[EventPair], n: Optional[int] = None) -> Tuple[ChainPartition, ConstraintGraph2]:
    """
    Builds the chain partition and the constraint graph of an event pairing.

    A pair of events of one interval leaves it unconstrained. A start and an end of two different
    intervals merge them into one chain. Two starts (two ends) must get opposite colors and become
    a ⊢-edge (⊣-edge) between their chains. Edges are resolved to chains after all merges.

    :param pairs: The output of pair_events.
    :param n: The number of intervals; taken from the pairs when omitted.
    :return: The chain partition and the constraint graph over chain representatives.
    :raises InvariantViolation: If a chain gets two incidences of one label or an edge is a loop.
    """
    size: int = len(pairs) if n is None else n
    partition: ChainPartition = ChainPartition(size)
    raw_edges: List[EventPair] = []
    for pair in pairs:
        first, second = pair
        if first.interval_id == second.interval_id:
            continue
        if first.kind != second.kind:
            partition.union(first.interval_id, second.interval_id)
        else:
            raw_edges.append(pair)
    edges: List[ChainEdge] = []
    incidences: Dict[Tuple[int, str], int] = {}
    for pair in raw_edges:
        label: str = START_SIDE if pair.first.kind == START else END_SIDE
        u, v = partition.find(pair.first.interval_id), partition.find(pair.second.interval_id)
        if u == v:
            raise InvariantViolation(f"Constraint {label} between intervals of one chain {u}")
        for vertex in (u, v):
            incidences[(vertex, label)] = incidences.get((vertex, label), 0) + 1
            if incidences[(vertex, label)] > 1:
                raise InvariantViolation(f"Chain {vertex} has two {label}-incidences")
        edges.append(ChainEdge(u, v, label, pair))
    vertices: Tuple[int, ...] = tuple(sorted(partition.chains()))
    return partition, ConstraintGraph2(vertices, tuple(edges))


def color_constraint_graph(graph: ConstraintGraph2) -> Dict[int, int]:
    """
    Properly 2-colors the constraint graph by breadth-first search, each component starting from
    its lowest chain with color 1.

    :raises InvariantViolation: On an odd cycle.
    """
    neighbours: Dict[int, List[int]] = graph.adjacency()
    colors: Dict[int, int] = {}
    for vertex in graph.vertices:
        if vertex in colors:
            continue
        colors[vertex] = 1
        queue: Deque[int] = deque([vertex])
        while queue:
            current: int = queue.popleft()
            for neighbour in neighbours[current]:
                if neighbour not in colors:
                    colors[neighbour] = 3 - colors[current]
                    queue.append(neighbour)
                elif colors[neighbour] == colors[current]:
                    raise InvariantViolation(f"Odd cycle through chains {current} and {neighbour}")
    return colors


def two_color(instance: Instance) -> Coloring:
    """
    Computes a balanced 2-coloring in O(n log n).

    :param instance: An instance with k = 2.
    :return: A coloring with imbalance at most one.
    :raises InputError: If k is not 2.
    """
    if instance.k != 2:
        raise InputError(f"two_color needs k = 2, got k = {instance.k}")
    if instance.n == 0:
        return Coloring(())
    norm: NormalizedInstance = normalize(instance)
    partition, graph = build_constraint_graph(pair_events(norm), instance.n)
    chain_colors: Dict[int, int] = color_constraint_graph(graph)
    logger.debug(f"two_color: n={instance.n}, chains={len(graph.vertices)}, edges={len(graph.edges)}")
    return Coloring(tuple(chain_colors[partition.find(i)] for i in range(instance.n)))

