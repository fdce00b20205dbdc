import os
import numpy as np
from dataclasses import dataclass
from scripts.app_logger import get_logger
from scripts.two_color import START_SIDE, END_SIDE, two_color
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple
from scripts.settings import InputError, InvariantViolation
from scripts.core import (
    START,
    Coloring,
    Instance,
    NormalizedInstance,
    normalize,
    color_counts,
    point_regions
)

logger = get_logger(os.path.basename(__file__).replace(".py", ""))

REAL: str = "I"
VIRTUAL_X: str = "x"
VIRTUAL_Y: str = "y"


class Item(NamedTuple):
    kind: str
    uid: int

    def __str__(self) -> str:
        return f"{self.kind}{self.uid}"


class Constraint(NamedTuple):
    id: int
    items: Tuple[Item, ...]
    side: str


def opposite(side: str) -> str:
    return END_SIDE if side == START_SIDE else START_SIDE


@dataclass(frozen=True)
class ConstraintSystem:
    """
    Hyperedges of exactly k items that must all receive distinct colors. Constraint ids start at 1
    and follow emission order; occurrences maps every item to the ids of its two constraints.
    """
    constraints: Tuple[Constraint, ...]
    occurrences: Dict[Item, Tuple[int, ...]]
    k: int

    def constraint(self, constraint_id: int) -> Constraint:
        return self.constraints[constraint_id - 1]

    def validate(self) -> None:
        """
        Checks the structural invariants of the construction.

        Every constraint holds k distinct items. Every item occurs in exactly one ⊢ and one ⊣
        constraint. The two constraints of an x are emitted back to back, and a y first appears
        right after a constraint of the other side.

        :raises InvariantViolation: On the first broken invariant.
        """
        for constraint in self.constraints:
            if len(constraint.items) != self.k or len(set(constraint.items)) != self.k:
                raise InvariantViolation(f"Constraint {constraint.id} does not hold {self.k} distinct items")
        for item, ids in self.occurrences.items():
            if len(ids) != 2:
                raise InvariantViolation(f"Item {item} occurs {len(ids)} times")
            first, second = self.constraint(ids[0]), self.constraint(ids[1])
            if first.side == second.side:
                raise InvariantViolation(f"Item {item} occurs twice on side {first.side}")
            if item.kind == VIRTUAL_X and ids[1] != ids[0] + 1:
                raise InvariantViolation(f"Item {item} links constraints {ids[0]} and {ids[1]}")
            if item.kind == VIRTUAL_Y and self.constraint(ids[0] - 1).side == first.side:
                raise InvariantViolation(f"Item {item} first occurs on the branch side")


@dataclass(frozen=True)
class EdgeGraph:
    """
    Bipartite multigraph: left vertices are ⊢-constraints, right vertices ⊣-constraints, one edge
    (left, right) per item. items[e] is the item of edge e, or None for graphs built by hand.
    """
    left: Tuple[int, ...]
    right: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...]
    items: Tuple[Optional[Item], ...] = ()

    def degrees(self) -> Dict[int, int]:
        result: Dict[int, int] = {vertex: 0 for vertex in self.left + self.right}
        for u, v in self.edges:
            result[u] += 1
            result[v] += 1
        return result

    @property
    def max_degree(self) -> int:
        return max(self.degrees().values(), default=0)


@dataclass(frozen=True)
class EdgeColoring:
    colors: Tuple[int, ...]


def build_constraints(norm: NormalizedInstance, k: int) -> ConstraintSystem:
    """
    Scans the events in rank order and emits the constraint system.

    At the root (depth divisible by k, nothing active) the type of the next event picks the branch.
    An event of the branch type pushes its interval; k pushed items close a constraint on the
    branch side and return to the root. An event of the other type, for interval e while j items
    are active, closes (active + fresh x's) on the branch side and opens (fresh y's + e + the same
    x's) on the other side; the y's become the active list.

    :param norm: The normalized instance.
    :param k: The number of colors.
    :return: The constraint system.
    :raises InvariantViolation: If the scan does not end at the root.
    """
    if k < 1:
        raise InputError(f"k must be positive, got {k}")
    constraints: List[Constraint] = []
    occurrences: Dict[Item, List[int]] = {}
    counters: Dict[str, int] = {VIRTUAL_X: 0, VIRTUAL_Y: 0}

    def emit(items: List[Item], side: str) -> None:
        constraint_id: int = len(constraints) + 1
        constraints.append(Constraint(constraint_id, tuple(items), side))
        for item in items:
            occurrences.setdefault(item, []).append(constraint_id)

    def fresh(kind: str, count: int) -> List[Item]:
        first: int = counters[kind] + 1
        counters[kind] += count
        return [Item(kind, uid) for uid in range(first, first + count)]

    mode: Optional[str] = None
    active: List[Item] = []
    for event in norm.events:
        if mode is None:
            mode = event.kind
        branch_side: str = START_SIDE if mode == START else END_SIDE
        if event.kind == mode:
            active.append(Item(REAL, event.interval_id))
            if len(active) == k:
                emit(active, branch_side)
                active, mode = [], None
            continue
        j: int = len(active)
        xs: List[Item] = fresh(VIRTUAL_X, k - j)
        ys: List[Item] = fresh(VIRTUAL_Y, j - 1)
        emit(active + xs, branch_side)
        emit(ys + [Item(REAL, event.interval_id)] + xs, opposite(branch_side))
        active = ys
        if not active:
            mode = None
    if mode is not None or active:
        raise InvariantViolation(f"Scan ended away from the root with {len(active)} active items")
    logger.debug(
        f"Constraint system: k={k}, constraints={len(constraints)}, "
        f"x={counters[VIRTUAL_X]}, y={counters[VIRTUAL_Y]}"
    )
    return ConstraintSystem(
        constraints=tuple(constraints),
        occurrences={item: tuple(ids) for item, ids in occurrences.items()},
        k=k
    )


def constraints_to_graph(constraints: Sequence[Constraint]) -> EdgeGraph:
    """
    Turns constraints into the bipartite multigraph whose edges are the shared items.

    :param constraints: The constraints, e.g. ConstraintSystem.constraints.
    :return: The edge graph with one edge per item, in order of first occurrence.
    :raises InvariantViolation: If an item does not occur exactly twice on opposite sides.
    """
    sides: Dict[int, str] = {constraint.id: constraint.side for constraint in constraints}
    occurrences: Dict[Item, List[int]] = {}
    for constraint in constraints:
        for item in constraint.items:
            occurrences.setdefault(item, []).append(constraint.id)
    edges: List[Tuple[int, int]] = []
    items: List[Item] = []
    for item, ids in occurrences.items():
        if len(ids) != 2 or sides[ids[0]] == sides[ids[1]]:
            raise InvariantViolation(f"Item {item} occurs in constraints {ids}")
        u, v = ids if sides[ids[0]] == START_SIDE else ids[::-1]
        edges.append((u, v))
        items.append(item)
    return EdgeGraph(
        left=tuple(cid for cid, side in sides.items() if side == START_SIDE),
        right=tuple(cid for cid, side in sides.items() if side == END_SIDE),
        edges=tuple(edges),
        items=tuple(items)
    )


def edge_color(graph: EdgeGraph, k: int) -> EdgeColoring:
    """
    Colors the edges of a bipartite multigraph with k colors so that edges sharing a vertex differ.

    Edges are colored one by one. With α the smallest color free at u and β the smallest color free
    at v, α is used when it is free at v too and β when it is free at u; otherwise the α/β
    alternating path starting at v is flipped first, which frees α at v and never reaches u.

    :param graph: A bipartite multigraph of maximum degree at most k.
    :param k: The number of colors.
    :return: The edge coloring aligned with graph.edges.
    :raises InputError: If a vertex has degree above k.
    """
    if graph.max_degree > k:
        raise InputError(f"Maximum degree {graph.max_degree} exceeds k = {k}")
    index: Dict[int, int] = {vertex: i for i, vertex in enumerate(graph.left + graph.right)}
    width: int = k + 1
    # at[v * width + c] is the edge with color c at vertex v, or -1
    at: List[int] = [-1] * (len(index) * width)
    ends: List[Tuple[int, int]] = [(index[u], index[v]) for u, v in graph.edges]
    colors: List[int] = [0] * len(ends)
    for edge, (u, v) in enumerate(ends):
        alpha: int = next(c for c in range(1, width) if at[u * width + c] == -1)
        if at[v * width + alpha] != -1:
            beta: int = next(c for c in range(1, width) if at[v * width + c] == -1)
            if at[u * width + beta] == -1:
                alpha = beta
        if at[v * width + alpha] != -1:
            path: List[int] = []
            vertices: List[int] = [v]
            vertex, color = v, alpha
            while (step := at[vertex * width + color]) != -1:
                path.append(step)
                a, b = ends[step]
                vertex = b if a == vertex else a
                vertices.append(vertex)
                color = beta if color == alpha else alpha
            # on the path the alpha and beta slots of every vertex hold path edges or -1
            for vertex in vertices:
                base: int = vertex * width
                at[base + alpha], at[base + beta] = at[base + beta], at[base + alpha]
            for step in path:
                colors[step] = beta if colors[step] == alpha else alpha
        colors[edge] = alpha
        at[u * width + alpha] = edge
        at[v * width + alpha] = edge
    return EdgeColoring(tuple(colors))


def check_edge_coloring(graph: EdgeGraph, coloring: EdgeColoring, k: int) -> bool:
    """
    True iff every edge has a color in 1..k and no two edges at a vertex share a color.
    """
    if len(coloring.colors) != len(graph.edges):
        return False
    seen: set = set()
    for (u, v), color in zip(graph.edges, coloring.colors):
        if not 1 <= color <= k or (u, color) in seen or (v, color) in seen:
            return False
        seen.update({(u, color), (v, color)})
    return True


def k_color(instance: Instance) -> Coloring:
    """
    Computes a balanced k-coloring in O(n log n + kn log k) via constraints and edge coloring.

    :param instance: Any interval instance.
    :return: A coloring with imbalance at most one.
    """
    k: int = instance.k
    if k == 1 or instance.n == 0:
        return Coloring((1,) * instance.n)
    system: ConstraintSystem = build_constraints(normalize(instance), k)
    system.validate()
    graph: EdgeGraph = constraints_to_graph(system.constraints)
    edge_colors: EdgeColoring = edge_color(graph, k)
    colors: List[int] = [0] * instance.n
    for item, color in zip(graph.items, edge_colors.colors):
        if item.kind == REAL:
            colors[item.uid] = color
    logger.debug(f"k_color: n={instance.n}, k={k}, edges={len(graph.edges)}")
    return Coloring(tuple(colors))


def pairwise_spread(instance: Instance, coloring: Coloring) -> np.ndarray:
    """
    Returns the k x k matrix whose entry (i, j) is max over x of |c_(i+1)(x) - c_(j+1)(x)|.
    """
    k: int = instance.k
    if instance.n == 0:
        return np.zeros((k, k), dtype=np.int64)
    norm: NormalizedInstance = normalize(instance)
    counts: np.ndarray = color_counts(norm, coloring, k)[[region.row for region in point_regions(norm)]]
    return np.abs(counts[:, :, None] - counts[:, None, :]).max(axis=0)


def dewerra_pass_limit(instance: Instance, coloring: Coloring) -> int:
    """
    Returns the most recoloring passes de Werra rebalancing can take from the given coloring.

    Every pass keeps c_i + c_j at each point and balances the pair, so the sum of squared color
    counts over the point regions drops by at least 2 per pass and never goes below the value of a
    balanced coloring.

    :param instance: The interval instance.
    :param coloring: The starting coloring.
    :return: Half the gap between the starting and the balanced sum of squares.
    """
    k: int = instance.k
    if instance.n == 0:
        return 0
    norm: NormalizedInstance = normalize(instance)
    counts: np.ndarray = color_counts(norm, coloring, k)[[region.row for region in point_regions(norm)]]
    counts = counts.astype(np.int64)
    quotient, remainder = np.divmod(counts.sum(axis=1), k)
    floor: int = int((remainder * (quotient + 1) ** 2 + (k - remainder) * quotient ** 2).sum())
    return (int((counts ** 2).sum()) - floor) // 2


def dewerra_rebalance(instance: Instance, initial: Optional[Coloring] = None) -> Tuple[Coloring, int]:
    """
    Rebalances a coloring pair by pair with the 2-coloring algorithm.

    Starting from initial (round robin by id when omitted), the pair of colors (i, j) with the
    largest spread is re-colored by two_color on the intervals currently colored i or j; the class
    of the lowest extracted interval keeps color i. Ties go to the smallest pair.

    :param instance: The interval instance.
    :param initial: An optional starting coloring.
    :return: The balanced coloring and the number of recoloring passes.
    :raises InvariantViolation: If the coloring is still unbalanced after dewerra_pass_limit passes.
    """
    k: int = instance.k
    colors: List[int] = list(initial.colors) if initial is not None else [i % k + 1 for i in range(instance.n)]
    Coloring(tuple(colors)).check(instance.n, k)
    limit: int = dewerra_pass_limit(instance, Coloring(tuple(colors)))
    passes: int = 0
    while True:
        spread: np.ndarray = pairwise_spread(instance, Coloring(tuple(colors)))
        i, j = np.unravel_index(int(np.argmax(spread)), spread.shape)
        if spread[i, j] <= 1:
            break
        if passes >= limit:
            raise InvariantViolation(f"de Werra rebalancing still unbalanced after {passes} passes (k = {k})")
        ids: List[int] = [index for index, color in enumerate(colors) if color in (i + 1, j + 1)]
        pair_coloring: Coloring = two_color(instance.subset(ids, 2))
        keep: int = pair_coloring.colors[0]
        for position, index in enumerate(ids):
            colors[index] = int(i) + 1 if pair_coloring.colors[position] == keep else int(j) + 1
        passes += 1
        logger.debug(f"de Werra pass {passes}: colors {i + 1} and {j + 1}, spread {spread[i, j]}")
    return Coloring(tuple(colors)), passes


def k_color_dewerra(instance: Instance) -> Coloring:
    return dewerra_rebalance(instance)[0]


def parse_matrix(text: str) -> np.ndarray:
    """
    Parses a 0/1 matrix: first line "n m", then n rows of m space-separated digits.

    :raises InputError: On a malformed header, row or entry.
    """
    lines: List[str] = [line for line in text.strip().splitlines() if line.strip()]
    if not lines:
        raise InputError("Matrix file is empty")
    header: List[str] = lines[0].split()
    if len(header) != 2 or not all(part.isdigit() for part in header):
        raise InputError(f"Line 1: expected 'n m', got {lines[0]!r}")
    n, m = int(header[0]), int(header[1])
    if len(lines) - 1 != n:
        raise InputError(f"Header announces {n} rows, file has {len(lines) - 1}")
    rows: List[List[int]] = []
    for number, line in enumerate(lines[1:], start=2):
        entries: List[str] = line.split()
        if len(entries) != m or any(entry not in ("0", "1") for entry in entries):
            raise InputError(f"Line {number}: expected {m} entries of 0/1, got {line!r}")
        rows.append([int(entry) for entry in entries])
    return np.array(rows, dtype=np.int8).reshape(n, m)


def hypergraph_to_instance(matrix: np.ndarray, k: int) -> Instance:
    """
    Maps every row of a matrix with consecutive ones to the interval of its 1-columns (1-based).
    All-zero rows become distinct points beyond the last column.

    :param matrix: A 0/1 matrix, rows are the vertices and columns the hyperedges.
    :param k: The number of colors.
    :return: The interval instance.
    :raises InputError: If a row's ones are not consecutive in the given column order.
    """
    matrix = np.asarray(matrix, dtype=np.int8)
    n, m = matrix.shape
    if m == 0:
        return Instance.from_pairs([(row + 1, row + 1) for row in range(n)], k)
    ones: np.ndarray = matrix.sum(axis=1)
    first: np.ndarray = matrix.argmax(axis=1)
    last: np.ndarray = m - 1 - matrix[:, ::-1].argmax(axis=1)
    broken: np.ndarray = np.flatnonzero((ones > 0) & (last - first + 1 != ones))
    if broken.size:
        raise InputError(f"Row {int(broken[0])} does not have consecutive ones")
    pairs: List[Tuple[int, int]] = []
    dummy: int = m + 1
    for row in range(n):
        if ones[row]:
            pairs.append((int(first[row]) + 1, int(last[row]) + 1))
        else:
            pairs.append((dummy, dummy))
            dummy += 1
    return Instance.from_pairs(pairs, k)


def column_imbalance(matrix: np.ndarray, coloring: Coloring, k: int) -> int:
    """
    Largest spread of color counts over the hyperedges (columns) of the matrix.
    """
    matrix = np.asarray(matrix, dtype=np.int64)
    coloring.check(matrix.shape[0], k)
    if matrix.size == 0:
        return 0
    one_hot: np.ndarray = np.zeros((matrix.shape[0], k), dtype=np.int64)
    one_hot[np.arange(matrix.shape[0]), np.asarray(coloring.colors) - 1] = 1
    counts: np.ndarray = matrix.T @ one_hot
    return int((counts.max(axis=1) - counts.min(axis=1)).max())


def k_color_hypergraph(matrix: np.ndarray, k: int) -> Coloring:
    return k_color(hypergraph_to_instance(matrix, k))
