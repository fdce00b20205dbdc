import os
import json
import numpy as np
from fractions import Fraction
from dataclasses import dataclass, field
from scripts.app_logger import get_logger
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple
from scripts.settings import (
    InputError,
    InstanceTooLarge,
    InvariantViolation,
    NAE_LIMIT_VARS,
    DECIDER_LIMIT_N,
    MULTI_INTERVAL_LIMIT_GROUPS,
    SEARCH_CHUNK
)
from scripts.core import (
    Coord,
    Coloring,
    Instance,
    ImbalanceReport,
    parse_coord,
    format_coord,
    scale_to_integers,
    point_cliques,
    membership_matrix,
    search_min_spread
)

logger = get_logger(os.path.basename(__file__).replace(".py", ""))

Bounds = Tuple[Tuple[Coord, Coord], ...]

CLAUSE: str = "clause"
VARIABLE: str = "variable"
CHAIN: str = "chain"
CROSSING: str = "crossing"
COVER: str = "cover"
TAGS: Tuple[str, ...] = (CLAUSE, VARIABLE, CHAIN, CROSSING, COVER)

# Клетка сетки: столбцы и ряды трасс идут с шагом CELL
CELL: int = 10
SLOTS: Tuple[str, ...] = ("X", "Z", "Y")
# (x offset from the gadget origin, lowest y of the attached vertical) per slot
ATTACH: Tuple[Tuple[int, int], ...] = ((0, 3), (10, 7), (20, 3))


@dataclass(frozen=True)
class NaeFormula:
    num_vars: int
    clauses: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise InputError(f"num_vars must be nonnegative, got {self.num_vars}")
        for index, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise InputError(f"Clause {index + 1} has {len(clause)} variables, expected 3")
            if any(not 1 <= var <= self.num_vars for var in clause):
                raise InputError(f"Clause {index + 1} uses variables outside 1..{self.num_vars}: {clause}")

    @classmethod
    def from_clauses(cls, clauses: Sequence[Sequence[int]], num_vars: Optional[int] = None) -> "NaeFormula":
        triples: Tuple[Tuple[int, int, int], ...] = tuple(tuple(clause) for clause in clauses)
        if num_vars is None:
            num_vars = max((var for clause in triples for var in clause), default=0)
        return cls(num_vars, triples)


@dataclass(frozen=True)
class Box:
    id: int
    bounds: Bounds
    tag: str

    def __post_init__(self):
        if any(lo > hi for lo, hi in self.bounds):
            raise InputError(f"Box {self.id} has an empty side: {self.bounds}")
        if self.tag not in TAGS:
            raise InputError(f"Box {self.id} has unknown tag {self.tag!r}")


class ReductionLayout(NamedTuple):
    variable_boxes: Dict[int, int]
    clause_boxes: Tuple[Tuple[int, int, int], ...]
    chains: Dict[Tuple[int, int], Tuple[int, ...]]
    cover_boxes: Tuple[int, ...]
    expected_overlaps: FrozenSet[Tuple[int, int]]


@dataclass(frozen=True)
class BoxInstance:
    boxes: Tuple[Box, ...]
    d: int
    k: int
    provenance: Dict[int, str] = field(default_factory=dict, compare=False)
    layout: Optional[ReductionLayout] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.d < 1 or self.k < 1:
            raise InputError(f"d and k must be positive, got d = {self.d}, k = {self.k}")
        for index, box in enumerate(self.boxes):
            if box.id != index or len(box.bounds) != self.d:
                raise InputError(f"Box {index} must have id {index} and {self.d} dimensions")

    @property
    def n(self) -> int:
        return len(self.boxes)


@dataclass(frozen=True)
class WeightedInstance:
    instance: Instance
    weights: Tuple[int, ...]

    def __post_init__(self):
        if len(self.weights) != self.instance.n:
            raise InputError(f"{len(self.weights)} weights for {self.instance.n} intervals")
        if any(not isinstance(weight, int) or weight < 1 for weight in self.weights):
            raise InputError(f"Weights must be positive integers, got {self.weights}")


class Arrangement(NamedTuple):
    cliques: Tuple[FrozenSet[int], ...]
    witnesses: Tuple[Tuple[Coord, ...], ...]


def parse_formula(text: str) -> NaeFormula:
    """
    Parses a DIMACS-like formula: "c" comment lines, a "p nae <vars> <clauses>" header and one
    clause of three positive variables per line, optionally closed by 0.

    :param text: The formula text.
    :return: The formula.
    :raises InputError: On negative literals, malformed lines or a wrong clause count.
    """
    num_vars: Optional[int] = None
    expected: Optional[int] = None
    clauses: List[Tuple[int, int, int]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line: str = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts: List[str] = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "nae" or not parts[2].isdigit() or not parts[3].isdigit():
                raise InputError(f"Line {number}: expected 'p nae <vars> <clauses>', got {line!r}")
            num_vars, expected = int(parts[2]), int(parts[3])
            continue
        try:
            literals: List[int] = [int(part) for part in parts]
        except ValueError as e:
            raise InputError(f"Line {number}: not a clause: {line!r}") from e
        if literals and literals[-1] == 0:
            literals.pop()
        if len(literals) != 3 or any(literal <= 0 for literal in literals):
            raise InputError(f"Line {number}: expected three positive variables, got {line!r}")
        clauses.append((literals[0], literals[1], literals[2]))
    if expected is not None and expected != len(clauses):
        raise InputError(f"Header announces {expected} clauses, file has {len(clauses)}")
    return NaeFormula.from_clauses(clauses, num_vars)


def read_formula(path: str) -> NaeFormula:
    with open(path, encoding="utf-8") as f:
        return parse_formula(f.read())


def nae_brute_force(formula: NaeFormula, limit_vars: Optional[int] = None) -> Tuple[bool, Optional[Tuple[bool, ...]]]:
    """
    Decides NAE-satisfiability by trying all assignments in increasing binary order (variable 1 is
    the lowest bit).

    :param formula: The formula.
    :param limit_vars: Largest number of variables accepted; NAE_LIMIT_VARS by default.
    :return: Whether an assignment exists, and the first one found.
    :raises InstanceTooLarge: If the formula has too many variables.
    """
    limit: int = NAE_LIMIT_VARS if limit_vars is None else limit_vars
    if formula.num_vars > limit:
        raise InstanceTooLarge(f"NAE brute force refused: {formula.num_vars} variables > {limit}")
    clauses: np.ndarray = np.array(formula.clauses, dtype=np.int64).reshape(-1, 3) - 1
    total: int = 1 << formula.num_vars
    for begin in range(0, total, SEARCH_CHUNK):
        values: np.ndarray = np.arange(begin, min(total, begin + SEARCH_CHUNK), dtype=np.int64)
        bits: np.ndarray = (values[:, None] >> clauses.reshape(-1)[None, :]) & 1
        bits = bits.reshape(len(values), -1, 3)
        equal: np.ndarray = (bits[:, :, 0] == bits[:, :, 1]) & (bits[:, :, 1] == bits[:, :, 2])
        satisfied: np.ndarray = np.flatnonzero(~equal.any(axis=1))
        if satisfied.size:
            value: int = int(values[satisfied[0]])
            return True, tuple(bool(value >> var & 1) for var in range(formula.num_vars))
    return False, None


class _Route(NamedTuple):
    verticals: List[Tuple[int, int, int, int]]
    horizontals: List[Tuple[int, int, int, int]]
    clause_vertical: Tuple[int, int, int, int]
    crossings: List[int]


def _rect(x0: int, x1: int, y0: int, y1: int) -> Bounds:
    return (Fraction(x0), Fraction(x1)), (Fraction(y0), Fraction(y1))


def reduce_nae_to_boxes(formula: NaeFormula, k: int = 2) -> BoxInstance:
    """
    Builds axis-parallel rectangles that have a balanced k-coloring iff the formula is
    NAE-satisfiable.

    Clause i is a gadget of three rectangles X, Z, Y whose pairwise intersections are one common
    region, placed at x = 30i on the bottom row. Every variable is a rectangle on the top row.
    Occurrence o = 3i + slot is wired from its variable to its gadget rectangle by a chain: a
    vertical on its own variable track, a horizontal on row 10(o + 2) and a vertical at x = 10o.
    Where a vertical crosses a horizontal, the horizontal is split into two pieces overlapping
    around the vertical, which adds no constraint on the vertical. Every chain has an odd number
    of rectangles between its ends, so both ends share a color; a chain with an odd number of
    crossings gets its variable vertical split in two. For k > 2, k - 2 nested cover rectangles
    enclose the construction and reach further right, where only they overlap.

    :param formula: A positive NAE-3SAT formula.
    :param k: The number of colors, at least 2.
    :return: The box instance with provenance and layout.
    """
    if k < 2:
        raise InputError(f"The box reduction needs k >= 2, got {k}")
    m: int = len(formula.clauses)
    occurrences: List[Tuple[int, int, int]] = [
        (clause, slot, formula.clauses[clause][slot]) for clause in range(m) for slot in range(3)
    ]
    order: List[int] = sorted(range(3 * m), key=lambda o: (occurrences[o][2], o))
    track: Dict[int, int] = {o: 3 * m + position for position, o in enumerate(order)}
    top: int = CELL * (3 * m + 2)

    routes: List[_Route] = []
    for o, (clause, slot, var) in enumerate(occurrences):
        cc, vc, row = CELL * o, CELL * track[o], CELL * (2 + o)
        columns: List[int] = sorted(
            [CELL * later for later in range(o + 1, 3 * m)] +
            [CELL * track[earlier] for earlier in range(o) if track[earlier] < track[o]]
        )
        starts: List[int] = [cc - 1] + [column - 1 for column in columns]
        ends: List[int] = [column + 3 for column in columns] + [vc + 1]
        horizontals: List[Tuple[int, int, int, int]] = [
            (start, end, row - 1, row + 1) for start, end in zip(starts, ends)
        ]
        if len(columns) % 2:
            verticals = [(vc - 1, vc + 1, top - 7, top + 1), (vc - 1, vc + 1, row - 1, top - 3)]
        else:
            verticals = [(vc - 1, vc + 1, row - 1, top + 1)]
        dx, attach_y = ATTACH[slot]
        routes.append(_Route(verticals, horizontals, (cc - 1, cc + 1, attach_y, row + 1), columns))

    shapes: List[Tuple[Bounds, str, str]] = []
    variable_boxes: Dict[int, int] = {}
    used: List[int] = sorted({var for _, _, var in occurrences})
    for var in used:
        columns = [CELL * track[o] for o in range(3 * m) if occurrences[o][2] == var]
        variable_boxes[var] = len(shapes)
        shapes.append((_rect(min(columns) - 3, max(columns) + 3, top, top + 4), VARIABLE, f"variable x{var}"))
    path_ids: Dict[int, List[int]] = {}
    for o, route in enumerate(routes):
        clause, slot, var = occurrences[o]
        name: str = f"x{var} -> clause {clause + 1} slot {SLOTS[slot]}"
        ids: List[int] = []
        for part, bounds in enumerate(route.verticals):
            ids.append(len(shapes))
            shapes.append((_rect(*bounds), CHAIN, f"{name}: variable vertical {part + 1}"))
        tag: str = CROSSING if route.crossings else CHAIN
        for part in reversed(range(len(route.horizontals))):
            ids.append(len(shapes))
            shapes.append((_rect(*route.horizontals[part]), tag, f"{name}: horizontal piece {part + 1}"))
        ids.append(len(shapes))
        shapes.append((_rect(*route.clause_vertical), CHAIN, f"{name}: clause vertical"))
        path_ids[o] = ids
    clause_boxes: List[Tuple[int, int, int]] = []
    for clause in range(m):
        x0: int = CELL * 3 * clause
        gadget: List[Tuple[Bounds, str]] = [
            (_rect(x0 - 3, x0 + 12, 0, 4), "X"),
            (_rect(x0 + 8, x0 + 12, 0, 8), "Z"),
            (_rect(x0 + 8, x0 + 23, 0, 4), "Y")
        ]
        first: int = len(shapes)
        for bounds, slot_name in gadget:
            shapes.append((bounds, CLAUSE, f"clause {clause + 1} rectangle {slot_name}"))
        clause_boxes.append((first, first + 1, first + 2))

    covers: List[Tuple[Bounds, str, str]] = []
    if shapes and k > 2:
        xmin = min(bounds[0][0] for bounds, _, _ in shapes)
        xmax = max(bounds[0][1] for bounds, _, _ in shapes)
        ymin = min(bounds[1][0] for bounds, _, _ in shapes)
        ymax = max(bounds[1][1] for bounds, _, _ in shapes)
        for c in range(k - 2):
            covers.append((
                ((xmin - 1 - c, xmax + 11 + c), (ymin - 1 - c, ymax + 1 + c)), COVER, f"cover rectangle {c + 1}"
            ))
    offset: int = len(covers)
    boxes: Tuple[Box, ...] = tuple(
        Box(index, bounds, tag) for index, (bounds, tag, _) in enumerate(covers + shapes)
    )
    provenance: Dict[int, str] = {index: label for index, (_, _, label) in enumerate(covers + shapes)}

    chains: Dict[Tuple[int, int], Tuple[int, ...]] = {}
    expected: set = set()

    def expect(a: int, b: int) -> None:
        expected.add((min(a, b), max(a, b)))

    for o, ids in path_ids.items():
        clause, slot, var = occurrences[o]
        chain: Tuple[int, ...] = tuple(
            [variable_boxes[var] + offset] + [i + offset for i in ids] + [clause_boxes[clause][slot] + offset]
        )
        chains[(clause, slot)] = chain
        for a, b in zip(chain, chain[1:]):
            expect(a, b)
        # horizontal pieces in path order run from the variable side, crossings from the clause side
        pieces: List[int] = list(reversed([i + offset for i in ids[len(routes[o].verticals):-1]]))
        for position, column in enumerate(routes[o].crossings):
            other: int = column // CELL
            if other < 3 * m:
                crossing: int = path_ids[other][-1] + offset
            else:
                owner: int = next(p for p in range(3 * m) if track[p] == other)
                crossing = path_ids[owner][len(routes[owner].verticals) - 1] + offset
            expect(crossing, pieces[position])
            expect(crossing, pieces[position + 1])
    for triple in clause_boxes:
        a, b, c = (i + offset for i in triple)
        expect(a, b)
        expect(a, c)
        expect(b, c)
    for cover in range(offset):
        for other in range(len(boxes)):
            if other != cover:
                expect(cover, other)
    layout: ReductionLayout = ReductionLayout(
        variable_boxes={var: index + offset for var, index in variable_boxes.items()},
        clause_boxes=tuple(tuple(i + offset for i in triple) for triple in clause_boxes),
        chains=chains,
        cover_boxes=tuple(range(offset)),
        expected_overlaps=frozenset(expected)
    )
    logger.debug(f"Box reduction: clauses={m}, k={k}, boxes={len(boxes)}")
    return BoxInstance(boxes, 2, k, provenance, layout)


def lift_boxes(box_instance: BoxInstance, d: int) -> BoxInstance:
    """
    Adds zero-length dimensions [0, 0] until the boxes have d dimensions.
    """
    if d < box_instance.d:
        raise InputError(f"Cannot lift {box_instance.d}-dimensional boxes to d = {d}")
    extra: Bounds = ((Fraction(0), Fraction(0)),) * (d - box_instance.d)
    return BoxInstance(
        tuple(Box(box.id, box.bounds + extra, box.tag) for box in box_instance.boxes),
        d,
        box_instance.k,
        box_instance.provenance,
        box_instance.layout
    )


def _dimension_samples(box_instance: BoxInstance, dim: int) -> Tuple[List[Coord], np.ndarray]:
    """
    Endpoints of one dimension plus midpoints between consecutive ones, with the (samples x boxes)
    membership matrix.
    """
    los: List[Coord] = [box.bounds[dim][0] for box in box_instance.boxes]
    his: List[Coord] = [box.bounds[dim][1] for box in box_instance.boxes]
    scaled, scale = scale_to_integers(los + his, factor=2)
    values: List[int] = sorted(set(scaled))
    samples: List[int] = []
    for value, following in zip(values, values[1:] + [None]):
        samples.append(value)
        if following is not None:
            samples.append((value + following) // 2)
    n: int = box_instance.n
    points: np.ndarray = np.array(samples, dtype=object)[:, None]
    membership: np.ndarray = (
        (np.array(scaled[:n], dtype=object)[None, :] <= points) & (points <= np.array(scaled[n:], dtype=object)[None, :])
    ).astype(bool)
    return [Fraction(sample, scale) for sample in samples], membership


def build_arrangement(box_instance: BoxInstance) -> Arrangement:
    """
    Finds every distinct clique S(x) of the boxes with one witness point each, by intersecting the
    per-dimension memberships one dimension at a time.
    """
    if box_instance.n == 0:
        return Arrangement((), ())
    samples, membership = _dimension_samples(box_instance, 0)
    rows: List[Tuple[np.ndarray, Tuple[Coord, ...]]] = []
    seen: set = set()
    for index, row in enumerate(membership):
        if (key := np.packbits(row).tobytes()) not in seen:
            seen.add(key)
            rows.append((row, (samples[index],)))
    for dim in range(1, box_instance.d):
        samples, membership = _dimension_samples(box_instance, dim)
        combined_rows: List[Tuple[np.ndarray, Tuple[Coord, ...]]] = []
        seen = set()
        for row, witness in rows:
            combined: np.ndarray = membership & row[None, :]
            _, first = np.unique(np.packbits(combined, axis=1), axis=0, return_index=True)
            for index in sorted(first.tolist()):
                key = np.packbits(combined[index]).tobytes()
                if key not in seen:
                    seen.add(key)
                    combined_rows.append((combined[index], witness + (samples[index],)))
        rows = combined_rows
    return Arrangement(
        tuple(frozenset(np.flatnonzero(row).tolist()) for row, _ in rows),
        tuple(witness for _, witness in rows)
    )


def box_imbalance(box_instance: BoxInstance, coloring: Coloring) -> ImbalanceReport:
    """
    Maximum over all arrangement cells of the spread between the largest and smallest color class.
    The witness is a point (one coordinate per dimension).
    """
    coloring.check(box_instance.n, box_instance.k)
    arrangement: Arrangement = build_arrangement(box_instance)
    if not arrangement.cliques:
        return ImbalanceReport(0, ())
    one_hot: np.ndarray = np.zeros((box_instance.n, box_instance.k), dtype=np.int64)
    one_hot[np.arange(box_instance.n), np.asarray(coloring.colors, dtype=np.int64) - 1] = 1
    membership: np.ndarray = np.zeros((len(arrangement.cliques), box_instance.n), dtype=np.int64)
    for row, clique in enumerate(arrangement.cliques):
        membership[row, list(clique)] = 1
    counts: np.ndarray = membership @ one_hot
    spreads: np.ndarray = counts.max(axis=1) - counts.min(axis=1)
    worst: int = int(np.argmax(spreads))
    return ImbalanceReport(int(spreads[worst]), arrangement.witnesses[worst])


def decide_balanced_boxes(box_instance: BoxInstance, limit_n: Optional[int] = None) -> Optional[Coloring]:
    """
    Searches for a balanced coloring by backtracking over boxes in id order, colors ascending.

    A partial assignment is dropped as soon as some clique of size s has a color used more than
    ceil(s/k) times, or needs more boxes than it has unassigned to lift every color to floor(s/k).

    :param box_instance: The boxes.
    :param limit_n: Largest number of boxes accepted; DECIDER_LIMIT_N by default.
    :return: The first balanced coloring found, or None.
    :raises InstanceTooLarge: If there are too many boxes.
    """
    n, k = box_instance.n, box_instance.k
    limit: int = DECIDER_LIMIT_N if limit_n is None else limit_n
    if n > limit:
        raise InstanceTooLarge(f"Balanced box decider refused: n = {n} > {limit}")
    if n == 0:
        return Coloring(())
    cliques: List[FrozenSet[int]] = [clique for clique in build_arrangement(box_instance).cliques if len(clique) > 1]
    by_box: List[List[int]] = [[] for _ in range(n)]
    for index, clique in enumerate(cliques):
        for box in clique:
            by_box[box].append(index)
    upper: List[int] = [-(-len(clique) // k) for clique in cliques]
    lower: List[int] = [len(clique) // k for clique in cliques]
    counts: List[List[int]] = [[0] * k for _ in cliques]
    free: List[int] = [len(clique) for clique in cliques]

    def shift(box: int, color: int, step: int) -> None:
        for index in by_box[box]:
            counts[index][color - 1] += step
            free[index] -= step

    def fits(box: int, color: int) -> bool:
        for index in by_box[box]:
            if counts[index][color - 1] > upper[index]:
                return False
            if sum(max(0, lower[index] - count) for count in counts[index]) > free[index]:
                return False
        return True

    colors: List[int] = [0] * n
    box: int = 0
    while 0 <= box < n:
        if colors[box]:
            shift(box, colors[box], -1)
        color: int = colors[box] + 1
        while color <= k:
            shift(box, color, 1)
            if fits(box, color):
                break
            shift(box, color, -1)
            color += 1
        if color <= k:
            colors[box] = color
            box += 1
        else:
            colors[box] = 0
            box -= 1
    logger.debug(f"Box decider: n={n}, k={k}, cliques={len(cliques)}, balanced={box == n}")
    return Coloring(tuple(colors)) if box == n else None


def min_box_imbalance_oracle(box_instance: BoxInstance, limit_n: Optional[int] = None) -> Tuple[int, Coloring]:
    """
    Exact minimum imbalance of a few boxes by exhaustive search.
    """
    cliques: Tuple[FrozenSet[int], ...] = build_arrangement(box_instance).cliques
    divisible: bool = all(len(clique) % box_instance.k == 0 for clique in cliques)
    value, colors = search_min_spread(
        membership_matrix(cliques, box_instance.n),
        box_instance.n,
        box_instance.k,
        lower_bound=0 if divisible else 1,
        limit_n=limit_n
    )
    return value, Coloring(colors)


def overlapping_pairs(box_instance: BoxInstance) -> FrozenSet[Tuple[int, int]]:
    """
    All pairs (i, j), i < j, of boxes with a common point.
    """
    n: int = box_instance.n
    overlap: np.ndarray = np.ones((n, n), dtype=bool)
    for dim in range(box_instance.d):
        scaled, _ = scale_to_integers(
            [box.bounds[dim][0] for box in box_instance.boxes] + [box.bounds[dim][1] for box in box_instance.boxes]
        )
        los: np.ndarray = np.array(scaled[:n], dtype=object)
        his: np.ndarray = np.array(scaled[n:], dtype=object)
        overlap &= ((los[:, None] <= his[None, :]) & (los[None, :] <= his[:, None])).astype(bool)
    rows, columns = np.nonzero(np.triu(overlap, 1))
    return frozenset(zip(rows.tolist(), columns.tolist()))


def _intersection(a: Box, b: Box) -> Bounds:
    return tuple((max(x[0], y[0]), min(x[1], y[1])) for x, y in zip(a.bounds, b.bounds))


def audit_reduction(box_instance: BoxInstance) -> None:
    """
    Checks a reduced instance against its layout: boxes overlap exactly where the layout expects,
    and the three rectangles of every clause gadget meet in one common region and nowhere else.

    :raises InvariantViolation: On an unexpected or missing overlap, or a broken clause gadget.
    """
    layout: Optional[ReductionLayout] = box_instance.layout
    if layout is None:
        raise InputError("Only instances built by reduce_nae_to_boxes carry a layout")
    actual: FrozenSet[Tuple[int, int]] = overlapping_pairs(box_instance)
    if unexpected := sorted(actual - layout.expected_overlaps):
        a, b = unexpected[0]
        raise InvariantViolation(
            f"Unexpected overlap of box {a} ({box_instance.provenance.get(a)}) "
            f"and box {b} ({box_instance.provenance.get(b)})"
        )
    if missing := sorted(layout.expected_overlaps - actual):
        raise InvariantViolation(f"Missing overlap of boxes {missing[0]}")
    boxes: Tuple[Box, ...] = box_instance.boxes
    for x, z, y in layout.clause_boxes:
        regions: set = {
            _intersection(boxes[x], boxes[z]),
            _intersection(boxes[x], boxes[y]),
            _intersection(boxes[z], boxes[y])
        }
        if len(regions) != 1:
            raise InvariantViolation(f"Clause gadget {x, z, y} has pairwise-only overlaps")


def reduce_partition_to_weighted(values: Sequence[int]) -> WeightedInstance:
    """
    One copy of [0, 1] per value, weighted by the value, for two colors: weighted imbalance 0 is
    reachable iff the values split into two halves of equal sum.
    """
    return WeightedInstance(Instance.from_pairs([(0, 1)] * len(values), 2), tuple(values))


def _weighted_cliques(weighted: WeightedInstance) -> np.ndarray:
    return membership_matrix((clique for _, clique in point_cliques(weighted.instance)), weighted.instance.n)


def weighted_imbalance(weighted: WeightedInstance, coloring: Coloring) -> int:
    """
    Maximum over all points of the spread between the largest and smallest color weight.
    """
    instance: Instance = weighted.instance
    coloring.check(instance.n, instance.k)
    membership: np.ndarray = _weighted_cliques(weighted)
    if membership.shape[0] == 0:
        return 0
    one_hot: np.ndarray = np.zeros((instance.n, instance.k), dtype=np.int64)
    one_hot[np.arange(instance.n), np.asarray(coloring.colors, dtype=np.int64) - 1] = 1
    one_hot *= np.asarray(weighted.weights, dtype=np.int64)[:, None]
    counts: np.ndarray = membership.astype(np.int64) @ one_hot
    return int((counts.max(axis=1) - counts.min(axis=1)).max())


def min_weighted_imbalance(weighted: WeightedInstance, limit_n: Optional[int] = None) -> Tuple[int, Coloring]:
    value, colors = search_min_spread(
        _weighted_cliques(weighted),
        weighted.instance.n,
        weighted.instance.k,
        weights=weighted.weights,
        limit_n=limit_n
    )
    return value, Coloring(colors)


def reduce_nae_to_multiple_intervals(formula: NaeFormula) -> Tuple[Instance, Tuple[Tuple[int, ...], ...]]:
    """
    Clause i becomes three intervals [3i, 3i + 1], one per variable occurrence; the occurrences of
    one variable form a group that must share a color.

    :return: The two-color instance and the groups of used variables, by variable id.
    """
    pairs: List[Tuple[int, int]] = []
    groups: Dict[int, List[int]] = {}
    for clause, variables in enumerate(formula.clauses):
        for var in variables:
            groups.setdefault(var, []).append(len(pairs))
            pairs.append((3 * clause, 3 * clause + 1))
    return Instance.from_pairs(pairs, 2), tuple(tuple(groups[var]) for var in sorted(groups))


def decide_multiple_intervals(
    instance: Instance,
    groups: Sequence[Sequence[int]],
    limit_groups: Optional[int] = None
) -> Optional[Coloring]:
    """
    Searches for a balanced coloring in which every group is monochromatic.

    :param instance: The interval instance.
    :param groups: Disjoint groups covering all intervals.
    :param limit_groups: Largest number of groups accepted; MULTI_INTERVAL_LIMIT_GROUPS by default.
    :return: A balanced coloring, or None.
    """
    limit: int = MULTI_INTERVAL_LIMIT_GROUPS if limit_groups is None else limit_groups
    if len(groups) > limit:
        raise InstanceTooLarge(f"Multiple-interval decider refused: {len(groups)} groups > {limit}")
    owner: Dict[int, int] = {member: index for index, group in enumerate(groups) for member in group}
    if sorted(owner) != list(range(instance.n)):
        raise InputError("Groups must partition the intervals")
    if instance.n == 0:
        return Coloring(())
    membership: np.ndarray = membership_matrix((clique for _, clique in point_cliques(instance)), instance.n)
    indicator: np.ndarray = np.zeros((instance.n, len(groups)), dtype=np.int64)
    indicator[list(owner), [owner[member] for member in owner]] = 1
    value, group_colors = search_min_spread(
        membership.astype(np.int64) @ indicator,
        len(groups),
        instance.k,
        lower_bound=1,
        limit_n=limit
    )
    if value > 1:
        return None
    return Coloring(tuple(group_colors[owner[i]] for i in range(instance.n)))


def box_instance_to_json(box_instance: BoxInstance) -> dict:
    return {
        "d": box_instance.d,
        "k": box_instance.k,
        "boxes": [
            {
                "id": box.id,
                "tag": box.tag,
                "provenance": box_instance.provenance.get(box.id, ""),
                "bounds": [[format_coord(lo), format_coord(hi)] for lo, hi in box.bounds]
            }
            for box in box_instance.boxes
        ]
    }


def parse_box_text(text: str, k: Optional[int] = None) -> BoxInstance:
    try:
        data: dict = json.loads(text, parse_float=str)
        d: int = int(data["d"])
        boxes: Tuple[Box, ...] = tuple(
            Box(index, tuple((parse_coord(lo), parse_coord(hi)) for lo, hi in entry["bounds"]), entry.get("tag", CHAIN))
            for index, entry in enumerate(data["boxes"])
        )
        provenance: Dict[int, str] = {
            index: entry.get("provenance", "") for index, entry in enumerate(data["boxes"])
        }
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"Invalid box JSON: {e}") from e
    return BoxInstance(boxes, d, k if k is not None else data.get("k", 2), provenance)


def read_box_instance(path: str, k: Optional[int] = None) -> BoxInstance:
    with open(path, encoding="utf-8") as f:
        return parse_box_text(f.read(), k)


def write_svg(box_instance: BoxInstance, path: str, scale: int = 4) -> None:
    """
    Draws the first two dimensions of the boxes as translucent rectangles, one fill per tag.
    """
    fills: Dict[str, str] = {
        CLAUSE: "#d62728",
        VARIABLE: "#1f77b4",
        CHAIN: "#2ca02c",
        CROSSING: "#ff7f0e",
        COVER: "#7f7f7f"
    }
    if box_instance.d < 2:
        box_instance = lift_boxes(box_instance, 2)
    boxes: Tuple[Box, ...] = box_instance.boxes
    xmin = min((box.bounds[0][0] for box in boxes), default=Fraction(0))
    xmax = max((box.bounds[0][1] for box in boxes), default=Fraction(1))
    ymin = min((box.bounds[1][0] for box in boxes), default=Fraction(0))
    ymax = max((box.bounds[1][1] for box in boxes), default=Fraction(1))
    width, height = float((xmax - xmin + 2) * scale), float((ymax - ymin + 2) * scale)
    lines: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}">'
    ]
    for box in boxes:
        (x0, x1), (y0, y1) = box.bounds[0], box.bounds[1]
        lines.append(
            f'  <rect x="{float((x0 - xmin + 1) * scale):g}" y="{float((ymax - y1 + 1) * scale):g}" '
            f'width="{float(max(x1 - x0, Fraction(1, 4)) * scale):g}" '
            f'height="{float(max(y1 - y0, Fraction(1, 4)) * scale):g}" '
            f'fill="{fills[box.tag]}" fill-opacity="0.35" stroke="black" stroke-width="0.5">'
            f'<title>{box.id}: {box_instance.provenance.get(box.id, box.tag)}</title></rect>'
        )
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
