import os
import json
import bisect
import math
import itertools
import numpy as np
from decimal import Decimal
from fractions import Fraction
from functools import reduce
from dataclasses import dataclass, field
from scripts.app_logger import get_logger
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union
from scripts.settings import (
    InputError,
    InstanceTooLarge,
    ORACLE_LIMIT_N,
    SEARCH_CHUNK,
    DECIMAL_DENOMINATOR_PRIMES
)

logger = get_logger(os.path.basename(__file__).replace(".py", ""))

Coord = Fraction
CoordLike = Union[Fraction, int, str, Decimal, float]

START: str = "start"
END: str = "end"


def parse_coord(value: CoordLike) -> Coord:
    """
    Converts a coordinate given as an int, a decimal or "p/q" string, a Decimal or a Fraction
    into an exact rational.

    Floats are converted through their shortest repr, so 0.2 becomes 1/5 and not the binary
    approximation.

    :param value: The raw coordinate.
    :return: The coordinate as a Fraction in lowest terms.
    :raises InputError: If the value is not a number.
    """
    if isinstance(value, bool):
        raise InputError(f"Coordinate must be a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        value = repr(value)
    try:
        return Fraction(value.strip() if isinstance(value, str) else value)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise InputError(f"Invalid coordinate {value!r}") from e


def format_coord(value: Coord) -> str:
    """
    Formats a coordinate as a finite decimal string when possible, else as "p/q".
    """
    denominator: int = value.denominator
    powers: Dict[int, int] = {}
    for prime in DECIMAL_DENOMINATOR_PRIMES:
        powers[prime] = 0
        while denominator % prime == 0:
            denominator //= prime
            powers[prime] += 1
    if denominator != 1:
        return f"{value.numerator}/{value.denominator}"
    digits: int = max(powers.values())
    if digits == 0:
        return str(value.numerator)
    scaled: int = value.numerator * 10 ** digits // value.denominator
    sign: str = "-" if scaled < 0 else ""
    integer_part, fraction_part = divmod(abs(scaled), 10 ** digits)
    return f"{sign}{integer_part}.{fraction_part:0{digits}d}".rstrip("0").rstrip(".")


def scale_to_integers(coords: Sequence[Coord], factor: int = 1) -> Tuple[List[int], int]:
    """
    Maps rationals to integers sharing one denominator, preserving order and equality.

    :param coords: The coordinates to scale.
    :param factor: An extra multiplier (2 keeps midpoints integral).
    :return: The scaled integers and the common scale.
    """
    denominators: set = {coord.denominator for coord in coords}
    scale: int = reduce(math.lcm, denominators, 1) * factor
    return [coord.numerator * (scale // coord.denominator) for coord in coords], scale


@dataclass(frozen=True)
class Interval:
    id: int
    lo: Coord
    hi: Coord

    def __post_init__(self):
        if self.lo > self.hi:
            raise InputError(f"Interval {self.id} has lo {self.lo} > hi {self.hi}")

    def contains(self, x: Coord) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class Instance:
    intervals: Tuple[Interval, ...]
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
            raise InputError(f"k must be a positive integer, got {self.k!r}")
        for index, interval in enumerate(self.intervals):
            if interval.id != index:
                raise InputError(f"Interval ids must be 0..n-1 in order, got {interval.id} at {index}")

    @property
    def n(self) -> int:
        return len(self.intervals)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[CoordLike]], k: int) -> "Instance":
        intervals: List[Interval] = []
        for index, pair in enumerate(pairs):
            try:
                if isinstance(pair, (str, dict)) or len(pair) != 2:
                    raise InputError(f"Interval {index} must be a [lo, hi] pair, got {pair!r}")
                lo, hi = pair[0], pair[1]
            except (TypeError, KeyError, IndexError) as e:
                raise InputError(f"Interval {index} must be a [lo, hi] pair, got {pair!r}") from e
            intervals.append(Interval(index, parse_coord(lo), parse_coord(hi)))
        return cls(tuple(intervals), k)

    def subset(self, ids: Sequence[int], k: int) -> "Instance":
        """
        Builds the instance of the given intervals, renumbered 0..len(ids)-1 in the given order.
        """
        return Instance(
            tuple(Interval(index, self.intervals[i].lo, self.intervals[i].hi) for index, i in enumerate(ids)),
            k
        )


@dataclass(frozen=True)
class Coloring:
    colors: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.colors)

    def check(self, n: int, k: int) -> None:
        """
        Checks that the coloring fits an instance of n intervals and k colors.
        :raises InputError: On a length mismatch or a color outside 1..k.
        """
        if len(self.colors) != n:
            raise InputError(f"Coloring has {len(self.colors)} entries, instance has {n} intervals")
        if bad := [c for c in self.colors if not isinstance(c, int) or isinstance(c, bool) or not 1 <= c <= k]:
            raise InputError(f"Colors must lie in 1..{k}, got {bad[:5]}")


class Event(NamedTuple):
    rank: int
    interval_id: int
    kind: str


class Region(NamedTuple):
    lo: Coord
    hi: Optional[Coord]
    row: int

    @property
    def witness(self) -> Coord:
        if self.hi is None or self.hi == self.lo:
            return self.lo
        return (self.lo + self.hi) / 2


class RegionCounts(NamedTuple):
    lo: Coord
    hi: Coord
    counts: Tuple[int, ...]


@dataclass(frozen=True)
class ImbalanceReport:
    value: int
    witness: Coord
    per_region: Optional[Tuple[RegionCounts, ...]] = None


@dataclass(frozen=True)
class NormalizedInstance:
    source: Instance
    start_rank: Tuple[int, ...]
    end_rank: Tuple[int, ...]
    events: Tuple[Event, ...] = field(repr=False, compare=False)
    rank_keys: Tuple[int, ...] = field(repr=False, compare=False)

    def region_cliques(self) -> List[FrozenSet[int]]:
        """
        Returns the clique of every rank-region: entry r holds the intervals active after event r.
        """
        active: set = set()
        cliques: List[FrozenSet[int]] = [frozenset()]
        for event in self.events:
            if event.kind == START:
                active.add(event.interval_id)
            else:
                active.discard(event.interval_id)
            cliques.append(frozenset(active))
        return cliques


def normalize(instance: Instance) -> NormalizedInstance:
    """
    Ranks the 2n events of an instance.

    Equal coordinates put all starts before all ends, then order by interval id. This is the
    symbolic version of pushing coinciding endpoints apart by a tiny amount: starts move left,
    ends move right, so every clique of the closed intervals survives as a rank-region clique.

    :param instance: The instance to normalize.
    :return: The normalized instance.
    """
    n: int = instance.n
    coords: List[Coord] = [interval.lo for interval in instance.intervals] + \
                          [interval.hi for interval in instance.intervals]
    scaled, _ = scale_to_integers(coords)
    keys: List[Tuple[int, int, int]] = [(scaled[i], 0, i) for i in range(n)] + \
                                       [(scaled[n + i], 1, i) for i in range(n)]
    keys.sort()
    start_rank: List[int] = [0] * n
    end_rank: List[int] = [0] * n
    events: List[Event] = []
    for rank, (_, kind, interval_id) in enumerate(keys, start=1):
        if kind == 0:
            start_rank[interval_id] = rank
            events.append(Event(rank, interval_id, START))
        else:
            end_rank[interval_id] = rank
            events.append(Event(rank, interval_id, END))
    return NormalizedInstance(
        source=instance,
        start_rank=tuple(start_rank),
        end_rank=tuple(end_rank),
        events=tuple(events),
        rank_keys=tuple(key[0] for key in keys)
    )


def point_regions(norm: NormalizedInstance) -> List[Region]:
    """
    Lists the regions whose cliques are exactly the point cliques S(x).

    For every distinct coordinate x there is the point region [x, x] (all intervals starting
    at x already counted, none ending at x removed yet) and the open gap up to the next distinct
    coordinate. Each region points at the row of the rank-region carrying its clique.

    :param norm: The normalized instance.
    :return: The regions in coordinate order.
    """
    events: Tuple[Event, ...] = norm.events
    intervals: Tuple[Interval, ...] = norm.source.intervals
    regions: List[Region] = []
    index: int = 0
    total: int = len(events)
    while index < total:
        key: int = norm.rank_keys[index]
        first: int = index
        while index < total and norm.rank_keys[index] == key:
            index += 1
        starts: int = sum(1 for event in events[first:index] if event.kind == START)
        event: Event = events[first]
        coord: Coord = intervals[event.interval_id].lo if event.kind == START else intervals[event.interval_id].hi
        regions.append(Region(coord, coord, first + starts))
        if index < total:
            following: Event = events[index]
            following_interval: Interval = intervals[following.interval_id]
            next_coord: Coord = following_interval.lo if following.kind == START else following_interval.hi
            regions.append(Region(coord, next_coord, index))
    return regions


def color_counts(norm: NormalizedInstance, coloring: Coloring, k: int) -> np.ndarray:
    """
    Per-color counts after every event: row r holds the counts of the rank-region after event r.
    """
    n: int = norm.source.n
    delta: np.ndarray = np.zeros((2 * n + 1, k), dtype=np.int64)
    if n:
        colors: np.ndarray = np.asarray(coloring.colors, dtype=np.int64) - 1
        delta[np.asarray(norm.start_rank), colors] = 1
        delta[np.asarray(norm.end_rank), colors] = -1
    return np.cumsum(delta, axis=0)


def imbalance(instance: Instance, coloring: Coloring, detailed: bool = False) -> ImbalanceReport:
    """
    Computes the maximum over all points of the spread between the largest and the smallest
    color class (zero-count colors included).

    :param instance: The interval instance.
    :param coloring: A coloring aligned with the instance.
    :param detailed: Whether to attach the per-region counts.
    :return: The imbalance report.
    :raises InputError: If the coloring does not fit the instance.
    """
    coloring.check(instance.n, instance.k)
    if instance.n == 0:
        return ImbalanceReport(0, Fraction(0), () if detailed else None)
    norm: NormalizedInstance = normalize(instance)
    regions: List[Region] = point_regions(norm)
    counts: np.ndarray = color_counts(norm, coloring, instance.k)[[region.row for region in regions]]
    spreads: np.ndarray = counts.max(axis=1) - counts.min(axis=1)
    worst: int = int(np.argmax(spreads))
    per_region: Optional[Tuple[RegionCounts, ...]] = None
    if detailed:
        per_region = tuple(
            RegionCounts(region.lo, region.hi, tuple(int(count) for count in row))
            for region, row in zip(regions, counts)
        )
    return ImbalanceReport(int(spreads[worst]), regions[worst].witness, per_region)


def counts_at(instance: Instance, coloring: Coloring, points: Sequence[Coord]) -> np.ndarray:
    """
    Per-color counts of the intervals covering each given point, read off the sweep.

    :param instance: The interval instance.
    :param coloring: A coloring aligned with the instance.
    :param points: The query points.
    :return: A (points x k) integer matrix.
    """
    coloring.check(instance.n, instance.k)
    if instance.n == 0:
        return np.zeros((len(points), instance.k), dtype=np.int64)
    norm: NormalizedInstance = normalize(instance)
    regions: List[Region] = point_regions(norm)
    counts: np.ndarray = color_counts(norm, coloring, instance.k)
    # regions alternate point, gap, point, ...; the last point has no gap
    coords: List[Coord] = [region.lo for region in regions[0::2]]
    rows: List[int] = []
    for point in points:
        group: int = bisect.bisect_right(coords, point) - 1
        if group < 0:
            rows.append(0)
        elif coords[group] == point:
            rows.append(regions[2 * group].row)
        elif 2 * group + 1 < len(regions):
            rows.append(regions[2 * group + 1].row)
        else:
            rows.append(len(counts) - 1)
    return counts[rows]


def is_balanced(instance: Instance, coloring: Coloring) -> bool:
    return imbalance(instance, coloring).value <= 1


def depths(instance: Instance) -> List[int]:
    """
    Number of intervals covering each point region and gap, in coordinate order.
    """
    if instance.n == 0:
        return []
    norm: NormalizedInstance = normalize(instance)
    depth: np.ndarray = color_counts(norm, Coloring((1,) * instance.n), 1)[:, 0]
    return [int(depth[region.row]) for region in point_regions(norm)]


def divisibility_predicts_zero(instance: Instance) -> bool:
    """
    True iff every point clique has a size divisible by k, i.e. the minimum imbalance is 0.
    """
    return all(depth % instance.k == 0 for depth in depths(instance))


def point_cliques(instance: Instance) -> List[Tuple[Coord, FrozenSet[int]]]:
    """
    Returns every point clique S(x) together with a witness point, in coordinate order.
    """
    if instance.n == 0:
        return []
    norm: NormalizedInstance = normalize(instance)
    cliques: List[FrozenSet[int]] = norm.region_cliques()
    return [(region.witness, cliques[region.row]) for region in point_regions(norm)]


def membership_matrix(cliques: Iterable[FrozenSet[int]], n: int) -> np.ndarray:
    """
    Stacks distinct non-empty cliques into a boolean (cliques x items) matrix.
    """
    distinct: List[FrozenSet[int]] = sorted({clique for clique in cliques if clique}, key=sorted)
    matrix: np.ndarray = np.zeros((len(distinct), n), dtype=bool)
    for row, clique in enumerate(distinct):
        matrix[row, list(clique)] = True
    return matrix


def search_min_spread(
    membership: np.ndarray,
    n: int,
    k: int,
    weights: Optional[Sequence[int]] = None,
    lower_bound: int = 0,
    limit_n: Optional[int] = None
) -> Tuple[int, Tuple[int, ...]]:
    """
    Exhaustively minimizes the (weighted) spread over the rows of a membership matrix.

    The first item keeps color 1, the remaining k^(n-1) colorings are scanned in lexicographic
    order in vectorized batches, and the lexicographically smallest minimizer is returned. The
    scan stops early once a batch reaches lower_bound.

    :param membership: Boolean (cliques x n) matrix.
    :param n: The number of items.
    :param k: The number of colors.
    :param weights: Optional positive item weights.
    :param lower_bound: A value no coloring can beat.
    :param limit_n: Largest n accepted; defaults to ORACLE_LIMIT_N.
    :return: The minimum spread and a minimizing coloring.
    :raises InstanceTooLarge: If n exceeds the limit.
    """
    limit: int = ORACLE_LIMIT_N if limit_n is None else limit_n
    if n > limit:
        raise InstanceTooLarge(f"Exhaustive search refused: n = {n} > {limit}")
    if n == 0:
        return 0, ()
    weight_row: np.ndarray = np.ones(n, dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
    if membership.shape[0] == 0:
        membership = np.zeros((1, n), dtype=bool)
    weighted: np.ndarray = (membership.astype(np.int64) * weight_row[None, :]).T
    best_value: Optional[int] = None
    best_colors: Tuple[int, ...] = ()
    tails = itertools.product(range(1, k + 1), repeat=n - 1)
    while chunk := list(itertools.islice(tails, SEARCH_CHUNK)):
        batch: np.ndarray = np.ones((len(chunk), n), dtype=np.int64)
        if n > 1:
            batch[:, 1:] = np.asarray(chunk, dtype=np.int64)
        highest: Optional[np.ndarray] = None
        lowest: Optional[np.ndarray] = None
        for color in range(1, k + 1):
            counts: np.ndarray = (batch == color).astype(np.int64) @ weighted
            highest = counts if highest is None else np.maximum(highest, counts)
            lowest = counts if lowest is None else np.minimum(lowest, counts)
        spreads: np.ndarray = (highest - lowest).max(axis=1)
        index: int = int(np.argmin(spreads))
        if best_value is None or int(spreads[index]) < best_value:
            best_value = int(spreads[index])
            best_colors = tuple(int(color) for color in batch[index])
        if best_value <= lower_bound:
            break
    return best_value, best_colors


def min_imbalance_oracle(instance: Instance, limit_n: Optional[int] = None) -> Tuple[int, Coloring]:
    """
    Finds the minimum imbalance of an instance by exhaustive search.

    :param instance: The interval instance, n at most limit_n (default ORACLE_LIMIT_N).
    :param limit_n: Largest n accepted.
    :return: The minimum imbalance and the lexicographically smallest coloring attaining it.
    """
    lower_bound: int = 0 if divisibility_predicts_zero(instance) else 1
    membership: np.ndarray = membership_matrix((clique for _, clique in point_cliques(instance)), instance.n)
    value, colors = search_min_spread(membership, instance.n, instance.k, lower_bound=lower_bound, limit_n=limit_n)
    logger.debug(f"Oracle: n={instance.n}, k={instance.k}, minimum imbalance {value}")
    return value, Coloring(colors)


def parse_instance_text(text: str, k: Optional[int] = None) -> Instance:
    """
    Parses an instance given as JSON {"k": .., "intervals": [[lo, hi], ...]} or as plain text
    (first line "n k", then n lines "lo hi"). An empty text is the empty instance.

    :param text: The file content.
    :param k: Overrides the k stored in the file when given.
    :return: The parsed instance.
    :raises InputError: If the content is malformed.
    """
    stripped: str = text.strip()
    if not stripped:
        return Instance((), k or 1)
    if stripped.startswith("{"):
        try:
            data: dict = json.loads(stripped, parse_float=str)
        except json.JSONDecodeError as e:
            raise InputError(f"Invalid instance JSON: {e}") from e
        if not isinstance(data.get("intervals"), list):
            raise InputError("Instance JSON needs an 'intervals' list")
        if k is None and "k" not in data:
            raise InputError("Instance JSON needs 'k' unless --k is given")
        return Instance.from_pairs(data["intervals"], k if k is not None else data["k"])
    lines: List[str] = [line for line in stripped.splitlines() if line.strip()]
    header: List[str] = lines[0].split()
    if len(header) != 2 or not all(part.lstrip("-").isdigit() for part in header):
        raise InputError(f"Line 1: expected 'n k', got {lines[0]!r}")
    n, file_k = int(header[0]), int(header[1])
    if len(lines) - 1 != n:
        raise InputError(f"Header announces {n} intervals, file has {len(lines) - 1}")
    pairs: List[List[str]] = []
    for number, line in enumerate(lines[1:], start=2):
        parts: List[str] = line.split()
        if len(parts) != 2:
            raise InputError(f"Line {number}: expected 'lo hi', got {line!r}")
        pairs.append(parts)
    return Instance.from_pairs(pairs, k if k is not None else file_k)


def read_instance(path: str, k: Optional[int] = None) -> Instance:
    with open(path, encoding="utf-8") as f:
        return parse_instance_text(f.read(), k)


def instance_to_json(instance: Instance) -> dict:
    return {
        "k": instance.k,
        "intervals": [[format_coord(interval.lo), format_coord(interval.hi)] for interval in instance.intervals]
    }


def parse_coloring_text(text: str) -> Coloring:
    try:
        data: dict = json.loads(text)
        colors: list = data["colors"]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise InputError(f"Coloring JSON needs a 'colors' list: {e}") from e
    if not isinstance(colors, list):
        raise InputError("Coloring JSON needs a 'colors' list")
    return Coloring(tuple(colors))


def read_coloring(path: str) -> Coloring:
    with open(path, encoding="utf-8") as f:
        return parse_coloring_text(f.read())


def coloring_to_json(coloring: Coloring, value: int) -> dict:
    return {"colors": list(coloring.colors), "imbalance": value}
