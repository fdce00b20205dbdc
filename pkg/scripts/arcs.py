import os
import json
import numpy as np
from fractions import Fraction
from dataclasses import dataclass
from scripts.k_color import k_color
from scripts.app_logger import get_logger
from typing import List, Optional, Sequence, Tuple
from scripts.settings import InputError
from scripts.core import (
    Coord,
    CoordLike,
    Coloring,
    Instance,
    Interval,
    ImbalanceReport,
    RegionCounts,
    parse_coord,
    format_coord,
    scale_to_integers,
    membership_matrix,
    search_min_spread
)

logger = get_logger(os.path.basename(__file__).replace(".py", ""))


@dataclass(frozen=True)
class Arc:
    id: int
    start: Coord
    length: Coord


@dataclass(frozen=True)
class ArcInstance:
    arcs: Tuple[Arc, ...]
    circumference: Coord
    k: int

    def __post_init__(self):
        if self.circumference <= 0:
            raise InputError(f"Circumference must be positive, got {self.circumference}")
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
            raise InputError(f"k must be a positive integer, got {self.k!r}")
        for index, arc in enumerate(self.arcs):
            if arc.id != index:
                raise InputError(f"Arc ids must be 0..n-1 in order, got {arc.id} at {index}")
            if not 0 <= arc.start < self.circumference:
                raise InputError(f"Arc {arc.id} starts at {arc.start}, outside [0, {self.circumference})")
            if arc.length <= 0:
                raise InputError(f"Arc {arc.id} has non-positive length {arc.length}")

    @property
    def n(self) -> int:
        return len(self.arcs)

    def is_full(self, arc: Arc) -> bool:
        return arc.length >= self.circumference

    def wraps(self, arc: Arc) -> bool:
        return not self.is_full(arc) and arc.start + arc.length > self.circumference

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[CoordLike]], circumference: CoordLike, k: int) -> "ArcInstance":
        arcs: List[Arc] = []
        for index, pair in enumerate(pairs):
            try:
                if isinstance(pair, (str, dict)) or len(pair) != 2:
                    raise InputError(f"Arc {index} must be a [start, length] pair, got {pair!r}")
                start, length = pair[0], pair[1]
            except (TypeError, KeyError, IndexError) as e:
                raise InputError(f"Arc {index} must be a [start, length] pair, got {pair!r}") from e
            arcs.append(Arc(index, parse_coord(start), parse_coord(length)))
        return cls(tuple(arcs), parse_coord(circumference), k)


def unfold(arc_instance: ArcInstance) -> Tuple[Instance, Tuple[int, ...]]:
    """
    Cuts the circle at zero and lays the arcs out on the line.

    An arc that does not pass zero keeps its position and an arc passing zero is shifted left by
    one circumference so that it straddles zero. A circle point p then has the line images p and
    p - C. Every full-circle arc becomes the common interval [0, h], h halfway between the last
    coordinate below C and C, so it is counted in exactly one image of every circle point and the
    clique of p is the disjoint union of two line cliques.

    :param arc_instance: The arcs.
    :return: The interval instance (interval i is arc i) and the interval-to-arc id map.
    """
    circumference: Coord = arc_instance.circumference
    pairs: List[Optional[Tuple[Coord, Coord]]] = []
    for arc in arc_instance.arcs:
        if arc_instance.is_full(arc):
            pairs.append(None)
        elif arc_instance.wraps(arc):
            pairs.append((arc.start - circumference, arc.start + arc.length - circumference))
        else:
            pairs.append((arc.start, arc.start + arc.length))
    last: Coord = max(
        (coord for pair in pairs if pair is not None for coord in pair if 0 <= coord < circumference),
        default=Fraction(0)
    )
    full: Tuple[Coord, Coord] = (Fraction(0), (last + circumference) / 2)
    intervals: Tuple[Interval, ...] = tuple(
        Interval(index, *(pair if pair is not None else full)) for index, pair in enumerate(pairs)
    )
    return Instance(intervals, arc_instance.k), tuple(range(arc_instance.n))


def arc_samples(arc_instance: ArcInstance) -> List[Coord]:
    """
    Points of the circle covering every distinct clique: all arc endpoints and the midpoints of the
    gaps between them, including the gap across zero.
    """
    circumference: Coord = arc_instance.circumference
    positions: List[Coord] = sorted({
        point % circumference
        for arc in arc_instance.arcs if not arc_instance.is_full(arc)
        for point in (arc.start, arc.start + arc.length)
    })
    if not positions:
        return [Fraction(0)]
    samples: List[Coord] = []
    for position, following in zip(positions, positions[1:] + [positions[0] + circumference]):
        samples.append(position)
        samples.append(((position + following) / 2) % circumference)
    return samples


def arc_membership(arc_instance: ArcInstance) -> Tuple[List[Coord], np.ndarray]:
    """
    Returns the sample points and the boolean (samples x arcs) matrix of which arc covers which point.
    """
    samples: List[Coord] = arc_samples(arc_instance)
    n: int = arc_instance.n
    scaled, _ = scale_to_integers(
        [arc_instance.circumference] + samples +
        [arc.start for arc in arc_instance.arcs] + [arc.length for arc in arc_instance.arcs]
    )
    circumference: int = scaled[0]
    points: np.ndarray = np.array(scaled[1:1 + len(samples)], dtype=object)
    starts: np.ndarray = np.array(scaled[1 + len(samples):1 + len(samples) + n], dtype=object)
    lengths: np.ndarray = np.array(scaled[1 + len(samples) + n:], dtype=object)
    if n == 0:
        return samples, np.zeros((len(samples), 0), dtype=bool)
    offsets: np.ndarray = (points[:, None] - starts[None, :]) % circumference
    membership: np.ndarray = ((offsets <= lengths[None, :]) | (lengths[None, :] >= circumference)).astype(bool)
    return samples, membership


def arc_imbalance(arc_instance: ArcInstance, coloring: Coloring, detailed: bool = False) -> ImbalanceReport:
    """
    Maximum over the circle of the spread between the largest and the smallest color class.

    :param arc_instance: The arcs.
    :param coloring: A coloring aligned with the arcs.
    :param detailed: Whether to attach per-sample counts.
    :return: The imbalance report; witnesses are points of [0, circumference).
    """
    coloring.check(arc_instance.n, arc_instance.k)
    samples, membership = arc_membership(arc_instance)
    one_hot: np.ndarray = np.zeros((arc_instance.n, arc_instance.k), dtype=np.int64)
    one_hot[np.arange(arc_instance.n), np.asarray(coloring.colors, dtype=np.int64) - 1] = 1
    counts: np.ndarray = membership.astype(np.int64) @ one_hot
    spreads: np.ndarray = counts.max(axis=1) - counts.min(axis=1)
    worst: int = int(np.argmax(spreads))
    per_region: Optional[Tuple[RegionCounts, ...]] = None
    if detailed:
        per_region = tuple(
            RegionCounts(sample, sample, tuple(int(count) for count in row)) for sample, row in zip(samples, counts)
        )
    return ImbalanceReport(int(spreads[worst]), samples[worst], per_region)


def arc_color(arc_instance: ArcInstance) -> Coloring:
    """
    Colors arcs with imbalance at most two: unfold, color the intervals, and pull the colors back.
    Each circle point has at most two images on the line, hence the bound.
    """
    instance, arc_ids = unfold(arc_instance)
    interval_coloring: Coloring = k_color(instance)
    colors: List[int] = [0] * arc_instance.n
    for interval_id, arc_id in enumerate(arc_ids):
        colors[arc_id] = interval_coloring.colors[interval_id]
    return Coloring(tuple(colors))


def min_arc_imbalance_oracle(arc_instance: ArcInstance, limit_n: Optional[int] = None) -> Tuple[int, Coloring]:
    """
    Exact minimum imbalance of a small arc instance by exhaustive search.
    """
    _, membership = arc_membership(arc_instance)
    divisible: bool = all(int(size) % arc_instance.k == 0 for size in membership.sum(axis=1))
    cliques = (frozenset(np.flatnonzero(row).tolist()) for row in membership)
    value, colors = search_min_spread(
        membership_matrix(cliques, arc_instance.n),
        arc_instance.n,
        arc_instance.k,
        lower_bound=0 if divisible else 1,
        limit_n=limit_n
    )
    logger.debug(f"Arc oracle: n={arc_instance.n}, k={arc_instance.k}, minimum imbalance {value}")
    return value, Coloring(colors)


def parse_arc_text(text: str, k: Optional[int] = None) -> ArcInstance:
    """
    Parses {"k": .., "circumference": .., "arcs": [[start, length], ...]}.
    """
    try:
        data: dict = json.loads(text, parse_float=str)
    except json.JSONDecodeError as e:
        raise InputError(f"Invalid arc JSON: {e}") from e
    if not isinstance(data, dict) or not isinstance(data.get("arcs"), list) or "circumference" not in data:
        raise InputError("Arc JSON needs 'circumference' and an 'arcs' list")
    if k is None and "k" not in data:
        raise InputError("Arc JSON needs 'k' unless --k is given")
    return ArcInstance.from_pairs(data["arcs"], data["circumference"], k if k is not None else data["k"])


def read_arc_instance(path: str, k: Optional[int] = None) -> ArcInstance:
    with open(path, encoding="utf-8") as f:
        return parse_arc_text(f.read(), k)


def arc_instance_to_json(arc_instance: ArcInstance) -> dict:
    return {
        "k": arc_instance.k,
        "circumference": format_coord(arc_instance.circumference),
        "arcs": [[format_coord(arc.start), format_coord(arc.length)] for arc in arc_instance.arcs]
    }
