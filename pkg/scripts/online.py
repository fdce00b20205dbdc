import os
import numpy as np
from fractions import Fraction
from abc import ABC, abstractmethod
from dataclasses import dataclass
from scripts.app_logger import get_logger
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Type
from scripts.settings import InputError, InvariantViolation, OnlineProtocolError, ONLINE_BUDGET_FACTOR
from scripts.core import (
    Coord,
    CoordLike,
    Coloring,
    Instance,
    Interval,
    parse_coord,
    format_coord,
    counts_at,
    imbalance
)

logger = get_logger(os.path.basename(__file__).replace(".py", ""))

TRACKED: Tuple[int, int] = (1, 2)


class OnlineHistory(NamedTuple):
    intervals: Sequence[Interval]
    colors: Sequence[int]


class OnlineAlgorithm(ABC):
    """
    An online coloring rule: intervals arrive one by one and each color is fixed on arrival.
    """
    name: str = "online"

    def __init__(self):
        self.k: int = 1

    def init(self, k: int) -> None:
        self.k = k

    @abstractmethod
    def assign(self, interval: Interval, history: OnlineHistory) -> int:
        """
        Returns the color of the newly presented interval.

        :param interval: The presented interval.
        :param history: All earlier intervals and the colors chosen for them.
        :return: A color in 1..k.
        """
        pass


class RoundRobin(OnlineAlgorithm):
    name: str = "round_robin"

    def assign(self, interval: Interval, history: OnlineHistory) -> int:
        return len(history.colors) % self.k + 1


class GreedyLeastLoaded(OnlineAlgorithm):
    """
    Picks the color used least among earlier intervals covering the new startpoint, lowest on ties.
    """
    name: str = "greedy_least_loaded"

    def assign(self, interval: Interval, history: OnlineHistory) -> int:
        counts: List[int] = [0] * self.k
        for earlier, color in zip(history.intervals, history.colors):
            if earlier.contains(interval.lo):
                counts[color - 1] += 1
        return counts.index(min(counts)) + 1


class SeededRandom(OnlineAlgorithm):
    name: str = "seeded_random"

    def __init__(self, seed: int = 0):
        super().__init__()
        self.seed: int = seed
        self.rng: np.random.Generator = np.random.default_rng(seed)

    def init(self, k: int) -> None:
        super().init(k)
        self.rng = np.random.default_rng(self.seed)

    def assign(self, interval: Interval, history: OnlineHistory) -> int:
        return int(self.rng.integers(1, self.k + 1))


class ConstantColor(OnlineAlgorithm):
    name: str = "constant"

    def __init__(self, color: int = 1):
        super().__init__()
        self.color: int = color

    def assign(self, interval: Interval, history: OnlineHistory) -> int:
        return self.color


ALGORITHMS: Dict[str, Type[OnlineAlgorithm]] = {
    "round_robin": RoundRobin,
    "greedy_least_loaded": GreedyLeastLoaded,
    "greedy": GreedyLeastLoaded,
    "seeded_random": SeededRandom,
    "random": SeededRandom,
    "constant": ConstantColor
}


def make_algorithm(name: str, seed: int = 0, color: int = 1) -> OnlineAlgorithm:
    """
    Builds a builtin online algorithm by name.

    :raises InputError: If the name is unknown.
    """
    if name not in ALGORITHMS:
        raise InputError(f"Unknown online algorithm {name!r}, expected one of {sorted(ALGORITHMS)}")
    algorithm_class: Type[OnlineAlgorithm] = ALGORITHMS[name]
    if algorithm_class is SeededRandom:
        return SeededRandom(seed)
    if algorithm_class is ConstantColor:
        return ConstantColor(color)
    return algorithm_class()


def _checked_color(algorithm: OnlineAlgorithm, interval: Interval, history: OnlineHistory, k: int) -> int:
    color = algorithm.assign(interval, history)
    if isinstance(color, bool) or not isinstance(color, (int, np.integer)) or not 1 <= color <= k:
        raise OnlineProtocolError(f"{algorithm.name} returned color {color!r} outside 1..{k}")
    return int(color)


def run_online(
    algorithm: OnlineAlgorithm,
    stream: Iterable[Sequence[CoordLike]],
    k: int
) -> Tuple[Coloring, List[int]]:
    """
    Presents intervals to an online algorithm and measures the imbalance after every step.

    :param algorithm: The online algorithm.
    :param stream: [lo, hi] pairs in nondecreasing order of lo.
    :param k: The number of colors.
    :return: The final coloring and the imbalance of each prefix.
    :raises OnlineProtocolError: If the order is violated or a color is outside 1..k.
    """
    algorithm.init(k)
    intervals: List[Interval] = []
    colors: List[int] = []
    trace: List[int] = []
    for index, pair in enumerate(stream):
        interval: Interval = Interval(index, parse_coord(pair[0]), parse_coord(pair[1]))
        if intervals and interval.lo < intervals[-1].lo:
            raise OnlineProtocolError(f"Interval {index} starts at {interval.lo}, before {intervals[-1].lo}")
        colors.append(_checked_color(algorithm, interval, OnlineHistory(intervals, colors), k))
        intervals.append(interval)
        trace.append(imbalance(Instance(tuple(intervals), k), Coloring(tuple(colors))).value)
    return Coloring(tuple(colors)), trace


@dataclass(frozen=True)
class Transcript:
    """
    One adversary run. Per presentation: the interval, the chosen color, the round it belongs to,
    the signed imbalances over L and R after it, and the running maximum imbalance.
    """
    k: int
    intervals: Tuple[Interval, ...]
    colors: Tuple[int, ...]
    rounds: Tuple[int, ...]
    simb_left: Tuple[int, ...]
    simb_right: Tuple[int, ...]
    imbalances: Tuple[int, ...]
    plus: int
    minus: int
    stacked: int
    tracked: Tuple[int, int] = TRACKED

    @property
    def final_imbalance(self) -> int:
        return self.imbalances[-1] if self.imbalances else 0

    @property
    def completed_rounds(self) -> int:
        return self.plus + self.minus

    def instance(self) -> Instance:
        return Instance(self.intervals, self.k)

    def coloring(self) -> Coloring:
        return Coloring(self.colors)

    def to_records(self) -> List[dict]:
        return [
            {
                "step": step + 1,
                "round": self.rounds[step],
                "interval": [format_coord(interval.lo), format_coord(interval.hi)],
                "color": self.colors[step],
                "simb_left": self.simb_left[step],
                "simb_right": self.simb_right[step],
                "imbalance": self.imbalances[step]
            }
            for step, interval in enumerate(self.intervals)
        ]


def adversary_bound(t: int) -> int:
    return (t + 2) // 3


def _midpoint(bounds: Tuple[Coord, Coord]) -> Coord:
    return (bounds[0] + bounds[1]) / 2


def _signed(instance: Instance, coloring: Coloring, point: Coord) -> int:
    counts: np.ndarray = counts_at(instance, coloring, [point])[0]
    return int(counts[TRACKED[0] - 1] - counts[TRACKED[1] - 1])


def adversary_general(
    algorithm: OnlineAlgorithm,
    k: int,
    t: int,
    repeat_budget: Optional[int] = None
) -> Transcript:
    """
    Forces an online algorithm into unbounded imbalance.

    Starting with L = [0, 1] and R = [2, 3], every round presents the interval between the middles
    of L and R. Color 1 counts +1 and color 2 counts -1: after +1 R shrinks to its left half, after
    -1 to its right half, and L always shrinks to its right half. Over R the signed imbalance is then
    the number of +1 rounds, over L the difference of +1 and -1 rounds. Any other color is answered
    by re-presenting the interval with a startpoint moved up a geometric step towards the right end
    of L; when the budget runs out the run stops, and the stacked copies carry the imbalance.

    :param algorithm: The online algorithm to attack.
    :param k: The number of colors, at least 2.
    :param t: The number of rounds.
    :param repeat_budget: Presentations allowed per round; ONLINE_BUDGET_FACTOR * t when omitted.
    :return: The transcript.
    :raises InvariantViolation: If the signed imbalances drift from the round accounting.
    """
    if k < 2 or t < 1:
        raise InputError(f"The adversary needs k >= 2 and t >= 1, got k = {k}, t = {t}")
    budget: int = ONLINE_BUDGET_FACTOR * t if repeat_budget is None else repeat_budget
    algorithm.init(k)
    left: Tuple[Coord, Coord] = (Fraction(0), Fraction(1))
    right: Tuple[Coord, Coord] = (Fraction(2), Fraction(3))
    intervals: List[Interval] = []
    colors: List[int] = []
    rounds: List[int] = []
    simb_left: List[int] = []
    simb_right: List[int] = []
    imbalances: List[int] = []
    plus, minus, stacked = 0, 0, 0
    worst: int = 0
    for round_number in range(1, t + 1):
        start: Coord = _midpoint(left)
        accepted: Optional[int] = None
        for attempt in range(budget):
            # startpoints s, s + (Lr - s)/2, s + 3(Lr - s)/4, ... stay inside L
            lo: Coord = start + (left[1] - start) * (1 - Fraction(1, 2 ** attempt))
            interval: Interval = Interval(len(intervals), lo, _midpoint(right))
            color: int = _checked_color(algorithm, interval, OnlineHistory(intervals, colors), k)
            intervals.append(interval)
            colors.append(color)
            rounds.append(round_number)
            if color in TRACKED:
                accepted = color
                break
        if accepted == TRACKED[0]:
            plus += 1
            right = (right[0], _midpoint(right))
        elif accepted == TRACKED[1]:
            minus += 1
            right = (_midpoint(right), right[1])
        if accepted is not None:
            left = (intervals[-1].lo, left[1])
        instance: Instance = Instance(tuple(intervals), k)
        coloring: Coloring = Coloring(tuple(colors))
        left_value: int = _signed(instance, coloring, _midpoint(left))
        right_value: int = _signed(instance, coloring, _midpoint(right))
        worst = max(worst, imbalance(instance, coloring).value)
        presented: int = len(intervals) - len(imbalances)
        simb_left.extend([left_value] * presented)
        simb_right.extend([right_value] * presented)
        imbalances.extend([worst] * presented)
        if accepted is None:
            stacked = budget
            logger.debug(f"Round {round_number}: budget {budget} exhausted by untracked colors")
            break
        if right_value != plus or left_value != plus - minus:
            raise InvariantViolation(
                f"Round {round_number}: simb(R) = {right_value}, simb(L) = {left_value}, "
                f"expected {plus} and {plus - minus}"
            )
    logger.debug(f"Adversary: k={k}, rounds={plus + minus}, +1={plus}, -1={minus}, imbalance={worst}")
    return Transcript(
        k=k,
        intervals=tuple(intervals),
        colors=tuple(colors),
        rounds=tuple(rounds),
        simb_left=tuple(simb_left),
        simb_right=tuple(simb_right),
        imbalances=tuple(imbalances),
        plus=plus,
        minus=minus,
        stacked=stacked
    )


def adversary_k2(algorithm: OnlineAlgorithm, t: int) -> Transcript:
    return adversary_general(algorithm, 2, t)
