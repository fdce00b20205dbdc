import pytest
import numpy as np
from fractions import Fraction
from typing import Callable, List, Tuple
from scripts.core import Instance
from scripts.arcs import ArcInstance
from scripts.hardness import NaeFormula


def random_pairs(
    rng: np.random.Generator,
    n: int,
    span: int = 0,
    max_length: int = 6,
    collide: float = 0.3
) -> List[Tuple[Fraction, Fraction]]:
    """
    Draws n short intervals with half-integer endpoints; a share of the startpoints reuses an
    earlier coordinate so that events coincide.

    :param rng: The random generator.
    :param n: The number of intervals.
    :param span: Startpoints lie in [0, span); 2n when 0.
    :param max_length: Largest interval length.
    :param collide: Probability of reusing an earlier coordinate.
    :return: The [lo, hi] pairs.
    """
    span = span or max(4, 2 * n)
    used: List[Fraction] = []
    pairs: List[Tuple[Fraction, Fraction]] = []
    for _ in range(n):
        if used and rng.random() < collide:
            lo: Fraction = used[int(rng.integers(len(used)))]
        else:
            lo = Fraction(int(rng.integers(0, 2 * span)), 2)
        hi: Fraction = lo + Fraction(int(rng.integers(0, 2 * max_length + 1)), 2)
        if used and rng.random() < collide:
            candidate: Fraction = used[int(rng.integers(len(used)))]
            hi = candidate if candidate >= lo else hi
        used.extend([lo, hi])
        pairs.append((lo, hi))
    return pairs


@pytest.fixture
def make_instance() -> Callable[..., Instance]:
    def factory(seed: int, n: int, k: int, **kwargs) -> Instance:
        return Instance.from_pairs(random_pairs(np.random.default_rng(seed), n, **kwargs), k)
    return factory


@pytest.fixture
def make_arcs() -> Callable[..., ArcInstance]:
    def factory(seed: int, n: int, k: int, circumference: int = 12) -> ArcInstance:
        rng: np.random.Generator = np.random.default_rng(seed)
        arcs: List[Tuple[Fraction, Fraction]] = []
        for _ in range(n):
            start: Fraction = Fraction(int(rng.integers(0, 2 * circumference)), 2)
            # about one arc in ten covers the whole circle
            if rng.random() < 0.1:
                length: Fraction = Fraction(circumference)
            else:
                length = Fraction(int(rng.integers(1, 2 * circumference)), 2)
            arcs.append((start, length))
        return ArcInstance.from_pairs(arcs, circumference, k)
    return factory


@pytest.fixture
def make_formula() -> Callable[..., NaeFormula]:
    def factory(seed: int, max_clauses: int = 3, max_vars: int = 5) -> NaeFormula:
        rng: np.random.Generator = np.random.default_rng(seed)
        num_vars: int = int(rng.integers(1, max_vars + 1))
        clauses: List[Tuple[int, int, int]] = [
            tuple(int(var) for var in rng.integers(1, num_vars + 1, size=3))
            for _ in range(int(rng.integers(1, max_clauses + 1)))
        ]
        return NaeFormula(num_vars, tuple(clauses))
    return factory
