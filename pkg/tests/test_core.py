import json
import pytest
import numpy as np
from fractions import Fraction
from pathlib import PosixPath
from typing import Callable, List, Tuple
from scripts.settings import InputError, InstanceTooLarge
from scripts.core import (
    Coloring,
    Instance,
    Interval,
    parse_coord,
    format_coord,
    scale_to_integers,
    normalize,
    imbalance,
    is_balanced,
    counts_at,
    depths,
    divisibility_predicts_zero,
    point_cliques,
    membership_matrix,
    search_min_spread,
    min_imbalance_oracle,
    parse_instance_text,
    read_instance,
    instance_to_json,
    parse_coloring_text,
    read_coloring,
    coloring_to_json
)


@pytest.mark.parametrize("raw, expected", [
    ("0.2", Fraction(1, 5)),
    (0.2, Fraction(1, 5)),
    ("1/3", Fraction(1, 3)),
    (" -4 ", Fraction(-4)),
    (7, Fraction(7)),
    (Fraction(3, 4), Fraction(3, 4))
])
def test_parse_coord(raw, expected: Fraction) -> None:
    assert parse_coord(raw) == expected


@pytest.mark.parametrize("raw", [True, "abc", "1/0", None, [1]])
def test_parse_coord_rejects(raw) -> None:
    with pytest.raises(InputError):
        parse_coord(raw)


@pytest.mark.parametrize("value, expected", [
    (Fraction(1, 5), "0.2"),
    (Fraction(1, 3), "1/3"),
    (Fraction(-5, 2), "-2.5"),
    (Fraction(1, 4), "0.25"),
    (Fraction(1, 10), "0.1"),
    (Fraction(3), "3"),
    (Fraction(0), "0")
])
def test_format_coord(value: Fraction, expected: str) -> None:
    assert format_coord(value) == expected


def test_scale_to_integers() -> None:
    assert scale_to_integers([Fraction(1, 2), Fraction(1, 3), Fraction(2)]) == ([3, 2, 12], 6)
    assert scale_to_integers([Fraction(1, 2)], factor=2) == ([2], 4)


def test_domain_types_validate() -> None:
    with pytest.raises(InputError):
        Interval(0, Fraction(2), Fraction(1))
    with pytest.raises(InputError):
        Instance.from_pairs([(0, 1)], 0)
    with pytest.raises(InputError):
        Instance((Interval(1, Fraction(0), Fraction(1)),), 2)
    with pytest.raises(InputError):
        Instance.from_pairs([(0, 1, 2)], 2)
    with pytest.raises(InputError):
        Coloring((1, 2)).check(3, 2)
    with pytest.raises(InputError):
        Coloring((1, 3)).check(2, 2)


@pytest.mark.parametrize("pairs, start_rank, end_rank", [
    ([(0, 2), (0, 1)], (1, 2), (4, 3)),
    ([(0, 1), (1, 2)], (1, 2), (3, 4)),
    ([], (), ())
])
def test_normalize(pairs: list, start_rank: tuple, end_rank: tuple) -> None:
    norm = normalize(Instance.from_pairs(pairs, 2))
    assert norm.start_rank == start_rank
    assert norm.end_rank == end_rank


def test_touching_intervals_share_a_region() -> None:
    """
    Closed intervals touching at 1 overlap there, so some rank-region holds both of them.
    """
    cliques = normalize(Instance.from_pairs([(0, 1), (1, 2)], 2)).region_cliques()
    assert cliques[2] == frozenset({0, 1})


@pytest.mark.parametrize("pairs, colors, k, expected", [
    ([(0, 2), (1, 3)], (1, 1), 2, 2),
    ([(0, 1)], (1,), 3, 1),
    ([(0, 2), (1, 3), (0, 3)], (1, 2, 1), 2, 2),
    ([(0, 2), (1, 3), (0, 3)], (1, 1, 2), 2, 1),
    ([(0, 1), (1, 2)], (1, 1), 2, 2),
    ([(0, 1), (2, 3)], (1, 1), 2, 1),
    ([], (), 4, 0)
])
def test_imbalance(pairs: list, colors: tuple, k: int, expected: int) -> None:
    assert imbalance(Instance.from_pairs(pairs, k), Coloring(colors)).value == expected


def test_imbalance_witness_and_details() -> None:
    report = imbalance(Instance.from_pairs([(0, 2), (1, 3)], 2), Coloring((1, 1)), detailed=True)
    assert 1 <= report.witness <= 2
    assert report.per_region[0].counts == (1, 0)
    assert max(max(row.counts) - min(row.counts) for row in report.per_region) == 2


@pytest.mark.parametrize("pairs, colors, expected", [
    ([], (), True),
    ([(0, 2), (1, 3)], (1, 1), False),
    ([(0, 2), (1, 3)], (1, 2), True)
])
def test_is_balanced(pairs: list, colors: tuple, expected: bool) -> None:
    assert is_balanced(Instance.from_pairs(pairs, 2), Coloring(colors)) is expected


def test_counts_at() -> None:
    instance = Instance.from_pairs([(0, 2), (1, 3)], 2)
    points: List[Fraction] = [Fraction(-1), Fraction(0), Fraction(3, 2), Fraction(3), Fraction(4)]
    counts: np.ndarray = counts_at(instance, Coloring((1, 2)), points)
    assert counts.tolist() == [[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]


def test_depths() -> None:
    assert depths(Instance.from_pairs([(0, 1), (1, 2)], 1)) == [1, 1, 2, 1, 1]
    assert depths(Instance.from_pairs([], 1)) == []


@pytest.mark.parametrize("pairs, k, expected", [
    ([(0, 1), (0, 1)], 2, True),
    ([(0, 1)], 2, False),
    ([(0, 2), (1, 3), (0, 3)], 3, False),
    ([], 5, True)
])
def test_divisibility_predicts_zero(pairs: list, k: int, expected: bool) -> None:
    assert divisibility_predicts_zero(Instance.from_pairs(pairs, k)) is expected


def test_point_cliques() -> None:
    cliques: List[Tuple[Fraction, frozenset]] = point_cliques(Instance.from_pairs([(0, 2), (1, 3)], 2))
    assert [clique for _, clique in cliques] == [
        frozenset({0}), frozenset({0}), frozenset({0, 1}), frozenset({0, 1}),
        frozenset({0, 1}), frozenset({1}), frozenset({1})
    ]
    assert [witness for witness, _ in cliques][:3] == [Fraction(0), Fraction(1, 2), Fraction(1)]


def test_membership_matrix_drops_duplicates_and_empty() -> None:
    matrix: np.ndarray = membership_matrix([frozenset(), frozenset({0}), frozenset({0}), frozenset({0, 2})], 3)
    assert matrix.tolist() == [[True, False, False], [True, False, True]]


@pytest.mark.parametrize("pairs, k, expected", [
    ([(0, 2), (1, 3), (0, 3)], 2, 1),
    ([(0, 1), (0, 1)], 2, 0),
    ([(0, 1)], 2, 1),
    ([(0, 2), (0, 2), (0, 2)], 3, 0),
    ([], 2, 0)
])
def test_min_imbalance_oracle(pairs: list, k: int, expected: int) -> None:
    instance = Instance.from_pairs(pairs, k)
    value, coloring = min_imbalance_oracle(instance)
    assert value == expected
    assert imbalance(instance, coloring).value == expected


def test_oracle_returns_lexicographically_smallest_coloring() -> None:
    _, coloring = min_imbalance_oracle(Instance.from_pairs([(0, 1), (0, 1), (5, 6)], 2))
    assert coloring.colors == (1, 2, 1)


def test_oracle_refuses_large_instances() -> None:
    with pytest.raises(InstanceTooLarge):
        min_imbalance_oracle(Instance.from_pairs([(0, 1)] * 4, 2), limit_n=3)


def test_search_min_spread_with_weights() -> None:
    membership: np.ndarray = np.ones((1, 3), dtype=bool)
    assert search_min_spread(membership, 3, 2, weights=[1, 1, 2]) == (0, (1, 1, 2))
    assert search_min_spread(membership, 3, 2, weights=[1, 2, 4])[0] == 1


def test_search_min_spread_in_chunks(mocker) -> None:
    """
    Tests the exhaustive search with batches of two colorings, which must give the same answer as
    a single batch.

    :param mocker: pytest-mock fixture.
    """
    instance = Instance.from_pairs([(0, 3), (1, 4), (2, 5), (0, 5)], 2)
    expected: Tuple[int, Coloring] = min_imbalance_oracle(instance)
    mocker.patch("scripts.core.SEARCH_CHUNK", 2)
    assert min_imbalance_oracle(instance) == expected


def test_parse_instance_text_formats() -> None:
    text: Instance = parse_instance_text("2 2\n0 1\n0.5 2\n")
    document: Instance = parse_instance_text(json.dumps({"k": 2, "intervals": [[0, 1], ["1/2", 2]]}))
    assert text == document
    assert parse_instance_text('{"k": 3, "intervals": [[0.1, 0.3]]}').intervals[0].lo == Fraction(1, 10)
    assert parse_instance_text("", k=4) == Instance((), 4)
    assert parse_instance_text("1 2\n0 1\n", k=5).k == 5


@pytest.mark.parametrize("text", [
    "2 2\n0 1\n",
    "2\n0 1\n1 2\n",
    "1 2\n0 1 2\n",
    "1 2\n0 x\n",
    "1 2\n3 1\n",
    '{"k": 2}',
    '{"k": 2, "intervals": [[0, 1]'
])
def test_parse_instance_text_rejects(text: str) -> None:
    with pytest.raises(InputError):
        parse_instance_text(text)


def test_instance_and_coloring_files(tmp_path: PosixPath) -> None:
    instance = Instance.from_pairs([(0, "1/3"), ("0.5", 2)], 2)
    instance_file: PosixPath = tmp_path / "instance.json"
    instance_file.write_text(json.dumps(instance_to_json(instance)))
    assert read_instance(str(instance_file)) == instance
    coloring_file: PosixPath = tmp_path / "coloring.json"
    coloring_file.write_text(json.dumps(coloring_to_json(Coloring((2, 1)), 1)))
    assert read_coloring(str(coloring_file)) == Coloring((2, 1))


@pytest.mark.parametrize("text", ["[1, 2]", "{}", '{"colors": 3}', "colors"])
def test_parse_coloring_text_rejects(text: str) -> None:
    with pytest.raises(InputError):
        parse_coloring_text(text)


@pytest.mark.parametrize("pairs", [[5], [{"a": 0, "b": 1}], [None], ["01"], [[0]], [{0: 0, 1: 1}]])
def test_from_pairs_rejects_malformed_pairs(pairs: list) -> None:
    with pytest.raises(InputError):
        Instance.from_pairs(pairs, 2)


@pytest.mark.parametrize("k", [True, False, 2.0, "2"])
def test_instance_rejects_non_integer_k(k) -> None:
    with pytest.raises(InputError):
        Instance.from_pairs([(0, 1)], k)


@pytest.mark.parametrize("colors", [(True,), (1.0,), ("1",)])
def test_coloring_rejects_non_integer_colors(colors: tuple) -> None:
    with pytest.raises(InputError):
        Coloring(colors).check(1, 2)


def test_instance_json_needs_k() -> None:
    with pytest.raises(InputError):
        parse_instance_text('{"intervals": [[0, 1]]}')
    assert parse_instance_text('{"intervals": [[0, 1]]}', k=3).k == 3
    assert parse_instance_text("").k == 1


def sample_points(instance: Instance) -> List[Fraction]:
    """
    Every endpoint, the midpoint of every gap between consecutive endpoints and one point
    beyond each end.
    """
    coords: List[Fraction] = sorted({c for interval in instance.intervals for c in (interval.lo, interval.hi)})
    if not coords:
        return [Fraction(0)]
    middles: List[Fraction] = [(a + b) / 2 for a, b in zip(coords, coords[1:])]
    return [coords[0] - 1] + sorted(coords + middles) + [coords[-1] + 1]


def random_coloring(seed: int, n: int, k: int) -> Coloring:
    return Coloring(tuple(int(color) for color in np.random.default_rng(seed).integers(1, k + 1, size=n)))


@pytest.mark.parametrize("seed", range(60))
def test_counts_at_matches_direct_counting(make_instance: Callable[..., Instance], seed: int) -> None:
    instance: Instance = make_instance(300 + seed, seed % 21, seed % 4 + 1, collide=0.5)
    coloring: Coloring = random_coloring(seed, instance.n, instance.k)
    points: List[Fraction] = sample_points(instance)
    direct: List[List[int]] = [
        [
            sum(1 for interval, color in zip(instance.intervals, coloring.colors) if color == c and interval.contains(x))
            for c in range(1, instance.k + 1)
        ]
        for x in points
    ]
    assert counts_at(instance, coloring, points).tolist() == direct


@pytest.mark.parametrize("seed", range(60))
def test_normalize_keeps_every_point_clique(make_instance: Callable[..., Instance], seed: int) -> None:
    instance: Instance = make_instance(600 + seed, seed % 21, 2, collide=0.6)
    cliques: set = set(normalize(instance).region_cliques())
    for x in sample_points(instance):
        assert frozenset(i for i, interval in enumerate(instance.intervals) if interval.contains(x)) in cliques


@pytest.mark.parametrize("seed", range(40))
def test_imbalance_ignores_color_names(make_instance: Callable[..., Instance], seed: int) -> None:
    k: int = seed % 5 + 2
    instance: Instance = make_instance(900 + seed, seed % 21, k)
    coloring: Coloring = random_coloring(seed, instance.n, k)
    relabel: List[int] = [int(color) + 1 for color in np.random.default_rng(seed).permutation(k)]
    renamed: Coloring = Coloring(tuple(relabel[color - 1] for color in coloring.colors))
    assert imbalance(instance, renamed).value == imbalance(instance, coloring).value
