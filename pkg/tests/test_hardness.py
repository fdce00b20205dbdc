import json
import pytest
from fractions import Fraction
from pathlib import PosixPath
from typing import Callable, List, Optional, Tuple
from scripts.core import Coloring, Instance
from scripts.settings import InputError, InstanceTooLarge, InvariantViolation
from scripts.hardness import (
    CLAUSE,
    VARIABLE,
    COVER,
    Box,
    BoxInstance,
    NaeFormula,
    parse_formula,
    read_formula,
    nae_brute_force,
    reduce_nae_to_boxes,
    lift_boxes,
    build_arrangement,
    box_imbalance,
    decide_balanced_boxes,
    min_box_imbalance_oracle,
    overlapping_pairs,
    audit_reduction,
    reduce_partition_to_weighted,
    weighted_imbalance,
    min_weighted_imbalance,
    reduce_nae_to_multiple_intervals,
    decide_multiple_intervals,
    box_instance_to_json,
    parse_box_text,
    read_box_instance,
    write_svg
)


def rectangles(*bounds: Tuple[int, int, int, int], k: int = 2) -> BoxInstance:
    return BoxInstance(
        tuple(
            Box(index, ((Fraction(x0), Fraction(x1)), (Fraction(y0), Fraction(y1))), CLAUSE)
            for index, (x0, x1, y0, y1) in enumerate(bounds)
        ),
        2,
        k
    )


# Three bars meeting in one cell, each pair also meeting outside of it
PINWHEEL: BoxInstance = BoxInstance(
    (
        Box(0, ((Fraction(0), Fraction(3)), (Fraction(1), Fraction(2))), CLAUSE),
        Box(1, ((Fraction(1), Fraction(2)), (Fraction(0), Fraction(3))), CLAUSE),
        Box(2, ((Fraction(3, 2), Fraction(4)), (Fraction(3, 2), Fraction(4))), CLAUSE)
    ),
    2,
    2
)


def check_balanced_reduction(box_instance: BoxInstance, coloring: Coloring) -> None:
    """
    Checks a balanced coloring of a reduced instance: every chain carries its variable's color to
    the clause gadget, no gadget is monochromatic, and cover rectangles keep their colors to
    themselves.

    :param box_instance: The reduced instance.
    :param coloring: A balanced coloring found by the decider.
    :return: None
    """
    layout = box_instance.layout
    colors: Tuple[int, ...] = coloring.colors
    assert box_imbalance(box_instance, coloring).value <= 1
    for chain in layout.chains.values():
        assert colors[chain[0]] == colors[chain[-1]]
    for triple in layout.clause_boxes:
        assert len({colors[box] for box in triple}) > 1
    cover_colors: List[int] = [colors[box] for box in layout.cover_boxes]
    assert len(set(cover_colors)) == len(cover_colors)
    assert all(colors[box] not in cover_colors for box in range(box_instance.n) if box not in layout.cover_boxes)


@pytest.mark.parametrize("clauses, expected", [
    ([(1, 2, 3)], (True, (True, False, False))),
    ([(1, 1, 1)], (False, None)),
    ([(1, 1, 2)], (True, (True, False))),
    ([], (True, ()))
])
def test_nae_brute_force(clauses: list, expected: tuple) -> None:
    assert nae_brute_force(NaeFormula.from_clauses(clauses)) == expected


def test_nae_brute_force_refuses_large_formulas() -> None:
    with pytest.raises(InstanceTooLarge):
        nae_brute_force(NaeFormula.from_clauses([(1, 2, 30)]), limit_vars=20)


def test_parse_formula(tmp_path: PosixPath) -> None:
    path: PosixPath = tmp_path / "formula.cnf"
    path.write_text("c two clauses\np nae 4 2\n1 2 3 0\n1 2 4\n")
    assert read_formula(str(path)) == NaeFormula(4, ((1, 2, 3), (1, 2, 4)))
    assert parse_formula("p nae 5 1\n1 2 3\n").num_vars == 5


@pytest.mark.parametrize("text", [
    "p nae 3 1\n1 -2 3\n",
    "p nae 3 2\n1 2 3\n",
    "p cnf 3 1\n1 2 3\n",
    "p nae 3 1\n1 2\n",
    "p nae 3 1\n1 2 x\n",
    "p nae 2 1\n1 2 3\n"
])
def test_parse_formula_rejects(text: str) -> None:
    with pytest.raises(InputError):
        parse_formula(text)


def test_reduction_structure() -> None:
    box_instance: BoxInstance = reduce_nae_to_boxes(NaeFormula.from_clauses([(1, 2, 3)]))
    layout = box_instance.layout
    assert sum(1 for box in box_instance.boxes if box.tag == CLAUSE) == 3
    assert sum(1 for box in box_instance.boxes if box.tag == VARIABLE) == 3
    assert len(layout.chains) == 3
    assert all((len(chain) - 2) % 2 == 1 for chain in layout.chains.values())
    assert layout.cover_boxes == ()
    audit_reduction(box_instance)


def test_repeated_variable_is_chained_to_every_slot() -> None:
    box_instance: BoxInstance = reduce_nae_to_boxes(NaeFormula.from_clauses([(1, 1, 1)]))
    layout = box_instance.layout
    assert {chain[0] for chain in layout.chains.values()} == {layout.variable_boxes[1]}
    assert {chain[-1] for chain in layout.chains.values()} == set(layout.clause_boxes[0])
    audit_reduction(box_instance)


@pytest.mark.parametrize("clauses, k, satisfiable", [
    ([(1, 2, 3)], 2, True),
    ([(1, 1, 1)], 2, False),
    ([(1, 1, 2)], 2, True),
    ([(1, 2, 3), (1, 2, 4)], 2, True),
    ([(1, 2, 3)], 3, True),
    ([(1, 1, 1)], 3, False),
    ([(1, 2, 3)], 4, True)
])
def test_reduction_decides_nae(clauses: list, k: int, satisfiable: bool) -> None:
    box_instance: BoxInstance = reduce_nae_to_boxes(NaeFormula.from_clauses(clauses), k)
    assert len(box_instance.layout.cover_boxes) == k - 2
    assert all(box_instance.boxes[box].tag == COVER for box in box_instance.layout.cover_boxes)
    coloring: Optional[Coloring] = decide_balanced_boxes(box_instance)
    assert (coloring is not None) is satisfiable
    if coloring is not None:
        check_balanced_reduction(box_instance, coloring)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_reduction_agrees_with_brute_force(make_formula: Callable[..., NaeFormula], seed: int) -> None:
    formula: NaeFormula = make_formula(seed)
    box_instance: BoxInstance = reduce_nae_to_boxes(formula)
    audit_reduction(box_instance)
    coloring: Optional[Coloring] = decide_balanced_boxes(box_instance)
    assert (coloring is not None) is nae_brute_force(formula)[0]
    if coloring is not None:
        check_balanced_reduction(box_instance, coloring)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(15))
def test_reduction_with_covers_agrees_with_brute_force(make_formula: Callable[..., NaeFormula], seed: int) -> None:
    formula: NaeFormula = make_formula(100 + seed, max_clauses=2, max_vars=4)
    box_instance: BoxInstance = reduce_nae_to_boxes(formula, 3)
    audit_reduction(box_instance)
    coloring: Optional[Coloring] = decide_balanced_boxes(box_instance)
    assert (coloring is not None) is nae_brute_force(formula)[0]
    if coloring is not None:
        check_balanced_reduction(box_instance, coloring)


def test_reduction_rejects_one_color() -> None:
    with pytest.raises(InputError):
        reduce_nae_to_boxes(NaeFormula.from_clauses([(1, 2, 3)]), 1)


def test_audit_reduction_catches_unexpected_overlap() -> None:
    box_instance: BoxInstance = reduce_nae_to_boxes(NaeFormula.from_clauses([(1, 2, 3)]))
    broken = BoxInstance(
        box_instance.boxes,
        box_instance.d,
        box_instance.k,
        box_instance.provenance,
        box_instance.layout._replace(expected_overlaps=frozenset())
    )
    with pytest.raises(InvariantViolation):
        audit_reduction(broken)
    with pytest.raises(InputError):
        audit_reduction(rectangles((0, 1, 0, 1)))


@pytest.mark.parametrize("box_instance, colors, expected", [
    (rectangles((0, 1, 0, 1)), (1,), 1),
    (rectangles((0, 1, 0, 1), (2, 3, 0, 1), (4, 5, 0, 1)), (1, 2, 1), 1),
    (rectangles((0, 2, 0, 2), (1, 3, 1, 3)), (1, 1), 2),
    (rectangles(), (), 0)
])
def test_box_imbalance(box_instance: BoxInstance, colors: tuple, expected: int) -> None:
    assert box_imbalance(box_instance, Coloring(colors)).value == expected


def test_pinwheel_needs_imbalance_two() -> None:
    assert overlapping_pairs(PINWHEEL) == frozenset({(0, 1), (0, 2), (1, 2)})
    assert frozenset({0, 1, 2}) in build_arrangement(PINWHEEL).cliques
    assert min_box_imbalance_oracle(PINWHEEL)[0] == 2
    assert decide_balanced_boxes(PINWHEEL) is None


def test_decide_balanced_boxes_trivial_cases() -> None:
    assert decide_balanced_boxes(rectangles()) == Coloring(())
    assert decide_balanced_boxes(rectangles((0, 2, 0, 2), (1, 3, 1, 3))) == Coloring((1, 2))
    with pytest.raises(InstanceTooLarge):
        decide_balanced_boxes(rectangles((0, 1, 0, 1), (0, 1, 0, 1)), limit_n=1)


def test_lift_boxes_keeps_imbalance() -> None:
    lifted: BoxInstance = lift_boxes(PINWHEEL, 3)
    assert lifted.d == 3
    assert lifted.boxes[0].bounds[2] == (Fraction(0), Fraction(0))
    for colors in [(1, 1, 2), (1, 2, 1), (1, 1, 1)]:
        assert box_imbalance(lifted, Coloring(colors)).value == box_imbalance(PINWHEEL, Coloring(colors)).value
    with pytest.raises(InputError):
        lift_boxes(lifted, 2)


@pytest.mark.parametrize("values, expected", [([1, 1, 2], 0), ([1, 2], 1), ([], 0), ([3, 1, 1, 2, 2, 1], 0)])
def test_partition_reduction(values: List[int], expected: int) -> None:
    weighted = reduce_partition_to_weighted(values)
    value, coloring = min_weighted_imbalance(weighted)
    assert value == expected
    assert weighted_imbalance(weighted, coloring) == expected


def test_partition_reduction_rejects_non_positive_values() -> None:
    with pytest.raises(InputError):
        reduce_partition_to_weighted([1, 0])


@pytest.mark.parametrize("clauses, intervals, groups, satisfiable", [
    ([(1, 2, 3)], 3, ((0,), (1,), (2,)), True),
    ([(1, 1, 1)], 3, ((0, 1, 2),), False),
    ([(1, 2, 3), (1, 2, 4)], 6, ((0, 3), (1, 4), (2,), (5,)), True)
])
def test_multiple_interval_reduction(clauses: list, intervals: int, groups: tuple, satisfiable: bool) -> None:
    instance, found = reduce_nae_to_multiple_intervals(NaeFormula.from_clauses(clauses))
    assert instance.n == intervals
    assert found == groups
    assert (instance.intervals[0].lo, instance.intervals[0].hi) == (0, 1)
    coloring: Optional[Coloring] = decide_multiple_intervals(instance, found)
    assert (coloring is not None) is satisfiable
    if coloring is not None:
        assert all(len({coloring.colors[member] for member in group}) == 1 for group in found)


@pytest.mark.parametrize("seed", range(50))
def test_multiple_intervals_agree_with_brute_force(make_formula: Callable[..., NaeFormula], seed: int) -> None:
    formula: NaeFormula = make_formula(seed)
    instance, groups = reduce_nae_to_multiple_intervals(formula)
    assert (decide_multiple_intervals(instance, groups) is not None) is nae_brute_force(formula)[0]


def test_decide_multiple_intervals_rejects_bad_groups() -> None:
    instance = Instance.from_pairs([(0, 1), (0, 1)], 2)
    with pytest.raises(InputError):
        decide_multiple_intervals(instance, [(0,)])
    with pytest.raises(InstanceTooLarge):
        decide_multiple_intervals(instance, [(0,), (1,)], limit_groups=1)


def test_box_files(tmp_path: PosixPath) -> None:
    box_instance: BoxInstance = reduce_nae_to_boxes(NaeFormula.from_clauses([(1, 2, 3)]), 3)
    path: PosixPath = tmp_path / "boxes.json"
    path.write_text(json.dumps(box_instance_to_json(box_instance)))
    loaded: BoxInstance = read_box_instance(str(path))
    assert loaded == box_instance
    assert loaded.provenance == box_instance.provenance
    svg: PosixPath = tmp_path / "boxes.svg"
    write_svg(box_instance, str(svg))
    content: str = svg.read_text()
    assert content.startswith("<svg")
    assert content.count("<rect") == box_instance.n


@pytest.mark.parametrize("text", ['{"d": 2}', '{"d": 2, "boxes": [{"bounds": [[0, 1]]}]}', "boxes"])
def test_parse_box_text_rejects(text: str) -> None:
    with pytest.raises(InputError):
        parse_box_text(text)
