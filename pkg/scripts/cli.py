import os
import sys
import json
import argparse
import pandas as pd
from pandas import DataFrame
from scripts.app_logger import get_logger
from typing import Callable, Dict, List, Optional, Sequence
from scripts.settings import BalancerError, InputError, InvariantViolation, EXIT_SUCCESS, EXIT_NEGATIVE
from scripts.core import (
    Coloring,
    Instance,
    ImbalanceReport,
    format_coord,
    imbalance,
    read_instance,
    read_coloring,
    instance_to_json,
    coloring_to_json,
    min_imbalance_oracle,
    divisibility_predicts_zero
)
from scripts.k_color import k_color, k_color_dewerra, k_color_hypergraph, parse_matrix, column_imbalance
from scripts.arcs import ArcInstance, read_arc_instance, arc_color, arc_imbalance, min_arc_imbalance_oracle
from scripts.online import Transcript, make_algorithm, run_online, adversary_general, adversary_bound
from scripts.hardness import (
    NaeFormula,
    BoxInstance,
    WeightedInstance,
    read_formula,
    read_box_instance,
    box_instance_to_json,
    reduce_nae_to_boxes,
    reduce_nae_to_multiple_intervals,
    reduce_partition_to_weighted,
    min_weighted_imbalance,
    decide_balanced_boxes,
    write_svg
)

logger = get_logger(os.path.basename(__file__).replace(".py", ""))

COLOR_ALGORITHMS: Dict[str, Callable[[Instance], Coloring]] = {
    "sweep": k_color,
    "dewerra": k_color_dewerra
}


class BalancerCli(object):
    """
    Command-line front end. Standard output carries results only; diagnostics go to the log.
    Exit codes: 0 success, 1 negative answer, 2 input error, 3 internal invariant violation.
    """

    def __init__(self, argv: Optional[Sequence[str]] = None):
        self.parser: argparse.ArgumentParser = self._build_parser()
        self.args: argparse.Namespace = self.parser.parse_args(argv)

    @staticmethod
    def _build_parser() -> argparse.ArgumentParser:
        parser: argparse.ArgumentParser = argparse.ArgumentParser(
            prog="balancer",
            description="Balanced k-colorings of intervals, arcs, hypergraphs and boxes"
        )
        commands = parser.add_subparsers(dest="command", required=True)

        color = commands.add_parser("color", help="balanced k-coloring of an interval instance")
        color.add_argument("--input", required=True)
        color.add_argument("--k", type=int)
        color.add_argument("--algorithm", choices=sorted(COLOR_ALGORITHMS), default="sweep")
        color.add_argument("--format", choices=("json", "text"), default="json")

        verify = commands.add_parser("verify", help="imbalance of a given coloring")
        verify.add_argument("--input", required=True)
        verify.add_argument("--coloring", required=True)
        verify.add_argument("--k", type=int)
        verify.add_argument("--format", choices=("json", "text"), default="json")

        oracle = commands.add_parser("oracle", help="exact minimum imbalance by exhaustive search")
        oracle.add_argument("--input", required=True)
        oracle.add_argument("--k", type=int)
        oracle.add_argument("--limit-n", type=int)
        oracle.add_argument("--format", choices=("json", "text"), default="json")

        arcs = commands.add_parser("arcs", help="coloring of circular arcs with imbalance at most two")
        arcs.add_argument("--input", required=True)
        arcs.add_argument("--k", type=int)
        arcs.add_argument("--oracle", action="store_true", help="also report the exact minimum")

        online = commands.add_parser("online", help="online coloring harness and adversary")
        online.add_argument("--algorithm", required=True)
        online.add_argument("--k", type=int, required=True)
        online.add_argument("--rounds", type=int, required=True)
        online.add_argument("--seed", type=int, default=0)
        online.add_argument("--color", type=int, default=1, help="color of the 'constant' algorithm")
        online.add_argument("--adversary", action="store_true")
        online.add_argument("--budget", type=int, help="re-presentations per adversary round")
        online.add_argument("--input", help="interval stream for runs without --adversary")
        online.add_argument("--format", choices=("json", "text"), default="json")

        reduce = commands.add_parser("reduce", help="hardness reductions")
        problems = reduce.add_subparsers(dest="problem", required=True)
        nae = problems.add_parser("nae3sat", help="positive NAE-3SAT to boxes or multiple intervals")
        nae.add_argument("--input", required=True)
        nae.add_argument("--k", type=int, default=2)
        nae.add_argument("--target", choices=("boxes", "multiple"), default="boxes")
        nae.add_argument("--svg")
        partition = problems.add_parser("partition", help="Partition to weighted intervals")
        partition.add_argument("--values", type=int, nargs="*", default=[])

        decide = commands.add_parser("decide-boxes", help="search a balanced coloring of boxes")
        decide.add_argument("--input", required=True)
        decide.add_argument("--k", type=int)
        decide.add_argument("--limit-n", type=int)

        hypergraph = commands.add_parser("hypergraph", help="balanced coloring of a consecutive-ones hypergraph")
        hypergraph.add_argument("--input", required=True)
        hypergraph.add_argument("--k", type=int, required=True)
        return parser

    @staticmethod
    def _emit(payload: dict) -> None:
        print(json.dumps(payload, ensure_ascii=False))

    @staticmethod
    def _coloring_table(instance: Instance, coloring: Coloring) -> DataFrame:
        return pd.DataFrame(
            {
                "id": [interval.id for interval in instance.intervals],
                "lo": [format_coord(interval.lo) for interval in instance.intervals],
                "hi": [format_coord(interval.hi) for interval in instance.intervals],
                "color": list(coloring.colors)
            },
            columns=["id", "lo", "hi", "color"]
        )

    @staticmethod
    def _region_table(report: ImbalanceReport, k: int) -> DataFrame:
        rows: List[dict] = [
            {
                "lo": format_coord(region.lo),
                "hi": format_coord(region.hi),
                **{f"c{color + 1}": count for color, count in enumerate(region.counts)},
                "spread": max(region.counts) - min(region.counts)
            }
            for region in report.per_region or ()
        ]
        return pd.DataFrame(rows, columns=["lo", "hi", *[f"c{color}" for color in range(1, k + 1)], "spread"])

    def color(self) -> int:
        instance: Instance = read_instance(self.args.input, self.args.k)
        coloring: Coloring = COLOR_ALGORITHMS[self.args.algorithm](instance)
        value: int = imbalance(instance, coloring).value
        if value > 1:
            raise InvariantViolation(f"{self.args.algorithm} produced imbalance {value}")
        if self.args.format == "text":
            print(self._coloring_table(instance, coloring).to_string(index=False))
            print(f"imbalance: {value}")
        else:
            self._emit(coloring_to_json(coloring, value))
        return EXIT_SUCCESS

    def verify(self) -> int:
        instance: Instance = read_instance(self.args.input, self.args.k)
        report: ImbalanceReport = imbalance(instance, read_coloring(self.args.coloring), detailed=True)
        if self.args.format == "text":
            print(self._region_table(report, instance.k).to_string(index=False))
            print(f"imbalance: {report.value} at {format_coord(report.witness)}")
        else:
            self._emit({
                "imbalance": report.value,
                "witness": format_coord(report.witness),
                "balanced": report.value <= 1
            })
        return EXIT_SUCCESS if report.value <= 1 else EXIT_NEGATIVE

    def oracle(self) -> int:
        instance: Instance = read_instance(self.args.input, self.args.k)
        value, coloring = min_imbalance_oracle(instance, self.args.limit_n)
        if self.args.format == "text":
            print(self._coloring_table(instance, coloring).to_string(index=False))
            print(f"minimum imbalance: {value}")
        else:
            self._emit({
                **coloring_to_json(coloring, value),
                "divisibility_predicts_zero": divisibility_predicts_zero(instance)
            })
        return EXIT_SUCCESS

    def arcs(self) -> int:
        arc_instance: ArcInstance = read_arc_instance(self.args.input, self.args.k)
        coloring: Coloring = arc_color(arc_instance)
        value: int = arc_imbalance(arc_instance, coloring).value
        if value > 2:
            raise InvariantViolation(f"Arc coloring has imbalance {value}")
        payload: dict = coloring_to_json(coloring, value)
        if self.args.oracle:
            payload["minimum"] = min_arc_imbalance_oracle(arc_instance)[0]
        self._emit(payload)
        return EXIT_SUCCESS

    def online(self) -> int:
        algorithm = make_algorithm(self.args.algorithm, self.args.seed, self.args.color)
        if self.args.rounds < 1:
            raise InputError(f"--rounds must be at least 1, got {self.args.rounds}")
        if self.args.adversary:
            transcript: Transcript = adversary_general(algorithm, self.args.k, self.args.rounds, self.args.budget)
            records: List[dict] = transcript.to_records()
            summary: dict = {
                "final_imbalance": transcript.final_imbalance,
                "plus": transcript.plus,
                "minus": transcript.minus,
                "stacked": transcript.stacked,
                "bound": adversary_bound(self.args.rounds)
            }
            if self.args.k == 2 and transcript.final_imbalance < summary["bound"]:
                raise InvariantViolation(
                    f"Adversary reached imbalance {transcript.final_imbalance} < {summary['bound']}"
                )
        else:
            if not self.args.input:
                raise InputError("online without --adversary needs an --input stream")
            stream: Instance = read_instance(self.args.input, self.args.k)
            intervals = stream.intervals[:self.args.rounds]
            coloring, trace = run_online(algorithm, [(iv.lo, iv.hi) for iv in intervals], self.args.k)
            records = [
                {
                    "step": step + 1,
                    "interval": [format_coord(interval.lo), format_coord(interval.hi)],
                    "color": coloring.colors[step],
                    "imbalance": trace[step]
                }
                for step, interval in enumerate(intervals)
            ]
            summary = {"final_imbalance": trace[-1] if trace else 0}
        if self.args.format == "text":
            print(pd.DataFrame(records).to_string(index=False))
            print(" ".join(f"{key}: {value}" for key, value in summary.items()))
        else:
            for record in records:
                self._emit(record)
            self._emit(summary)
        return EXIT_SUCCESS

    def reduce(self) -> int:
        if self.args.problem == "partition":
            weighted: WeightedInstance = reduce_partition_to_weighted(self.args.values)
            value, coloring = min_weighted_imbalance(weighted)
            self._emit({
                **instance_to_json(weighted.instance),
                "weights": list(weighted.weights),
                "min_weighted_imbalance": value,
                "colors": list(coloring.colors)
            })
            return EXIT_SUCCESS
        formula: NaeFormula = read_formula(self.args.input)
        if self.args.target == "multiple":
            instance, groups = reduce_nae_to_multiple_intervals(formula)
            self._emit({**instance_to_json(instance), "groups": [list(group) for group in groups]})
            return EXIT_SUCCESS
        box_instance: BoxInstance = reduce_nae_to_boxes(formula, self.args.k)
        if self.args.svg:
            write_svg(box_instance, self.args.svg)
        self._emit(box_instance_to_json(box_instance))
        return EXIT_SUCCESS

    def decide_boxes(self) -> int:
        box_instance: BoxInstance = read_box_instance(self.args.input, self.args.k)
        coloring: Optional[Coloring] = decide_balanced_boxes(box_instance, self.args.limit_n)
        self._emit({"balanced": coloring is not None, "colors": list(coloring.colors) if coloring else None})
        return EXIT_SUCCESS if coloring is not None else EXIT_NEGATIVE

    def hypergraph(self) -> int:
        with open(self.args.input, encoding="utf-8") as f:
            matrix = parse_matrix(f.read())
        coloring: Coloring = k_color_hypergraph(matrix, self.args.k)
        self._emit({"colors": list(coloring.colors), "column_imbalance": column_imbalance(matrix, coloring, self.args.k)})
        return EXIT_SUCCESS

    def main(self) -> None:
        """
        Runs the chosen subcommand and exits with its code.

        A BalancerError is logged, reported on standard error as "Error code N: ..." and turned
        into its exit code; an unreadable file counts as an input error.
        :return: None
        """
        command: str = self.args.command
        handler: Callable[[], int] = getattr(self, command.replace("-", "_"))
        logger.info(f"{command} has started")
        try:
            code: int = handler()
        except OSError as exception:
            code = InputError.exit_code
            logger.error(f"Cannot read input for {command}: {exception}")
            print(f"Error code {code}: {exception}", file=sys.stderr)
        except BalancerError as exception:
            code = exception.exit_code
            logger.error(f"{command} failed: {exception}")
            print(f"Error code {code}: {exception}", file=sys.stderr)
        logger.info(f"{command} has finished with exit code {code}")
        sys.exit(code)


if __name__ == "__main__":
    BalancerCli().main()
