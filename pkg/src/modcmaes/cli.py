"""Command-line orchestration of experiments and reports.

Subcommands: ``run`` (one configuration, n seeded runs), ``bruteforce``
(sweep a configuration space), ``ga`` (repeated structure search),
``suite`` (benchmark manifest), and the pure-report commands
``report-rank``, ``report-activation``, ``report-convergence``. All
outputs are UTF-8 tab-separated text with ``NA`` for missing values;
runs are cached per (config, function, dimension, seed) so reports and
repeated invocations never recompute anything.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from . import benchmarks
from .configuration import (
    CATALOG,
    ConfigError,
    ConfigurationVector,
    decode,
    encode,
    enumerate_all,
)
from .core import RunRecord
from .evaluation import (
    FitnessSummary,
    ResultsCache,
    _run_one,
    compare_fitness,
    summarize,
)
from .metaga import GARunTrace, TraceEntry, ga_run

__all__ = [
    "CachedEvaluator",
    "cmd_run",
    "cmd_bruteforce",
    "cmd_ga",
    "rank_aggregate",
    "rank_table",
    "report_rank",
    "report_activation",
    "report_convergence",
    "main",
    "RANK_BUCKETS",
]

RANK_BUCKETS = (
    ("1", 1),
    ("2", 2),
    ("3", 3),
    ("4-5", 5),
    ("6-9", 9),
    ("10-17", 17),
    ("18+", None),
)


def _fmt(value: float | None) -> str:
    return "NA" if value is None else repr(float(value))


def _parse_free(spec: str | None) -> dict[int, int] | None:
    """Translate ``--free 1,2,3`` (1-based genes) into a frozen map."""
    if spec is None:
        return None
    free = {int(tok) - 1 for tok in spec.split(",") if tok.strip()}
    for idx in free:
        if not 0 <= idx < 11:
            raise ValueError("--free gene positions must be in 1..11")
    return {i: 0 for i in range(11) if i not in free}


class CachedEvaluator:
    """Fitness evaluator backed by the append-only results cache.

    Looks up the n seeded runs of a configuration; anything missing is
    executed (optionally in a process pool) and appended to the cache
    in seed order before the summary is built.
    """

    def __init__(
        self,
        problem,
        cache: ResultsCache,
        n_runs: int = 32,
        budget: int | None = None,
        base_seed: int = 0,
        target: float | None = None,
        jobs: int = 1,
    ):
        self.problem = problem
        self.cache = cache
        self.n_runs = n_runs
        self.budget = budget or benchmarks.default_budget(problem.dimension)
        self.base_seed = base_seed
        self.target = target
        self.jobs = jobs
        self.runs_executed = 0
        key_fn = problem.function_id
        self._mem: dict[str, dict[int, RunRecord]] = {}
        for (cfg, fid, dim), by_seed in cache.by_key().items():
            if fid == key_fn and dim == problem.dimension:
                self._mem[cfg] = dict(by_seed)

    @property
    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.n_runs)]

    def missing_seeds(self, cfg_str: str) -> list[int]:
        have = self._mem.get(cfg_str, {})
        return [s for s in self.seeds if s not in have]

    def __call__(self, cfg: ConfigurationVector | str) -> FitnessSummary:
        cfg_str = cfg if isinstance(cfg, str) else encode(cfg)
        missing = self.missing_seeds(cfg_str)
        if missing:
            tasks = [
                (cfg_str, self.problem, self.budget, s, self.target)
                for s in missing
            ]
            if self.jobs > 1 and len(tasks) > 1:
                with ProcessPoolExecutor(
                    max_workers=min(self.jobs, len(tasks))
                ) as pool:
                    new = list(pool.map(_run_one, tasks))
            else:
                new = [_run_one(t) for t in tasks]
            self.runs_executed += len(new)
            self.cache.append(new)
            slot = self._mem.setdefault(cfg_str, {})
            for rec in new:
                slot[rec.seed] = rec
        have = self._mem[cfg_str]
        return summarize([have[s] for s in self.seeds])


def _summary_line(s: FitnessSummary) -> str:
    return (
        f"{s.config}\t{s.function_id}\t{s.dimension}\t{s.n}\t"
        f"{_fmt(s.ert)}\t{_fmt(s.fce)}\t{_fmt(s.std_error)}"
    )


SUMMARY_HEADER = "config\tfunction_id\tdimension\tn\tert\tfce\tstd_error"


def cmd_run(args, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg = decode(args.config)
    except ConfigError as exc:
        print(f"invalid configuration string: {exc}", file=sys.stderr)
        return 2
    problem = benchmarks.make_problem(args.function, args.dim)
    evaluator = CachedEvaluator(
        problem,
        ResultsCache(args.cache),
        n_runs=args.runs,
        budget=args.budget or benchmarks.default_budget(args.dim),
        base_seed=args.seed,
        target=args.target,
        jobs=args.jobs,
    )
    summary = evaluator(cfg)
    print(SUMMARY_HEADER, file=out)
    print(_summary_line(summary), file=out)
    return 0


def cmd_bruteforce(args, out=None) -> int:
    out = out or sys.stdout
    frozen = _parse_free(args.free)
    problem = benchmarks.make_problem(args.function, args.dim)
    cache = ResultsCache(args.cache)
    evaluator = CachedEvaluator(
        problem,
        cache,
        n_runs=args.runs,
        budget=args.budget or benchmarks.default_budget(args.dim),
        base_seed=args.seed,
        target=args.target,
        jobs=args.jobs,
    )
    executed = swept = 0
    for cfg in enumerate_all(frozen=frozen):
        cfg_str = encode(cfg)
        swept += 1
        missing = evaluator.missing_seeds(cfg_str)
        if not missing:
            continue
        evaluator(cfg_str)
        executed += 1
    print(f"configs\t{swept}", file=out)
    print(f"executed\t{executed}", file=out)
    print(f"skipped\t{swept - executed}", file=out)
    return 0


def cmd_ga(args, out=None) -> int:
    out = out or sys.stdout
    frozen = _parse_free(args.free)
    problem = benchmarks.make_problem(args.function, args.dim)
    cache = ResultsCache(args.cache)
    evaluator = CachedEvaluator(
        problem,
        cache,
        n_runs=args.runs,
        budget=args.budget or benchmarks.default_budget(args.dim),
        base_seed=args.seed,
        target=args.target,
        jobs=args.jobs,
    )
    os.makedirs(args.out, exist_ok=True)
    print(
        "run\tga_seed\tfunction_id\tdimension\tbest_config\tert\tfce",
        file=out,
    )
    for i in range(args.ga_runs):
        ga_seed = args.seed + i
        trace = ga_run(
            evaluator,
            budget=args.ga_budget,
            lambda_=args.ga_lambda,
            seed=ga_seed,
            frozen=frozen,
        )
        path = os.path.join(args.out, f"trace_{i:03d}.tsv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(trace.to_lines())
        last = trace.entries[-1]
        print(
            f"{i}\t{ga_seed}\t{problem.function_id}\t{problem.dimension}\t"
            f"{last.best_config}\t{_fmt(last.ert)}\t{_fmt(last.fce)}",
            file=out,
        )
    return 0


def rank_aggregate(
    bf_fitness: Sequence[tuple[float | None, float]],
    ga_fitness: tuple[float | None, float],
) -> int:
    """1-based rank of the GA aggregate among brute-force fitnesses."""
    better = 0
    for ert, fce in bf_fitness:
        winner, _ = compare_fitness(ert, fce, ga_fitness[0], ga_fitness[1])
        if winner == "A":
            better += 1
    return better + 1


def rank_table(ranks: Sequence[int]) -> list[tuple[str, float]]:
    """Cumulative percentage of experiments reaching each rank bucket."""
    if not ranks:
        raise ValueError("no ranks to tabulate")
    rows = []
    total = len(ranks)
    for label, upper in RANK_BUCKETS:
        if upper is None:
            pct = 100.0
        else:
            pct = 100.0 * sum(1 for r in ranks if r <= upper) / total
        rows.append((label, pct))
    return rows


def _aggregate_fitness(
    summaries: Sequence[FitnessSummary],
) -> tuple[float | None, float]:
    erts = [s.ert for s in summaries if s.ert is not None]
    ert = float(np.mean(erts)) if erts else None
    fce = float(np.mean([s.fce for s in summaries]))
    return ert, fce


def _read_trace(path: str) -> GARunTrace:
    trace = GARunTrace()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("generation"):
            raise ValueError(f"{path} is not a trace file")
        for line in fh:
            gen, cfg, ert, fce = line.rstrip("\n").split("\t")
            trace.entries.append(
                TraceEntry(
                    generation=int(gen),
                    best_config=cfg,
                    ert=None if ert == "NA" else float(ert),
                    fce=float(fce),
                )
            )
    return trace


def _trace_paths(directory: str) -> list[str]:
    names = sorted(
        n for n in os.listdir(directory) if n.startswith("trace_")
    )
    return [os.path.join(directory, n) for n in names]


def report_rank(args, out=None) -> int:
    out = out or sys.stdout
    frozen = _parse_free(args.free)
    cache = ResultsCache(args.cache)
    table = cache.by_key()
    seeds = set(range(args.seed, args.seed + args.runs))

    bf: dict[str, FitnessSummary] = {}
    missing = 0
    for cfg in enumerate_all(frozen=frozen):
        cfg_str = encode(cfg)
        by_seed = table.get((cfg_str, args.function, args.dim), {})
        if not seeds <= set(by_seed):
            missing += 1
            continue
        bf[cfg_str] = summarize([by_seed[s] for s in sorted(seeds)])
    if missing:
        print(
            f"cache incomplete: {missing} configurations missing runs",
            file=sys.stderr,
        )
        return 3

    traces = [_read_trace(p) for p in _trace_paths(args.traces)]
    if not traces:
        print("no trace files found", file=sys.stderr)
        return 3
    ga_summaries = [bf[t.best_config] for t in traces]
    ga_fit = _aggregate_fitness(ga_summaries)
    bf_fit = [(s.ert, s.fce) for s in bf.values()]
    rank = rank_aggregate(bf_fit, ga_fit)

    print(f"ga_aggregate_ert\t{_fmt(ga_fit[0])}", file=out)
    print(f"ga_aggregate_fce\t{_fmt(ga_fit[1])}", file=out)
    print(f"rank\t{rank}", file=out)
    print("bucket\tcumulative_pct", file=out)
    for label, pct in rank_table([rank]):
        print(f"{label}\t{pct:.2f}", file=out)
    return 0


def report_activation(
    winners: Sequence[tuple[ConfigurationVector, str]],
) -> dict[str, list[str]]:
    """Activation percentages of each module per group label.

    ``winners`` pairs a configuration with its group label. Binary
    modules report the share of non-default activations; the two
    ternary modules report both alternatives as "a/b" percentages.
    """
    if not winners:
        raise ValueError("no winning configurations given")
    groups = sorted({label for _, label in winners})
    table: dict[str, list[str]] = {}
    for m, entry in enumerate(CATALOG.entries):
        row = []
        for g in groups:
            genes = [cfg.genes[m] for cfg, label in winners if label == g]
            n = len(genes)
            if entry.option_count == 2:
                pct = 100.0 * sum(1 for v in genes if v == 1) / n
                row.append(f"{pct:.1f}")
            else:
                p1 = 100.0 * sum(1 for v in genes if v == 1) / n
                p2 = 100.0 * sum(1 for v in genes if v == 2) / n
                row.append(f"{p1:.1f}/{p2:.1f}")
        table[entry.name] = row
    table["__groups__"] = groups
    return table


def cmd_report_activation(args, out=None) -> int:
    out = out or sys.stdout
    winners: list[tuple[ConfigurationVector, str]] = []
    with open(args.winners, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        try:
            c_cfg = header.index("best_config")
            c_fid = header.index("function_id")
            c_dim = header.index("dimension")
        except ValueError:
            print(
                "winners file needs best_config, function_id and "
                "dimension columns",
                file=sys.stderr,
            )
            return 2
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            cfg = decode(parts[c_cfg])
            if args.group_by == "dimension":
                label = parts[c_dim]
            else:
                label = benchmarks.subgroup_of(parts[c_fid])
            winners.append((cfg, label))
    try:
        table = report_activation(winners)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    groups = table.pop("__groups__")
    print("module\t" + "\t".join(groups), file=out)
    for name, row in table.items():
        print(name + "\t" + "\t".join(row), file=out)
    return 0


def report_convergence(
    traces: Sequence[GARunTrace],
) -> list[tuple[int, float | None, float]]:
    """Mean best-so-far ERT (where defined) and FCE per generation."""
    if not traces:
        raise ValueError("need at least one trace")
    generations = len(traces[0].entries)
    rows = []
    for g in range(generations):
        entries = [t.entries[g] for t in traces if g < len(t.entries)]
        erts = [e.ert for e in entries if e.ert is not None]
        ert = float(np.mean(erts)) if erts else None
        fce = float(np.mean([e.fce for e in entries]))
        rows.append((g + 1, ert, fce))
    return rows


def cmd_report_convergence(args, out=None) -> int:
    out = out or sys.stdout
    traces = [_read_trace(p) for p in _trace_paths(args.traces)]
    if not traces:
        print("no trace files found", file=sys.stderr)
        return 3
    print("generation\tmean_ert\tmean_fce", file=out)
    for gen, ert, fce in report_convergence(traces):
        print(f"{gen}\t{_fmt(ert)}\t{_fmt(fce)}", file=out)
    return 0


def cmd_suite(args, out=None) -> int:
    out = out or sys.stdout
    suite = benchmarks.make_suite(args.seed)
    out.write(benchmarks.suite_manifest(suite))
    return 0


def _add_common(p: argparse.ArgumentParser, cache_required: bool = True):
    p.add_argument("--function", required=True, choices=sorted(benchmarks.FUNCTIONS))
    p.add_argument("--dim", type=int, required=True, choices=benchmarks.DIMENSIONS)
    p.add_argument("--runs", type=int, default=32)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cache", required=cache_required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modcmaes",
        description="Modular CMA-ES experiments: runs, sweeps, structure search, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration n times")
    p.add_argument("--config", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bruteforce", help="sweep a configuration space")
    _add_common(p)
    p.add_argument("--resume", action="store_true",
                   help="explicitly continue an interrupted sweep")
    p.add_argument("--free", default=None,
                   help="comma list of free 1-based gene positions; "
                        "others frozen to 0")
    p.set_defaults(func=cmd_bruteforce)

    p = sub.add_parser("ga", help="run the structure-search GA")
    _add_common(p)
    p.add_argument("--ga-runs", type=int, default=30)
    p.add_argument("--ga-budget", type=int, default=240)
    p.add_argument("--ga-lambda", type=int, default=12)
    p.add_argument("--out", required=True, help="directory for trace files")
    p.add_argument("--free", default=None)
    p.set_defaults(func=cmd_ga)

    p = sub.add_parser("report-rank", help="rank GA aggregate among brute force")
    _add_common(p)
    p.add_argument("--traces", required=True)
    p.add_argument("--free", default=None)
    p.set_defaults(func=report_rank)

    p = sub.add_parser("report-activation", help="module activation table")
    p.add_argument("--winners", required=True)
    p.add_argument("--group-by", choices=("subgroup", "dimension"),
                   default="subgroup")
    p.set_defaults(func=cmd_report_activation)

    p = sub.add_parser("report-convergence", help="mean convergence series")
    p.add_argument("--traces", required=True)
    p.set_defaults(func=cmd_report_convergence)

    p = sub.add_parser("suite", help="emit the benchmark suite manifest")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_suite)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
