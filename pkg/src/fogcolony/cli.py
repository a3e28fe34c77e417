"""Command-line experiment runner.

Verbs::

    fogcolony run     --config FILE [--seed N] [--generations N] [--fitness-mode cost|wall]
                      [--out DIR] [--matrix] [--workers N] [--force]
    fogcolony export  RESULT_DIR [--svg]
    fogcolony metrics RESULT_DIR

``run`` writes one directory per scenario, named ``<N>nodes<A>apps``:

scenario.json
    infrastructure, workload and the effective configuration
dendrogram.json
    nested candidate-colony tree
traces.csv
    ``generation, individual, response_time, placement_time, front_rank,
    chromosome, colony_costs`` for every population member of every generation
result.json
    baselines, final Pareto front (chromosomes, colony ids, objectives),
    metrics and the smallED solution's placement triples
metrics.csv
    ``experiment, s_metric, first_dominating_generation, c_ga_one_colony,
    c_ga_fixed_size, c_one_colony_ga, c_fixed_size_ga``

``export`` adds ``plots/gen_XXXX.csv`` with columns
``response_time, placement_time, front_flag, kind`` where ``kind`` is
``population``, ``one-colony``, ``fixed-size`` or ``smallED``.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig, load_config, validate
from .dendro import build_dendrogram
from .evolve import GenerationTrace, baseline_fixed_size, baseline_one_colony, fast_nondominated_sort, run_nsga2
from .fitness import Evaluator
from .infra import Infrastructure, ParameterError, generate_topology
from .layout import selected, to_bits, to_layout
from .metrics import first_dominating_generation, select_small_ed, summarize
from .workload import Workload, generate_workload

log = logging.getLogger("fogcolony")

MATRIX_NODES = (100, 200, 300)
MATRIX_APPS = (20, 40, 60)

TRACE_COLUMNS = [
    "generation", "individual", "response_time", "placement_time",
    "front_rank", "chromosome", "colony_costs",
]
METRIC_COLUMNS = [
    "experiment", "s_metric", "first_dominating_generation",
    "c_ga_one_colony", "c_ga_fixed_size", "c_one_colony_ga", "c_fixed_size_ga",
]
EXPORT_COLUMNS = ["response_time", "placement_time", "front_flag", "kind"]


@dataclass
class Scenario:
    infra: Infrastructure
    workload: Workload
    ga_seed: int


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    """Infrastructure, workload and GA seed, each from its own child of the master seed."""
    validate(cfg, require_size=True)
    s_infra, s_work, s_ga = np.random.SeedSequence(cfg.experiment.seed).spawn(3)
    i, w = cfg.infrastructure, cfg.workload
    infra = generate_topology(
        i.n_devices,
        attach_m=i.attach_m,
        latency_range=(i.latency_min, i.latency_max),
        capacity_range=(i.capacity_min, i.capacity_max),
        gateway_fraction=i.gateway_fraction,
        seed=s_infra,
        cloud_latency=i.cloud_latency,
    )
    workload = generate_workload(
        infra,
        w.n_apps,
        services_per_app=(w.services_min, w.services_max),
        req_range=(w.req_min, w.req_max),
        popularity_max=w.popularity_max,
        rate_range=(w.inter_request_min, w.inter_request_max),
        seed=s_work,
    )
    return Scenario(infra, workload, int(s_ga.generate_state(1, dtype=np.uint32)[0]))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_traces(traces, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for tr in traces:
        for k, (obj, rank, chrom) in enumerate(zip(tr.objectives, tr.ranks, tr.chromosomes)):
            costs = ";".join(_fmt(c) for c in tr.colony_costs[k]) if tr.colony_costs else ""
            w.writerow([tr.generation, k, _fmt(obj[0]), _fmt(obj[1]), int(rank), to_bits(chrom), costs])


def read_traces(path) -> dict[int, list[dict]]:
    out: dict[int, list[dict]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(int(row["generation"]), []).append(row)
    return out


def run_experiment(cfg: ScenarioConfig, out_root, force: bool = False) -> Path:
    """Run baselines and the GA for one scenario and persist every artifact."""
    validate(cfg, require_size=True)
    out = Path(out_root) / cfg.label
    if out.exists():
        if not force:
            raise FileExistsError(f"{out} exists; pass --force to overwrite")
        shutil.rmtree(out)
    out.mkdir(parents=True)

    sc = build_scenario(cfg)
    dendro = build_dendrogram(sc.infra)
    evaluator = Evaluator(sc.infra, sc.workload, dendro, cfg.experiment.fitness_mode)
    one_layout, one_obj = baseline_one_colony(evaluator, dendro)
    fix_layout, fix_obj = baseline_fixed_size(evaluator, dendro, cfg.experiment.fixed_size)
    ga = dataclasses.replace(cfg.ga_config(), master_seed=sc.ga_seed)
    log.info("%s: %d devices, %d users, %d candidates", cfg.label, sc.infra.n, len(sc.workload.users), len(dendro))
    pop, front, traces = run_nsga2(evaluator, dendro, ga)

    baselines = {"one-colony": tuple(one_obj), "fixed-size": tuple(fix_obj)}
    pts = [tuple(ind.objectives) for ind in front]
    summary = summarize(pts, baselines)
    fdg = first_dominating_generation(traces, list(baselines.values()))
    best, best_pt = select_small_ed(pts)
    best_eval = Evaluator(sc.infra, sc.workload, dendro, cfg.experiment.fitness_mode, keep_placements=True)
    placement = best_eval.evaluate_layout(to_layout(front[best].chromosome, dendro)).placement

    (out / "scenario.json").write_text(
        json.dumps(
            {
                "label": cfg.label,
                "config": cfg.to_dict(),
                "ga_seed": sc.ga_seed,
                "infrastructure": sc.infra.to_dict(),
                "workload": sc.workload.to_dict(),
            },
            indent=1,
        )
    )
    (out / "dendrogram.json").write_text(json.dumps(dendro.to_tree(), indent=1))
    with open(out / "traces.csv", "w", newline="") as fh:
        write_traces(traces, fh)
    metrics = {
        "s_metric": summary.s_metric,
        "first_dominating_generation": fdg,
        "c_ga_one_colony": summary.coverage_vs["one-colony"],
        "c_ga_fixed_size": summary.coverage_vs["fixed-size"],
        "c_one_colony_ga": summary.coverage_of["one-colony"],
        "c_fixed_size_ga": summary.coverage_of["fixed-size"],
    }
    result = {
        "label": cfg.label,
        "pop_size": ga.pop_size,
        "generations": ga.gen_num,
        "baselines": {
            "one-colony": {"objectives": list(one_obj), "colonies": list(one_layout.ids)},
            "fixed-size": {"objectives": list(fix_obj), "colonies": list(fix_layout.ids)},
        },
        "front": [
            {
                "chromosome": to_bits(ind.chromosome),
                "colonies": selected(ind.chromosome),
                "objectives": list(ind.objectives),
            }
            for ind in front
        ],
        "small_ed": {"index": best, "objectives": list(best_pt), "placement": placement.triples()},
        "metrics": metrics,
    }
    (out / "result.json").write_text(json.dumps(result, indent=1))
    write_metrics_csv(out / "metrics.csv", [(cfg.label, metrics)])
    return out


def write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        for label, m in rows:
            fdg = m["first_dominating_generation"]
            w.writerow([label] + [m[k] if k != "first_dominating_generation" else ("" if fdg is None else fdg)
                                  for k in METRIC_COLUMNS[1:]])


def _load_result(result_dir) -> dict:
    p = Path(result_dir) / "result.json"
    if not p.is_file():
        raise FileNotFoundError(f"no result.json in {result_dir}")
    return json.loads(p.read_text())


def export_plot_data(result_dir, svg: bool = False) -> list[Path]:
    """Per-generation scatter CSVs (population, both baselines, smallED of that front)."""
    res = _load_result(result_dir)
    gens = read_traces(Path(result_dir) / "traces.csv")
    plot_dir = Path(result_dir) / "plots"
    plot_dir.mkdir(exist_ok=True)
    written = []
    for g in sorted(gens):
        rows = gens[g]
        obj = np.array([[float(r["response_time"]), float(r["placement_time"])] for r in rows])
        front = set(fast_nondominated_sort(obj)[0])
        fi = sorted(front)
        k, pt = select_small_ed(obj[fi])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EXPORT_COLUMNS)
        for i, (rt, pt_) in enumerate(obj):
            w.writerow([_fmt(rt), _fmt(pt_), int(i in front), "population"])
        for name in ("one-colony", "fixed-size"):
            rt, pt_ = res["baselines"][name]["objectives"]
            w.writerow([_fmt(rt), _fmt(pt_), 0, name])
        w.writerow([_fmt(pt[0]), _fmt(pt[1]), 1, "smallED"])
        path = plot_dir / f"gen_{g:04d}.csv"
        path.write_text(buf.getvalue())
        written.append(path)
        if svg:
            _scatter_svg(path.with_suffix(".svg"), obj, front, res, pt, g)
    return written


def _scatter_svg(path, obj, front, res, small, gen) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    mask = np.array([i in front for i in range(len(obj))])
    ax.scatter(obj[~mask, 0], obj[~mask, 1], s=8, label="other fronts")
    ax.scatter(obj[mask, 0], obj[mask, 1], s=8, label="Pareto front")
    for name, marker in (("one-colony", "x"), ("fixed-size", "+")):
        rt, pt = res["baselines"][name]["objectives"]
        ax.scatter([rt], [pt], marker=marker, s=60, label=name)
    ax.scatter([small[0]], [small[1]], marker="*", s=90, c="k", label="smallED")
    ax.set_xlabel("response_time")
    ax.set_ylabel("placement_time")
    ax.set_title(f"generation {gen}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def recompute_metrics(result_dir) -> dict:
    """Metrics of a finished run recomputed from its result and trace files."""
    res = _load_result(result_dir)
    baselines = {k: tuple(v["objectives"]) for k, v in res["baselines"].items()}
    pts = [tuple(f["objectives"]) for f in res["front"]]
    summary = summarize(pts, baselines)

    traces = []
    for g, rows in sorted(read_traces(Path(result_dir) / "traces.csv").items()):
        obj = np.array([[float(r["response_time"]), float(r["placement_time"])] for r in rows])
        ranks = np.array([int(r["front_rank"]) for r in rows])
        traces.append(GenerationTrace(g, obj, ranks, []))
    return {
        "s_metric": summary.s_metric,
        "first_dominating_generation": first_dominating_generation(traces, list(baselines.values())),
        "c_ga_one_colony": summary.coverage_vs["one-colony"],
        "c_ga_fixed_size": summary.coverage_vs["fixed-size"],
        "c_one_colony_ga": summary.coverage_of["one-colony"],
        "c_fixed_size_ga": summary.coverage_of["fixed-size"],
    }


def _scenarios(cfg: ScenarioConfig, matrix: bool) -> list[ScenarioConfig]:
    if not matrix:
        return [cfg]
    return [
        cfg.replace(infrastructure={"n_devices": n}, workload={"n_apps": a})
        for n in MATRIX_NODES
        for a in MATRIX_APPS
    ]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fogcolony", description="Fog colony layout optimization experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run one scenario, or the 3x3 scenario grid with --matrix")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--seed", type=int)
    r.add_argument("--generations", type=int)
    r.add_argument("--fitness-mode", choices=["cost", "wall"])
    r.add_argument("--out", type=Path)
    r.add_argument("--workers", type=int)
    r.add_argument("--matrix", action="store_true", help="run {100,200,300} nodes x {20,40,60} apps")
    r.add_argument("--force", action="store_true", help="overwrite existing result directories")

    e = sub.add_parser("export", help="write per-generation scatter data")
    e.add_argument("result_dir", type=Path)
    e.add_argument("--svg", action="store_true", help="also render SVG scatter plots (needs matplotlib)")

    m = sub.add_parser("metrics", help="print metrics of a finished run")
    m.add_argument("result_dir", type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.verb == "run":
            cfg = load_config(args.config)
            over = {}
            if args.seed is not None:
                over["seed"] = args.seed
            if args.fitness_mode:
                over["fitness_mode"] = args.fitness_mode
            if args.workers is not None:
                over["workers"] = args.workers
            if args.out is not None:
                over["output_dir"] = str(args.out)
            gen = {"generations": args.generations} if args.generations is not None else {}
            cfg = cfg.replace(experiment=over, genetic=gen)
            for sc in _scenarios(cfg, args.matrix):
                path = run_experiment(sc, sc.experiment.output_dir, args.force)
                print(path)
        elif args.verb == "export":
            paths = export_plot_data(args.result_dir, args.svg)
            print(f"{len(paths)} generation files in {args.result_dir / 'plots'}")
        else:
            m = recompute_metrics(args.result_dir)
            for k in METRIC_COLUMNS[1:]:
                print(f"{k}: {m[k]}")
    except (ConfigError, ParameterError, FileExistsError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
