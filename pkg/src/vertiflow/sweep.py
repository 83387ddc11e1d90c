"""Budget / valuation sweeps producing a report bundle.

One design solve per (budget, valuation) grid point, evaluated with the
redundancy metrics and written as a deterministic bundle: ``designs.json``,
``metrics.csv``, three plot-data CSVs whose columns match the figure axes
(enhancement vs budget, diversity distribution, coverage distribution), and
rendered PNG figures of the same data.  Numbers in CSVs carry 9 significant
digits; identical inputs produce byte-identical CSVs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .design import DesignEvaluator, DesignResult, DesignSpec, solve_design
from .errors import ValidationError
from .extension import build_backup_topology
from .fileio import NetworkFile
from .lp import SolverConfig
from .metrics import max_landing_distance, throughput_enhancement, travel_diversity
from . import plots

_QUANTS = ("min", "q25", "median", "q75", "max")

METRICS_HEADER = (
    "budget,w,objective,expected_throughput,total_cost,delta,delta_bar,"
    + ",".join(f"div_{q}" for q in _QUANTS) + ","
    + ",".join(f"cov_{q}" for q in _QUANTS)
)


@dataclass(frozen=True)
class SweepConfig:
    budgets: tuple[float, ...]
    ws: tuple[float, ...]
    method: str = "direct-milp"
    out_dir: str = "."

    def __post_init__(self) -> None:
        for name, grid in (("budgets", self.budgets), ("ws", self.ws)):
            if not grid:
                raise ValidationError(f"{name} grid must be nonempty")
            if list(grid) != sorted(grid):
                raise ValidationError(f"{name} grid must be ascending")


@dataclass
class SweepRow:
    budget: float
    w: float
    objective: float
    expected: float
    cost: float
    delta: float
    delta_bar: float
    div_min: float = 0.0
    div_q25: float = 0.0
    div_median: float = 0.0
    div_q75: float = 0.0
    div_max: float = 0.0
    cov_min: float = 0.0
    cov_q25: float = 0.0
    cov_median: float = 0.0
    cov_q75: float = 0.0
    cov_max: float = 0.0
    result: Optional[DesignResult] = field(default=None, repr=False)


def _quants(values) -> tuple[float, float, float, float, float]:
    arr = np.asarray(values, dtype=float)
    return tuple(float(np.quantile(arr, q)) for q in (0.0, 0.25, 0.5, 0.75, 1.0))


def scenario_label(key: tuple) -> str:
    kind, element, level = key
    return "none" if kind == "none" else f"{kind}:{element}"


def run_sweep(
    nf: NetworkFile,
    cfg: SweepConfig,
    config: Optional[SolverConfig] = None,
) -> list[SweepRow]:
    """Solve every grid point in (budget, w) order and evaluate its metrics."""
    if nf.candidates is None or nf.policy is None:
        raise ValidationError("sweeps need candidates and a backup policy in the file")
    topology = build_backup_topology(nf.network, nf.candidates, nf.policy)
    evaluator: Optional[DesignEvaluator] = None
    rows: list[SweepRow] = []
    for budget in cfg.budgets:
        for w in cfg.ws:
            spec = DesignSpec(
                network=nf.network, demands=nf.demands, candidates=nf.candidates,
                topology=topology, budget=float(budget), valuation=float(w),
            )
            if evaluator is None:
                evaluator = DesignEvaluator(spec, config)
            result = solve_design(spec, method=cfg.method, config=config,
                                  evaluator=evaluator)
            enh = throughput_enhancement(spec, result.built_caps, evaluator=evaluator)
            div = travel_diversity(spec, result.built_caps)
            cov = max_landing_distance(spec, result.built_caps)
            row = SweepRow(
                budget=float(budget), w=float(w),
                objective=result.objective, expected=result.expected_throughput,
                cost=result.total_cost, delta=enh.total, delta_bar=enh.expected,
                result=result,
            )
            for name, v in zip(_QUANTS, _quants(div.counts)):
                setattr(row, f"div_{name}", v)
            for name, v in zip(_QUANTS, _quants(cov.distances)):
                setattr(row, f"cov_{name}", v)
            rows.append(row)
    return rows


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _csv(path: str, header: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for line in lines:
            fh.write(line + "\n")


def write_bundle(rows: list[SweepRow], out_dir: str, render: bool = True) -> list[str]:
    """Write the report bundle; returns the list of files written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    designs = []
    for r in rows:
        res = r.result
        designs.append({
            "budget": r.budget,
            "w": r.w,
            "method": res.method,
            "objective": res.objective,
            "expected_throughput": res.expected_throughput,
            "total_cost": res.total_cost,
            "selection": [[int(z) for z in row] for row in res.Z],
            "built_capacities": [float(c) for c in res.built_caps],
            "per_scenario": [
                {"element": scenario_label(key), "level": key[2],
                 "probability": p, "throughput": v}
                for key, p, v in res.per_scenario
            ],
        })
    path = os.path.join(out_dir, "designs.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format": "vertiflow-designs/1", "designs": designs},
                            indent=2) + "\n")
    written.append(path)

    metric_lines = []
    enh_lines = []
    div_lines = []
    cov_lines = []
    for r in rows:
        quants_div = ",".join(_fmt(getattr(r, f"div_{q}")) for q in _QUANTS)
        quants_cov = ",".join(_fmt(getattr(r, f"cov_{q}")) for q in _QUANTS)
        head = f"{_fmt(r.budget)},{_fmt(r.w)}"
        metric_lines.append(
            f"{head},{_fmt(r.objective)},{_fmt(r.expected)},{_fmt(r.cost)},"
            f"{_fmt(r.delta)},{_fmt(r.delta_bar)},{quants_div},{quants_cov}"
        )
        enh_lines.append(f"{head},{_fmt(r.delta_bar)},{_fmt(r.delta)}")
        div_lines.append(f"{head},{quants_div}")
        cov_lines.append(f"{head},{quants_cov}")

    path = os.path.join(out_dir, "metrics.csv")
    _csv(path, METRICS_HEADER, metric_lines)
    written.append(path)
    path = os.path.join(out_dir, "plot_enhancement.csv")
    _csv(path, "budget,w,delta_bar,delta", enh_lines)
    written.append(path)
    path = os.path.join(out_dir, "plot_diversity.csv")
    _csv(path, "budget,w," + ",".join(_QUANTS), div_lines)
    written.append(path)
    path = os.path.join(out_dir, "plot_coverage.csv")
    _csv(path, "budget,w," + ",".join(_QUANTS), cov_lines)
    written.append(path)

    if render:
        path = os.path.join(out_dir, "enhancement.png")
        plots.render_enhancement(rows, path)
        written.append(path)
        path = os.path.join(out_dir, "diversity.png")
        plots.render_quantiles(rows, "div", "effective paths per O-D pair", path)
        written.append(path)
        path = os.path.join(out_dir, "coverage.png")
        plots.render_quantiles(rows, "cov", "maximum landing distance (km)", path)
        written.append(path)
    return written
