"""Redundancy evaluations of a built design: capacity, diversity, coverage.

Three views of what reserve capacity buys:

* throughput enhancement - per-scenario gain of the extended network over the
  disturbed original, aggregated with conditional weights (total, ``delta``)
  and with raw scenario probabilities (expected, ``delta_bar``);
* travel alternative diversity - effective path count per O-D pair, one for
  the original corridor plus one per built backup qualified to reroute it;
* maximum landing distance - the worst point along each corridor measured by
  distance to the nearest landing site, built backups included even when they
  provide no detour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .design import DesignSpec, DesignEvaluator
from .errors import ValidationError
from .lp import SolverConfig


@dataclass(frozen=True)
class EnhancementReport:
    total: float  # conditional-probability weighting
    expected: float  # raw-probability weighting
    per_scenario: tuple[tuple[tuple, float], ...]  # (scenario key, gain)


@dataclass(frozen=True)
class DiversityReport:
    pairs: tuple[tuple[int, int], ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class CoverageReport:
    pairs: tuple[tuple[int, int], ...]
    distances: tuple[float, ...]
    t_stars: tuple[float, ...]


def throughput_enhancement(
    spec: DesignSpec,
    built_caps: np.ndarray,
    config: Optional[SolverConfig] = None,
    evaluator: Optional[DesignEvaluator] = None,
) -> EnhancementReport:
    """Throughput gains of the extended network over the disturbed original."""
    ev = evaluator if evaluator is not None else DesignEvaluator(spec, config)
    dis = spec.network.disruption
    total = 0.0
    expected = 0.0
    gains: list[tuple[tuple, float]] = []
    for idx, s in enumerate(ev.scenarios):
        if s.disturbed is None:
            continue
        gain = ev.extended(idx, built_caps) - ev.original(idx)
        gains.append((s.key(), gain))
        kind, element = s.disturbed
        p_element = dis.element_probability(kind, element)
        if p_element > 0:
            cond = s.probability / p_element
            total += gain * cond
        expected += gain * s.probability
    return EnhancementReport(total=total, expected=expected, per_scenario=tuple(gains))


def _link_of_pair(spec: DesignSpec, pair: tuple[int, int]):
    for e in spec.network.links:
        if (e.tail, e.head) == pair:
            return e
    raise ValidationError(
        f"O-D pair {pair} has no original link; diversity is defined per corridor"
    )


def travel_diversity(spec: DesignSpec, built_caps: np.ndarray) -> DiversityReport:
    """Effective path count per O-D pair under the built design."""
    counts = []
    for pair in spec.demands.pairs:
        link = _link_of_pair(spec, pair)
        built_detours = sum(
            1 for ci in spec.topology.detours[link.id] if built_caps[ci] > 0
        )
        counts.append(1 + built_detours)
    return DiversityReport(pairs=spec.demands.pairs, counts=tuple(counts))


def min_distance_profile_max(
    tail: Sequence[float], head: Sequence[float], sites: np.ndarray
) -> tuple[float, float]:
    """Maximize (over the segment) the distance to the nearest site, exactly.

    The squared distances to the sites are quadratics in the segment parameter
    sharing one leading coefficient, so any two of them cross at most once and
    the pointwise minimum is piecewise one of them.  On each piece the
    maximum of an upward parabola sits at an endpoint, so it suffices to
    evaluate the nearest-site distance at every pairwise crossing parameter
    inside [0, 1] plus the segment endpoints.
    """
    a = np.asarray(tail, dtype=float)
    b = np.asarray(head, dtype=float)
    sites = np.asarray(sites, dtype=float)
    if sites.size == 0:
        raise ValidationError("need at least one landing site")
    ab = b - a
    seg_len2 = float(ab @ ab)
    rel = sites - a
    if seg_len2 == 0.0:
        d = float(np.min(np.linalg.norm(rel, axis=1)))
        return d, 0.0

    # |a + t*ab - s|^2 = seg_len2*t^2 - 2*t*(ab.s_rel) + |s_rel|^2
    lin = rel @ ab
    const = np.einsum("ij,ij->i", rel, rel)

    ts = [0.0, 1.0]
    k = sites.shape[0]
    for i in range(k):
        for j in range(i + 1, k):
            denom = 2.0 * (lin[i] - lin[j])
            if denom == 0.0:
                continue
            t = (const[i] - const[j]) / denom
            if 0.0 < t < 1.0:
                ts.append(t)

    best_d2 = -1.0
    best_t = 0.0
    for t in sorted(float(t) for t in ts):
        d2 = float(np.min(seg_len2 * t * t - 2.0 * t * lin + const))
        if d2 > best_d2 + 1e-15:
            best_d2 = d2
            best_t = t
    return math.sqrt(max(best_d2, 0.0)), best_t


def max_landing_distance(spec: DesignSpec, built_caps: np.ndarray) -> CoverageReport:
    """Worst distance to the nearest landing site along each O-D corridor."""
    positions = spec.network.positions()
    built_positions = [
        spec.candidates.positions[ci]
        for ci in range(spec.candidates.count)
        if built_caps[ci] > 0
    ]
    sites = np.vstack([positions] + [np.asarray(built_positions)]) if built_positions \
        else positions
    distances = []
    t_stars = []
    for pair in spec.demands.pairs:
        link = _link_of_pair(spec, pair)
        d, t = min_distance_profile_max(
            positions[link.tail], positions[link.head], sites
        )
        distances.append(d)
        t_stars.append(t)
    return CoverageReport(pairs=spec.demands.pairs,
                          distances=tuple(distances), t_stars=tuple(t_stars))
