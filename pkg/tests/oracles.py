"""Independent test oracles.

These deliberately avoid the package's LP builder and solver: the path-flow
oracle enumerates simple paths per O-D pair and solves the path-variable LP
with scipy, and the coverage oracle samples the segment densely.  Brute-force
binary enumeration for MIPs lives here too.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def simple_paths(arcs: list[tuple[int, int]], origin: int, dest: int) -> list[list[int]]:
    """All node-simple directed paths as lists of arc indices."""
    out_arcs: dict[int, list[int]] = {}
    for j, (t, h) in enumerate(arcs):
        out_arcs.setdefault(t, []).append(j)
    paths: list[list[int]] = []

    def dfs(node: int, visited: set[int], acc: list[int]) -> None:
        if node == dest:
            paths.append(list(acc))
            return
        for j in out_arcs.get(node, []):
            h = arcs[j][1]
            if h in visited:
                continue
            visited.add(h)
            acc.append(j)
            dfs(h, visited, acc)
            acc.pop()
            visited.remove(h)

    dfs(origin, {origin}, [])
    return paths


def path_flow_throughput(
    node_caps: list[float],
    arcs: list[tuple[int, int, float]],
    demands: list[tuple[int, int]],
) -> float:
    """Maximum total fulfilled demand via explicit path enumeration.

    One LP variable per (demand, simple path); a path consumes one unit of
    each traversed arc's capacity and one unit of node capacity per arc
    endpoint touched (origin and destination once, intermediate stops twice).
    """
    arc_pairs = [(t, h) for t, h, _ in arcs]
    variables: list[list[int]] = []
    for o, d in demands:
        for p in simple_paths(arc_pairs, o, d):
            variables.append(p)
    if not variables:
        return 0.0

    n_arcs, n_nodes = len(arcs), len(node_caps)
    A = np.zeros((n_arcs + n_nodes, len(variables)))
    for col, path in enumerate(variables):
        for j in path:
            A[j, col] += 1.0
            t, h, _ = arcs[j]
            A[n_arcs + t, col] += 1.0
            A[n_arcs + h, col] += 1.0
    b = np.array([c for _, _, c in arcs] + list(node_caps), dtype=float)
    res = linprog(c=-np.ones(len(variables)), A_ub=A, b_ub=b, method="highs")
    assert res.status == 0, res.message
    return float(-res.fun)


def dense_max_min_distance(
    tail, head, sites, n_points: int = 100_000
) -> tuple[float, float]:
    """Sampled max-over-segment of distance-to-nearest-site."""
    a = np.asarray(tail, dtype=float)
    b = np.asarray(head, dtype=float)
    sites = np.asarray(sites, dtype=float)
    ts = np.linspace(0.0, 1.0, n_points)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    d = np.min(np.linalg.norm(pts[:, None, :] - sites[None, :, :], axis=2), axis=1)
    i = int(np.argmax(d))
    return float(d[i]), float(ts[i])


def enumerate_mip_best(model, binaries, solve_lp_fn) -> float:
    """Best objective over all binary assignments, each fixed and LP-solved."""
    best = -math.inf
    binaries = sorted(binaries)
    for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
        lower = list(model.lower)
        upper = list(model.upper)
        for j, v in zip(binaries, bits):
            lower[j] = v
            upper[j] = v
        clone = type(model)()
        clone.obj = model.obj
        clone.names = model.names
        clone.rows = model.rows
        clone.relations = model.relations
        clone.rhs = model.rhs
        clone.row_names = model.row_names
        clone.lower = lower
        clone.upper = upper
        res = solve_lp_fn(clone)
        if res.status == "optimal":
            best = max(best, res.objective)
    return best
