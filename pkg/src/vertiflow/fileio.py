"""Network case files: strict JSON parsing, deterministic writing, generators.

The on-disk format is JSON with a top-level ``"format": "vertiflow/1"`` key;
the full schema is documented byte-exactly in docs/formats.md.  Parsing is
strict: unknown keys are rejected and every number must be finite, with
errors carrying a JSON-path location.  Writing is deterministic (fixed key
order, ``repr``-exact floats), so parse/write round-trips are field-exact and
generated cases are byte-identical for a given seed.

Synthetic cases come in three topology classes - ``star``, ``mesh-star``, and
``multi-star`` - mirroring the scale of a mid-size, large, and multi-hub
metropolitan network.  Randomness uses numpy's PCG64 generator, so a 64-bit
seed reproduces a case across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import FileFormatError
from .extension import BackupPolicy, CandidateSet
from .network import DemandSet, DisruptionModel, Link, Node, RiskNetwork

FORMAT_KEY = "vertiflow/1"


@dataclass(frozen=True)
class NetworkFile:
    """In-memory form of one case file."""

    network: RiskNetwork
    demands: DemandSet
    candidates: Optional[CandidateSet]
    policy: Optional[BackupPolicy]


# ---------------------------------------------------------------------------
# strict parsing
# ---------------------------------------------------------------------------


def _expect_keys(obj: dict, required: tuple[str, ...], optional: tuple[str, ...],
                 where: str, path: str) -> None:
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise FileFormatError(f"unknown keys {sorted(unknown)}", path=path, location=where)
    missing = [k for k in required if k not in obj]
    if missing:
        raise FileFormatError(f"missing keys {missing}", path=path, location=where)


def _num(obj, where: str, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise FileFormatError(f"expected a number, got {type(obj).__name__}",
                              path=path, location=where)
    v = float(obj)
    if not math.isfinite(v):
        raise FileFormatError(f"non-finite number {obj}", path=path, location=where)
    return v


def _int(obj, where: str, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise FileFormatError(f"expected an integer, got {obj!r}", path=path, location=where)
    return obj


def _levels(obj, where: str, path: str) -> tuple[tuple[float, float], ...]:
    if not isinstance(obj, list):
        raise FileFormatError("'disturbed' must be a list", path=path, location=where)
    out = []
    for t, entry in enumerate(obj):
        w = f"{where}.disturbed[{t}]"
        if not isinstance(entry, dict):
            raise FileFormatError("level must be an object", path=path, location=w)
        _expect_keys(entry, ("capacity", "cond_prob"), (), w, path)
        out.append((_num(entry["capacity"], w, path), _num(entry["cond_prob"], w, path)))
    return tuple(out)


def parse_network_data(data: dict, path: str = "<data>") -> NetworkFile:
    if not isinstance(data, dict):
        raise FileFormatError("top level must be an object", path=path)
    _expect_keys(
        data,
        ("format", "nodes", "links", "demands", "disruption"),
        ("candidates", "levels", "policy"),
        "top level",
        path,
    )
    if data["format"] != FORMAT_KEY:
        raise FileFormatError(f"unsupported format {data['format']!r}; "
                              f"expected {FORMAT_KEY!r}", path=path, location="format")

    nodes = []
    node_levels = []
    for i, nd in enumerate(data["nodes"]):
        w = f"nodes[{i}]"
        _expect_keys(nd, ("id", "x_km", "y_km", "capacity", "disturbed"), (), w, path)
        nodes.append(Node(id=_int(nd["id"], w, path),
                          position=(_num(nd["x_km"], w, path), _num(nd["y_km"], w, path)),
                          capacity=_num(nd["capacity"], w, path)))
        node_levels.append(_levels(nd["disturbed"], w, path))

    links = []
    link_levels = []
    for i, ld in enumerate(data["links"]):
        w = f"links[{i}]"
        _expect_keys(ld, ("id", "tail", "head", "capacity", "disturbed"), (), w, path)
        links.append(Link(id=_int(ld["id"], w, path), tail=_int(ld["tail"], w, path),
                          head=_int(ld["head"], w, path),
                          capacity=_num(ld["capacity"], w, path)))
        link_levels.append(_levels(ld["disturbed"], w, path))

    demands = []
    for i, pair in enumerate(data["demands"]):
        w = f"demands[{i}]"
        if not (isinstance(pair, list) and len(pair) == 2):
            raise FileFormatError("demand must be a [origin, destination] pair",
                                  path=path, location=w)
        demands.append((_int(pair[0], w, path), _int(pair[1], w, path)))

    dis = data["disruption"]
    _expect_keys(dis, ("p_dis", "element_weights"), (), "disruption", path)
    p_dis = _num(dis["p_dis"], "disruption.p_dis", path)
    weights = dis["element_weights"]
    n_v, n_e = len(nodes), len(links)
    if weights == "uniform":
        n = n_v + n_e
        link_w = tuple(1.0 / n for _ in links)
        node_w = tuple(1.0 / n for _ in nodes)
    else:
        if not isinstance(weights, dict):
            raise FileFormatError("element_weights must be 'uniform' or an object",
                                  path=path, location="disruption.element_weights")
        _expect_keys(weights, (), ("nodes", "links"), "disruption.element_weights", path)
        node_map = weights.get("nodes", {})
        link_map = weights.get("links", {})
        for key_map, count, label in ((node_map, n_v, "nodes"), (link_map, n_e, "links")):
            for k in key_map:
                if not (k.isdigit() and int(k) < count):
                    raise FileFormatError(f"unknown element id {k!r}", path=path,
                                          location=f"disruption.element_weights.{label}")
        where = "disruption.element_weights"
        node_w = tuple(_num(node_map.get(str(i), 0.0), where, path) for i in range(n_v))
        link_w = tuple(_num(link_map.get(str(i), 0.0), where, path) for i in range(n_e))

    disruption = DisruptionModel(
        p_dis=p_dis,
        link_levels=tuple(link_levels),
        node_levels=tuple(node_levels),
        link_weights=link_w,
        node_weights=node_w,
    )
    network = RiskNetwork(nodes=tuple(nodes), links=tuple(links), disruption=disruption)
    demand_set = DemandSet(pairs=tuple(demands))

    candidates = None
    if "candidates" in data and data["candidates"]:
        if "levels" not in data:
            raise FileFormatError("candidates present but no 'levels' section", path=path)
        lv = data["levels"]
        _expect_keys(lv, ("capacities", "costs"), (), "levels", path)
        caps = [_num(c, "levels.capacities", path) for c in lv["capacities"]]
        costs = [_num(c, "levels.costs", path) for c in lv["costs"]]
        if len(caps) != len(costs):
            raise FileFormatError("levels.capacities and levels.costs differ in length",
                                  path=path, location="levels")
        ids = []
        positions = []
        for i, cd in enumerate(data["candidates"]):
            w = f"candidates[{i}]"
            _expect_keys(cd, ("id", "x_km", "y_km"), (), w, path)
            ids.append(_int(cd["id"], w, path))
            positions.append((_num(cd["x_km"], w, path), _num(cd["y_km"], w, path)))
        candidates = CandidateSet(
            ids=tuple(ids), positions=tuple(positions),
            cap_levels=np.tile(np.array(caps), (len(ids), 1)),
            costs=np.tile(np.array(costs), (len(ids), 1)),
        )

    policy = None
    if "policy" in data:
        pd = data["policy"]
        _expect_keys(pd, ("ratio_min", "ratio_max", "rho_adj_km"), (), "policy", path)
        policy = BackupPolicy(
            ratio_min=_num(pd["ratio_min"], "policy", path),
            ratio_max=_num(pd["ratio_max"], "policy", path),
            rho_adj_km=_num(pd["rho_adj_km"], "policy", path),
        )

    return NetworkFile(network=network, demands=demand_set,
                       candidates=candidates, policy=policy)


def load_network_file(path: str) -> NetworkFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FileFormatError(str(exc), path=path) from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"invalid JSON: {exc.msg}", path=path,
                              location=f"line {exc.lineno} column {exc.colno}") from exc
    return parse_network_data(data, path=path)


# ---------------------------------------------------------------------------
# deterministic writing
# ---------------------------------------------------------------------------


def network_to_data(nf: NetworkFile) -> dict:
    net = nf.network
    dis = net.disruption
    data: dict = {"format": FORMAT_KEY}
    data["nodes"] = [
        {
            "id": v.id, "x_km": v.position[0], "y_km": v.position[1],
            "capacity": v.capacity,
            "disturbed": [{"capacity": c, "cond_prob": p}
                          for c, p in dis.node_levels[v.id]],
        }
        for v in net.nodes
    ]
    data["links"] = [
        {
            "id": e.id, "tail": e.tail, "head": e.head, "capacity": e.capacity,
            "disturbed": [{"capacity": c, "cond_prob": p}
                          for c, p in dis.link_levels[e.id]],
        }
        for e in net.links
    ]
    data["demands"] = [[o, d] for o, d in nf.demands.pairs]
    data["disruption"] = {
        "p_dis": dis.p_dis,
        "element_weights": {
            "nodes": {str(i): w for i, w in enumerate(dis.node_weights) if w != 0.0},
            "links": {str(i): w for i, w in enumerate(dis.link_weights) if w != 0.0},
        },
    }
    if nf.candidates is not None:
        data["candidates"] = [
            {"id": cid, "x_km": pos[0], "y_km": pos[1]}
            for cid, pos in zip(nf.candidates.ids, nf.candidates.positions)
        ]
        data["levels"] = {
            "capacities": list(nf.candidates.cap_levels[0]),
            "costs": list(nf.candidates.costs[0]),
        }
    if nf.policy is not None:
        data["policy"] = {
            "ratio_min": nf.policy.ratio_min,
            "ratio_max": nf.policy.ratio_max,
            "rho_adj_km": nf.policy.rho_adj_km,
        }
    return data


def dump_network_file(nf: NetworkFile) -> str:
    return json.dumps(network_to_data(nf), indent=2) + "\n"


def write_network_file(nf: NetworkFile, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_network_file(nf))


# ---------------------------------------------------------------------------
# synthetic case generation
# ---------------------------------------------------------------------------

_CASE_DEFAULTS = {
    "star": {"nodes": 7, "links": None, "candidates": 24, "hubs": 1},
    "mesh-star": {"nodes": 11, "links": 58, "candidates": 26, "hubs": 1},
    "multi-star": {"nodes": 15, "links": 64, "candidates": 45, "hubs": 4},
}

_DISTURBED_FRACTIONS = (0.75, 0.5, 0.25, 0.0)
_DISTURBED_COND_PROBS = (0.7, 0.15, 0.1, 0.05)
_LEVEL_CAPACITIES = (0.0, 1.0, 2.0)
_LEVEL_COSTS = (0.0, 4.0, 6.0)


def _disturbed_levels(cap: float) -> tuple[tuple[float, float], ...]:
    return tuple((frac * cap, p)
                 for frac, p in zip(_DISTURBED_FRACTIONS, _DISTURBED_COND_PROBS))


def gen_case(
    topology: str,
    seed: int,
    n_nodes: Optional[int] = None,
    n_links: Optional[int] = None,
    n_candidates: Optional[int] = None,
    n_hubs: Optional[int] = None,
) -> NetworkFile:
    """Generate a synthetic case of the requested topology class.

    Hubs get the maximum capacity 10; other elements draw integer capacities
    in [4, 8].  Every element carries four disturbed levels at 75/50/25/0
    percent of its capacity with conditional probabilities 0.7/0.15/0.1/0.05,
    the network is always disturbed (one element uniformly at random), O-D
    pairs coincide with the links, and candidates offer capacity 1 (cost 4)
    or 2 (cost 6) with detour-ratio window [1.02, 1.5].
    """
    if topology not in _CASE_DEFAULTS:
        raise FileFormatError(f"unknown topology {topology!r}; "
                              f"expected one of {sorted(_CASE_DEFAULTS)}")
    defaults = _CASE_DEFAULTS[topology]
    n_v = n_nodes if n_nodes is not None else defaults["nodes"]
    n_cand = n_candidates if n_candidates is not None else defaults["candidates"]
    hubs = n_hubs if n_hubs is not None else defaults["hubs"]
    rng = np.random.Generator(np.random.PCG64(seed))

    positions: list[tuple[float, float]] = []
    if topology == "star":
        positions.append((0.0, 0.0))
        radius = 8.0
        for s in range(n_v - 1):
            angle = 2 * math.pi * s / (n_v - 1) + rng.uniform(-0.15, 0.15)
            r = radius * rng.uniform(0.75, 1.15)
            positions.append((r * math.cos(angle), r * math.sin(angle)))
        arcs = []
        for s in range(1, n_v):
            arcs.append((0, s))
            arcs.append((s, 0))
        hub_ids = {0}
    else:
        hub_ids = set(range(hubs))
        hub_radius = 10.0 if hubs > 1 else 0.0
        for h in range(hubs):
            angle = 2 * math.pi * h / max(hubs, 1)
            positions.append((hub_radius * math.cos(angle), hub_radius * math.sin(angle)))
        for s in range(hubs, n_v):
            home = s % hubs
            angle = rng.uniform(0, 2 * math.pi)
            r = rng.uniform(3.0, 8.0)
            hx, hy = positions[home]
            positions.append((hx + r * math.cos(angle), hy + r * math.sin(angle)))
        pair_set: list[tuple[int, int]] = []
        seen = set()

        def add_pair(a: int, b: int) -> None:
            if a != b and (a, b) not in seen:
                seen.add((a, b))
                seen.add((b, a))
                pair_set.append((a, b))

        for i in range(hubs):
            for j in range(i + 1, hubs):
                add_pair(i, j)
        for s in range(hubs, n_v):
            add_pair(s % hubs, s)
        target_pairs = (n_links if n_links is not None else defaults["links"]) // 2
        guard = 0
        while len(pair_set) < target_pairs and guard < 10_000:
            guard += 1
            a, b = int(rng.integers(0, n_v)), int(rng.integers(0, n_v))
            add_pair(a, b)
        arcs = []
        for a, b in pair_set:
            arcs.append((a, b))
            arcs.append((b, a))

    node_caps = [10.0 if i in hub_ids else float(rng.integers(4, 9)) for i in range(n_v)]
    nodes = [Node(id=i, position=positions[i], capacity=node_caps[i]) for i in range(n_v)]
    links = [
        Link(id=j, tail=t, head=h, capacity=float(rng.integers(4, 9)))
        for j, (t, h) in enumerate(arcs)
    ]

    disruption = DisruptionModel.uniform(
        p_dis=1.0,
        link_levels=[_disturbed_levels(e.capacity) for e in links],
        node_levels=[_disturbed_levels(v.capacity) for v in nodes],
    )
    network = RiskNetwork(nodes=tuple(nodes), links=tuple(links), disruption=disruption)
    demands = DemandSet(pairs=tuple((e.tail, e.head) for e in links))

    xs = [p[0] for p in positions]
    ys = [p[1] for p in positions]
    span_x = (min(xs) - 1.0, max(xs) + 1.0)
    span_y = (min(ys) - 1.0, max(ys) + 1.0)
    cand_positions = tuple(
        (float(rng.uniform(*span_x)), float(rng.uniform(*span_y)))
        for _ in range(n_cand)
    )
    candidates = CandidateSet(
        ids=tuple(range(n_v, n_v + n_cand)),
        positions=cand_positions,
        cap_levels=np.tile(np.array(_LEVEL_CAPACITIES), (n_cand, 1)),
        costs=np.tile(np.array(_LEVEL_COSTS), (n_cand, 1)),
    ) if n_cand else None

    lengths = [
        math.dist(positions[e.tail], positions[e.head]) for e in links
    ]
    policy = BackupPolicy(
        ratio_min=1.02, ratio_max=1.5,
        rho_adj_km=0.4 * sum(lengths) / len(lengths),
    )
    return NetworkFile(network=network, demands=demands,
                       candidates=candidates, policy=policy)
