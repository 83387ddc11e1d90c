"""Plain-text model dump for debugging against external solvers.

The grammar is documented in docs/formats.md: an objective line, one line per
row, a bounds section for non-default bounds, and an optional binary section.
"""

from __future__ import annotations

import math

from .model import LpModel, MipModel


def _term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    return f"{sign} {mag:.12g} {name}".strip() if not first else f"{sign}{mag:.12g} {name}"


def _linear(coeffs, names) -> str:
    if not coeffs:
        return "0"
    parts = []
    for pos, (j, a) in enumerate(coeffs):
        parts.append(_term(a, names[j], first=pos == 0))
    return " ".join(parts)


def format_lp_text(model: LpModel, binaries: frozenset[int] | None = None) -> str:
    lines = [f"max: {_linear(list(enumerate(model.obj)), model.names)}"]
    for i in range(model.n_rows):
        lines.append(
            f"{model.row_names[i]}: {_linear(model.rows[i], model.names)} "
            f"{model.relations[i]} {model.rhs[i]:.12g}"
        )
    bound_lines = []
    for j in range(model.n_vars):
        lo, hi = model.lower[j], model.upper[j]
        if lo == 0.0 and math.isinf(hi):
            continue
        lo_s = "-inf" if math.isinf(lo) else f"{lo:.12g}"
        hi_s = "inf" if math.isinf(hi) else f"{hi:.12g}"
        bound_lines.append(f"bounds: {lo_s} <= {model.names[j]} <= {hi_s}")
    lines.extend(bound_lines)
    if binaries:
        names = " ".join(model.names[j] for j in sorted(binaries))
        lines.append(f"binary: {names}")
    return "\n".join(lines) + "\n"


def format_mip_text(model: MipModel) -> str:
    return format_lp_text(model.lp, model.binaries)
