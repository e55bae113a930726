"""CSV and markdown rendering of convergence tables and nodal solution dumps."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .geometry import StructuredMesh
from .verification import ConvergenceTable

CSV_HEADER = "n,h,l2,l2_order,h1_semi,h1_order,linf,linf_order"
NORMS = ("l2", "h1_semi", "linf")


def fmt_error(e: float) -> str:
    return f"{e:.4e}"


def fmt_order(o: float | None) -> str:
    return "" if o is None else f"{o:.4f}"


def table_rows(table: ConvergenceTable) -> list[list[str]]:
    rows = []
    for row in table.rows:
        orders = row.orders or (None, None, None)
        cells = [str(row.n), repr(float(row.errors.h))]
        for norm, order in zip(NORMS, orders):
            cells += [fmt_error(getattr(row.errors, norm)), fmt_order(order)]
        rows.append(cells)
    return rows


def to_csv(table: ConvergenceTable) -> str:
    lines = [CSV_HEADER] + [",".join(r) for r in table_rows(table)]
    return "\n".join(lines) + "\n"


def to_markdown(table: ConvergenceTable) -> str:
    header = "| 1/h | ‖u_h−u_I‖₀ | order | ‖∇(u_h−u_I)‖₀ | order | ‖u_h−u_I‖_∞ | order |"
    rule = "|---:|---:|---:|---:|---:|---:|---:|"
    body = []
    for r in table_rows(table):
        n, _, *cells = r
        body.append("| " + " | ".join([n, *cells]) + " |")
    return "\n".join([header, rule, *body]) + "\n"


def solution_csv(m: StructuredMesh, uh: np.ndarray, uI: np.ndarray) -> str:
    lines = ["i,j,x,y,u_h,u_I,diff"]
    for k in range(m.num_nodes):
        i, j = m.lattice_index(k)
        x, y = (float(c) for c in m.nodes[k])
        a, b = float(uh[k]), float(uI[k])
        lines.append(f"{i},{j},{x!r},{y!r},{a!r},{b!r},{a - b!r}")
    return "\n".join(lines) + "\n"


def write_atomic(path: str | Path, text: str) -> Path:
    """Write UTF-8 text with LF endings via a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
