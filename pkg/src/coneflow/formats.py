"""Deterministic serialization: JSON reports, CSV series, field mini-language.

Floats are rendered with 17 significant digits so that values round-trip
bit-exactly through text and identical runs produce identical bytes.
"""
from __future__ import annotations

import numpy as np

from .grid import PeriodicGrid, bump_density


def fmt_float(x) -> str:
    """17-significant-digit decimal form; round-trips float64 exactly."""
    x = float(x)
    if np.isnan(x):
        return "NaN"
    if np.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def to_json(obj) -> str:
    """Render dicts/lists/scalars in insertion order with fmt_float floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{to_json(str(k))}: {to_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_table(path, header: str, columns) -> None:
    columns = [np.asarray(c, dtype=float).ravel() for c in columns]
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("csv columns must have equal length")
    lines = [header]
    for i in range(n):
        lines.append(",".join(fmt_float(c[i]) for c in columns))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_table(path, header: str):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != header:
        raise ValueError(f"{path}: expected csv header '{header}'")
    width = header.count(",") + 1
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != width:
            raise ValueError(f"{path}: malformed row '{ln}'")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric value in '{ln}'") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite value")
    return [data[:, j] for j in range(width)]


def write_density_csv(path, x, values) -> None:
    _write_table(path, "x,value", [x, values])


def read_density_csv(path):
    x, values = _read_table(path, "x,value")
    return x, values


def _grid_layout(t_col, x_col):
    """Infer (times, x) from flattened time-major columns."""
    x0 = x_col[0]
    n = 1
    while n < len(x_col) and abs(x_col[n] - x0) > 1e-12:
        n += 1
    if n < 4 or len(x_col) % n != 0:
        raise ValueError("csv rows do not form a time-major grid")
    n_times = len(x_col) // n
    x = x_col[:n]
    times = t_col[::n]
    if not np.allclose(np.tile(x, n_times), x_col, atol=1e-12):
        raise ValueError("csv space column varies between time blocks")
    rep = np.repeat(times, n)
    if not np.allclose(rep, t_col, atol=1e-12):
        raise ValueError("csv time column varies within a time block")
    return times, x, n_times, n


def write_trajectory_csv(path, times, x, u) -> None:
    """Time-major rows (t, x, u) for a velocity trajectory."""
    times = np.asarray(times, dtype=float)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    t_col = np.repeat(times, len(x))
    x_col = np.tile(x, len(times))
    _write_table(path, "t,x,u", [t_col, x_col, u.ravel()])


def read_trajectory_csv(path):
    t_col, x_col, u_col = _read_table(path, "t,x,u")
    times, x, n_times, n = _grid_layout(t_col, x_col)
    return times, x, u_col.reshape(n_times, n)


def write_flow_csv(path, times, x, phi, lam) -> None:
    """Time-major rows (t, x, phi, lam) for a group-element path."""
    times = np.asarray(times, dtype=float)
    x = np.asarray(x, dtype=float)
    t_col = np.repeat(times, len(x))
    x_col = np.tile(x, len(times))
    _write_table(path, "t,x,phi,lam",
                 [t_col, x_col, np.asarray(phi).ravel(),
                  np.asarray(lam).ravel()])


def read_flow_csv(path):
    t_col, x_col, p_col, l_col = _read_table(path, "t,x,phi,lam")
    times, x, n_times, n = _grid_layout(t_col, x_col)
    return times, x, p_col.reshape(n_times, n), l_col.reshape(n_times, n)


def write_wfr_csv(path, t_cells, x, rho_c, m_c, mu_c) -> None:
    """Cell-centered rows (t, x, rho, m, mu) of a transport plan."""
    t_cells = np.asarray(t_cells, dtype=float)
    x = np.asarray(x, dtype=float)
    t_col = np.repeat(t_cells, len(x))
    x_col = np.tile(x, len(t_cells))
    _write_table(path, "t,x,rho,m,mu",
                 [t_col, x_col, np.asarray(rho_c).ravel(),
                  np.asarray(m_c).ravel(), np.asarray(mu_c).ravel()])


def write_columns_csv(path, header, columns) -> None:
    _write_table(path, header, columns)


def grid_from_x(x) -> PeriodicGrid:
    x = np.asarray(x, dtype=float)
    grid = PeriodicGrid(len(x))
    if np.max(np.abs(x - grid.x)) > 1e-9:
        raise ValueError("csv nodes are not the uniform periodic grid")
    return grid


def parse_field_spec(spec: str, grid: PeriodicGrid) -> np.ndarray:
    """Field mini-language: const:c | sin:amp | bump:center,width,mass | file:path."""
    if not isinstance(spec, str) or ":" not in spec:
        raise ValueError(f"bad field spec '{spec}'")
    kind, _, arg = spec.partition(":")
    try:
        if kind == "const":
            return np.full(grid.n, float(arg))
        if kind == "sin":
            return float(arg) * np.sin(grid.x)
        if kind == "bump":
            parts = arg.split(",")
            if len(parts) != 3:
                raise ValueError(f"bump spec needs center,width,mass: '{spec}'")
            center, width, mass = (float(p) for p in parts)
            return bump_density(grid, center, width, mass)
        if kind == "file":
            x, values = read_density_csv(arg)
            if len(x) != grid.n:
                raise ValueError(f"{arg}: {len(x)} nodes, grid has {grid.n}")
            if np.max(np.abs(x - grid.x)) > 1e-9:
                raise ValueError(f"{arg}: nodes do not match the grid")
            return values
    except ValueError:
        raise
    raise ValueError(f"unknown field spec kind '{kind}'")
