"""CSV and JSON input/output.

CSV files have a header row and floats written with 17 significant digits so
that they read back to the same doubles.  JSON is UTF-8 with sorted keys.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .model import InitialData

FLOAT_FMT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(rows[0]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def write_fields_csv(path, sol) -> Path:
    """Columns t, m, N, P for every dump time; small negative undershoots are written as 0."""
    def rows():
        for i, t in enumerate(sol.t):
            for j, m in enumerate(sol.m):
                yield t, m, max(sol.N[i, j], 0.0), max(sol.P[i, j], 0.0)

    return write_csv(path, ["t", "m", "N", "P"], rows())


def write_trajectory_csv(path, traj) -> Path:
    return write_csv(path, ["t", "x", "y"], zip(traj.t, traj.x, traj.y))


def initial_ages(upper, n: int = 48) -> np.ndarray:
    """Ages stored for one maturity row.

    0 and ``upper`` plus the Gauss nodes on [0, upper] used by the solver to
    integrate over age (``n`` points for the field, 24 for the m = 0 system).
    """
    parts = [[0.0, upper]]
    for k in {n, 24}:
        x, _ = np.polynomial.legendre.leggauss(k)
        parts.append(0.5 * upper * (x + 1.0))
    return np.unique(np.concatenate(parts))


def write_initial_csv(mu_path, gamma_path, data: InitialData, m, upper, n: int = 48) -> tuple[Path, Path]:
    """Tabulate initial data as (m, mu) and row-wise (m, a, Gamma).

    Each maturity row stores Gamma at :func:`initial_ages` of its own ``upper``
    so that the integrated proliferating density at the tabulated maturities is
    reproduced exactly when the files are read back.
    """
    m = np.asarray(m, float)
    upper = np.broadcast_to(np.asarray(upper, float), m.shape)
    rows = []
    for mj, uj in zip(m, upper):
        a = initial_ages(float(uj), n)
        g = np.asarray(data.gamma(np.full_like(a, mj), a), float)
        rows.extend(zip(np.full_like(a, mj), a, g))
    p1 = write_csv(mu_path, ["m", "mu"], zip(m, np.asarray(data.mu(m), float)))
    p2 = write_csv(gamma_path, ["m", "a", "Gamma"], rows)
    return p1, p2


class RowTable:
    """Gamma(m, a) from rows of (a, Gamma) at increasing m.

    Linear in a within a row (constant beyond its ends) and linear in m between rows.
    At a tabulated (m, a) the stored value is returned exactly.
    """

    def __init__(self, m, a, g):
        order = np.lexsort((a, m))
        m, a, g = m[order], a[order], g[order]
        self.m, starts = np.unique(m, return_index=True)
        bounds = list(starts[1:]) + [len(m)]
        self.rows = [(a[i:j], g[i:j]) for i, j in zip(starts, bounds)]

    def _row(self, j, a):
        ra, rg = self.rows[j]
        return np.interp(a, ra, rg)

    def __call__(self, m, a):
        m, a = np.broadcast_arrays(np.asarray(m, float), np.asarray(a, float))
        shape = m.shape
        m, a = m.ravel(), a.ravel()
        if len(self.m) == 1:
            return self._row(0, a).reshape(shape)
        mc = np.clip(m, self.m[0], self.m[-1])
        k = np.clip(np.searchsorted(self.m, mc, side="right") - 1, 0, len(self.m) - 2)
        w = (mc - self.m[k]) / (self.m[k + 1] - self.m[k])
        out = np.empty_like(m)
        for j in np.unique(k):
            sel = k == j
            v0 = self._row(j, a[sel])
            ws = w[sel]
            out[sel] = v0
            mid = ws > 0
            if np.any(mid):
                out[sel] = np.where(mid, v0 + ws * (self._row(j + 1, a[sel]) - v0), v0)
        return out.reshape(shape)


def read_initial_csv(mu_path, gamma_path) -> InitialData:
    """Initial data from the two tables written by :func:`write_initial_csv`.

    mu is interpolated linearly in m; Gamma as described in :class:`RowTable`.
    """
    h1, mu_tab = read_csv(mu_path)
    h2, g_tab = read_csv(gamma_path)
    if h1 != ["m", "mu"] or h2 != ["m", "a", "Gamma"]:
        raise ValueError("expected headers (m, mu) and (m, a, Gamma)")
    if len(mu_tab) == 0 or len(g_tab) == 0:
        raise ValueError("initial data tables are empty")
    order = np.argsort(mu_tab[:, 0], kind="stable")
    mm, mv = mu_tab[order, 0], mu_tab[order, 1]
    table = RowTable(g_tab[:, 0], g_tab[:, 1], g_tab[:, 2])
    src = {"preset": "csv", "mu_csv": str(mu_path), "gamma_csv": str(gamma_path)}
    return InitialData(lambda x: np.interp(x, mm, mv), table, src)
