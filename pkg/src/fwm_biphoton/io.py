"""Deterministic CSV/JSON serialization with atomic writes.

Every data file embeds the resolved configuration: JSON under ``"config"``,
CSV as a leading ``# config=`` comment line. Floats use ``repr`` so reruns
are byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .amplitudes import BiphotonAmplitudes
from .correlations import Grid2D
from .pump import ProductExpansion


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def dumps_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    return repr(float(x))


def _csv(header: list[str], rows, config: dict | None) -> str:
    lines = []
    if config is not None:
        lines.append("# config=" + json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":")))
    lines.append(",".join(header))
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def write_atomic(path: str | Path, text: str) -> Path:
    """Write via a temporary file in the same directory and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_all(files: dict[str | Path, str]) -> list[Path]:
    """Write several rendered files; nothing is touched until all are rendered."""
    return [write_atomic(p, t) for p, t in files.items()]


# ------------------------------------------------------------------ amplitudes


def amplitudes_csv(amps: BiphotonAmplitudes, config: dict | None = None) -> str:
    methods = amps.metadata.get("methods")
    default = amps.metadata.get("method", amps.representation)
    sub = amps.subspace
    rows = []
    for i, lp in enumerate(sub.ells):
        for a in sub.ps:
            for j, ls in enumerate(sub.ells):
                for b in sub.ps:
                    c = amps.values[i, a, j, b]
                    tag = str(methods[i, a, j, b]) if methods is not None else default
                    rows.append([str(int(lp)), str(int(a)), str(int(ls)), str(int(b)), _fmt(c.real), _fmt(c.imag), tag])
    return _csv(["ell_pr", "p_pr", "ell_s", "p_s", "re", "im", "method"], rows, config)


def amplitudes_json(amps: BiphotonAmplitudes, config: dict | None = None) -> str:
    meta = {k: v for k, v in amps.metadata.items() if k != "methods"}
    entries = []
    methods = amps.metadata.get("methods")
    for n, (pr, s, c) in enumerate(amps.entries()):
        e = {"ell_pr": pr.ell, "p_pr": pr.p, "ell_s": s.ell, "p_s": s.p, "re": c.real, "im": c.imag}
        if methods is not None:
            e["method"] = str(methods.reshape(-1)[n])
        entries.append(e)
    payload = {
        "representation": amps.representation,
        "subspace": amps.subspace.to_dict(),
        "normalized": amps.normalized,
        "scale": amps.scale,
        "metadata": meta,
        "entries": entries,
    }
    if config is not None:
        payload["config"] = config
    return dumps_json(payload)


def read_amplitudes_csv(path: str | Path):
    """Parse an amplitude CSV back into ``(rows, config)``; rows are dicts."""
    rows, config = [], None
    header = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("# config="):
            config = json.loads(line[len("# config="):])
            continue
        parts = line.split(",")
        if header is None:
            header = parts
            continue
        rows.append(dict(zip(header, parts)))
    return rows, config


# ------------------------------------------------------------------ expansions


def expansion_csv(exp: ProductExpansion, config: dict | None = None) -> str:
    unit = exp.unit_vector()
    norm = exp.normalized()
    rows = []
    for idx in sorted(exp.coefficients):
        a, n, u = exp.coefficients[idx], norm[idx], unit[idx]
        rows.append([str(idx.ell), str(idx.p), _fmt(a.real), _fmt(a.imag), _fmt(abs(a) ** 2),
                     _fmt(n.real), _fmt(n.imag), _fmt(u.real), _fmt(u.imag)])
    header = ["m", "n", "re", "im", "abs2", "norm_re", "norm_im", "unit_re", "unit_im"]
    return _csv(header, rows, config)


def expansion_json(exp: ProductExpansion, config: dict | None = None) -> str:
    unit = exp.unit_vector()
    norm = exp.normalized()
    payload = {
        "truncation_order": exp.truncation_order,
        "fidelity": exp.fidelity,
        "norm": exp.norm,
        "transverse_radius": exp.transverse_radius,
        "coefficients": [
            {"m": k.ell, "n": k.p, "re": v.real, "im": v.imag, "abs2": abs(v) ** 2,
             "norm_re": norm[k].real, "norm_im": norm[k].imag,
             "unit_re": unit[k].real, "unit_im": unit[k].imag}
            for k, v in sorted(exp.coefficients.items())
        ],
    }
    if config is not None:
        payload["config"] = config
    return dumps_json(payload)


# ------------------------------------------------------------------ maps and tables


def map_csv(grid: Grid2D, config: dict | None = None, extra: dict | None = None) -> str:
    """Matrix CSV: first row holds the y axis, first column the x axis."""
    lines = []
    if config is not None:
        lines.append("# config=" + json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":")))
    if extra:
        lines.append("# meta=" + json.dumps(_jsonable(extra), sort_keys=True, separators=(",", ":")))
    lines.append(",".join(["x\\y"] + [_fmt(v) for v in grid.y]))
    for i, xv in enumerate(grid.x):
        lines.append(",".join([_fmt(xv)] + [_fmt(v) for v in grid.samples[i]]))
    return "\n".join(lines) + "\n"


def map_json(grid: Grid2D, config: dict | None = None, extra: dict | None = None) -> str:
    payload = {"x": grid.x, "y": grid.y, "samples": np.asarray(grid.samples), "meta": extra or {}}
    if config is not None:
        payload["config"] = config
    return dumps_json(payload)


def table_csv(columns: list[str], rows: list[list], config: dict | None = None) -> str:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return _fmt(v)
        return str(v)

    return _csv(columns, [[cell(v) for v in r] for r in rows], config)


def table_json(columns: list[str], rows: list[list], config: dict | None = None) -> str:
    payload = {"rows": [dict(zip(columns, r)) for r in rows]}
    if config is not None:
        payload["config"] = config
    return dumps_json(payload)
