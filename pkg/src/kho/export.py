"""
File output: CSV tables, 16-bit PGM heatmaps and JSON sidecars.

Every data file ``name.ext`` gets a sidecar ``name.ext.json`` holding the
resolved configuration, the package version and file-specific metadata.
Reals are written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from ._version import __version__
from .classical import Polyline, WebCloud
from .decoherence import PurityCurve
from .wigner import WignerGrid


def _fmt(x) -> str:
    return repr(float(x))


def write_sidecar(path: Path, config: dict, **meta) -> Path:
    side = Path(str(path) + ".json")
    payload = {"artifact_version": __version__, "file": Path(path).name,
               "config": config, **meta}
    side.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return side


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return {k: getattr(obj, k) for k in obj.__dataclass_fields__}
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def wigner_csv(path: Path, w: WignerGrid) -> Path:
    Q, P = np.meshgrid(w.q_axis, w.p_axis, indexing="ij")
    rows = zip(Q.ravel().tolist(), P.ravel().tolist(), w.values.ravel().tolist())
    return write_csv(path, ["Q", "P", "W"], rows)


def wigner_pgm(path: Path, w: WignerGrid) -> dict:
    """16-bit binary PGM; Q runs along columns, P decreases down the rows.

    Gray level 32768 is W = 0; the scale is symmetric, ``+-max|W|``.
    Returns the mapping metadata for the sidecar.
    """
    scale = float(np.abs(w.values).max()) or 1.0
    img = np.rint((w.values.T[::-1] / scale + 1.0) * 32767.5).clip(0, 65535).astype(">u2")
    rows, cols = img.shape
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())
    return {"w_scale": scale, "zero_level": 32767.5, "columns": "Q ascending",
            "rows": "P descending"}


def read_pgm(path: Path) -> np.ndarray:
    """Read a binary 16-bit PGM written by :func:`wigner_pgm`."""
    data = Path(path).read_bytes()
    # exactly one whitespace byte ends the header; pixel bytes may look like whitespace
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError("not a binary PGM")
    cols, rows, maxval = (int(g) for g in m.groups())
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(data, dtype=dtype, count=rows * cols, offset=m.end()).reshape(rows, cols)


def wigner_axes_meta(w: WignerGrid) -> dict:
    return {"q_axis": {"min": float(w.q_axis[0]), "step": w.dq, "count": len(w.q_axis)},
            "p_axis": {"min": float(w.p_axis[0]), "step": w.dp, "count": len(w.p_axis)},
            "hbar": w.hbar}


def state_csv(path: Path, q: np.ndarray, psi: np.ndarray) -> Path:
    rows = zip(q.tolist(), psi.real.tolist(), psi.imag.tolist(), (np.abs(psi) ** 2).tolist())
    return write_csv(path, ["Q", "re_psi", "im_psi", "density"], rows)


def web_csv(path: Path, cloud: WebCloud) -> Path:
    def rows():
        for i, orbit in enumerate(cloud.points):
            for k, (q, p) in enumerate(orbit.tolist()):
                yield i, k, q, p
    return write_csv(path, ["seed", "iteration", "Q", "P"], rows())


def polylines_csv(path: Path, lines: list[Polyline]) -> Path:
    def rows():
        for n, line in enumerate(lines):
            for t, (q, p) in zip(line.params.tolist(), line.points.tolist()):
                yield n, t, q, p
    return write_csv(path, ["step", "t", "Q", "P"], rows())


def purity_csv(path: Path, curve: PurityCurve) -> Path:
    f = curve.fidelity
    rows = zip(curve.n.tolist(), curve.purity.tolist(), np.abs(f).tolist(), np.angle(f).tolist())
    return write_csv(path, ["n", "purity", "abs_f", "arg_f"], rows)


def grid_meta(grid) -> dict | None:
    if grid is None:
        return None
    return {"n_points": grid.n_points, "q_max": grid.q_max, "hbar": grid.hbar,
            "dq": grid.dq, "dp": grid.dp}


def number_label(x: float) -> str:
    """File-name-safe label, e.g. 0.9 -> '0p9', -1.5 -> 'm1p5'."""
    return f"{x:g}".replace("-", "m").replace(".", "p")
