"""
Command-line entry point: ``kho <experiment> [options]``.

Options can also come from a ``key = value`` file given with ``--config``;
flags on the command line override the file. Keys are option names with
dashes or underscores, e.g. ``hbar = 0.9`` or ``n_points = 2048``.

Exit codes: 0 success, 2 configuration error, 3 numerical guard failure,
4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import export
from ._version import __version__
from .classical import (default_seeds, evolve_manifold, initial_manifold, liouville_histogram,
                        stroboscopic_web)
from .core import (GaussianSpec, KhoParams, default_grid, enlarge, expectations, make_grid,
                   prepare_gaussian)
from .decoherence import purity_sweep
from .errors import GridOverflowError, KhoError
from .optics import LossModel, design_report, max_kicks
from .propagators import kho_evolve
from .wigner import fringe_analysis, negativity_volume, wigner_transform

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
MAX_REGRIDS = 4

_PI_RE = re.compile(r"^([+-]?)(\d*(?:\.\d*)?)\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d*)?))?$")


class ConfigError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Angle in radians from ``'pi/3'``, ``'2pi/3'``, ``'1.33pi'``, ``'-pi'`` or ``'0.5'``.

    Multiples of pi are kept as exact fractions until the final product.
    """
    s = str(text).strip().lower().replace(" ", "").replace("π", "pi")
    m = _PI_RE.match(s)
    if m:
        sign, num, den = m.groups()
        frac = Fraction(num) if num not in ("", ".") else Fraction(1)
        if den is not None:
            d = Fraction(den)
            if d == 0:
                raise ConfigError(f"zero denominator in angle {text!r}")
            frac /= d
        value = math.pi * frac.numerator / frac.denominator
        return -value if sign == "-" else value
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None


def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        out = []
        for t in text:
            out.extend(_float_list(t))
        return out
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


# key -> (converter, default); None default means "not set"
_SIM_KEYS = {
    "K": (_float_list, [2.0]),
    "alpha": (parse_angle, math.pi / 3),
    "phi": (parse_angle, 0.0),
    "hbar": (_float_list, [0.9]),
    "n": (int, 1),
    "q0": (float, 0.0),
    "p0": (float, 0.0),
    "squeeze": (float, 1.0),
    "tilt": (parse_angle, 0.0),
    "n_points": (int, None),
    "q_max": (float, None),
    "seed": (int, 0),
    "conjugate_kick": (lambda v: _bool(v), False),
    "out": (str, "."),
}

_EXTRA_KEYS = {
    "evolve": {},
    "wigner": {"all_steps": (lambda v: _bool(v), False)},
    "web": {"n_iter": (int, 5000), "seed_radius": (float, math.pi), "seed_count": (int, 12)},
    "manifold": {"spacing": (float, 0.05), "max_points": (int, 1_000_000),
                 "half_width": (float, 3.0), "samples": (int, 0), "bins": (int, 200)},
    "purity": {"workers": (int, 1)},
}

_PARAMS_KEYS = {
    "lambda": (float, 632.8e-9),
    "f": (float, 0.15),
    "alpha": (parse_angle, math.pi / 3),
    "hbar_target": (float, None),
    "nu": (float, None),
    "t_outside": (float, 1.0),
    "t_lens": (float, 1.0),
    "t_slm": (float, 1.0),
    "floor": (float, None),
    "format": (str, "json"),
}


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {v!r}")


def keys_for(kind: str) -> dict:
    if kind == "params":
        return dict(_PARAMS_KEYS)
    return {**_SIM_KEYS, **_EXTRA_KEYS[kind]}


def read_config_file(path: Path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve_config(kind: str, file_values: dict, flag_values: dict) -> dict:
    """Merge defaults, file and flags; convert and validate every key."""
    spec = keys_for(kind)
    unknown = sorted(set(file_values) - set(spec))
    if unknown:
        raise ConfigError(f"unknown config keys for {kind}: {', '.join(unknown)}")
    merged = {k: default for k, (_, default) in spec.items()}
    for source in (file_values, flag_values):
        for k, v in source.items():
            conv = spec[k][0]
            try:
                merged[k] = conv(v)
            except ConfigError:
                raise
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {k}: {v!r}") from None
    merged["experiment"] = kind
    _validate(kind, merged)
    return merged


def _validate(kind: str, cfg: dict) -> None:
    try:
        if kind == "params":
            if not (cfg["lambda"] > 0 and cfg["f"] > 0):
                raise ValueError("lambda and f must be positive")
            if not 0 < cfg["alpha"] < math.pi:
                raise ValueError("alpha must lie in (0, pi)")
            if cfg["format"] not in ("json", "text"):
                raise ValueError("format must be 'json' or 'text'")
            LossModel(cfg["t_outside"], cfg["t_lens"], cfg["t_slm"])
            if cfg["floor"] is not None and not 0 < cfg["floor"] < 1:
                raise ValueError("floor must lie in (0, 1)")
            for key in ("hbar_target", "nu"):
                if cfg[key] is not None and not cfg[key] > 0:
                    raise ValueError(f"{key} must be positive")
            return
        if not cfg["K"] or not cfg["hbar"]:
            raise ValueError("K and hbar need at least one value each")
        for K in cfg["K"]:
            for h in cfg["hbar"]:
                KhoParams(K, cfg["alpha"], cfg["phi"], h)
        GaussianSpec(cfg["q0"], cfg["p0"], cfg["squeeze"], cfg["tilt"])
        if cfg["n"] < 0:
            raise ValueError("n must be >= 0")
        if (cfg["n_points"] is None) != (cfg["q_max"] is None):
            raise ValueError("n_points and q_max must be given together")
        if cfg["n_points"] is not None:
            make_grid(cfg["n_points"], cfg["q_max"], 1.0)
        if kind == "web" and (cfg["n_iter"] < 1 or cfg["seed_count"] < 1):
            raise ValueError("n_iter and seed_count must be >= 1")
        if kind == "manifold":
            if not cfg["spacing"] > 0 or cfg["max_points"] < 2:
                raise ValueError("spacing must be positive and max_points >= 2")
            if cfg["samples"] and cfg["samples"] < 10_000:
                raise ValueError("samples must be 0 (off) or >= 10000")
        if kind == "purity" and cfg["workers"] < 1:
            raise ValueError("workers must be >= 1")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kho", description="Kicked harmonic oscillator experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    S = argparse.SUPPRESS

    def sim(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=S)
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--K", action="append", help="kick strength; repeat or comma-separate")
        p.add_argument("--alpha", help="rotation angle, e.g. pi/3 or 1.047")
        p.add_argument("--phi", help="kick phase")
        p.add_argument("--hbar", action="append", help="effective Planck constant(s), comma list")
        p.add_argument("--n", type=int, help="number of kicks")
        p.add_argument("--q0", type=float)
        p.add_argument("--p0", type=float)
        p.add_argument("--squeeze", type=float)
        p.add_argument("--tilt")
        p.add_argument("--n-points", dest="n_points", type=int)
        p.add_argument("--q-max", dest="q_max", type=float)
        p.add_argument("--seed", type=int, help="Monte Carlo seed (default 0)")
        p.add_argument("--conjugate-kick", dest="conjugate_kick", action="store_true")
        p.add_argument("--out", help="output directory")
        return p

    sim("evolve", "evolve a Gaussian and write snapshots and moments")
    p = sim("wigner", "Wigner function after n kicks (CSV + PGM)")
    p.add_argument("--all-steps", dest="all_steps", action="store_true")
    p = sim("web", "classical stroboscopic web")
    p.add_argument("--n-iter", dest="n_iter", type=int)
    p.add_argument("--seed-radius", dest="seed_radius", type=float)
    p.add_argument("--seed-count", dest="seed_count", type=int)
    p = sim("manifold", "classically evolved major axis of the initial state")
    p.add_argument("--spacing", type=float)
    p.add_argument("--max-points", dest="max_points", type=int)
    p.add_argument("--half-width", dest="half_width", type=float)
    p.add_argument("--samples", type=int, help="Liouville samples (0 disables)")
    p.add_argument("--bins", type=int)
    p = sim("purity", "qubit purity curves over K x hbar")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("params", help="optical design report", argument_default=S)
    p.add_argument("--config")
    p.add_argument("--lambda", dest="lambda", type=float, help="wavelength in m")
    p.add_argument("--f", type=float, help="focal length in m")
    p.add_argument("--alpha")
    p.add_argument("--hbar-target", dest="hbar_target", type=float)
    p.add_argument("--nu", type=float, help="kick spatial frequency in 1/m")
    p.add_argument("--t-outside", dest="t_outside", type=float)
    p.add_argument("--t-lens", dest="t_lens", type=float)
    p.add_argument("--t-slm", dest="t_slm", type=float)
    p.add_argument("--floor", type=float, help="intensity floor for max_kicks")
    p.add_argument("--format", choices=["json", "text"])
    return parser


class _Writer:
    """Writes data files plus sidecars into one directory."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.dir = Path(cfg["out"])
        self.written: list[Path] = []
        self.dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.dir / name

    def sidecar(self, path: Path, **meta) -> None:
        self.written.append(path)
        self.written.append(export.write_sidecar(path, self.cfg, **meta))


def _spec(cfg) -> GaussianSpec:
    return GaussianSpec(cfg["q0"], cfg["p0"], cfg["squeeze"], cfg["tilt"])


def _cells(cfg):
    for K in cfg["K"]:
        for h in cfg["hbar"]:
            yield KhoParams(K, cfg["alpha"], cfg["phi"], h)


def _label(params: KhoParams) -> str:
    return f"K{export.number_label(params.K)}_hbar{export.number_label(params.hbar)}"


def _evolve_with_regrid(cfg, params: KhoParams, need_wigner: bool):
    """Snapshots on an automatic grid, enlarged on overflow.

    With an explicit grid in the config no regridding happens.
    """
    spec = _spec(cfg)
    fixed = cfg["n_points"] is not None
    if fixed:
        grid = make_grid(cfg["n_points"], cfg["q_max"], params.hbar)
    else:
        grid = default_grid(spec, params.hbar, params.K, cfg["n"])
    for attempt in range(MAX_REGRIDS + 1):
        try:
            state = prepare_gaussian(spec, grid)
            snaps = kho_evolve(state, params, cfg["n"], cfg["conjugate_kick"])
            wig = None
            if need_wigner:
                chosen = snaps if cfg.get("all_steps") else snaps[-1:]
                wig = [wigner_transform(s) for s in chosen]
            return snaps, wig
        except GridOverflowError as exc:
            if fixed or attempt == MAX_REGRIDS:
                raise
            grid = enlarge(grid, exc.axis)


def run_evolve(cfg, out: _Writer) -> None:
    for params in _cells(cfg):
        snaps, _ = _evolve_with_regrid(cfg, params, need_wigner=False)
        label = _label(params)
        rows = []
        for k, s in enumerate(snaps):
            m = expectations(s)
            rows.append((k, s.norm(), *m))
            path = export.state_csv(out.path(f"state_{label}_n{k}.csv"), s.grid.q, s.amplitudes)
            out.sidecar(path, step=k, params=params, grid=export.grid_meta(s.grid))
        path = export.write_csv(out.path(f"moments_{label}.csv"),
                                ["n", "norm", "mean_q", "mean_p", "var_q", "var_p", "energy"], rows)
        out.sidecar(path, params=params, grid=export.grid_meta(snaps[-1].grid))


def run_wigner(cfg, out: _Writer) -> None:
    for params in _cells(cfg):
        snaps, wigs = _evolve_with_regrid(cfg, params, need_wigner=True)
        first = 0 if cfg["all_steps"] else cfg["n"]
        for k, w in enumerate(wigs, start=first):
            stem = f"wigner_{_label(params)}_n{k}"
            fr = fringe_analysis(w)
            meta = {"step": k, "params": params, "grid": export.grid_meta(snaps[k].grid),
                    "axes": export.wigner_axes_meta(w), "negativity_volume": negativity_volume(w),
                    "fringe_wavelength": None if fr is None else fr.wavelength,
                    "fringe_scale": None if fr is None else fr.area}
            csv_path = export.wigner_csv(out.path(stem + ".csv"), w)
            out.sidecar(csv_path, **meta)
            pgm_path = out.path(stem + ".pgm")
            image = export.wigner_pgm(pgm_path, w)
            out.sidecar(pgm_path, image=image, **meta)


def run_web(cfg, out: _Writer) -> None:
    seeds = default_seeds(cfg["seed_radius"], cfg["seed_count"])
    # hbar plays no role classically; one web per K
    for K in cfg["K"]:
        params = KhoParams(K, cfg["alpha"], cfg["phi"], cfg["hbar"][0])
        cloud = stroboscopic_web(params, seeds, cfg["n_iter"])
        path = export.web_csv(out.path(f"web_K{export.number_label(K)}.csv"), cloud)
        out.sidecar(path, params=params, max_radius=cloud.max_radius,
                    seeds=[list(s) for s in seeds])


def run_manifold(cfg, out: _Writer) -> None:
    spec = _spec(cfg)
    for params in _cells(cfg):
        line = initial_manifold(spec, params.hbar, cfg["half_width"], cfg["spacing"])
        lines = evolve_manifold(line, params, cfg["n"], cfg["max_points"])
        path = export.polylines_csv(out.path(f"manifold_{_label(params)}.csv"), lines)
        out.sidecar(path, params=params, lengths=[ln.length() for ln in lines],
                    points=[len(ln.points) for ln in lines])
        if cfg["samples"]:
            hist = liouville_histogram(spec, params.hbar, params, cfg["n"], cfg["bins"],
                                       cfg["samples"], cfg["seed"])
            qc, pc = hist.centers()
            rows = zip(qc.ravel().tolist(), pc.ravel().tolist(), hist.density.ravel().tolist())
            path = export.write_csv(out.path(f"liouville_{_label(params)}_n{cfg['n']}.csv"),
                                    ["Q", "P", "density"], rows)
            out.sidecar(path, params=params, q_edges=hist.q_edges, p_edges=hist.p_edges)


def run_purity(cfg, out: _Writer) -> int:
    grid_size = None if cfg["n_points"] is None else (cfg["n_points"], cfg["q_max"])
    template = KhoParams(0.0, cfg["alpha"], cfg["phi"], cfg["hbar"][0])
    curves = purity_sweep(_spec(cfg), template, cfg["n"], cfg["hbar"], cfg["K"],
                          workers=cfg["workers"], grid_size=grid_size)
    summary, failed = [], 0
    for c in curves:
        if not c.ok:
            failed += 1
            print(f"error in cell K={c.params.K} hbar={c.params.hbar}: {c.error}", file=sys.stderr)
            summary.append((c.params.K, c.params.hbar, "nan", "error"))
            continue
        path = export.purity_csv(out.path(f"purity_{_label(c.params)}.csv"), c)
        out.sidecar(path, params=c.params, grid=export.grid_meta(c.grid))
        summary.append((c.params.K, c.params.hbar, float(c.purity[-1]), "ok"))
    path = export.write_csv(out.path("purity_summary.csv"),
                            ["K", "hbar", f"purity_n{cfg['n']}", "status"], summary)
    out.sidecar(path)
    return EXIT_NUMERIC if failed else EXIT_OK


def run_params(cfg) -> dict:
    report = design_report(cfg["lambda"], cfg["f"], cfg["alpha"], cfg["hbar_target"], cfg["nu"])
    if cfg["floor"] is not None:
        loss = LossModel(cfg["t_outside"], cfg["t_lens"], cfg["t_slm"])
        report["per_pass_transmission"] = loss.per_pass
        report["floor_fraction"] = cfg["floor"]
        report["max_kicks"] = max_kicks(loss, cfg["floor"])
    report["artifact_version"] = __version__
    return report


def format_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True)
    width = max(len(k) for k in report)
    return "\n".join(f"{k:<{width}}  {v!r}" if isinstance(v, float) else f"{k:<{width}}  {v}"
                     for k, v in sorted(report.items()))


RUNNERS = {"evolve": run_evolve, "wigner": run_wigner, "web": run_web,
           "manifold": run_manifold, "purity": run_purity}


def run(cfg: dict) -> int:
    """Execute a resolved config; returns the exit status."""
    kind = cfg["experiment"]
    try:
        if kind == "params":
            print(format_report(run_params(cfg), cfg["format"]))
            return EXIT_OK
        out = _Writer(cfg)
        status = RUNNERS[kind](cfg, out)
        for p in out.written:
            print(p)
        return status or EXIT_OK
    except KhoError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    kind = ns.pop("experiment")
    config_path = ns.pop("config", None)
    try:
        file_values = read_config_file(Path(config_path)) if config_path else {}
        cfg = resolve_config(kind, file_values, ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
