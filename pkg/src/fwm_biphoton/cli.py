"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import copy
import datetime
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .amplitudes import Subspace
from .config import ConfigError, ExperimentConfig
from .correlations import (
    g2_full_probe_map,
    g2_point_grid,
    normalized_cross_correlation,
    pearson_sign,
    pump_reference_map,
)
from .entanglement import (
    entanglement_entropy,
    entanglement_report,
    oam_distribution,
    purity_and_schmidt,
    schmidt_gaussian,
    spiral_bandwidth,
)
from .modes import lg_norm, lg_radial
from .momentum import (
    ConvergenceError,
    PhaseMatchKernel,
    amplitudes_momentum_analytic,
    amplitudes_momentum_quadrature,
    trace_distance,
)
from .position import coincidence_amplitudes_position
from .pump import PumpSpec, expansion_for_medium
from .quadrature import RuleSpec, integrate_1d

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3
COMMANDS = {
    "modes": "tabulate the subspace LG modes at the first detection plane",
    "pump-expand": "expand the squared pump (times the cloud profile) in LG modes",
    "amplitudes": "coincidence-amplitude tensor in the chosen representation",
    "entanglement": "spiral bandwidth, entropy, purity and Schmidt numbers",
    "g2": "coincidence maps on each detection plane",
    "distance": "trace distance between position and momentum tensors",
    "sweep": "entanglement versus pumped OAM, or trace distance versus L or w0",
}
EXECUTION_KEYS = ("threads",)


def embedded_config(cfg: ExperimentConfig) -> dict:
    """Resolved config without execution-only settings, so outputs are portable."""
    raw = copy.deepcopy(cfg.raw)
    for key in EXECUTION_KEYS:
        raw.pop(key, None)
    raw["output"].pop("dir", None)
    return raw


# ------------------------------------------------------------------ computations


def compute_amplitudes(cfg: ExperimentConfig, rep: str | None = None, pump: PumpSpec | None = None,
                       subspace: Subspace | None = None, medium=None, beam=None):
    rep = rep or cfg.raw["representation"]
    pump = pump or cfg.pump()
    subspace = subspace or cfg.subspace()
    qcfg = cfg.quadrature()
    threads = cfg.raw["threads"]
    if rep == "position":
        return coincidence_amplitudes_position(pump, subspace, qcfg, threads)
    medium = medium or cfg.medium()
    order = cfg.raw["expansion"]["momentum_order"]
    expansion = expansion_for_medium(pump, medium, order, qcfg)
    kernel = PhaseMatchKernel(pump.beam, medium)
    if cfg.raw["expansion"]["momentum_method"] == "analytic":
        return amplitudes_momentum_analytic(expansion, subspace, kernel, qcfg, threads)
    return amplitudes_momentum_quadrature(expansion, subspace, kernel, qcfg, threads)


def _zeta(cfg: ExperimentConfig, beam=None) -> float:
    beam = beam or cfg.beam()
    return cfg.medium_length() / beam.z_R


def run_modes(cfg, fmt, conf):
    beam = cfg.beam()
    qcfg = cfg.quadrature()
    z = cfg.planes()[0]
    rule = RuleSpec(qcfg.position_nodes, 0.0, qcfg.position_cutoff * float(beam.width(z)), "radial-position")
    cols = ["ell", "p", "order", "normalization", "gouy_phase", "norm_integral"]
    rows = []
    for idx in cfg.subspace().modes():
        nint = integrate_1d(lambda r: np.abs(lg_radial(idx.ell, idx.p, r, beam, z)) ** 2 * r, rule)
        rows.append([idx.ell, idx.p, idx.order, lg_norm(idx.ell, idx.p),
                     float(beam.gouy_phase(idx.order, z)), 2 * math.pi * float(nint)])
    return {"modes": _table(cols, rows, fmt, conf)}


def _table(cols, rows, fmt, conf):
    return io.table_csv(cols, rows, conf) if fmt == "csv" else io.table_json(cols, rows, conf)


def run_pump_expand(cfg, fmt, conf):
    exp = expansion_for_medium(cfg.pump(), cfg.medium(), cfg.raw["expansion"]["order"], cfg.quadrature())
    text = io.expansion_csv(exp, conf) if fmt == "csv" else io.expansion_json(exp, conf)
    return {"expansion": text}


def run_amplitudes(cfg, fmt, conf):
    amps = compute_amplitudes(cfg)
    text = io.amplitudes_csv(amps, conf) if fmt == "csv" else io.amplitudes_json(amps, conf)
    return {"amplitudes": text}


def run_entanglement(cfg, fmt, conf):
    amps = compute_amplitudes(cfg)
    report = entanglement_report(amps, _zeta(cfg))
    if fmt == "json":
        return {"entanglement": io.dumps_json({**report, "config": conf})}
    cols = ["sbw", "entropy_bits", "purity", "schmidt_k", "lT", "zeta", "schmidt_k_gaussian"]
    return {"entanglement": io.table_csv(cols, [[report[c] for c in cols]], conf)}


def run_g2(cfg, fmt, conf):
    amps = compute_amplitudes(cfg)
    kind = cfg.raw["detection"]["kind"]
    want_reference = kind == "full-probe" and cfg.raw["detection"]["reference"]
    files = {}
    summary = []
    for n, z in enumerate(cfg.planes()):
        det = cfg.detection(z)
        stat = {}
        if kind == "point-pinholes":
            grid = g2_point_grid(amps, cfg.grid(z), det)
            stat["pearson"] = pearson_sign(grid)
        else:
            grid = g2_full_probe_map(amps, cfg.grid(z), z, cfg.medium_length())
            if want_reference:
                reference = pump_reference_map(cfg.pump(), cfg.grid(z))
                stat["ncc_vs_pump"] = normalized_cross_correlation(grid, reference)
                files[f"pump_reference_z{n}"] = _map(reference, fmt, conf, {"quantity": "|Vp|^4", "z": z})
        files[f"g2_z{n}"] = _map(grid, fmt, conf, {"kind": kind, "z": z, **stat})
        summary.append([n, z, stat.get("pearson"), stat.get("ncc_vs_pump")])
    files["g2_summary"] = _table(["plane", "z", "pearson", "ncc_vs_pump"], summary, fmt, conf)
    return files


def _map(grid, fmt, conf, extra):
    return io.map_csv(grid, conf, extra) if fmt == "csv" else io.map_json(grid, conf, extra)


def run_distance(cfg, fmt, conf):
    pos = compute_amplitudes(cfg, "position")
    mom = compute_amplitudes(cfg, "momentum")
    d = trace_distance(pos, mom)
    row = [d, _zeta(cfg), cfg.beam().w0, cfg.medium_length(), mom.metadata.get("convergence", {}).get("converged")]
    return {"distance": _table(["trace_distance", "zeta", "w0", "L", "converged"], [row], fmt, conf)}


def run_sweep(cfg, fmt, conf):
    name, values = cfg.sweep_values()
    beam = cfg.beam()
    rows = []
    if name == "lT":
        cols = ["lT", "sbw", "entropy_bits", "purity", "schmidt_k"]
        base = cfg.subspace()
        for lt in values:
            pump = PumpSpec.single(lt // 2, 0, beam)
            sub = Subspace(base.l_max, base.p_max, lt // 2)
            amps = compute_amplitudes(cfg, "position", pump=pump, subspace=sub)
            dist = oam_distribution(amps)
            purity, k = purity_and_schmidt(amps)
            rows.append([lt, spiral_bandwidth(dist), entanglement_entropy(dist), purity, k])
    else:
        cols = [name, "zeta", "trace_distance", "schmidt_k_gaussian"]
        for v in values:
            if name == "L":
                sub_cfg = cfg.updated(medium={"L": v} if cfg.raw["medium"]["kind"] == "cell" else {"L_l": v})
            else:
                sub_cfg = cfg.updated(beam={"w0": v})
            pos = compute_amplitudes(sub_cfg, "position")
            mom = compute_amplitudes(sub_cfg, "momentum")
            zeta = _zeta(sub_cfg)
            rows.append([v, zeta, trace_distance(pos, mom), schmidt_gaussian(zeta)])
    return {"sweep": _table(cols, rows, fmt, conf)}


RUNNERS = {
    "modes": run_modes,
    "pump-expand": run_pump_expand,
    "amplitudes": run_amplitudes,
    "entanglement": run_entanglement,
    "g2": run_g2,
    "distance": run_distance,
    "sweep": run_sweep,
}


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwm-biphoton", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment config")
    common.add_argument("--rep", choices=("position", "momentum"), help="override the representation")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--threads", type=int, help="worker threads for amplitude fills")
    common.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _resolve(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if args.rep:
        overrides["representation"] = args.rep
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.format:
        overrides["output"] = {"format": args.format}
    if args.out is not None:
        overrides.setdefault("output", {})["dir"] = str(args.out)
    return cfg.updated(**overrides) if overrides else cfg


def _log(out_dir: Path, command: str, written: list[Path]):
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    with open(out_dir / "run.log", "a") as fh:
        fh.write(f"{stamp} {command} {' '.join(p.name for p in written)}\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(cfg.dump())
        return EXIT_OK
    fmt = cfg.raw["output"]["format"]
    out_dir = Path(cfg.raw["output"]["dir"])
    try:
        rendered = RUNNERS[args.command](cfg, fmt, embedded_config(cfg))
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    written = io.write_all({out_dir / f"{stem}.{fmt}": text for stem, text in rendered.items()})
    _log(out_dir, args.command, written)
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
