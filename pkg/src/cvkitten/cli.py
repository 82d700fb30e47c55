"""Command-line front end: ``cvkitten <command> [--config PATH] [--key value ...]``.

Config files are flat ``key = value`` text (``#`` starts a comment).  Values
given on the command line override the file, which overrides the defaults
(the reference experimental parameter set).  Every command writes ``<output>.csv`` and/or a
``<output>.json`` sidecar.  Floats are written with ``repr``, the shortest
string that round-trips, so identical configs give identical bytes.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import ideal_model
from .conditioning import conditioned_state, dress_homodyne
from .errors import CvKittenError
from .gaussian_state import MHZ_NS, InvalidParams, PhysicalParams
from .observables import (
    GridSpec,
    mean_photon_closed,
    mean_photon_general,
    photon_numbers,
    squeezing_curve,
    wigner_origin,
    wigner_single,
)

COMMANDS = ("wigner", "sweep-delta", "photon-numbers", "squeezing", "ideal-compare")
MODES = {"u1": ("unbiased", 0), "u2": ("unbiased", 1), "plus": ("biased", 0), "minus": ("biased", 1)}
DEFAULT_EPS_GRID = tuple(round(0.05 * k, 2) for k in range(20))


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "wigner"
    # physics (rates in MHz, times in ns)
    gamma_T: float = 58.8
    gamma_L: float = 1.2
    eps_ratio: float | None = None
    epsilon: float | None = None
    R: float = 0.05
    R1: float = 0.5
    T: float = 1.0
    eta: float = 0.6
    nu: float = 1e-7
    eta_H: float = 0.96
    epsilon_x: float = 0.0
    delta_ns: float | None = None
    zeta0_delta: float | None = None
    # wigner
    mode: str = "plus"
    extent: float = 5.0
    resolution: int = 201
    # sweep-delta (dimensionless zeta0 * delta)
    delta_start: float = 0.05
    delta_stop: float = 10.0
    delta_num: int = 100
    delta_list: str = ""
    # squeezing
    f_list: str = "10,30,50"
    eps_list: str = ""
    # io
    output: str = ""
    workers: int = 1

    def __post_init__(self):
        self.validate()

    # -- construction -------------------------------------------------
    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, raw: dict[str, Any]) -> "RunConfig":
        unknown = sorted(set(raw) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
        return cls(**{k: _coerce(k, v) for k, v in raw.items()})

    # -- validation ---------------------------------------------------
    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}")
        if self.eps_ratio is not None and self.epsilon is not None:
            raise ConfigError("eps_ratio and epsilon are mutually exclusive")
        if self.delta_ns is not None and self.zeta0_delta is not None:
            raise ConfigError("delta_ns and zeta0_delta are mutually exclusive")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {sorted(MODES)}")
        if not (self.extent > 0 and self.resolution >= 3):
            raise ConfigError("extent > 0 and resolution >= 3")
        if self.delta_num < 1 or self.delta_stop < self.delta_start or self.delta_start < 0:
            raise ConfigError("need 0 <= delta_start <= delta_stop and delta_num >= 1")
        if self.workers < 1:
            raise ConfigError("workers >= 1")
        for name in ("delta_list", "f_list", "eps_list"):
            _parse_list(name, getattr(self, name))
        if any(f <= 0 for f in self.f_values):
            raise ConfigError("f_list entries must be positive")
        if any(d < 0 for d in self.delta_values):
            raise ConfigError("delta_list entries must be non-negative")
        self.physical_params()

    # -- derived ------------------------------------------------------
    @property
    def zeta0(self) -> float:
        return 0.5 * (self.gamma_T + self.gamma_L)

    def physical_params(self) -> PhysicalParams:
        z0 = self.zeta0
        if z0 <= 0:
            raise InvalidParams("zeta0 > 0")
        if self.epsilon is not None:
            eps = self.epsilon
        else:
            eps = (0.3 if self.eps_ratio is None else self.eps_ratio) * z0
        if self.zeta0_delta is not None:
            delta = self.zeta0_delta / (z0 * MHZ_NS)
        else:
            delta = 30.0 if self.delta_ns is None else self.delta_ns
        return PhysicalParams(
            gamma_T=self.gamma_T,
            gamma_L=self.gamma_L,
            epsilon=eps,
            R=self.R,
            R1=self.R1,
            T=self.T,
            eta=self.eta,
            nu=self.nu,
            eta_H=self.eta_H,
            epsilon_x=self.epsilon_x,
            delta=delta,
        )

    @property
    def delta_values(self) -> list[float]:
        if self.delta_list.strip():
            return _parse_list("delta_list", self.delta_list)
        return [float(x) for x in np.linspace(self.delta_start, self.delta_stop, self.delta_num)]

    @property
    def f_values(self) -> list[float]:
        return _parse_list("f_list", self.f_list)

    @property
    def eps_values(self) -> list[float]:
        return _parse_list("eps_list", self.eps_list) if self.eps_list.strip() else list(DEFAULT_EPS_GRID)

    @property
    def output_prefix(self) -> Path:
        return Path(self.output or f"cvkitten_{self.command.replace('-', '_')}")

    def as_dict(self) -> dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if v is not None}


_FLOAT_KEYS = {f.name for f in fields(RunConfig) if "float" in str(f.type)}
_INT_KEYS = {f.name for f in fields(RunConfig) if str(f.type) == "int"}


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in _FLOAT_KEYS:
            out = float(value)
            if not math.isfinite(out):
                raise ValueError
            return out
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return str(value).strip()


def _parse_list(name: str, text: str) -> list[float]:
    if not text.strip():
        return []
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"{name}: expected a comma-separated list of numbers") from None


def read_config_file(path: str | Path) -> dict[str, str]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + Path(path).read_text())
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return dict(parser["run"])


# -- serialization --------------------------------------------------------

def fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _sidecar(cfg: RunConfig, results: dict) -> dict:
    params = cfg.physical_params()
    return {
        "config": cfg.as_dict(),
        "params": {**asdict(params), "zeta0": params.zeta0, "zeta0_delta": params.delta_dimless},
        **results,
    }


# -- commands -------------------------------------------------------------

def cmd_wigner(cfg: RunConfig) -> list[Path]:
    params = cfg.physical_params()
    basis, index = MODES[cfg.mode]
    bare = conditioned_state(params, basis)
    dressed = dress_homodyne(bare, params.eta_H)
    grid = wigner_single(dressed, index, GridSpec(cfg.extent, cfg.resolution))
    prefix = cfg.output_prefix
    rows = ((x, p, w) for p, line in zip(grid.p_axis, grid.values) for x, w in zip(grid.x_axis, line))
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    write_csv(csv_path, ["x", "p", "w"], rows)
    write_json(
        json_path,
        _sidecar(
            cfg,
            {
                "p_det": bare.p_det,
                "w_origin": wigner_origin(dressed, index),
                "n_mode": mean_photon_general(bare, index),
                "mode": cfg.mode,
                "basis": basis,
                "grid": {"extent": float(grid.x_axis[-1]), "resolution": int(grid.x_axis.size)},
                "grid_integral": grid.integral(),
            },
        ),
    )
    return [csv_path, json_path]


def _sweep_row(args: tuple[PhysicalParams, float]) -> tuple[float, ...]:
    base, d = args
    params = base.with_delta_dimless(d)
    biased = conditioned_state(params, "biased")
    n_plus = mean_photon_general(biased, 0)
    n_minus = mean_photon_general(biased, 1)
    n_u1 = mean_photon_general(conditioned_state(params, "unbiased"), 0)
    w0 = wigner_origin(dress_homodyne(biased, params.eta_H), 0)
    return (d, n_plus, n_minus, n_u1, biased.p_det, w0)


def _ordered_map(fn, items, workers: int) -> list:
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_sweep_delta(cfg: RunConfig) -> list[Path]:
    params = cfg.physical_params()
    deltas = cfg.delta_values
    rows = _ordered_map(_sweep_row, [(params, d) for d in deltas], cfg.workers)
    prefix = cfg.output_prefix
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    write_csv(csv_path, ["zeta0_delta", "n_plus", "n_minus", "n_u1", "p_det", "w_origin_plus"], rows)
    n_plus = [r[1] for r in rows]
    k = int(np.argmax(n_plus))
    write_json(json_path, _sidecar(cfg, {"rows": len(rows), "argmax_n_plus": rows[k][0], "max_n_plus": rows[k][1]}))
    return [csv_path, json_path]


def cmd_photon_numbers(cfg: RunConfig) -> list[Path]:
    params = cfg.physical_params()
    pn = photon_numbers(params)
    p_det = conditioned_state(params, "biased").p_det
    prefix = cfg.output_prefix
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    row = (params.delta_dimless, pn.n_plus, pn.n_minus, pn.n_u1, pn.n_u2, p_det)
    write_csv(csv_path, ["zeta0_delta", "n_plus", "n_minus", "n_u1", "n_u2", "p_det"], [row])
    write_json(json_path, _sidecar(cfg, {**asdict(pn), "p_det": p_det}))
    return [csv_path, json_path]


def cmd_squeezing(cfg: RunConfig) -> list[Path]:
    params = cfg.physical_params()
    rows = []
    for f in cfg.f_values:
        for pt in squeezing_curve(f, cfg.eps_values, params):
            rows.append((pt.epsilon_ratio, pt.f, pt.squeeze_dB, pt.antisqueeze_dB))
    rows.sort(key=lambda r: (r[0], r[1]))
    prefix = cfg.output_prefix
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    write_csv(csv_path, ["epsilon_ratio", "f", "squeeze_dB", "antisqueeze_dB"], rows)
    write_json(json_path, _sidecar(cfg, {"rows": len(rows)}))
    return [csv_path, json_path]


def ideal_report(params: PhysicalParams) -> dict:
    r = params.eps_ratio
    d = params.delta_dimless
    unb = ideal_model.ideal_unbiased_amplitudes(r, d)
    bia = ideal_model.ideal_biased_amplitudes(r, d)
    dec = ideal_model.phi_e_decomposition(r, d)
    label = {(1, 1): "11", (2, 0): "20", (0, 2): "02", (0, 0): "00"}
    c_plus = bia.amplitudes[(2, 0)]
    c_minus = bia.amplitudes[(0, 2)]
    bridge = photon_numbers(params.replace(eta=1.0, nu=1e-9, eta_H=1.0, epsilon_x=0.0))
    full = photon_numbers(params)
    return {
        "eps_ratio": r,
        "zeta0_delta": d,
        "I_delta": ideal_model.overlap_I(d),
        "regime": ideal_model.regime(d),
        "unbiased": {label[k]: v for k, v in unb.amplitudes.items()},
        "unbiased_normalized": {label[k]: v for k, v in unb.normalized.items()},
        "biased": {label[k]: v for k, v in bia.amplitudes.items()},
        "biased_normalized": {label[k]: v for k, v in bia.normalized.items()},
        "c_minus_over_c_plus": abs(c_minus / c_plus),
        "nu_e": dec.nu_e,
        "N": dec.N,
        "phi_e": {"c2": dec.c2, "c0": dec.c0},
        "basis_rotation_residual": ideal_model.basis_rotation_residual(r, d),
        "full_model": {"n_plus": full.n_plus, "n_minus": full.n_minus, "n_u1": full.n_u1},
        "limit_bridge": {
            "settings": {"eta": 1.0, "nu": 1e-9, "eta_H": 1.0, "epsilon_x": 0.0},
            "n_plus": bridge.n_plus,
            "n_minus": bridge.n_minus,
            "n_minus_over_n_plus": bridge.n_minus / bridge.n_plus,
        },
        "closed_form": {
            "z_eps_over_zeta0": {"n_plus": mean_photon_closed(1, r, d), "n_minus": mean_photon_closed(-1, r, d)},
            "z_zeta0_over_eps": {
                "n_plus": mean_photon_closed(1, 1.0 / r, d),
                "n_minus": mean_photon_closed(-1, 1.0 / r, d),
            },
        },
    }


def cmd_ideal_compare(cfg: RunConfig) -> list[Path]:
    params = cfg.physical_params()
    if params.epsilon == 0:
        raise ConfigError("ideal-compare needs eps_ratio > 0")
    json_path = cfg.output_prefix.with_suffix(".json")
    write_json(json_path, _sidecar(cfg, {"report": ideal_report(params)}))
    return [json_path]


HANDLERS = {
    "wigner": cmd_wigner,
    "sweep-delta": cmd_sweep_delta,
    "photon-numbers": cmd_photon_numbers,
    "squeezing": cmd_squeezing,
    "ideal-compare": cmd_ideal_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvkitten", description="Two-photon-subtracted cw squeezed light.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key = value file")
        for key in RunConfig.keys():
            if key == "command":
                continue
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            p.add_argument(*flags, dest=key, default=None, metavar="VALUE")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict[str, Any] = {}
    if args.config:
        raw.update(read_config_file(args.config))
        raw.pop("command", None)
    for key in RunConfig.keys():
        val = getattr(args, key, None)
        if key != "command" and val is not None:
            raw[key] = val
    raw["command"] = args.command
    return RunConfig.from_mapping(raw)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (ConfigError, InvalidParams) as exc:
        print(f"cvkitten: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        paths = HANDLERS[cfg.command](cfg)
    except (ConfigError, InvalidParams) as exc:
        print(f"cvkitten: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except (CvKittenError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"cvkitten: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
