"""Run configuration, CSV formatting and the run manifest.

Config files are plain ``key = value`` lines.  Lists are comma separated or
written as an inclusive ``start:stop:step`` range.  Every float written to a
CSV uses 17 significant digits in scientific notation so that identical
inputs give byte-identical files.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

COMMANDS = ("evolve", "ness", "thermo", "fit")
MANIFEST_NAME = "manifest.txt"


class ConfigError(ValueError):
    pass


# --- value parsing -----------------------------------------------------------

def parse_grid(text: str, cast=float) -> tuple:
    """``"0:2:0.5"`` -> (0, 0.5, 1, 1.5, 2); ``"1, 2, 5"`` -> (1, 2, 5)."""
    text = text.strip()
    if not text:
        raise ConfigError("empty list")
    if ":" in text:
        parts = [p.strip() for p in text.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"range {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"range {text!r} is empty or has a non-positive step")
        n = int(math.floor((stop - start) / step + 1e-9))
        vals = [round(start + i * step, 12) for i in range(n + 1)]
    else:
        vals = [p.strip() for p in text.split(",") if p.strip()]
    try:
        out = tuple(cast(float(v)) if cast is int else cast(v) for v in vals)
    except ValueError as exc:
        raise ConfigError(f"bad list {text!r}: {exc}") from None
    if cast is int and any(float(v) != int(float(v)) for v in vals):
        raise ConfigError(f"list {text!r} must contain integers")
    return out


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_optional(cast):
    def parse(text):
        t = text.strip().lower()
        return None if t in ("", "none", "auto") else cast(text)
    return parse


# --- config ------------------------------------------------------------------

@dataclass
class RunConfig:
    N_list: tuple = ()
    omega0_grid: tuple = ()
    gamma: float = 1.0
    k_list: tuple = (1, 2, 3, 4, 5, 6)
    dt: float | None = None
    t_max: float = 30.0
    snapshot_stride: int = 10
    state_snapshot_times: tuple = ()
    initial_state: str = "minus_x"
    ltr: int | None = None
    jmax: int | None = None
    truncation: bool = False
    truncation_n: int = 50
    ltr_list: tuple = tuple(range(3, 17))
    element_maps: bool = False
    fit_inputs: tuple = ()
    beta_window: tuple = (1.0, 1.3)
    commands: tuple = ("ness",)
    output_dir: str = "btc_output"
    oracle_enabled: bool = False
    worker_count: int = 1

    # keys that do not change any output byte
    RUNTIME_KEYS = ("output_dir", "worker_count")

    def validate(self, command: str) -> "RunConfig":
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.initial_state not in ("minus_x", "dark"):
            raise ConfigError("initial_state must be 'minus_x' or 'dark'")
        if not self.k_list or min(self.k_list) < 1:
            raise ConfigError("k_list must hold orders >= 1")
        wanted = self.commands if command == "sweep" else (command,)
        for cmd in wanted:
            if cmd not in COMMANDS:
                raise ConfigError(f"unknown command {cmd!r} in commands")
            if cmd in ("evolve", "ness") and not self.N_list:
                raise ConfigError(f"{cmd} needs N or N_list")
            if cmd in ("evolve", "ness", "thermo") and not self.omega0_grid:
                raise ConfigError(f"{cmd} needs omega0 or omega0_grid")
        if self.N_list and min(self.N_list) < 1:
            raise ConfigError("N must be >= 1")
        if any(w < 0 for w in self.omega0_grid):
            raise ConfigError("omega0 must be non-negative")
        if self.t_max <= 0 or (self.dt is not None and self.dt <= 0):
            raise ConfigError("t_max and dt must be positive")
        if self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be >= 1")
        if self.ltr is not None and self.ltr < 0:
            raise ConfigError("ltr must be non-negative")
        out = Path(self.output_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output_dir {out}: {exc}") from None
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output_dir {out} is not writable")
        return self

    def echo(self) -> list[tuple[str, str]]:
        """(key, value) pairs in declaration order, values as config text."""
        pairs = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            pairs.append((f.name, "auto" if v is None else str(v)))
        return pairs

    def digest(self) -> str:
        text = "\n".join(f"{k} = {v}" for k, v in self.echo() if k not in self.RUNTIME_KEYS)
        return hashlib.sha256(text.encode()).hexdigest()


_ALIASES = {"n": "N_list", "n_list": "N_list", "omega0": "omega0_grid",
            "omega0_grid": "omega0_grid", "workers": "worker_count", "oracle": "oracle_enabled"}

_PARSERS = {
    "N_list": lambda s: parse_grid(s, int),
    "omega0_grid": parse_grid,
    "gamma": float,
    "k_list": lambda s: parse_grid(s, int),
    "dt": _parse_optional(float),
    "t_max": float,
    "snapshot_stride": int,
    "state_snapshot_times": parse_grid,
    "initial_state": str.strip,
    "ltr": _parse_optional(int),
    "jmax": _parse_optional(int),
    "truncation": _parse_bool,
    "truncation_n": int,
    "ltr_list": lambda s: parse_grid(s, int),
    "element_maps": _parse_bool,
    "fit_inputs": lambda s: parse_grid(s, str),
    "beta_window": parse_grid,
    "commands": lambda s: parse_grid(s, str),
    "output_dir": str.strip,
    "oracle_enabled": _parse_bool,
    "worker_count": int,
}


def parse_config_text(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    values = {}
    for key, raw in cp["run"].items():
        name = _ALIASES.get(key.lower(), key)
        if name not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[name] = _PARSERS[name](raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    cfg = RunConfig(**values)
    if len(cfg.beta_window) != 2:
        raise ConfigError("beta_window needs two numbers")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


# --- CSV ---------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else f"{v:.16e}"
    return str(v)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(format_value(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows))
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    return lines[0].split(","), [ln.split(",") for ln in lines[1:] if ln]


def read_csv_columns(path) -> dict:
    """Numeric columns as float arrays; non-numeric columns kept as strings."""
    header, rows = read_csv(path)
    cols = {}
    for i, name in enumerate(header):
        raw = [r[i] for r in rows]
        try:
            cols[name] = np.array([float(x) for x in raw])
        except ValueError:
            cols[name] = raw
    return cols


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --- manifest ----------------------------------------------------------------

@dataclass
class TaskEntry:
    task_id: str
    status: str
    files: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    message: str = ""


@dataclass
class Manifest:
    """Structured text manifest: one ``kind name = value`` line per fact."""

    keys: dict = field(default_factory=dict)
    config: list = field(default_factory=list)
    tasks: dict = field(default_factory=dict)
    digests: dict = field(default_factory=dict)

    def render(self) -> str:
        out = [f"key {k} = {v}" for k, v in self.keys.items()]
        out += [f"config {k} = {v}" for k, v in self.config]
        for tid in sorted(self.tasks):
            t = self.tasks[tid]
            out.append(f"task {tid} = {t.status}")
            for f in t.files:
                out.append(f"output {tid} = {f}")
            for name, val in sorted(t.metrics.items()):
                out.append(f"metric {tid} {name} = {format_value(val)}")
            if t.message:
                out.append(f"message {tid} = {t.message.splitlines()[0]}")
        out += [f"digest {p} = sha256:{d}" for p, d in sorted(self.digests.items())]
        return "\n".join(out) + "\n"

    def write(self, output_dir) -> Path:
        path = Path(output_dir) / MANIFEST_NAME
        tmp = path.with_suffix(".tmp")
        tmp.write_text(self.render())
        tmp.replace(path)
        return path

    @classmethod
    def parse(cls, text: str) -> "Manifest":
        m = cls()
        for line in text.splitlines():
            if " = " not in line:
                continue
            lhs, value = line.split(" = ", 1)
            kind, _, name = lhs.partition(" ")
            if kind == "key":
                m.keys[name] = value
            elif kind == "config":
                m.config.append((name, value))
            elif kind == "task":
                m.tasks[name] = TaskEntry(name, value)
            elif kind == "output" and name in m.tasks:
                m.tasks[name].files.append(value)
            elif kind == "metric":
                tid, _, metric = name.rpartition(" ")
                if tid in m.tasks:
                    m.tasks[tid].metrics[metric] = float(value)
            elif kind == "message" and name in m.tasks:
                m.tasks[name].message = value
            elif kind == "digest":
                m.digests[name] = value.removeprefix("sha256:")
        return m

    @classmethod
    def load(cls, output_dir) -> "Manifest | None":
        path = Path(output_dir) / MANIFEST_NAME
        if not path.exists():
            return None
        return cls.parse(path.read_text())


def inventory(output_dir) -> dict:
    """sha256 of every file under ``output_dir`` except the manifest itself."""
    root = Path(output_dir)
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name not in (MANIFEST_NAME, MANIFEST_NAME.replace(".txt", ".tmp")):
            out[p.relative_to(root).as_posix()] = file_digest(p)
    return out

