"""Run configuration, artifact writers and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import HeislabError, InputError

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "RunWriter",
    "canonical_json",
    "manifest_query",
    "load_manifest",
]

TOOL_VERSION = "0.1.0"
CONFIG_KEYS = {"command", "subcommand", "params", "seed", "jobs", "cache"}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


@dataclass
class ExperimentConfig:
    """One CLI invocation.  ``params`` holds the subcommand options."""

    command: str
    subcommand: str | None
    params: dict
    seed: int = 0
    jobs: int = 1
    cache: str | None = None

    def hash(self) -> str:
        # parallelism and cache location do not change numbers
        key = {"command": self.command, "subcommand": self.subcommand,
               "params": self.params, "seed": self.seed}
        return hashlib.sha256(canonical_json(key).encode()).hexdigest()

    def to_dict(self) -> dict:
        return _plain({"command": self.command, "subcommand": self.subcommand,
                       "params": self.params, "seed": self.seed, "jobs": self.jobs,
                       "cache": self.cache})

    @classmethod
    def from_json(cls, text: str, allowed_params: dict | None = None) -> "ExperimentConfig":
        """Strict parse: unknown top-level or parameter keys are rejected."""
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise InputError("config must be a JSON object")
        extra = set(obj) - CONFIG_KEYS
        if extra:
            raise InputError(f"unknown config keys: {sorted(extra)}")
        if "command" not in obj:
            raise InputError('config needs a "command"')
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise InputError('"params" must be an object')
        if allowed_params is not None:
            key = (obj["command"], obj.get("subcommand"))
            if key not in allowed_params:
                raise InputError(f"unknown command {key}")
            bad = set(params) - allowed_params[key]
            if bad:
                raise InputError(f"unknown params for {key}: {sorted(bad)}")
        seed = obj.get("seed", 0)
        jobs = obj.get("jobs", 1)
        if not isinstance(seed, int) or not isinstance(jobs, int) or jobs < 1:
            raise InputError('"seed" must be an integer and "jobs" a positive integer')
        return cls(obj["command"], obj.get("subcommand"), params, seed, jobs, obj.get("cache"))


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    tool_version: str
    tasks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    directory: str = ""

    def to_json(self) -> str:
        body = {k: v for k, v in self.__dict__.items() if k != "directory"}
        return json.dumps(_plain(body), indent=2, sort_keys=True) + "\n"

    @property
    def command(self) -> str:
        sub = self.config.get("subcommand")
        return self.config["command"] + (f" {sub}" if sub else "")

    @property
    def ok(self) -> bool:
        return all(t["status"] == "ok" for t in self.tasks)


class RunWriter:
    """Single writer for one run directory; the manifest goes out last."""

    def __init__(self, out: str | os.PathLike, config: ExperimentConfig):
        self.config = config
        self.hash = config.hash()
        name = "_".join(p for p in (config.command, config.subcommand) if p) + "_" + self.hash[:12]
        self.dir = Path(out) / name
        self.dir.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(config.to_dict(), self.hash, TOOL_VERSION, directory=str(self.dir))
        self._t0 = time.perf_counter()

    def path(self, name: str) -> Path:
        return self.dir / name

    def _register(self, name):
        if name not in self.manifest.artifacts:
            self.manifest.artifacts.append(name)

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            fh.write(text)
        self._register(name)
        return p

    def write_csv(self, name: str, header, rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(v) for v in r])
        return self.write_text(name, buf.getvalue())

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")

    def write_jsonl(self, name: str, records) -> Path:
        return self.write_text(name, "".join(canonical_json(r) + "\n" for r in records))

    def adopt(self, name: str) -> None:
        """Register a file written by another component (e.g. a plot)."""
        if not self.path(name).exists():
            raise InputError(f"artifact {name} was not written")
        self._register(name)

    def task(self, name: str):
        return _Task(self, name)

    def finish(self) -> RunManifest:
        self.manifest.timings["total_seconds"] = round(time.perf_counter() - self._t0, 3)
        with open(self.path("manifest.json"), "w") as fh:
            fh.write(self.manifest.to_json())
        return self.manifest


class _Task:
    def __init__(self, writer, name):
        self.writer, self.name = writer, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "ok"
        rec = {"name": self.name}
        if exc is not None:
            status = "numeric_failure" if isinstance(exc, HeislabError) and not isinstance(exc, InputError) \
                else "error"
            rec["error"] = f"{type(exc).__name__}: {exc}"
        rec["status"] = status
        rec["seconds"] = round(time.perf_counter() - self.t0, 3)
        self.writer.manifest.tasks.append(rec)
        return False


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_csv_cell(x) for x in v)
    if v is None:
        return ""
    return v


def load_manifest(path) -> RunManifest:
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    with open(p) as fh:
        obj = json.load(fh)
    return RunManifest(obj["config"], obj["config_hash"], obj["tool_version"], obj.get("tasks", []),
                       obj.get("artifacts", []), obj.get("timings", {}), str(p.parent))


def manifest_query(directory, command: str | None = None, config_hash: str | None = None) -> list:
    """Manifests of runs stored under ``directory``, optionally filtered by
    command (``"hardy"`` or ``"hardy hankel"``) or config-hash prefix."""
    d = Path(directory)
    if not d.exists():
        return []
    if not d.is_dir():
        raise InputError(f"{directory} is not a directory")
    try:
        entries = sorted(d.iterdir())
    except OSError as exc:
        raise InputError(f"cannot read {directory}: {exc}") from exc
    out = []
    for sub in entries:
        mf = sub / "manifest.json"
        if not mf.is_file():
            continue
        m = load_manifest(mf)
        if command and not (m.command == command or m.config["command"] == command):
            continue
        if config_hash and not m.config_hash.startswith(config_hash):
            continue
        out.append(m)
    return out
