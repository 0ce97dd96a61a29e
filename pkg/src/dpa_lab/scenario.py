"""Scenario configuration, result records and file output.

A :class:`ScenarioConfig` describes one state family (by explicit
parameters or by an energy budget), the addition phase or a list of
phases, and numerical overrides. :func:`run_point` evaluates one named
quantity for it and returns a :class:`ResultRecord` holding a small table.
"""

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy

from . import __version__
from .entanglement import npt_closed, subspace_witness
from .errors import ConfigError, DpaError
from .fock import FockCutoff
from .states import (
    EPS_TRUNC,
    CoherentPair,
    DpaParams,
    SqueezedPair,
    ThermalPair,
    Tmsv,
    VacuumPair,
    budget_to_spec,
    build_input,
    apply_dpa,
    normalization_closed,
)
from .statistics import DIAGONAL_EPS, discorrelation_verdict, jpnd
from .wigner import QuadratureConfig, WignerEvaluator, section_grid, wln

QUANTITIES = ("npt_closed", "npt_numeric", "jpnd", "wln", "wigner_section", "normalization")
MEASURE_NOTE = "d2beta = dRe(beta) dIm(beta) = dq dp / 2"

# which explicit parameters belong to which family
_FAMILY_PARAMS = {
    "cc": ("z1", "z2"),
    "tt": ("nbar1", "nbar2"),
    "ss": ("r1", "r2"),
    "tmsv": ("r",),
    "vac": (),
}
_ALL_PARAMS = ("z1", "z2", "nbar1", "nbar2", "r1", "r2", "r")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one computation.

    ``phi`` is a single phase or a list of phases. ``cutoff`` applies to
    both modes. ``box`` is the quadrature half-width in whitened standard
    deviations.
    """

    family: str = "vac"
    z1: Optional[float] = None
    z2: Optional[float] = None
    nbar1: Optional[float] = None
    nbar2: Optional[float] = None
    r1: Optional[float] = None
    r2: Optional[float] = None
    r: Optional[float] = None
    nbar_total: Optional[float] = None
    split: Optional[float] = None
    phi: Union[float, tuple] = 0.0
    stage: str = "after"
    cutoff: Optional[int] = None
    quad_nodes: int = 24
    box: Optional[float] = None
    eps_trunc: float = EPS_TRUNC
    tol_wln: float = 2e-3
    diag_eps: float = DIAGONAL_EPS
    n_max: int = 10
    extent: float = 4.0
    resolution: int = 161
    grid_max: float = 3.0
    grid_step: float = 0.05
    workers: int = 1
    out: str = "."
    format: str = "csv"

    def __post_init__(self):
        if self.family not in _FAMILY_PARAMS:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {sorted(_FAMILY_PARAMS)}")
        if self.stage not in ("before", "after"):
            raise ConfigError(f"stage must be 'before' or 'after', got {self.stage!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be 'csv' or 'json', got {self.format!r}")
        if isinstance(self.phi, (list, tuple)):
            if not self.phi:
                raise ConfigError("phi grid is empty")
            object.__setattr__(self, "phi", tuple(float(p) for p in self.phi))
        for name in _ALL_PARAMS + ("nbar_total", "split", "box"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(float(value)):
                raise ConfigError(f"{name} must be finite")
        given = [p for p in _ALL_PARAMS if getattr(self, p) is not None]
        foreign = [p for p in given if p not in _FAMILY_PARAMS[self.family]]
        if foreign:
            raise ConfigError(f"parameters {foreign} do not apply to family {self.family!r}")
        if self.nbar_total is not None and given:
            raise ConfigError("give either nbar_total (with split) or explicit parameters, not both")
        if self.split is not None and self.nbar_total is None:
            raise ConfigError("split requires nbar_total")
        if self.cutoff is not None and self.cutoff < 3:
            raise ConfigError("cutoff must be >= 3")
        if self.quad_nodes < 2 or self.quad_nodes % 2:
            raise ConfigError("quad_nodes must be even and >= 2")
        if self.resolution < 2 or self.grid_step <= 0 or self.workers < 1:
            raise ConfigError("resolution >= 2, grid_step > 0 and workers >= 1 are required")

    # -- serialization

    def to_dict(self):
        d = dataclasses.asdict(self)
        if isinstance(self.phi, tuple):
            d["phi"] = list(self.phi)
        return d

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**data)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def result_settings(self):
        """``to_dict`` without the execution-only keys ``out`` and ``workers``."""
        d = self.to_dict()
        del d["out"], d["workers"]
        return d

    def config_hash(self):
        """Digest of the settings that can change a result (not ``out`` or ``workers``)."""
        text = json.dumps(self.result_settings(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    # -- derived objects

    @property
    def phis(self):
        return self.phi if isinstance(self.phi, tuple) else (float(self.phi),)

    def spec(self):
        if self.nbar_total is not None:
            if self.nbar_total < 0:
                raise ConfigError("nbar_total must be >= 0")
            return budget_to_spec(self.family, self.nbar_total, self.split)

        def get(name):
            value = getattr(self, name)
            return 0.0 if value is None else float(value)

        if self.family == "cc":
            return CoherentPair(get("z1"), get("z2"))
        if self.family == "tt":
            return ThermalPair(get("nbar1"), get("nbar2"))
        if self.family == "ss":
            return SqueezedPair(get("r1"), get("r2"))
        if self.family == "tmsv":
            return Tmsv(get("r"))
        return VacuumPair()

    def fock_cutoff(self):
        return None if self.cutoff is None else FockCutoff(self.cutoff, self.cutoff)

    def quadrature(self):
        return QuadratureConfig(box_halfwidth=self.box, nodes_per_axis=self.quad_nodes, tol_wln=self.tol_wln)


@dataclass
class ResultRecord:
    """One computed quantity as a table, plus how it was obtained.

    ``convergence`` holds one entry per row group (usually per phase) with
    the cutoff, truncation loss or quadrature history behind the numbers.
    """

    scenario: dict
    quantity: str
    columns: tuple
    rows: list
    convergence: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    tool_version: str = __version__
    timestamp: Optional[str] = None

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "quantity": self.quantity,
            "columns": list(self.columns),
            "rows": [[_json_value(v) for v in row] for row in self.rows],
            "convergence": self.convergence,
            "notes": self.notes,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
        }


# --------------------------------------------------------------------------
# formatting


def format_number(x):
    """Shortest round-trip text of ``x`` rounded to 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise DpaError(f"refusing to emit non-finite value {x!r}")
    y = float(f"{x:.12g}")
    if y == 0.0:
        return "0"
    text = repr(y)
    return text[:-2] if text.endswith(".0") else text


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(format_number(v))
    return v


def _cell(v):
    return v if isinstance(v, str) else format_number(v)


def versions():
    return {"dpa_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def render_csv(columns, rows, metadata):
    buf = io.StringIO()
    for key, value in metadata:
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render_json(columns, rows, metadata):
    payload = {
        "metadata": dict(metadata),
        "columns": list(columns),
        "rows": [[_json_value(v) for v in row] for row in rows],
    }
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def write_table(path, columns, rows, config, extra_meta=()):
    """Write one table as CSV or JSON (by ``config.format``); returns the file name."""
    metadata = [("tool", f"dpa-lab {__version__}"), ("config-hash", config.config_hash())]
    metadata.extend(extra_meta)
    text = (render_csv if config.format == "csv" else render_json)(columns, rows, metadata)
    path = f"{path}.{config.format}"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return os.path.basename(path)


def write_manifest(path, figure, files, config, convergence):
    manifest = {
        "figure": figure,
        "files": list(files),
        "config": config.result_settings(),
        "versions": versions(),
        "convergence": convergence,
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(_clean(manifest), indent=1, sort_keys=True) + "\n")
    return os.path.basename(path)


def _clean(obj):
    """Round floats for JSON so manifests obey the same 12-digit rule as CSVs."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _json_value(obj)


def parallel_map(func, items, workers=1):
    """``list(map(func, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# --------------------------------------------------------------------------
# single points


def _state(config, spec, phi):
    rho = build_input(spec, config.fock_cutoff(), config.eps_trunc)
    if config.stage == "after":
        rho = apply_dpa(rho, DpaParams(phi))
    return rho


def _trunc_info(rho, phi):
    return {"phi": phi, "cutoff": [rho.cutoff.d1, rho.cutoff.d2], "tail_mass": rho.tail_mass}


def _wln_info(res, phi):
    return {
        "phi": phi,
        "nodes_per_axis": res.nodes_per_axis,
        "halfwidth": res.halfwidth,
        "delta": res.delta,
        "history": [list(h) for h in res.history],
        "measure": MEASURE_NOTE,
    }


def run_point(config, quantity):
    """Evaluate ``quantity`` for every phase of ``config``."""
    if quantity not in QUANTITIES:
        raise ConfigError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    spec = config.spec()
    phis = config.phis
    stage = config.stage
    rows, conv, notes = [], [], {}

    if quantity == "npt_closed":
        columns = ("phi", "npt")
        rows = [(phi, npt_closed(spec, DpaParams(phi), stage)) for phi in phis]
    elif quantity == "npt_numeric":
        columns = ("phi", "npt", "npt_closed")

        def one(phi):
            rho = _state(config, spec, phi)
            w = subspace_witness(rho)
            return (phi, w.npt, npt_closed(spec, DpaParams(phi), stage)), _trunc_info(rho, phi)

        for row, info in parallel_map(one, phis, config.workers):
            rows.append(row)
            conv.append(info)
    elif quantity == "normalization":
        columns = ("phi", "n_closed", "n_numeric")
        for phi in phis:
            rho_in = build_input(spec, config.fock_cutoff(), config.eps_trunc)
            rho = apply_dpa(rho_in, DpaParams(phi))
            rows.append((phi, normalization_closed(spec, DpaParams(phi)), rho.numerator_trace))
            conv.append(_trunc_info(rho, phi))
    elif quantity == "jpnd":
        columns = ("phi", "n1", "n2", "p")
        verdicts = []
        for phi in phis:
            rho = _state(config, spec, phi)
            table = jpnd(rho, config.n_max)
            for n1 in range(table.n_max + 1):
                for n2 in range(table.n_max + 1):
                    rows.append((phi, n1, n2, float(table.p[n1, n2])))
            v = discorrelation_verdict(table, config.diag_eps)
            verdicts.append(
                {
                    "phi": phi,
                    "discorrelated": v.discorrelated,
                    "max_diagonal": v.max_diagonal,
                    "min_marginal_mass": v.min_marginal_mass,
                    "marginal_overlap": v.marginal_overlap,
                }
            )
            conv.append(dict(_trunc_info(rho, phi), captured_mass=table.captured_mass))
        notes["verdicts"] = verdicts
    elif quantity == "wln":
        columns = ("phi", "wln", "integral")

        def one(phi):
            res = wln(WignerEvaluator(spec, DpaParams(phi), stage), config.quadrature())
            return (phi, res.value, res.integral), _wln_info(res, phi)

        for row, info in parallel_map(one, phis, config.workers):
            rows.append(row)
            conv.append(info)
    else:  # wigner_section
        columns = ("phi", "q1", "q2", "w")
        for phi in phis:
            grid = section_grid(
                WignerEvaluator(spec, DpaParams(phi), stage), extent=config.extent, resolution=config.resolution
            )
            for i, a in enumerate(grid.axis1):
                for j, b in enumerate(grid.axis2):
                    rows.append((phi, float(a), float(b), float(grid.values[i, j])))
            conv.append({"phi": phi, "plane": "q1,q2 at p1=p2=0", "extent": config.extent, "resolution": config.resolution})
    return ResultRecord(
        scenario=config.to_dict(), quantity=quantity, columns=columns, rows=rows, convergence=conv, notes=notes
    )
