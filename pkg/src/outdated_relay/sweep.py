"""Parameter sweeps, curve output and coefficient-table dumps."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import e2e, mcsim, order_stats
from .config import SystemConfig
from .errors import InvalidInputError

THREADS_ENV = "OUTDATED_RELAY_THREADS"
METRICS = ("outage", "ser", "mgf")


class Axis(str, enum.Enum):
    D1 = "D1"
    ETA1_DB = "Eta1Db"
    RHO1 = "Rho1"
    RHO2 = "Rho2"
    NUM_RELAYS = "NumRelays"

    @classmethod
    def parse(cls, name: str) -> "Axis":
        key = name.replace("_", "").replace("-", "").lower()
        for a in cls:
            if a.value.lower() == key:
                return a
        raise InvalidInputError(f"unknown sweep axis {name!r}")


def apply_axis(base: SystemConfig, axis: Axis, value: float) -> SystemConfig:
    """``base`` with the swept parameter set to ``value``.

    Sweeping ``Eta1Db`` moves ``eta2_db`` with it (equal source and relay
    SNR, as in the reference experiments).
    """
    if axis is Axis.D1:
        return base.replace(d1=value)
    if axis is Axis.ETA1_DB:
        return base.replace(eta1_db=value, eta2_db=value)
    if axis is Axis.RHO1:
        return base.replace(rho1=value)
    if axis is Axis.RHO2:
        return base.replace(rho2=value)
    if int(value) != value:
        raise InvalidInputError(f"relay count must be an integer, got {value!r}")
    return base.replace(num_relays=int(value))


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    axis: Axis
    grid: tuple[float, ...]
    metrics: tuple[str, ...] = ("outage",)
    modulation: str = "BPSK"
    mc_trials: int = 0
    seed: int = 0
    mgf_s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise InvalidInputError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError("sweep grid must be strictly increasing")
        for v in grid:
            apply_axis(self.base, self.axis, v)  # range check per axis
        object.__setattr__(self, "grid", grid)
        metrics = tuple(self.metrics)
        if not metrics or any(m not in METRICS for m in metrics):
            raise InvalidInputError(f"metrics must be a nonempty subset of {METRICS}")
        object.__setattr__(self, "metrics", tuple(m for m in METRICS if m in metrics))
        e2e.modulation(self.modulation)
        if int(self.mc_trials) != self.mc_trials or self.mc_trials < 0:
            raise InvalidInputError("mc_trials must be a nonnegative integer")
        if 0 < self.mc_trials < mcsim.MIN_TRIALS:
            raise InvalidInputError(f"mc_trials must be 0 or >= {mcsim.MIN_TRIALS}")
        mcsim.TrialRng(self.seed)
        if not self.mgf_s > 0:
            raise InvalidInputError("mgf_s must be positive")


@dataclass
class SweepRow:
    axis: str
    value: float
    sigma1: float
    sigma2: float
    C: float
    analytic: dict = field(default_factory=dict)
    mc: dict = field(default_factory=dict)        # metric -> value
    mc_se: dict = field(default_factory=dict)     # metric -> standard error

    def as_dict(self) -> dict:
        d = {"axis": self.axis, "value": self.value, "sigma1": self.sigma1,
             "sigma2": self.sigma2, "C": self.C}
        for metric in METRICS:
            if metric in self.analytic:
                d[f"{metric}_an"] = self.analytic[metric]
            if metric in self.mc:
                d[f"{metric}_mc"] = self.mc[metric]
                d[f"{metric}_se"] = self.mc_se[metric]
        return d


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(n, 1)


def evaluate_point(cfg: SystemConfig, metrics, modulation_name: str = "BPSK",
                   mc_trials: int = 0, seed: int = 0, stream_id: int = 0,
                   mgf_s: float = 1.0) -> tuple:
    """Analytic (and optionally MC) metrics at one configuration."""
    derived, model = e2e.build_model(cfg)
    mod = e2e.modulation(modulation_name)
    analytic, mc, mc_se = {}, {}, {}
    if "outage" in metrics:
        analytic["outage"] = e2e.outage(model, derived.Psi)
    if "ser" in metrics:
        analytic["ser"] = e2e.ser(model, mod)
    if "mgf" in metrics:
        analytic["mgf"] = e2e.mgf(model, mgf_s)
    if mc_trials:
        if "outage" in metrics:
            est = mcsim.estimate_outage(cfg, derived.Psi, mc_trials, seed, stream_id, derived)
            mc["outage"], mc_se["outage"] = est.value, est.std_error
        if "ser" in metrics:
            est = mcsim.estimate_ser(cfg, mod, mc_trials, seed, stream_id, derived)
            mc["ser"], mc_se["ser"] = est.value, est.std_error
    return derived, analytic, mc, mc_se


def run_sweep(spec: SweepSpec, threads: int | None = None) -> list[SweepRow]:
    """One row per grid value, in grid order.

    Row ``i`` simulates on MC stream ``i`` of ``spec.seed``, so results do
    not depend on ``threads``.
    """
    threads = default_threads() if threads is None else max(int(threads), 1)

    def row(item):
        index, value = item
        cfg = apply_axis(spec.base, spec.axis, value)
        try:
            derived, analytic, mc, mc_se = evaluate_point(
                cfg, spec.metrics, spec.modulation, spec.mc_trials, spec.seed,
                stream_id=index, mgf_s=spec.mgf_s)
        except (InvalidInputError, ArithmeticError) as exc:
            raise type(exc)(f"{spec.axis.value}={value!r}: {exc}") from exc
        r = SweepRow(spec.axis.value, value, derived.sigma1, derived.sigma2, derived.C,
                     analytic, mc, mc_se)
        values = list(r.as_dict().values())[1:]
        if not all(math.isfinite(v) for v in values):
            raise ArithmeticError(f"{spec.axis.value}={value!r}: non-finite result")
        return r

    items = list(enumerate(spec.grid))
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(row, items))
    return [row(it) for it in items]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))  # shortest string that round-trips exactly


def columns(spec: SweepSpec) -> list[str]:
    cols = ["axis", "value", "sigma1", "sigma2", "C"]
    for metric in METRICS:
        if metric not in spec.metrics:
            continue
        cols.append(f"{metric}_an")
        if spec.mc_trials and metric != "mgf":
            cols += [f"{metric}_mc", f"{metric}_se"]
    return cols


def rows_to_csv(rows: list[SweepRow], spec: SweepSpec) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = columns(spec)
    writer.writerow(cols)
    for r in rows:
        d = r.as_dict()
        writer.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()


def rows_to_json(rows: list[SweepRow], spec: SweepSpec) -> str:
    cols = columns(spec)
    return json.dumps([{c: r.as_dict()[c] for c in cols} for r in rows], indent=2)


def fig1_preset(rho1: float = 1.0, rho2: float = 1.0, num_relays: int = 1,
                **kw) -> SweepSpec:
    """Outage versus relay position: eta1 = 15 dB, v = 3, d1 = 0.05 .. 0.95."""
    base = SystemConfig(num_relays=num_relays, rho1=rho1, rho2=rho2, d1=0.5,
                        pathloss_exp=3.0, eta1_db=15.0, eta2_db=15.0, rate=1.0)
    grid = tuple(round(0.05 * k, 2) for k in range(1, 20))
    return SweepSpec(base, Axis.D1, grid, metrics=("outage",), **kw)


def fig2_preset(rho1: float = 1.0, rho2: float = 1.0, num_relays: int = 1,
                **kw) -> SweepSpec:
    """BPSK SER versus SNR: d1 = 0.5, v = 3, eta1 = eta2 = 0 .. 30 dB."""
    base = SystemConfig(num_relays=num_relays, rho1=rho1, rho2=rho2, d1=0.5,
                        pathloss_exp=3.0, eta1_db=0.0, eta2_db=0.0, rate=1.0)
    grid = tuple(float(v) for v in range(0, 31, 2))
    return SweepSpec(base, Axis.ETA1_DB, grid, metrics=("ser",), modulation="BPSK", **kw)


PRESETS = {"fig1": fig1_preset, "fig2": fig2_preset}


# ---------------------------------------------------------------------------
# coefficient table dump
# ---------------------------------------------------------------------------

def dump_table(cfg: SystemConfig) -> str:
    """JSON with every coefficient of the table and term set of ``cfg``."""
    t = order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, cfg.num_relays)
    return table_to_json(t, order_stats.build_term_set(t, cfg.rho1, cfg.rho2),
                         cfg.rho1, cfg.rho2)


def table_to_json(t: order_stats.CoefficientTable, ts: order_stats.TermSet,
                  rho1: float, rho2: float) -> str:
    doc = {
        "R": t.R,
        "sigma1": t.sigma1,
        "sigma2": t.sigma2,
        "rho1": rho1,
        "rho2": rho2,
        "chi": t.chi.tolist(),
        "kappa": t.kappa.tolist(),
        "alpha": t.alpha.tolist(),
        "beta": t.beta.tolist(),
        "binom": list(t.binom),
        "terms": {
            "count": len(ts),
            "index": ts.index.tolist(),
            "weight": ts.weight.tolist(),
            "theta1": ts.theta1.tolist(),
            "theta2": ts.theta2.tolist(),
        },
    }
    # json writes repr(float), the shortest string that round-trips exactly
    return json.dumps(doc, indent=2)


def parse_table(text: str) -> tuple[order_stats.CoefficientTable, order_stats.TermSet]:
    doc = json.loads(text)
    t = order_stats.CoefficientTable(
        R=doc["R"], sigma1=doc["sigma1"], sigma2=doc["sigma2"],
        chi=np.array(doc["chi"]), kappa=np.array(doc["kappa"]),
        alpha=np.array(doc["alpha"]), beta=np.array(doc["beta"]),
        binom=tuple(doc["binom"]))
    terms = doc["terms"]
    ts = order_stats.TermSet(doc["R"], np.array(terms["index"], dtype=int),
                             np.array(terms["weight"]), np.array(terms["theta1"]),
                             np.array(terms["theta2"]))
    return t, ts
