"""Self-check suite: invariants, oracle reductions and analytic-vs-MC agreement."""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import e2e, mcsim, order_stats
from .config import SystemConfig
from .errors import InvalidInputError

FAULTS = ("flip-alpha",)

R_GRID = (1, 2, 3, 4, 5)
RHO_GRID = (0.0, 0.2, 0.5, 0.9, 1.0)
D1_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass
class CheckResult:
    name: str
    tolerance: float
    deviation: float
    passed: bool
    runtime_s: float
    detail: str = ""

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)
    fault: str | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "fault": self.fault,
                           "checks": [c.as_dict() for c in self.checks]}, indent=2)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            verdict = "PASS" if c.passed else "FAIL"
            lines.append(f"{verdict} {c.name}: deviation {c.deviation:.3g} "
                         f"(tol {c.tolerance:.3g}, {c.runtime_s:.2f} s) {c.detail}".rstrip())
        return "\n".join(lines)


def _inject(table: order_stats.CoefficientTable, fault: str | None):
    if fault is None:
        return table
    alpha = table.alpha.copy()
    alpha[0, 1, 0] = -alpha[0, 1, 0]
    return dataclasses.replace(table, alpha=alpha)


def _grid_tables(fault):
    for R, d1 in itertools.product(R_GRID, D1_GRID):
        cfg = SystemConfig(num_relays=R, d1=d1, pathloss_exp=3.0)
        yield cfg, _inject(order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, R), fault)


def _model(cfg: SystemConfig, fault):
    table = _inject(order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, cfg.num_relays),
                    fault)
    derived = e2e.derived_for(cfg, table)
    terms = order_stats.build_term_set(table, cfg.rho1, cfg.rho2)
    return derived, e2e.E2eModel(terms, derived.C, derived.eta1, derived.eta2)


# -- individual checks; each returns (deviation, detail) -------------------

def _term_weight_sum(fault):
    worst, where = 0.0, ""
    for cfg, table in _grid_tables(fault):
        for r1, r2 in itertools.product(RHO_GRID, RHO_GRID):
            ts = order_stats.build_term_set(table, r1, r2)
            dev = abs(math.fsum(ts.weight) - 1.0)
            if dev > worst:
                worst, where = dev, f"R={cfg.num_relays} d1={cfg.d1} rho=({r1},{r2})"
    return worst, where


def _marginal_normalization(fault):
    worst = 0.0
    for _, table in _grid_tables(fault):
        for q in (1, 2):
            worst = max(worst, *(abs(v) for v in table.normalization_residuals(q)))
    return worst, ""


def _cdf_validity(fault):
    phi = np.concatenate([[0.0], np.logspace(-6, 6, 200)])
    worst, where = 0.0, ""
    for R, d1, rho in itertools.product((1, 2, 3), (0.1, 0.5, 0.9), (0.0, 0.5, 1.0)):
        cfg = SystemConfig(num_relays=R, d1=d1, rho1=rho, rho2=rho)
        _, model = _model(cfg, fault)
        try:
            f = e2e.cdf_e2e(model, phi)
        except ArithmeticError:
            return math.inf, f"R={R} d1={d1} rho={rho}: CDF left [0, 1]"
        dev = max(abs(f[0]), abs(1.0 - f[-1]), float(np.max(np.maximum(-np.diff(f), 0.0))))
        if dev > worst:
            worst, where = dev, f"R={R} d1={d1} rho={rho}"
    return worst, where


def _closed_vs_quadrature(fault):
    worst = 0.0
    for R, rho, c2, c3 in ((1, 1.0, 0.0, 1.0), (2, 0.9, -0.5, 1.0), (3, 0.5, 0.0, 0.1),
                           (2, 0.5, -0.5, 10.0)):
        _, model = _model(SystemConfig(num_relays=R, rho1=rho, rho2=rho), fault)
        a = e2e.s_integral_closed(model, 1.0, c2, c3)
        b = e2e.s_integral_quadrature(model, 1.0, c2, c3)
        worst = max(worst, abs(a - b) / abs(b))
    return worst, ""


def _current_gain_reductions(fault):
    x = np.logspace(-3, 2, 40)
    worst = 0.0
    for cfg, table in _grid_tables(fault):
        for q in (1, 2):
            sigma = table.sigma[q - 1]
            worst = max(worst,
                        float(np.max(np.abs(order_stats.cdf_current_eq(q, x, table, 0.0)
                                            + np.expm1(-x / sigma)))),
                        float(np.max(np.abs(order_stats.cdf_current_eq(q, x, table, 1.0)
                                            - order_stats.cdf_outdated_eq(q, x, table)))))
    return worst, ""


def _mean_two_relays(fault):
    table = _inject(order_stats.build_coefficient_table(1.0, 1.0, 2), fault)
    return abs(order_stats.mean_outdated_eq(1, table) - 1.25), ""


def _mgf_limits(fault):
    _, model = _model(SystemConfig(num_relays=2, rho1=0.9, rho2=0.9), fault)
    dev = abs(e2e.mgf(model, 1e-6) - 1.0)
    vals = [e2e.mgf(model, s) for s in (0.1, 0.5, 1.0, 2.0, 5.0)]
    if any(b >= a for a, b in zip(vals, vals[1:])):
        return math.inf, "not strictly decreasing"
    return dev, ""


def _mc_outage(cfg: SystemConfig, trials: int, seed: int, fault):
    def check():
        derived, model = _model(cfg, fault)
        est = mcsim.estimate_outage(cfg, derived.Psi, trials, seed, derived=derived)
        an = e2e.outage(model, derived.Psi)
        return abs(est.z_score(an)), f"analytic {an:.6g}, MC {est.value:.6g} +- {est.std_error:.2g}"
    return check


def _mc_ser(cfg: SystemConfig, name: str, trials: int, seed: int, fault):
    def check():
        derived, model = _model(cfg, fault)
        mod = e2e.modulation(name)
        est = mcsim.estimate_ser(cfg, mod, trials, seed, derived=derived)
        an = e2e.ser(model, mod)
        return abs(est.z_score(an)), f"analytic {an:.6g}, MC {est.value:.6g} +- {est.std_error:.2g}"
    return check


def run_validation(fault: str | None = None, mc_trials: int = 200_000,
                   seed: int = 2024) -> ValidationReport:
    """Run every check and report deviation, tolerance, verdict and runtime.

    ``fault="flip-alpha"`` negates one mixture coefficient before any
    downstream quantity is built, to confirm the suite notices.
    """
    if fault is not None and fault not in FAULTS:
        raise InvalidInputError(f"unknown fault {fault!r}; choose from {FAULTS}")
    if int(mc_trials) != mc_trials or mc_trials < mcsim.MIN_TRIALS:
        raise InvalidInputError(f"mc_trials must be an integer >= {mcsim.MIN_TRIALS}")
    mc_trials = int(mc_trials)

    fig1 = SystemConfig(num_relays=2, rho1=0.9, rho2=0.9, d1=0.5, pathloss_exp=3.0,
                        eta1_db=15.0, eta2_db=15.0)
    checks: list[tuple[str, float, Callable]] = [
        ("term_weight_sum", 1e-10, lambda: _term_weight_sum(fault)),
        ("marginal_normalization", 1e-12, lambda: _marginal_normalization(fault)),
        ("cdf_validity", 1e-12, lambda: _cdf_validity(fault)),
        ("closed_vs_quadrature", 1e-6, lambda: _closed_vs_quadrature(fault)),
        ("current_gain_reductions", 1e-12, lambda: _current_gain_reductions(fault)),
        ("mean_two_relays", 1e-12, lambda: _mean_two_relays(fault)),
        ("mgf_limits", 1e-4, lambda: _mgf_limits(fault)),
        ("mc_outage_single_relay", 4.0,
         _mc_outage(fig1.replace(num_relays=1), mc_trials, seed, fault)),
        ("mc_outage_uncorrelated", 4.0,
         _mc_outage(fig1.replace(rho1=0.0, rho2=0.0), mc_trials, seed, fault)),
        ("mc_outage_fig1_point", 4.0, _mc_outage(fig1, mc_trials, seed, fault)),
        ("mc_ser_bpsk_single_relay", 4.0,
         _mc_ser(fig1.replace(num_relays=1), "BPSK", mc_trials, seed, fault)),
    ]
    report = ValidationReport(fault=fault)
    for name, tol, fn in checks:
        start = time.perf_counter()
        try:
            dev, detail = fn()
        except (InvalidInputError, ArithmeticError) as exc:
            dev, detail = math.inf, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        passed = bool(math.isfinite(dev) and dev <= tol)
        report.checks.append(CheckResult(name, tol, float(dev), passed, elapsed, detail))
    return report
