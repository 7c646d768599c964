"""End-to-end SNR statistics at S2 and the metrics built on them.

The CDF of the end-to-end SNR is a weighted sum of terms

    1 - exp(-theta1 phi / eta1) g(theta1 theta2 C phi / (eta1 eta2)),
    g(z) = 2 sqrt(z) K1(2 sqrt(z)),

over the term set of :mod:`outdated_relay.order_stats`.  MGF and SER
reduce to the integral ``S(c1, c2, c3) = c1 int x^c2 e^(-c3 x) F(x) dx``,
which is available in closed form (Gamma and Meijer-G) and by quadrature.

Metrics at S1 follow by swapping the hop indices, see :func:`swap_hops`.

The MGF here is the Laplace transform ``E[exp(-s SNR)]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import order_stats
from .config import DerivedParams, GainConvention, SystemConfig, derive
from .errors import InvalidInputError, NonConvergenceError
from .order_stats import TermSet
from .specfun import (
    QuadratureSpec,
    Transform,
    gamma_fn,
    integrate_semi_infinite,
    meijer_g2112,
    meijer_g2112_remainder,
    xk1_scaled_pair,
)

CDF_CLAMP_TOL = 1e-9


class ModulationKind(str, enum.Enum):
    COHERENT = "Coherent"
    NON_COHERENT = "NonCoherent"


@dataclass(frozen=True)
class ModulationSpec:
    """One-dimensional modulation with conditional SER ``a Q(sqrt(b snr))``
    (coherent) or ``a exp(-b snr)`` (non-coherent)."""

    kind: ModulationKind
    a: float
    b: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ModulationKind(self.kind))
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a > 0 and self.b > 0):
            raise InvalidInputError("modulation constants a, b must be positive")

    @property
    def zero_snr_limit(self) -> float:
        return self.a / 2 if self.kind is ModulationKind.COHERENT else self.a


def m_pam(M: int) -> ModulationSpec:
    if int(M) != M or M < 2:
        raise InvalidInputError("M-PAM needs an integer M >= 2")
    M = int(M)
    return ModulationSpec(ModulationKind.COHERENT, 2 * (M - 1) / M,
                          6 * math.log2(M) / (M * M - 1), f"{M}-PAM")


MODULATIONS = {
    "BPSK": ModulationSpec(ModulationKind.COHERENT, 1.0, 2.0, "BPSK"),
    "BFSK": ModulationSpec(ModulationKind.COHERENT, 1.0, 1.0, "BFSK"),
    "DBPSK": ModulationSpec(ModulationKind.NON_COHERENT, 0.5, 1.0, "DBPSK"),
    "NCBFSK": ModulationSpec(ModulationKind.NON_COHERENT, 0.5, 0.5, "NCBFSK"),
}


def modulation(name: str) -> ModulationSpec:
    """Look up a preset by name; ``"<M>-PAM"`` is accepted for any M."""
    key = name.strip().upper()
    if key in MODULATIONS:
        return MODULATIONS[key]
    if key.endswith("-PAM"):
        try:
            return m_pam(int(key[:-4]))
        except ValueError:
            pass
    raise InvalidInputError(f"unknown modulation {name!r}")


@dataclass(frozen=True)
class E2eModel:
    terms: TermSet
    C: float
    eta1: float
    eta2: float

    def __post_init__(self):
        if not (self.C > 0 and self.eta1 > 0 and self.eta2 > 0):
            raise InvalidInputError("C, eta1 and eta2 must be positive")

    @property
    def exp_rate(self) -> np.ndarray:
        """Per-term rate of ``exp(-rate phi)``."""
        return self.terms.theta1 / self.eta1

    @property
    def bessel_rate(self) -> np.ndarray:
        """Per-term ``theta = theta1 theta2 C / (eta1 eta2)``."""
        t = self.terms
        return t.theta1 * t.theta2 * self.C / (self.eta1 * self.eta2)


def swap_hops(cfg: SystemConfig) -> SystemConfig:
    """The configuration seen from S1: hop indices 1 and 2 interchanged."""
    return cfg.replace(d1=1.0 - cfg.d1, rho1=cfg.rho2, rho2=cfg.rho1,
                       eta1_db=cfg.eta2_db, eta2_db=cfg.eta1_db)


def derived_for(cfg: SystemConfig,
                table: order_stats.CoefficientTable | None = None) -> DerivedParams:
    """Derived constants with the means required by ``cfg.gain_convention``."""
    if table is None:
        table = order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, cfg.num_relays)
    if cfg.gain_convention is GainConvention.SELECTED_RELAY_MEANS:
        m1 = order_stats.mean_outdated_eq(1, table)
        m2 = order_stats.mean_outdated_eq(2, table)
    else:
        m1, m2 = cfg.sigma1, cfg.sigma2
    return derive(cfg, m1, m2)


def build_model(cfg: SystemConfig) -> tuple[DerivedParams, E2eModel]:
    """Derived constants and the analytic model for one configuration."""
    table = order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, cfg.num_relays)
    derived = derived_for(cfg, table)
    terms = order_stats.build_term_set(table, cfg.rho1, cfg.rho2)
    return derived, E2eModel(terms, derived.C, derived.eta1, derived.eta2)


def _cdf_terms(model: E2eModel, phi: np.ndarray) -> np.ndarray:
    """Weighted CDF sum, evaluated in the better-conditioned of two forms.

    Below one half the sum of brackets ``1 - exp(-c) g(z)`` avoids
    cancellation at small phi; above it the survival form
    ``1 - sum X_F exp(-c) g(z)`` keeps the upper tail free of per-term
    rounding, so the result stays nondecreasing near 1.
    """
    c = np.multiply.outer(phi, model.exp_rate)
    z = np.multiply.outer(phi, model.bessel_rate)
    g, one_minus_g = xk1_scaled_pair(z)
    w = model.terms.weight
    low = (one_minus_g - g * np.expm1(-c)) @ w
    high = 1.0 - (np.exp(-c) * g) @ w
    return np.where(low > 0.5, high, low)


def cdf_e2e(model: E2eModel, phi):
    """CDF of the end-to-end SNR at ``phi`` (scalar or array, ``phi >= 0``)."""
    p = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidInputError("phi must be finite and >= 0")
    flat = p.reshape(-1)
    out = _cdf_terms(model, flat)
    if np.any(out < -CDF_CLAMP_TOL) or np.any(out > 1.0 + CDF_CLAMP_TOL):
        bad = flat[(out < -CDF_CLAMP_TOL) | (out > 1.0 + CDF_CLAMP_TOL)][0]
        raise NonConvergenceError(f"CDF left [0, 1] beyond tolerance at phi={bad!r}")
    out = np.clip(out, 0.0, 1.0).reshape(p.shape)
    return float(out) if out.ndim == 0 else out


def outage(model: E2eModel, Psi: float) -> float:
    """Outage probability for threshold ``Psi = 2^rate - 1``."""
    if not (math.isfinite(Psi) and Psi >= 0):
        raise InvalidInputError("Psi must be finite and >= 0")
    return cdf_e2e(model, float(Psi))


def pdf_e2e_numeric(model: E2eModel, phi: float, h: float = 1e-5) -> float:
    """Central-difference density of the end-to-end SNR; O(h^2) accurate.

    ``h`` is relative to ``phi`` and is shrunk below ``phi / 2`` when needed
    so the stencil stays in the support.
    """
    if not (math.isfinite(phi) and phi > 0):
        raise InvalidInputError("phi must be positive")
    if not h > 0:
        raise InvalidInputError("step must be positive")
    step = min(h * max(phi, 1.0), 0.5 * phi)
    hi, lo = cdf_e2e(model, np.array([phi + step, phi - step]))
    return (hi - lo) / (2.0 * step)


def _check_s_args(c2: float, c3: float) -> None:
    if not (math.isfinite(c2) and c2 > -1):
        raise InvalidInputError("c2 must exceed -1")
    if not (math.isfinite(c3) and c3 > 0):
        raise InvalidInputError("c3 must be positive")


def s_integral_closed(model: E2eModel, c1: float, c2: float, c3: float) -> float:
    """``S(c1, c2, c3)`` from the Gamma / Meijer-G closed form.

    Per term, with ``p = c3 + theta1/eta1`` and ``theta`` the Bessel rate,
    the bracket ``c3^(-k) Gamma(k) - theta^(-k) G(theta/p)`` (``k = c2+1``)
    is rearranged for ``theta/p < 1`` as
    ``Gamma(k) (c3^-k - p^-k) - theta^-k [G - Gamma(k) (theta/p)^k]`` so that
    the two nearly equal leading parts cancel analytically.
    """
    _check_s_args(c2, c3)
    k = c2 + 1.0
    gk = gamma_fn(k)
    parts = []
    for x_f, a, theta in zip(model.terms.weight, model.exp_rate, model.bessel_rate):
        if x_f == 0.0:
            continue
        p = c3 + a
        w = theta / p
        if w < 1.0:
            lead = -gk * c3 ** (-k) * math.expm1(-k * math.log1p(a / c3))
            term = lead - theta ** (-k) * meijer_g2112_remainder(w, c2)
        else:
            term = c3 ** (-k) * gk - theta ** (-k) * meijer_g2112(w, c2)
        parts.append(x_f * term)
    return c1 * math.fsum(parts)


def s_integral_quadrature(model: E2eModel, c1: float, c2: float, c3: float,
                          rel_tol: float = 1e-10) -> float:
    """``S(c1, c2, c3)`` by adaptive quadrature of the CDF."""
    _check_s_args(c2, c3)
    spec = QuadratureSpec(rel_tol=rel_tol, abs_tol=1e-300, max_subdivisions=2000,
                          transform=Transform.EXP_TAIL, scale=1.0 / c3,
                          sqrt_singularity=c2 < 0)

    def integrand(x):
        with np.errstate(under="ignore"):
            return x ** c2 * np.exp(-c3 * x) * cdf_e2e(model, x)

    return c1 * integrate_semi_infinite(integrand, spec)


def _s_integral(model, c1, c2, c3, method: str) -> float:
    if method == "closed":
        return s_integral_closed(model, c1, c2, c3)
    if method == "quadrature":
        return s_integral_quadrature(model, c1, c2, c3)
    raise InvalidInputError(f"unknown method {method!r}")


def mgf(model: E2eModel, s: float, method: str = "closed") -> float:
    """``E[exp(-s SNR)]`` for ``s > 0``."""
    if not (math.isfinite(s) and s > 0):
        raise InvalidInputError("s must be positive")
    return _s_integral(model, s, 0.0, s, method)


def ser(model: E2eModel, mod: ModulationSpec, method: str = "closed") -> float:
    """Average symbol error rate for a one-dimensional modulation."""
    if mod.kind is ModulationKind.NON_COHERENT:
        return _s_integral(model, mod.a * mod.b, 0.0, mod.b, method)
    c1 = 0.5 * mod.a * math.sqrt(mod.b / (2.0 * math.pi))
    return _s_integral(model, c1, -0.5, 0.5 * mod.b, method)
