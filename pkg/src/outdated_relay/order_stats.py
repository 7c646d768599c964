"""Statistics of the gains of the relay chosen by max-min selection.

The selected relay ``k`` maximises ``min(g1_out[i], g2_out[i])`` over the
*outdated* hop power gains.  This module gives the distribution of the
selected relay's outdated gains and of its current (data-phase) gains,
and the flattened four-index term list the end-to-end CDF is built from.

Every distribution is a finite exponential mixture

    F(x) = sum_{i, j} w_{q,j,i} (1 - exp(-rate_{q,j,i} x)),
    w_{q,j,i} = R C(R-1, i) (-1)^(i+1) alpha_{q,j,i},   j in {2, 3}

with ``rate = beta`` for outdated gains and
``rate = beta / (nu_bar beta + rho^2)``, ``nu_bar = (1 - rho^2) sigma``,
for current gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .specfun import bessel_i0e

MAX_RELAYS = 64


def _check_hop(q: int) -> int:
    if q not in (1, 2):
        raise InvalidInputError(f"hop index must be 1 or 2, got {q!r}")
    return q - 1


def _check_rho(rho: float, allow_one: bool = True) -> float:
    rho = float(rho)
    if not np.isfinite(rho) or rho < 0.0 or rho > 1.0:
        raise InvalidInputError(f"correlation must lie in [0, 1], got {rho!r}")
    if not allow_one and rho == 1.0:
        raise InvalidInputError("joint density is degenerate at rho = 1")
    return rho


def _check_arg(x, name: str) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)) or np.any(xa < 0):
        raise InvalidInputError(f"{name} must be finite and >= 0")
    return xa


@dataclass(frozen=True)
class CoefficientTable:
    """Constants of the selected-relay outdated-gain distributions.

    Arrays are indexed ``[hop, i]`` with ``hop = q - 1``; ``alpha`` and
    ``beta`` carry a middle axis for ``j = 1, 2, 3`` (stored at 0, 1, 2).
    """

    R: int
    sigma1: float
    sigma2: float
    chi: np.ndarray          # (R,)
    kappa: np.ndarray        # (2, 2, R): [hop, kappa index 1|2, i]
    alpha: np.ndarray        # (2, 3, R)
    beta: np.ndarray         # (2, 3, R)
    binom: tuple[int, ...]   # C(R-1, i), exact

    @property
    def sigma(self) -> tuple[float, float]:
        return (self.sigma1, self.sigma2)

    def mixture_weights(self, q: int) -> np.ndarray:
        """``w_{q,j,i}`` for ``j in {2, 3}`` as a ``(2, R)`` array."""
        h = _check_hop(q)
        sign = np.array([(-1.0) ** (i + 1) for i in range(self.R)])
        scale = self.R * np.array(self.binom, dtype=float) * sign
        return scale * self.alpha[h, 1:, :]

    def normalization_residuals(self, q: int) -> tuple[float, float]:
        """Deviation of the pdf mass from 1 and of the CDF at 0 from 0."""
        h = _check_hop(q)
        mass = []
        at_zero = []
        for i in range(self.R):
            c = self.R * self.binom[i]
            mass.append(c * (-1) ** (i + 1) * math.fsum(self.alpha[h, 1:, i]))
            at_zero.append(c * (-1) ** i * math.fsum(self.alpha[h, :, i]))
        return math.fsum(mass) - 1.0, math.fsum(at_zero)


def build_coefficient_table(sigma1: float, sigma2: float, R: int) -> CoefficientTable:
    """Coefficient table for ``R`` i.i.d. relays with hop means ``sigma1, sigma2``."""
    if int(R) != R or R < 1:
        raise InvalidInputError(f"relay count must be a positive integer, got {R!r}")
    R = int(R)
    if R > MAX_RELAYS:
        raise InvalidInputError(f"relay count above {MAX_RELAYS} loses precision in alternating sums")
    s = (float(sigma1), float(sigma2))
    if not all(np.isfinite(v) and v > 0 for v in s):
        raise InvalidInputError("hop means must be finite and positive")

    chi = np.array([(i + 1) / s[0] + (i + 1) / s[1] for i in range(R)])
    kappa = np.empty((2, 2, R))
    alpha = np.empty((2, 3, R))
    beta = np.empty((2, 3, R))
    for h in range(2):
        own, other = s[h], s[1 - h]
        for i in range(R):
            gap = (i + 1) / other + i / own  # chi_i - 1/own, kept positive
            k1 = 1.0 / (other * gap)
            k2 = (1.0 / (own * other * gap) - 1.0 / own) / chi[i]
            kappa[h, :, i] = (k1, k2)
            alpha[h, :, i] = (k1 - k2, -k1, k2)
            beta[h, :, i] = (0.0, 1.0 / own, chi[i])
    binom = tuple(math.comb(R - 1, i) for i in range(R))
    return CoefficientTable(R, s[0], s[1], chi, kappa, alpha, beta, binom)


def cdf_outdated_eq(q: int, phi, t: CoefficientTable):
    """CDF of the selected relay's outdated hop-``q`` gain."""
    h = _check_hop(q)
    x = _check_arg(phi, "phi")
    w = t.mixture_weights(q).ravel()
    rate = t.beta[h, 1:, :].ravel()
    out = -np.expm1(-np.multiply.outer(x, rate)) @ w
    return float(out) if np.ndim(phi) == 0 else out


def pdf_outdated_eq(q: int, phi, t: CoefficientTable):
    """Density of the selected relay's outdated hop-``q`` gain."""
    h = _check_hop(q)
    x = _check_arg(phi, "phi")
    w = t.mixture_weights(q).ravel()
    rate = t.beta[h, 1:, :].ravel()
    out = np.exp(-np.multiply.outer(x, rate)) @ (w * rate)
    return float(out) if np.ndim(phi) == 0 else out


def mean_outdated_eq(q: int, t: CoefficientTable) -> float:
    """Mean of the selected relay's outdated hop-``q`` gain."""
    h = _check_hop(q)
    w = t.mixture_weights(q)
    return math.fsum((w / t.beta[h, 1:, :]).ravel())


def current_rates(q: int, t: CoefficientTable, rho: float) -> np.ndarray:
    """Exponential rates of the current-gain mixture, shape ``(2, R)``.

    Uses ``beta / (nu_bar beta + rho^2)`` so ``rho = 1`` is a regular point.
    """
    h = _check_hop(q)
    rho = _check_rho(rho)
    nu_bar = (1.0 - rho * rho) * t.sigma[h]
    b = t.beta[h, 1:, :]
    return b / (nu_bar * b + rho * rho)


def pdf_current_eq(q: int, x, t: CoefficientTable, rho: float):
    """Density of the selected relay's current (data-phase) hop-``q`` gain."""
    xa = _check_arg(x, "x")
    w = t.mixture_weights(q).ravel()
    rate = current_rates(q, t, rho).ravel()
    out = np.exp(-np.multiply.outer(xa, rate)) @ (w * rate)
    return float(out) if np.ndim(x) == 0 else out


def cdf_current_eq(q: int, x, t: CoefficientTable, rho: float):
    """CDF of the selected relay's current (data-phase) hop-``q`` gain."""
    xa = _check_arg(x, "x")
    w = t.mixture_weights(q).ravel()
    rate = current_rates(q, t, rho).ravel()
    out = -np.expm1(-np.multiply.outer(xa, rate)) @ w
    return float(out) if np.ndim(x) == 0 else out


def joint_pdf_eq(q: int, y, x, t: CoefficientTable, rho: float):
    """Joint density of the selected relay's (outdated ``y``, current ``x``) hop-``q`` gains.

    Requires ``rho < 1``.  ``y`` and ``x`` broadcast against each other.
    """
    h = _check_hop(q)
    rho = _check_rho(rho, allow_one=False)
    ya = _check_arg(y, "y")
    xa = _check_arg(x, "x")
    ya, xa = np.broadcast_arrays(ya, xa)
    nu = 1.0 / ((1.0 - rho * rho) * t.sigma[h])
    w = t.mixture_weights(q).ravel()
    b = t.beta[h, 1:, :].ravel()
    arg = 2.0 * rho * nu * np.sqrt(xa * ya)
    i0e = np.asarray(bessel_i0e(arg))
    # exp(-nu x - (b + rho^2 nu) y) I0(arg) = i0e(arg) exp(arg - ...)
    expo = (arg - nu * xa)[..., None] - np.multiply.outer(ya, b + rho * rho * nu)
    dens = (np.exp(expo) @ (w * b)) * nu * i0e
    return float(dens) if dens.ndim == 0 else dens


@dataclass(frozen=True)
class TermSet:
    """Flattened four-index sum of the end-to-end CDF.

    Term ``F = (i1, j1, i2, j2)`` with ``j in {2, 3}`` has weight
    ``weight[F]`` and exponents ``theta1[F]``, ``theta2[F]``.  Zero-weight
    terms are kept so the length is always ``(2R)^2``.
    """

    R: int
    index: np.ndarray   # (T, 4) integer array of (i1, j1, i2, j2)
    weight: np.ndarray  # (T,)
    theta1: np.ndarray  # (T,)
    theta2: np.ndarray  # (T,)

    def __len__(self) -> int:
        return len(self.weight)


def build_term_set(t: CoefficientTable, rho1: float, rho2: float) -> TermSet:
    w1 = t.mixture_weights(1)
    w2 = t.mixture_weights(2)
    th1 = current_rates(1, t, rho1)
    th2 = current_rates(2, t, rho2)
    R = t.R
    index = []
    weight = []
    theta1 = []
    theta2 = []
    for i1 in range(R):
        for j1 in (2, 3):
            for i2 in range(R):
                for j2 in (2, 3):
                    index.append((i1, j1, i2, j2))
                    weight.append(w1[j1 - 2, i1] * w2[j2 - 2, i2])
                    theta1.append(th1[j1 - 2, i1])
                    theta2.append(th2[j2 - 2, i2])
    return TermSet(R, np.array(index, dtype=int), np.array(weight),
                   np.array(theta1), np.array(theta2))
