"""Scenario description and the constants derived from it."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields

from .errors import InvalidInputError
from .specfun import bessel_j0


class GainConvention(str, enum.Enum):
    """Which mean gains enter the fixed relay gain constant ``C``.

    ``SELECTED_RELAY_MEANS`` uses the means of the *selected* relay's
    outdated gains (the constant of the end-to-end SNR that is actually
    analysed); ``PER_RELAY_MEANS`` uses the unconditional hop means.
    """

    SELECTED_RELAY_MEANS = "SelectedRelayMeans"
    PER_RELAY_MEANS = "PerRelayMeans"


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def _finite(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(v):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class SystemConfig:
    """One operating point of the relay network.

    Distances are normalised to the source-to-source distance, so the
    relays sit at ``d1`` from S1 and ``1 - d1`` from S2.
    """

    num_relays: int = 1
    rho1: float = 1.0
    rho2: float = 1.0
    d1: float = 0.5
    pathloss_exp: float = 3.0
    eta1_db: float = 15.0
    eta2_db: float = 15.0
    rate: float = 1.0
    noise_power: float = 1.0
    gain_convention: GainConvention = GainConvention.SELECTED_RELAY_MEANS

    def __post_init__(self):
        nr = self.num_relays
        if isinstance(nr, bool) or not isinstance(nr, (int, float)) or int(nr) != nr or nr < 1:
            raise InvalidInputError(f"num_relays must be an integer >= 1, got {nr!r}")
        object.__setattr__(self, "num_relays", int(nr))
        for name in ("rho1", "rho2", "d1", "pathloss_exp", "eta1_db", "eta2_db",
                     "rate", "noise_power"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        for name in ("rho1", "rho2"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.d1 < 1.0:
            raise InvalidInputError("d1 must lie in the open interval (0, 1)")
        if self.pathloss_exp <= 0:
            raise InvalidInputError("pathloss_exp must be positive")
        if self.rate <= 0:
            raise InvalidInputError("rate must be positive")
        if self.noise_power <= 0:
            raise InvalidInputError("noise_power must be positive")
        try:
            conv = GainConvention(self.gain_convention)
        except ValueError:
            raise InvalidInputError(f"unknown gain convention {self.gain_convention!r}") from None
        object.__setattr__(self, "gain_convention", conv)

    @classmethod
    def from_powers(cls, source_power: float, relay_power: float, noise_power: float,
                    **kwargs) -> "SystemConfig":
        """Build a config from transmit powers instead of SNRs in dB."""
        for name, v in (("source_power", source_power), ("relay_power", relay_power),
                        ("noise_power", noise_power)):
            if not _finite(name, v) > 0:
                raise InvalidInputError(f"{name} must be positive")
        return cls(eta1_db=linear_to_db(source_power / noise_power),
                   eta2_db=linear_to_db(relay_power / noise_power),
                   noise_power=noise_power, **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "SystemConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidInputError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gain_convention"] = self.gain_convention.value
        return d

    def replace(self, **changes) -> "SystemConfig":
        d = asdict(self)
        d.update(changes)
        return SystemConfig(**d)

    @property
    def sigma1(self) -> float:
        return self.d1 ** (-self.pathloss_exp)

    @property
    def sigma2(self) -> float:
        return (1.0 - self.d1) ** (-self.pathloss_exp)


@dataclass(frozen=True)
class DerivedParams:
    sigma1: float
    sigma2: float
    eta1: float
    eta2: float
    C: float
    Psi: float


def derive(cfg: SystemConfig, mean_eq_gain_1: float, mean_eq_gain_2: float) -> DerivedParams:
    """Derived constants for ``cfg``.

    The two means are the ones that enter the relay gain: the selected
    relay's mean outdated gains, or the hop means ``sigma1, sigma2``,
    depending on ``cfg.gain_convention`` (the caller supplies them).
    """
    m1 = _finite("mean_eq_gain_1", mean_eq_gain_1)
    m2 = _finite("mean_eq_gain_2", mean_eq_gain_2)
    if m1 <= 0 or m2 <= 0:
        raise InvalidInputError("mean gains must be positive")
    eta1 = db_to_linear(cfg.eta1_db)
    eta2 = db_to_linear(cfg.eta2_db)
    return DerivedParams(
        sigma1=cfg.sigma1,
        sigma2=cfg.sigma2,
        eta1=eta1,
        eta2=eta2,
        C=eta1 * (m1 + m2) + 1.0,
        Psi=2.0 ** cfg.rate - 1.0,
    )


def correlation_from_doppler(fd_times_t: float) -> float:
    """Correlation ``J0(2 pi fD T)`` of a Jakes-faded channel after delay ``T``."""
    v = _finite("fd_times_t", fd_times_t)
    return bessel_j0(2.0 * math.pi * v)
