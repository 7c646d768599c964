"""Monte-Carlo oracle for the relay network.

Trials are generated in fixed blocks of :data:`BLOCK_TRIALS`.  Block ``b``
of stream ``stream_id`` draws from a Philox4x64 generator keyed on
``(seed, stream_id)`` with its counter starting at ``b << 128``, so a
trial's variates depend only on ``(seed, stream_id, trial index)``.
Gaussians come from numpy's ziggurat sampler.  Per-block sums are
combined with ``math.fsum``, which makes every estimate independent of
how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import DerivedParams, SystemConfig
from .e2e import ModulationKind, ModulationSpec, derived_for
from .errors import InvalidInputError
from .specfun import q_function

BLOCK_TRIALS = 1 << 16
MIN_TRIALS = 10_000
RNG_METHOD = "Philox4x64 counter blocks, ziggurat normals"

_U64 = 1 << 64


@dataclass(frozen=True)
class TrialRng:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < _U64:
                raise InvalidInputError(f"{name} must be an integer in [0, 2^64)")

    def block(self, index: int) -> np.random.Generator:
        """Generator for trial block ``index``."""
        bitgen = np.random.Philox(key=int(self.seed) | (int(self.stream_id) << 64),
                                  counter=int(index) << 128)
        return np.random.Generator(bitgen)


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    num_trials: int
    seed: int
    stream_id: int = 0
    method: str = RNG_METHOD

    def z_score(self, reference: float) -> float:
        """Deviation of ``reference`` from the estimate in standard errors."""
        if self.std_error == 0.0:
            return 0.0 if reference == self.value else math.inf
        return (reference - self.value) / self.std_error


# ---------------------------------------------------------------------------
# channel and selection
# ---------------------------------------------------------------------------

def _complex_pairs(normals: np.ndarray, rho: float, sigma: float):
    scale = math.sqrt(0.5 * sigma)
    g_re, g_im, v_re, v_im = (scale * normals[..., k] for k in range(4))
    inno = math.sqrt(1.0 - rho * rho)
    c_re = rho * g_re + inno * v_re
    c_im = rho * g_im + inno * v_im
    return g_re * g_re + g_im * g_im, c_re * c_re + c_im * c_im


def generate_channel_pair(rho: float, sigma: float, rng: np.random.Generator, size=None):
    """Outdated and current power gains ``(|g|^2, |rho g + sqrt(1-rho^2) v|^2)``.

    ``g`` and ``v`` are independent zero-mean complex Gaussians with
    variance ``sigma``; both returned powers are Exp(mean ``sigma``).
    """
    if not 0.0 <= rho <= 1.0:
        raise InvalidInputError("rho must lie in [0, 1]")
    if not sigma > 0:
        raise InvalidInputError("sigma must be positive")
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    normals = rng.standard_normal(shape + (4,))
    out, cur = _complex_pairs(normals, rho, sigma)
    if size is None:
        return float(out), float(cur)
    return out, cur


def select_relay(outdated1, outdated2) -> np.ndarray:
    """Max-min selection on the outdated gains along the last axis."""
    return np.argmax(np.minimum(outdated1, outdated2), axis=-1)


def e2e_snr(gain1, gain2, eta1: float, eta2: float, C: float):
    return eta1 * eta2 * gain1 * gain2 / (eta2 * gain2 + C)


def run_trial(cfg: SystemConfig, derived: DerivedParams, rng: np.random.Generator) -> float:
    """One network realisation; returns the end-to-end SNR at S2."""
    o1, c1 = generate_channel_pair(cfg.rho1, derived.sigma1, rng, size=cfg.num_relays)
    o2, c2 = generate_channel_pair(cfg.rho2, derived.sigma2, rng, size=cfg.num_relays)
    k = int(select_relay(o1, o2))
    return float(e2e_snr(c1[k], c2[k], derived.eta1, derived.eta2, derived.C))


@dataclass
class SelectedGains:
    """Gains of the selected relay, one entry per trial."""

    outdated1: np.ndarray
    current1: np.ndarray
    outdated2: np.ndarray
    current2: np.ndarray
    snr: np.ndarray


def _simulate_block(cfg: SystemConfig, derived: DerivedParams,
                    rng: np.random.Generator, n: int) -> SelectedGains:
    R = cfg.num_relays
    normals = rng.standard_normal((n, 2, R, 4))
    o1, c1 = _complex_pairs(normals[:, 0], cfg.rho1, derived.sigma1)
    o2, c2 = _complex_pairs(normals[:, 1], cfg.rho2, derived.sigma2)
    k = select_relay(o1, o2)
    rows = np.arange(n)
    g = SelectedGains(o1[rows, k], c1[rows, k], o2[rows, k], c2[rows, k], None)
    g.snr = e2e_snr(g.current1, g.current2, derived.eta1, derived.eta2, derived.C)
    return g


def _blocks(num_trials: int):
    start = 0
    index = 0
    while start < num_trials:
        n = min(BLOCK_TRIALS, num_trials - start)
        yield index, n
        start += n
        index += 1


def _map_blocks(cfg, derived, num_trials, trng: TrialRng,
                stat: Callable[[SelectedGains, np.random.Generator], np.ndarray],
                workers: int = 1) -> np.ndarray:
    """Apply ``stat`` to each block; returns per-block rows of partial sums."""

    def one(block):
        index, n = block
        rng = trng.block(index)
        return np.asarray(stat(_simulate_block(cfg, derived, rng, n), rng), dtype=float)

    blocks = list(_blocks(num_trials))
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, blocks))
    else:
        parts = [one(b) for b in blocks]
    return np.array(parts)


def _fsum_columns(parts: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(parts[:, j]) for j in range(parts.shape[1])])


def _check_trials(num_trials: int) -> int:
    if int(num_trials) != num_trials or num_trials < MIN_TRIALS:
        raise InvalidInputError(f"num_trials must be an integer >= {MIN_TRIALS}")
    return int(num_trials)


def _mean_estimate(values_fn, cfg, derived, num_trials, seed, stream_id, workers):
    """Sample mean of a per-trial quantity with its standard error."""
    num_trials = _check_trials(num_trials)
    derived = derived or derived_for(cfg)
    trng = TrialRng(seed, stream_id)

    def stat(g, rng):
        v = values_fn(g, rng)
        return [v.sum(), (v * v).sum()]

    s, s2 = _fsum_columns(_map_blocks(cfg, derived, num_trials, trng, stat, workers))
    mean = s / num_trials
    var = max(s2 - num_trials * mean * mean, 0.0) / (num_trials - 1)
    return McEstimate(mean, math.sqrt(var / num_trials), num_trials, seed, stream_id)


def estimate_outage(cfg: SystemConfig, Psi: float, num_trials: int, seed: int,
                    stream_id: int = 0, derived: DerivedParams | None = None,
                    workers: int = 1) -> McEstimate:
    """Fraction of trials with end-to-end SNR below ``Psi``; binomial standard error."""
    num_trials = _check_trials(num_trials)
    derived = derived or derived_for(cfg)
    trng = TrialRng(seed, stream_id)
    parts = _map_blocks(cfg, derived, num_trials, trng,
                        lambda g, rng: [np.count_nonzero(g.snr < Psi)], workers)
    p = math.fsum(parts[:, 0]) / num_trials
    return McEstimate(p, math.sqrt(p * (1.0 - p) / num_trials), num_trials, seed, stream_id)


def conditional_ser(mod: ModulationSpec, snr):
    """Symbol error rate conditioned on the instantaneous SNR."""
    if mod.kind is ModulationKind.COHERENT:
        return mod.a * q_function(np.sqrt(mod.b * np.asarray(snr)))
    return mod.a * np.exp(-mod.b * np.asarray(snr))


def estimate_ser(cfg: SystemConfig, mod: ModulationSpec, num_trials: int, seed: int,
                 stream_id: int = 0, derived: DerivedParams | None = None,
                 workers: int = 1) -> McEstimate:
    """Semi-analytic SER: average of the conditional error rate over trials."""
    return _mean_estimate(lambda g, rng: conditional_ser(mod, g.snr),
                          cfg, derived, num_trials, seed, stream_id, workers)


def estimate_ser_symbol_level(cfg: SystemConfig, num_trials: int, seed: int,
                              stream_id: int = 0, derived: DerivedParams | None = None,
                              workers: int = 1) -> McEstimate:
    """BPSK symbol errors counted with one noisy symbol per trial (slow path)."""

    def errors(g, rng):
        n = len(g.snr)
        symbols = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        # unit-power complex noise: real part has variance 1/2
        noise = math.sqrt(0.5) * rng.standard_normal(n)
        received = np.sqrt(g.snr) * symbols + noise
        return (np.sign(received) != symbols).astype(float)

    return _mean_estimate(errors, cfg, derived, num_trials, seed, stream_id, workers)


def estimate_mgf(cfg: SystemConfig, s: float, num_trials: int, seed: int,
                 stream_id: int = 0, derived: DerivedParams | None = None,
                 workers: int = 1) -> McEstimate:
    """Sample mean of ``exp(-s SNR)``."""
    if not s > 0:
        raise InvalidInputError("s must be positive")
    return _mean_estimate(lambda g, rng: np.exp(-s * g.snr),
                          cfg, derived, num_trials, seed, stream_id, workers)


GAIN_NAMES = ("outdated1", "outdated2", "current1", "current2")


def estimate_eq_gain_stats(cfg: SystemConfig, num_trials: int, seed: int,
                           abscissae=(), stream_id: int = 0,
                           derived: DerivedParams | None = None,
                           workers: int = 1) -> dict[str, dict]:
    """Means and empirical CDFs of the selected relay's four gains.

    Returns ``{name: {"mean": McEstimate, "cdf": [McEstimate, ...]}}`` for
    ``name`` in :data:`GAIN_NAMES`, the CDF evaluated at ``abscissae``.
    """
    num_trials = _check_trials(num_trials)
    derived = derived or derived_for(cfg)
    xs = np.asarray(abscissae, dtype=float).reshape(-1)
    trng = TrialRng(seed, stream_id)

    def stat(g, rng):
        row = []
        for name in GAIN_NAMES:
            v = getattr(g, name)
            row += [v.sum(), (v * v).sum()]
            row += [np.count_nonzero(v < x) for x in xs]
        return row

    sums = _fsum_columns(_map_blocks(cfg, derived, num_trials, trng, stat, workers))
    out = {}
    width = 2 + len(xs)
    for k, name in enumerate(GAIN_NAMES):
        s, s2, *counts = sums[k * width:(k + 1) * width]
        mean = s / num_trials
        var = max(s2 - num_trials * mean * mean, 0.0) / (num_trials - 1)
        cdf = []
        for c in counts:
            p = c / num_trials
            cdf.append(McEstimate(p, math.sqrt(p * (1 - p) / num_trials),
                                  num_trials, seed, stream_id))
        out[name] = {"mean": McEstimate(mean, math.sqrt(var / num_trials),
                                        num_trials, seed, stream_id),
                     "cdf": cdf}
    return out


def sample_selected_gains(cfg: SystemConfig, num_trials: int, seed: int,
                          stream_id: int = 0,
                          derived: DerivedParams | None = None) -> SelectedGains:
    """Raw per-trial gains and SNR, for histogram-style checks."""
    if int(num_trials) != num_trials or num_trials < 1:
        raise InvalidInputError("num_trials must be a positive integer")
    derived = derived or derived_for(cfg)
    trng = TrialRng(seed, stream_id)
    parts = [_simulate_block(cfg, derived, trng.block(i), n) for i, n in _blocks(int(num_trials))]
    return SelectedGains(*(np.concatenate([getattr(p, f) for p in parts])
                           for f in ("outdated1", "current1", "outdated2", "current2", "snr")))
