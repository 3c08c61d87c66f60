"""Core domain types and link-level evaluators for the cognitive downlink.

The scenario is an underlay secondary network: a multi-antenna base
station serves K single-antenna secondary users while M single-antenna
primary users occupy the same band.  Channels are flat Rayleigh fading;
the constant interference received from the primary transmitters is
absorbed into the noise term as a fixed power.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "ScenarioConfig",
    "ChannelSet",
    "Precoder",
    "channel_stream",
    "symbol_stream",
    "generate_channels",
    "sinr",
    "sinr_all",
    "sum_rate",
    "pu_interference",
]

DEFAULT_SEED = 12345


@dataclass(frozen=True)
class ScenarioConfig:
    """Experiment parameters for one simulated scenario.

    Attributes
    ----------
    n_su : int
        Number of secondary users K served by the base station.
    n_pu : int
        Number of primary users M sharing the band.
    n_bs : int
        Number of base-station antennas.
    snr_grid_db : tuple of float
        Swept operating ratio in dB.  Each point sets the transmit
        budget `p_bs = noise_power * 10**(snr_db / 10)`; the noise
        power itself stays fixed.
    p_bs : float
        Transmit power budget (linear) used by single-point probes that
        do not sweep the grid.
    i_p_db : float or None
        Constant primary-to-secondary interference power in dB
        (linear value added to the noise). ``None`` disables the term.
    noise_power : float
        Receiver noise power sigma^2 (linear), identical for every user.
    trials : int
        Number of independent channel draws per grid point (for bit
        error runs this is the cap on draws).
    seed : int
        Base seed; every statistic is a pure function of (config, scheme).
    modulation : str
        Symbol alphabet tag; only "4qam" is supported.
    target_bit_errors : int
        Error-count stopping target for bit error rate runs.
    ber_symbols : int
        Symbols transmitted per user per channel draw in bit error runs.
    """

    n_su: int = 5
    n_pu: int = 1
    n_bs: int = 8
    snr_grid_db: Tuple[float, ...] = (-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0)
    p_bs: float = 1.0
    i_p_db: Optional[float] = 0.0
    noise_power: float = 1.0
    trials: int = 2000
    seed: int = DEFAULT_SEED
    modulation: str = "4qam"
    target_bit_errors: int = 500
    ber_symbols: int = 60

    def __post_init__(self):
        if self.n_su < 1:
            raise ValueError(f"n_su must be positive, got {self.n_su}")
        if self.n_pu < 0:
            raise ValueError(f"n_pu must be non-negative, got {self.n_pu}")
        if self.n_bs < 1:
            raise ValueError(f"n_bs must be positive, got {self.n_bs}")
        if self.p_bs <= 0:
            raise ValueError(f"p_bs must be positive, got {self.p_bs}")
        if self.noise_power < 0:
            raise ValueError(f"noise_power must be non-negative, got {self.noise_power}")
        if self.noise_power == 0 and not self.i_p_linear > 0:
            raise ValueError("noise_power and the interference power cannot both be zero")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if self.modulation != "4qam":
            raise ValueError(f"unsupported modulation {self.modulation!r} (only '4qam')")
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))

    @property
    def i_p_linear(self) -> float:
        """Interference power in linear units (0 when disabled)."""
        if self.i_p_db is None:
            return 0.0
        return float(10.0 ** (self.i_p_db / 10.0))

    @property
    def effective_noise(self) -> float:
        return self.noise_power + self.i_p_linear

    def zf_feasible(self) -> bool:
        """Zero forcing needs (M + K - 1) < n_bs, i.e. K <= n_bs - M."""
        return (self.n_pu + self.n_su - 1) < self.n_bs

    def require_zf_feasible(self) -> None:
        if not self.zf_feasible():
            raise ValueError(
                f"infeasible for zero forcing: K={self.n_su} users with M={self.n_pu} "
                f"primaries need K <= n_bs - M = {self.n_bs - self.n_pu}"
            )

    def p_bs_for(self, snr_db: float) -> float:
        """Transmit budget at one grid point: the swept ratio times sigma^2."""
        return self.noise_power * 10.0 ** (snr_db / 10.0)

    def with_(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ChannelSet:
    """One fading realization of every link the base station sees.

    ``h`` is K x n_bs with row k holding the conjugated downlink vector
    of secondary user k, so ``h @ w`` directly evaluates the effective
    complex gains.  ``g`` is M x n_bs, same convention for the primary
    users.  ``pu_interference`` is the constant primary-to-secondary
    interference power folded into the noise.
    """

    h: np.ndarray
    g: np.ndarray
    noise_power: float
    pu_interference: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128)
        g = np.asarray(self.g, dtype=np.complex128)
        if h.ndim != 2 or g.ndim != 2:
            raise ValueError("h and g must be 2-D matrices")
        if g.shape[1] != h.shape[1]:
            raise ValueError(
                f"antenna-count mismatch: h has {h.shape[1]} columns, g has {g.shape[1]}"
            )
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(g))):
            raise ValueError("channel entries must be finite")
        if self.noise_power < 0 or self.pu_interference < 0:
            raise ValueError("noise and interference powers must be non-negative")
        if self.noise_power == 0 and self.pu_interference == 0:
            raise ValueError("noise_power and pu_interference cannot both be zero")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def n_su(self) -> int:
        return self.h.shape[0]

    @property
    def n_pu(self) -> int:
        return self.g.shape[0]

    @property
    def n_bs(self) -> int:
        return self.h.shape[1]

    @property
    def effective_noise(self) -> float:
        return self.noise_power + self.pu_interference


@dataclass(frozen=True)
class Precoder:
    """Beam directions plus per-user powers, assembled into weights.

    ``directions`` is n_bs x K (one beam column per user), ``powers``
    the K nonnegative per-user powers, and ``weights`` the transmitted
    matrix whose column k is sqrt(powers[k]) times directions column k.
    """

    directions: np.ndarray
    powers: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.directions, dtype=np.complex128)
        p = np.asarray(self.powers, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.complex128)
        if t.ndim != 2 or w.shape != t.shape or p.shape != (t.shape[1],):
            raise ValueError("inconsistent precoder dimensions")
        if np.any(p < 0):
            raise ValueError("per-user powers must be non-negative")
        resid = np.max(np.abs(w - t * np.sqrt(p)[None, :])) if t.size else 0.0
        scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
        if resid > 1e-9 * scale:
            raise ValueError("weights do not equal sqrt(power)-scaled directions")
        object.__setattr__(self, "directions", t)
        object.__setattr__(self, "powers", p)
        object.__setattr__(self, "weights", w)

    @classmethod
    def assemble(cls, directions: np.ndarray, powers: Sequence[float]) -> "Precoder":
        t = np.asarray(directions, dtype=np.complex128)
        p = np.asarray(powers, dtype=np.float64)
        if np.any(p < 0):
            raise ValueError("per-user powers must be non-negative")
        return cls(directions=t, powers=p, weights=t * np.sqrt(p)[None, :])

    @property
    def n_su(self) -> int:
        return self.directions.shape[1]

    @property
    def n_bs(self) -> int:
        return self.directions.shape[0]


def channel_stream(seed: int, trial_index: int) -> np.random.Generator:
    """Counter-style generator for the channel draws of one trial.

    The stream is a pure function of (seed, trial_index): the same pair
    yields the same draws no matter in which order, or on how many
    workers, trials are evaluated.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial_index, 0)))


def symbol_stream(seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial stream for payload bits and receiver noise."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial_index, 1)))


def _draw_cn(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian entries, unit variance."""
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)


def generate_channels(cfg: ScenarioConfig, trial_index: int) -> ChannelSet:
    """Draw one fading realization for every link.

    Entries of both matrices are i.i.d. CN(0, 1).  Deterministic given
    (cfg.seed, trial_index).
    """
    rng = channel_stream(cfg.seed, trial_index)
    h = _draw_cn(rng, cfg.n_su, cfg.n_bs)
    g = _draw_cn(rng, cfg.n_pu, cfg.n_bs)
    return ChannelSet(h=h, g=g, noise_power=cfg.noise_power, pu_interference=cfg.i_p_linear)


def _check_dims(ch: ChannelSet, prec: Precoder) -> None:
    if prec.n_bs != ch.n_bs or prec.n_su != ch.n_su:
        raise ValueError(
            f"precoder shape {prec.directions.shape} does not match "
            f"{ch.n_su} users on {ch.n_bs} antennas"
        )


def sinr_all(ch: ChannelSet, prec: Precoder) -> np.ndarray:
    """Per-user SINR vector.

    gamma_k = |h_k w_k|^2 / (sum_{j != k} |h_k w_j|^2 + sigma^2 + I_p)
    """
    _check_dims(ch, prec)
    gains = np.abs(ch.h @ prec.weights) ** 2  # [k, j] = |h_k w_j|^2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (interference + ch.effective_noise)


def sinr(ch: ChannelSet, prec: Precoder, k: int) -> float:
    """SINR of user k (scalar form of :func:`sinr_all`)."""
    if not 0 <= k < ch.n_su:
        raise IndexError(f"user index {k} out of range for K={ch.n_su}")
    return float(sinr_all(ch, prec)[k])


def sum_rate(ch: ChannelSet, prec: Precoder) -> float:
    """Network sum rate in bits/s/Hz: sum_k log2(1 + gamma_k)."""
    return float(np.sum(np.log2(1.0 + sinr_all(ch, prec))))


def pu_interference(ch: ChannelSet, prec: Precoder, m: int) -> float:
    """Total power the precoder leaks onto primary user m."""
    _check_dims(ch, prec)
    if not 0 <= m < ch.n_pu:
        raise IndexError(f"primary index {m} out of range for M={ch.n_pu}")
    return float(np.sum(np.abs(ch.g[m] @ prec.weights) ** 2))
