"""Monte-Carlo experiments: ergodic capacity, bit error rate, user-count sweeps.

Trials are independent work items keyed by (seed, trial_index); results
are folded in trial order, so running them on several workers yields
bit-identical statistics to a sequential run.  Channel draws are shared
across schemes and across grid points (common random numbers), which
turns every scheme comparison into a paired comparison.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from .model import (
    ChannelSet,
    Precoder,
    ScenarioConfig,
    channel_stream,
    generate_channels,
    sum_rate,
    symbol_stream,
    _draw_cn,
)
from .precoders import SCHEMES, waterfill, zf_directions

__all__ = [
    "CapacityCurve",
    "BerCurve",
    "UserCountPoint",
    "run_capacity",
    "run_ber",
    "optimal_user_count",
]

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class CapacityCurve:
    """Per-SNR mean sum rate with its standard error."""

    snr_db: np.ndarray
    mean_rate: np.ndarray
    std_err: np.ndarray
    trials: int
    scheme: str
    scenario: ScenarioConfig

    def __post_init__(self):
        if not (len(self.snr_db) == len(self.mean_rate) == len(self.std_err)):
            raise ValueError("curve vectors must share length")
        if np.any(self.std_err < 0) or self.trials < 1:
            raise ValueError("invalid curve statistics")


@dataclass(frozen=True)
class BerCurve:
    """Per-SNR bit error rate with the number of bits behind each point."""

    snr_db: np.ndarray
    ber: np.ndarray
    bits_simulated: np.ndarray
    scheme: str
    scenario: ScenarioConfig

    def __post_init__(self):
        if not (len(self.snr_db) == len(self.ber) == len(self.bits_simulated)):
            raise ValueError("curve vectors must share length")
        if np.any((self.ber < 0) | (self.ber > 1)):
            raise ValueError("bit error rates must lie in [0, 1]")


@dataclass(frozen=True)
class UserCountPoint:
    """Argmax of the mean ZFWF sum rate over the number of served users."""

    n_bs: int
    snr_db: float
    k_best: int
    peak_rate: float

    def __post_init__(self):
        if not 1 <= self.k_best <= self.n_bs:
            raise ValueError("best user count out of range")


def _scheme_fn(scheme: str) -> Callable[[ChannelSet, float], Precoder]:
    try:
        return SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}") from None


def _check_scheme_feasible(cfg: ScenarioConfig, scheme: str) -> None:
    if scheme in ("ZFWF", "ZFEP"):
        cfg.require_zf_feasible()
    elif scheme == "MMSE":
        if cfg.n_su > cfg.n_bs:
            raise ValueError(
                f"MMSE needs K <= n_bs, got K={cfg.n_su}, n_bs={cfg.n_bs}"
            )
    else:
        _scheme_fn(scheme)


def _map_trials(fn: Callable[[int], object], trials: Iterable[int], workers: int) -> List[object]:
    idx = list(trials)
    if workers <= 1:
        return [fn(t) for t in idx]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, idx))


def run_capacity(cfg: ScenarioConfig, scheme: str, workers: int = 1) -> CapacityCurve:
    """Average the sum rate over independent channel draws per SNR point.

    The transmit budget at each grid point is cfg.p_bs_for(snr_db); the
    same channel draws back every point and every scheme.
    """
    fn = _scheme_fn(scheme)
    _check_scheme_feasible(cfg, scheme)
    budgets = np.array([cfg.p_bs_for(s) for s in cfg.snr_grid_db])

    def one_trial(t: int) -> np.ndarray:
        ch = generate_channels(cfg, t)
        return np.array([sum_rate(ch, fn(ch, p)) for p in budgets])

    rates = np.stack(_map_trials(one_trial, range(cfg.trials), workers))
    mean = rates.mean(axis=0)
    if cfg.trials > 1:
        std_err = rates.std(axis=0, ddof=1) / np.sqrt(cfg.trials)
    else:
        std_err = np.zeros_like(mean)
    return CapacityCurve(
        snr_db=np.asarray(cfg.snr_grid_db, dtype=np.float64),
        mean_rate=mean,
        std_err=std_err,
        trials=cfg.trials,
        scheme=scheme,
        scenario=cfg,
    )


def _ber_one_trial(cfg: ScenarioConfig, scheme_fn, p_bs: float, t: int) -> Tuple[int, int]:
    """Bit errors and bits for one channel draw; only served users count.

    Every user's symbols enter the transmitted superposition, but users
    the allocator shut off (zero power) carry no payload, so their bits
    are excluded from the tally.
    """
    ch = generate_channels(cfg, t)
    prec = scheme_fn(ch, p_bs)
    active = prec.powers > 0
    n_active = int(active.sum())
    if n_active == 0:
        return 0, 0
    k, s = cfg.n_su, cfg.ber_symbols
    rng = symbol_stream(cfg.seed, t)
    bits = rng.integers(0, 2, size=(2, k, s))
    symbols = ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / _SQRT2
    received = (ch.h @ prec.weights) @ symbols
    noise = _draw_cn(rng, k, s) * np.sqrt(ch.effective_noise)
    received = received + noise
    eff_gain = np.einsum("ij,ji->i", ch.h, prec.weights)  # h_k w_k per user
    z = received[active] / eff_gain[active, None]
    errors = int(np.sum((z.real < 0) != (bits[0][active] == 1)))
    errors += int(np.sum((z.imag < 0) != (bits[1][active] == 1)))
    return errors, 2 * n_active * s


def run_ber(cfg: ScenarioConfig, scheme: str, workers: int = 1) -> BerCurve:
    """Gray-mapped 4-QAM link simulation with an error-count stopping rule.

    Per SNR point, channel draws are consumed in trial order until the
    cumulative error count reaches cfg.target_bit_errors or cfg.trials
    draws are exhausted, whichever comes first.  The stopping decision
    depends only on the ordered prefix of trial results, so worker count
    cannot change the outcome.
    """
    if cfg.modulation != "4qam":
        raise ValueError(f"unsupported modulation {cfg.modulation!r}")
    fn = _scheme_fn(scheme)
    _check_scheme_feasible(cfg, scheme)

    ber = np.zeros(len(cfg.snr_grid_db))
    bits_out = np.zeros(len(cfg.snr_grid_db), dtype=np.int64)
    chunk = max(1, 8 * workers)
    for i, snr in enumerate(cfg.snr_grid_db):
        p_bs = cfg.p_bs_for(snr)
        errors = bits = 0
        for start in range(0, cfg.trials, chunk):
            idx = range(start, min(start + chunk, cfg.trials))
            results = _map_trials(lambda t: _ber_one_trial(cfg, fn, p_bs, t), idx, workers)
            done = False
            for e, nb in results:
                errors += e
                bits += nb
                if errors >= cfg.target_bit_errors:
                    done = True
                    break
            if done:
                break
        ber[i] = errors / bits if bits else 0.0
        bits_out[i] = bits
    return BerCurve(
        snr_db=np.asarray(cfg.snr_grid_db, dtype=np.float64),
        ber=ber,
        bits_simulated=bits_out,
        scheme=scheme,
        scenario=cfg,
    )


def optimal_user_count(
    n_bs: int,
    snr_db: float,
    n_pu: int,
    trials: int,
    seed: int,
    noise_power: float = 1.0,
    i_p_db: Optional[float] = 0.0,
    workers: int = 1,
) -> UserCountPoint:
    """Search the served-user count maximizing the mean ZFWF sum rate.

    Every candidate K = 1 .. n_bs - n_pu is evaluated on the same channel
    draws (candidate K uses the first K user rows of a full-size draw),
    so the argmax is a paired comparison.  Ties break toward fewer users.
    """
    k_max = n_bs - n_pu
    if k_max < 1:
        raise ValueError(f"no feasible user count for n_bs={n_bs}, n_pu={n_pu}")
    i_p = 0.0 if i_p_db is None else 10.0 ** (i_p_db / 10.0)
    p_bs = noise_power * 10.0 ** (snr_db / 10.0)

    def one_trial(t: int) -> np.ndarray:
        rng = channel_stream(seed, t)
        h_full = _draw_cn(rng, k_max, n_bs)
        g = _draw_cn(rng, n_pu, n_bs)
        rates = np.empty(k_max)
        for k in range(1, k_max + 1):
            ch = ChannelSet(h=h_full[:k], g=g, noise_power=noise_power, pu_interference=i_p)
            t_mat = zf_directions(ch)
            b = np.sum(np.abs(t_mat) ** 2, axis=0)
            wf = waterfill(b, p_bs)
            rates[k - 1] = np.sum(np.log2(1.0 + wf.powers / (noise_power + i_p)))
        return rates

    totals = np.stack(_map_trials(one_trial, range(trials), workers)).mean(axis=0)
    k_best = int(np.argmax(totals)) + 1
    return UserCountPoint(n_bs=n_bs, snr_db=float(snr_db), k_best=k_best, peak_rate=float(totals[k_best - 1]))
