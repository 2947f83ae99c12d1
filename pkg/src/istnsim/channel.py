"""Link-budget arithmetic: path loss, fading, received power, RSRP, SINR and rates.

All helpers accept scalars or numpy arrays. Power quantities are dBm unless the
argument name ends in ``_mw``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

EULER_GAMMA = 0.5772156649
THERMAL_NOISE_DBM_HZ = -174.0

RSSI_MODES = ("total", "signal")
INTERFERENCE_MODELS = ("received", "transmit")


@dataclass(frozen=True)
class RadioConstants:
    """Radio parameters shared by every link in a scenario.

    ``rssi_mode`` selects what RSRP is derived from: ``"total"`` counts signal,
    residual interference and noise; ``"signal"`` uses the serving signal only.
    ``interference_model`` picks the interferer term in the SINR denominator:
    power received from the other servers (``"received"``) or their raw
    transmit powers (``"transmit"``).
    """

    carrier_freq_tn: float = 3.5
    carrier_freq_ntn: float = 24.25
    pathloss_exponent: float = 3.5
    bandwidth_hz: float = 20e6
    noise_figure_db: float = 7.0
    residual_interference: float = 0.1
    num_resource_blocks: int = 100
    rician_k_db: float = 10.0
    user_gain_dbi: float = 0.0
    rssi_mode: str = "total"
    interference_model: str = "received"
    euler_constant: float = field(default=EULER_GAMMA, init=False)

    def __post_init__(self):
        if not 0.0 <= self.residual_interference <= 1.0:
            raise ValueError("residual_interference must lie in [0, 1]")
        if self.num_resource_blocks < 1:
            raise ValueError("num_resource_blocks must be >= 1")
        if not (self.carrier_freq_tn > 0 and self.carrier_freq_ntn > 0 and self.bandwidth_hz > 0):
            raise ValueError("frequencies and bandwidth must be positive")
        if self.rssi_mode not in RSSI_MODES:
            raise ValueError(f"rssi_mode must be one of {RSSI_MODES}")
        if self.interference_model not in INTERFERENCE_MODELS:
            raise ValueError(f"interference_model must be one of {INTERFERENCE_MODELS}")

    @property
    def noise_dbm(self) -> float:
        return THERMAL_NOISE_DBM_HZ + self.noise_figure_db + 10.0 * math.log10(self.bandwidth_hz)

    @property
    def noise_mw(self) -> float:
        return dbm_to_mw(self.noise_dbm)


class RsrpCategory(enum.IntEnum):
    GOOD = 0
    FAIR = 1
    POOR = 2
    NO_SIGNAL = 3


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def dbm_to_mw(dbm):
    return _out(np.power(10.0, np.asarray(dbm, dtype=float) / 10.0))


def mw_to_dbm(mw):
    with np.errstate(divide="ignore"):
        return _out(10.0 * np.log10(np.asarray(mw, dtype=float)))


def fspl_db(freq_ghz, dist_m):
    """Free-space path loss with frequency in GHz and distance in meters."""
    f = np.asarray(freq_ghz, dtype=float)
    d = np.asarray(dist_m, dtype=float)
    if np.any(f <= 0) or np.any(d <= 0):
        raise ValueError("frequency and distance must be positive")
    return _out(32.45 + 20.0 * np.log10(f) + 20.0 * np.log10(d))


def sample_rician_power(k_db, rng: np.random.Generator, size=None):
    """Draw unit-mean Rician power gains |h|^2.

    The line-of-sight part has a uniform random phase; the scattered part is
    circularly-symmetric complex Gaussian. ``k_db = inf`` gives pure LoS.
    """
    if math.isinf(k_db) and k_db > 0:
        return _out(np.ones(() if size is None else size))
    k = 10.0 ** (k_db / 10.0)
    theta = rng.uniform(0.0, 2.0 * np.pi, size)
    scatter = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)
    h = math.sqrt(k / (k + 1.0)) * np.exp(1j * theta) + math.sqrt(1.0 / (k + 1.0)) * scatter
    return _out(np.abs(h) ** 2)


def _fading_db(fading_power):
    f = np.asarray(fading_power, dtype=float)
    if np.any(f < 0):
        raise ValueError("fading power must be >= 0")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(f)


def leo_received_power(tx_dbm, fspl, sat_gain_dbi, user_gain_dbi, fading_power=1.0):
    """Received satellite power in dBm; ``-inf`` in a deep fade or outside the beam."""
    return _out(np.asarray(tx_dbm, dtype=float) + _fading_db(fading_power) - fspl
                + sat_gain_dbi + user_gain_dbi)


def tn_received_power(tx_dbm, dist3d_m, alpha, gain3d_dbi, user_gain_dbi, fading_power=1.0):
    d = np.asarray(dist3d_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("3D distance must be positive")
    return _out(np.asarray(tx_dbm, dtype=float) + _fading_db(fading_power)
                - 10.0 * alpha * np.log10(d) + gain3d_dbi + user_gain_dbi)


def rsrp_offset_db(n_rb: int) -> float:
    if n_rb < 1:
        raise ValueError("number of resource blocks must be >= 1")
    return 10.0 * math.log10(12 * n_rb)


def rsrp_from_rssi(rssi_dbm, n_rb: int):
    return _out(np.asarray(rssi_dbm, dtype=float) - rsrp_offset_db(n_rb))


def sinr(signal_mw, interferers_mw, phi, noise_mw):
    """Signal over residual interference plus noise, linear.

    ``interferers_mw`` is summed over its last axis; pass an already-summed
    array with a trailing length-1 axis or a plain sequence for a single link.
    """
    total = np.sum(np.asarray(interferers_mw, dtype=float), axis=-1)
    return _out(np.asarray(signal_mw, dtype=float) / (phi * total + noise_mw))


def rate_exact(sinr_linear):
    s = np.asarray(sinr_linear, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR must be >= 0")
    return _out(np.log2(1.0 + s))


def rate_approx(mean_signal_mw, nu_mw, euler=EULER_GAMMA):
    """Fading-averaged rate approximation log2(1 + e^-E * P / nu)."""
    p = np.asarray(mean_signal_mw, dtype=float)
    nu = np.asarray(nu_mw, dtype=float)
    if np.any(p < 0) or np.any(nu <= 0):
        raise ValueError("signal must be >= 0 and nu > 0")
    return _out(np.log2(1.0 + math.exp(-euler) * p / nu))


_GOOD, _FAIR, _POOR = -105.0, -115.0, -124.0


def categorize_rsrp_codes(rsrp_dbm):
    """Vectorised RSRP binning into ``RsrpCategory`` integer codes."""
    r = np.asarray(rsrp_dbm, dtype=float)
    return np.select([r >= _GOOD, r >= _FAIR, r >= _POOR],
                     [RsrpCategory.GOOD, RsrpCategory.FAIR, RsrpCategory.POOR],
                     default=RsrpCategory.NO_SIGNAL).astype(np.int8)


def categorize_rsrp(rsrp_dbm: float) -> RsrpCategory:
    return RsrpCategory(int(categorize_rsrp_codes(rsrp_dbm)))


def category_counts(rsrp_dbm) -> np.ndarray:
    """Counts per category in ``RsrpCategory`` order."""
    return np.bincount(categorize_rsrp_codes(rsrp_dbm).ravel(), minlength=len(RsrpCategory))


@dataclass(frozen=True)
class LinkBudgetReport:
    """Per (user, server) link budget, one array entry per pair.

    Servers that are switched off or cannot cover a user carry ``-inf`` powers
    and zero rates.
    """

    tx_power: np.ndarray
    path_gain: np.ndarray
    tx_gain: np.ndarray
    rx_gain: float
    fading_power: np.ndarray
    rssi: np.ndarray
    rsrp: np.ndarray
    sinr_linear: np.ndarray
    rate_exact: np.ndarray
    rate_approx: np.ndarray
    rssi_mode: str = "total"
