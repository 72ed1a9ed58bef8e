"""Coherence times, frame schedule, switching overheads and effective throughput.

Frame duration equals the band's channel coherence time; the schedule is
fixed once per run from the 1st-percentile coherence times of the UE
population.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import BAND_IDS, SPEED_OF_LIGHT

POLICY_KINDS = ("legacy", "blind", "optimal", "proposed")


@dataclass(frozen=True)
class MobilityConfig:
    """UE speed and travel-angle sampling (angle ~ Uniform(0, pi))."""

    speed: float = 50.0 / 3.6  # m/s, vehicular
    rng_seed: int = 0

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError("speed must be positive")

    def sample_alphas(self, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
        rng = rng if rng is not None else np.random.default_rng(self.rng_seed)
        return rng.uniform(0.0, np.pi, size=n)


def _checked_sines(alphas) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0:
        raise ValueError("need at least one travel angle")
    sines = np.sin(alphas)
    if not np.all(np.isfinite(sines)) or np.any(sines <= 0):
        raise ValueError("degenerate travel angles: sin(alpha) must be positive")
    return sines


def coherence_time_sub6(f_c: float, v_s: float, alphas) -> float:
    """1st percentile over UEs of c / (f_c * v_s * sin(alpha)), seconds."""
    if f_c <= 0 or v_s <= 0:
        raise ValueError("frequency and speed must be positive")
    sines = _checked_sines(alphas)
    t_c = SPEED_OF_LIGHT / (f_c * v_s * sines)
    return float(np.percentile(t_c, 1))


def coherence_time_mmwave(distances, v_s: float, alphas, beamwidth: float) -> float:
    """1st percentile of the beam coherence time (D / (v*sin a)) * Theta/2.

    Each UE's distance is paired with its sampled angle, so both arrays
    must have the same length.
    """
    if v_s <= 0 or beamwidth <= 0:
        raise ValueError("speed and beamwidth must be positive")
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    sines = _checked_sines(alphas)
    if d.shape != sines.shape:
        raise ValueError("distances and alphas must pair elementwise")
    t_c = d / (v_s * sines) * beamwidth / 2.0
    return float(np.percentile(t_c, 1))


def beamwidth_from_antennas(m_y: int) -> float:
    """Beamwidth Theta = (102 / M_y) degrees, returned in radians."""
    if m_y < 1:
        raise ValueError("antenna count must be >= 1")
    return np.deg2rad(102.0 / m_y)


def throughput_weight(t_b: float, t_h: float, t_c: float) -> float:
    """Frame-time fraction left for data: max(0, 1 - (T_B + T_H) / T_C)."""
    if t_b < 0 or t_h < 0:
        raise ValueError("overheads must be >= 0")
    if not t_c > 0:
        raise ValueError("coherence time must be positive")
    return max(0.0, 1.0 - (t_b + t_h) / t_c)


def effective_rate(weight: float, rate: float) -> float:
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must lie in [0, 1]")
    return weight * rate


@dataclass(frozen=True)
class FrameSchedule:
    """Per-band frame timing shared by every UE in a run.

    T_B per band is t_beam * N_CB of that band. Two time slots per frame;
    switches happen in the first slot.
    """

    t_c_sub6: float
    t_c_mmwave: float
    t_beam: float = 1e-6
    gap_fraction: float = 0.6           # rho, measurement gap as fraction of T_C
    signaling_overhead: float = 0.0     # beta, common to all policies
    n_cb_sub6: int = 64
    n_cb_mmwave: int = 64
    slots_per_frame: int = 2

    def __post_init__(self):
        if self.t_c_sub6 <= 0 or self.t_c_mmwave <= 0 or self.t_beam <= 0:
            raise ValueError("frame times must be positive")
        if not 0 < self.gap_fraction <= 1:
            raise ValueError("gap fraction must lie in (0, 1]")
        if self.signaling_overhead < 0:
            raise ValueError("signaling overhead must be >= 0")

    def t_c(self, band_id: str) -> float:
        if band_id not in BAND_IDS:
            raise ValueError(f"unknown band {band_id!r}")
        return self.t_c_sub6 if band_id == "sub6" else self.t_c_mmwave

    def t_b(self, band_id: str) -> float:
        n_cb = self.n_cb_sub6 if band_id == "sub6" else self.n_cb_mmwave
        return self.t_beam * n_cb

    def band_switch_overhead(self, policy_kind: str, band_id: str, requested: bool = True) -> float:
        """T_H charged on the post-decision band's frame.

        Only legacy pays the measurement gap rho*T_C; everyone pays the
        signaling overhead beta when a switch was requested.
        """
        if policy_kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {policy_kind!r}")
        if not requested:
            return 0.0
        if policy_kind == "legacy":
            return self.gap_fraction * self.t_c(band_id) + self.signaling_overhead
        return self.signaling_overhead

    def weight(self, band_id: str, policy_kind: str, requested: bool) -> float:
        t_h = self.band_switch_overhead(policy_kind, band_id, requested)
        return throughput_weight(self.t_b(band_id), t_h, self.t_c(band_id))

    def base_weight(self, band_id: str) -> float:
        """Weight with beam training only (no switch overhead)."""
        return throughput_weight(self.t_b(band_id), 0.0, self.t_c(band_id))
