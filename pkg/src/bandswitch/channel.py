"""Per-band channel math: DFT codebooks, beam selection, SNR and Shannon rate.

Channel vectors are plain 1-D complex numpy arrays of length M_y * M_z
(azimuth-major: entry index j corresponds to z element j // M_y and
y element j % M_y). All functions here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
THERMAL_NOISE_DBM_PER_HZ = -174.0

BAND_SUB6 = "sub6"
BAND_MMWAVE = "mmwave"
BAND_IDS = (BAND_SUB6, BAND_MMWAVE)


@dataclass(frozen=True)
class BandConfig:
    """Physical constants of one frequency band at the base station."""

    band_id: str
    center_frequency: float     # Hz
    bandwidth: float            # Hz
    antennas_y: int             # M_y, azimuth elements
    antennas_z: int             # M_z, elevation elements
    tx_energy_per_hz: float     # W/Hz
    noise_figure_db: float
    codebook_size: int          # N_CB beams searched (M_y without oversampling)

    def __post_init__(self):
        if self.band_id not in BAND_IDS:
            raise ValueError(f"unknown band_id {self.band_id!r}")
        for name in ("center_frequency", "bandwidth", "tx_energy_per_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.antennas_y < 1 or self.antennas_z < 1:
            raise ValueError("antenna counts must be >= 1")
        if not 1 <= self.codebook_size <= self.antennas_y * self.antennas_z:
            raise ValueError("codebook_size out of range")

    @property
    def n_antennas(self) -> int:
        return self.antennas_y * self.antennas_z

    @property
    def tx_power(self) -> float:
        """Total transmit power in W: energy per Hz times bandwidth."""
        return self.tx_energy_per_hz * self.bandwidth

    @property
    def noise_power(self) -> float:
        """sigma^2 in W: -174 dBm/Hz + 10*log10(B) + noise figure."""
        dbm = THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(self.bandwidth) + self.noise_figure_db
        return float(10.0 ** ((dbm - 30.0) / 10.0))


@dataclass(frozen=True)
class Codebook:
    """Unit-norm beamforming vectors searched at one band (columns)."""

    beams: np.ndarray  # complex, shape (M, N_CB)
    band_id: str

    def __post_init__(self):
        norms = np.linalg.norm(self.beams, axis=0)
        if not np.allclose(norms, 1.0, atol=1e-10):
            raise ValueError("codebook columns must have unit norm")

    @property
    def n_beams(self) -> int:
        return self.beams.shape[1]


def dft_matrix(m: int) -> np.ndarray:
    """m x m DFT matrix with unit-norm (orthonormal) columns."""
    if m < 1:
        raise ValueError("DFT size must be >= 1")
    k = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(k, k) / m) / np.sqrt(m)


def dft_kron_matrix(m_y: int, m_z: int) -> np.ndarray:
    """Full UPA codebook matrix F = F_z kron F_y, shape (M_y*M_z, M_y*M_z).

    Columns are orthonormal; column j steers to z beam j // M_y and
    y beam j % M_y. The first M_y columns are the azimuth sweep with the
    z direction at broadside.
    """
    return np.kron(dft_matrix(m_z), dft_matrix(m_y))


def build_dft_codebook(band: BandConfig) -> Codebook:
    """Codebook searched at `band`: first N_CB columns of F_z kron F_y.

    With codebook_size <= M_y these are the azimuth DFT beams at z
    broadside (no oversampling).
    """
    full = dft_kron_matrix(band.antennas_y, band.antennas_z)
    return Codebook(beams=full[:, : band.codebook_size], band_id=band.band_id)


def best_beam(h: np.ndarray, cb: Codebook) -> tuple[int, float]:
    """argmax over codebook columns of |h^H f|^2; ties go to the lowest index."""
    h = np.asarray(h)
    if h.ndim != 1 or h.shape[0] != cb.beams.shape[0]:
        raise ValueError(
            f"channel length {h.shape} does not match codebook rows {cb.beams.shape[0]}"
        )
    gains = np.abs(h.conj() @ cb.beams) ** 2
    idx = int(np.argmax(gains))
    return idx, float(gains[idx])


def best_beam_gains(channels: np.ndarray, cb: Codebook) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized best_beam over rows of `channels` (n, M)."""
    channels = np.asarray(channels)
    if channels.ndim != 2 or channels.shape[1] != cb.beams.shape[0]:
        raise ValueError("channel matrix does not match codebook rows")
    gains = np.abs(channels.conj() @ cb.beams) ** 2
    idx = np.argmax(gains, axis=1)
    return idx, gains[np.arange(gains.shape[0]), idx]


def snr(band: BandConfig, beam_gain: float) -> float:
    """Linear receive SNR: (P_TX / sigma^2) * |h^H f|^2."""
    if beam_gain < 0:
        raise ValueError("beam gain must be >= 0")
    return band.tx_power / band.noise_power * beam_gain


def achievable_rate(band: BandConfig, snr_linear) -> float:
    """Instantaneous Shannon rate B * log2(1 + SNR) in bit/s."""
    snr_arr = np.asarray(snr_linear, dtype=float)
    if np.any(snr_arr < 0):
        raise ValueError("SNR must be >= 0")
    out = band.bandwidth * np.log2(1.0 + snr_arr)
    return float(out) if out.ndim == 0 else out


def array_response(m_y: int, u) -> np.ndarray:
    """Azimuth ULA response exp(j*pi*m*u) for half-wavelength spacing.

    `u` is the direction sine; scalar or shape (n,). Returns (m_y,) or (n, m_y).
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    phase = np.pi * np.outer(u_arr, np.arange(m_y))
    resp = np.exp(1j * phase)
    return resp[0] if np.isscalar(u) or np.ndim(u) == 0 else resp
