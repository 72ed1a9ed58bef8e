"""Dual-band channel samples per UE.

Two sources: a JSON-lines channel file exported from an external ray
tracer, or a built-in synthetic generator that places UEs on a uniform
street grid and builds channels from distance path loss, spatially
correlated log-normal shadowing and a few shared geometric paths. The
generator's only job is to preserve the cross-location and cross-band
correlation the learning policy exploits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channel import BandConfig, array_response


class ChannelFileError(ValueError):
    """Malformed or inconsistent channel file."""


@dataclass(frozen=True)
class ChannelSample:
    """One UE: coordinates plus per-band channel vectors.

    The mmWave band carries both the blocked (h_mm_b) and unblocked
    (h_mm_nb) variant; blockage mixing picks one per UE.
    """

    ue_id: int
    coords: tuple[float, float, float]
    h_sub6: np.ndarray
    h_mm_nb: np.ndarray
    h_mm_b: np.ndarray

    def validate(self, sub6: BandConfig, mmwave: BandConfig) -> None:
        if not all(np.isfinite(c) for c in self.coords):
            raise ValueError(f"ue {self.ue_id}: non-finite coordinates")
        for name, vec, band in (
            ("h_sub6", self.h_sub6, sub6),
            ("h_mm_nb", self.h_mm_nb, mmwave),
            ("h_mm_b", self.h_mm_b, mmwave),
        ):
            if vec.shape != (band.n_antennas,):
                raise ValueError(
                    f"ue {self.ue_id}: {name} has length {vec.shape}, expected {band.n_antennas}"
                )
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"ue {self.ue_id}: {name} has non-finite entries")


@dataclass(frozen=True)
class BlockageModel:
    """Per-UE Bernoulli mmWave blockage: h = b*h_b + (1-b)*h_nb."""

    probability: float
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("blockage probability must lie in [0, 1]")


def _splitmix64(x: np.ndarray) -> np.ndarray:
    # 64-bit avalanche hash; wraps modulo 2^64 by construction.
    with np.errstate(over="ignore"):
        z = (x + np.uint64(0x9E3779B97F4A7C15)).astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def blockage_uniforms(rng_seed: int, ue_ids) -> np.ndarray:
    """Deterministic per-UE uniforms; b_i = u_i < p keeps draws comparable across p.

    Keyed on (seed, ue_id) so the draw is independent of call order and
    batch shape.
    """
    ue_ids = np.asarray(ue_ids, dtype=np.uint64)
    seed_word = _splitmix64(np.array([rng_seed], dtype=np.uint64))[0]
    with np.errstate(over="ignore"):
        mixed = _splitmix64(ue_ids ^ seed_word)
    return (mixed >> np.uint64(11)).astype(float) / float(1 << 53)


def blockage_mask(model: BlockageModel, ue_ids) -> np.ndarray:
    return blockage_uniforms(model.rng_seed, ue_ids) < model.probability


def apply_blockage(sample: ChannelSample, model: BlockageModel) -> np.ndarray:
    """Return the mmWave vector seen by this UE: h_b if blocked else h_nb."""
    blocked = bool(blockage_mask(model, [sample.ue_id])[0])
    return sample.h_mm_b if blocked else sample.h_mm_nb


@dataclass(frozen=True)
class SyntheticSceneConfig:
    """Street-grid scene layout and propagation parameters (both bands)."""

    grid_length: float = 550.0          # m, along the street (x)
    grid_width: float = 35.0            # m, across the street (y)
    grid_spacing: float = 0.6           # m between adjacent UEs
    bs_position: tuple[float, float, float] = (275.0, 45.0, 6.0)
    ue_height: float = 2.0
    pathloss_exponent_sub6: float = 2.9
    pathloss_exponent_mmwave: float = 3.4
    pathloss_ref_db_sub6: float = 128.0   # dB at 1 m, absorbs antenna/frequency constants
    pathloss_ref_db_mmwave: float = 139.0
    shadowing_corr_distance: float = 25.0  # m, exponential kernel
    shadowing_std_db: float = 6.0
    cross_band_coefficient: float = 0.7    # 0 = independent bands, 1 = fully shared
    n_reflection_paths: int = 2
    reflection_loss_db: float = 8.0        # mean extra loss per reflected path
    reflection_loss_std_db: float = 4.0
    angle_spread: float = 0.25             # std of reflected-path offsets in sin space
    blockage_loss_db: float = 25.0         # attenuation of the first mmWave path
    rng_seed: int = 0

    def __post_init__(self):
        if self.grid_spacing <= 0:
            raise ValueError("grid spacing must be positive")
        if self.grid_length < self.grid_spacing and self.grid_width < self.grid_spacing:
            raise ValueError("grid too small for the requested spacing")
        if self.shadowing_corr_distance <= 0:
            raise ValueError("shadowing correlation distance must be positive")
        if not 0.0 <= self.cross_band_coefficient <= 1.0:
            raise ValueError("cross-band coefficient must lie in [0, 1]")


def grid_coordinates(cfg: SyntheticSceneConfig) -> np.ndarray:
    """Uniform UE grid, shape (n, 3); z is constant across the scene."""
    eps = 1e-9
    xs = np.arange(0.0, cfg.grid_length + eps, cfg.grid_spacing)
    ys = np.arange(0.0, cfg.grid_width + eps, cfg.grid_spacing)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    coords = np.column_stack(
        [gx.ravel(), gy.ravel(), np.full(gx.size, cfg.ue_height)]
    )
    return coords


def correlated_field(coords_xy: np.ndarray, corr_distance: float,
                     rng: np.random.Generator, n_terms: int = 192) -> np.ndarray:
    """Unit-variance Gaussian field with exp(-d/dc) spatial covariance.

    Sum-of-cosines spectral sampling: wavenumber magnitudes follow the
    radial law of the 2-D exponential-covariance spectrum
    (F(K) = 1 - 1/sqrt(1 + (K*dc)^2)), directions and phases uniform.
    """
    u = rng.random(n_terms)
    k_mag = np.sqrt(1.0 / (1.0 - u) ** 2 - 1.0) / corr_distance
    theta = rng.uniform(0.0, 2.0 * np.pi, n_terms)
    psi = rng.uniform(0.0, 2.0 * np.pi, n_terms)
    k_vec = np.column_stack([k_mag * np.cos(theta), k_mag * np.sin(theta)])
    phase = coords_xy @ k_vec.T + psi
    return np.sqrt(2.0 / n_terms) * np.cos(phase).sum(axis=1)


def _mixed_fields(cfg: SyntheticSceneConfig, coords_xy: np.ndarray,
                  rng: np.random.Generator, corr_distance: float) -> tuple[np.ndarray, np.ndarray]:
    """A sub-6 field and an mmWave field with Pearson correlation = coefficient."""
    c = cfg.cross_band_coefficient
    shared = correlated_field(coords_xy, corr_distance, rng)
    own = correlated_field(coords_xy, corr_distance, rng)
    return shared, c * shared + np.sqrt(1.0 - c * c) * own


def shadowing_fields(cfg: SyntheticSceneConfig, coords: np.ndarray,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-UE shadowing in dB for (sub-6, mmWave), cross-band mixed."""
    s6, mm = _mixed_fields(cfg, coords[:, :2], rng, cfg.shadowing_corr_distance)
    return cfg.shadowing_std_db * s6, cfg.shadowing_std_db * mm


def _band_channel(m_y: int, amps: list[np.ndarray], sines: list[np.ndarray],
                  phases: list[np.ndarray]) -> np.ndarray:
    """Sum of steered paths, shape (n, m_y)."""
    h = np.zeros((amps[0].size, m_y), dtype=complex)
    for amp, u, phi in zip(amps, sines, phases):
        h += (amp * np.exp(1j * phi))[:, None] * array_response(m_y, u)
    return h


def generate_synthetic_scene(cfg: SyntheticSceneConfig, sub6: BandConfig,
                             mmwave: BandConfig) -> list[ChannelSample]:
    """Synthesize one scene: a ChannelSample per grid point.

    Path 0 is the direct path (angle from geometry); reflected paths get
    spatially correlated angle offsets and extra losses. The blocked
    mmWave variant attenuates path 0 by blockage_loss_db.
    """
    coords = grid_coordinates(cfg)
    n = coords.shape[0]
    xy = coords[:, :2]
    ss = np.random.SeedSequence(cfg.rng_seed)
    rng_shadow, rng_geo, rng_phase = [np.random.default_rng(s) for s in ss.spawn(3)]

    bs = np.asarray(cfg.bs_position, dtype=float)
    delta = coords - bs
    dist = np.linalg.norm(delta, axis=1)
    # Boresight towards the grid center; u = sin(angle off boresight).
    center = np.array([cfg.grid_length / 2.0, cfg.grid_width / 2.0, cfg.ue_height])
    bore = np.arctan2(center[1] - bs[1], center[0] - bs[0])
    azim = np.arctan2(delta[:, 1], delta[:, 0])
    u_direct = np.sin(azim - bore)

    shadow_s6, shadow_mm = shadowing_fields(cfg, coords, rng_shadow)

    def path_amp_db(exponent, ref_db, shadow):
        return -(ref_db + 10.0 * exponent * np.log10(np.maximum(dist, 1.0))) - shadow

    amp0_s6 = 10.0 ** (path_amp_db(cfg.pathloss_exponent_sub6, cfg.pathloss_ref_db_sub6, shadow_s6) / 20.0)
    amp0_mm = 10.0 ** (path_amp_db(cfg.pathloss_exponent_mmwave, cfg.pathloss_ref_db_mmwave, shadow_mm) / 20.0)

    amps_s6, sines_s6 = [amp0_s6], [u_direct]
    amps_mm, sines_mm = [amp0_mm], [u_direct]
    for _ in range(cfg.n_reflection_paths):
        off_s6, off_mm = _mixed_fields(cfg, xy, rng_geo, cfg.shadowing_corr_distance)
        loss_s6, loss_mm = _mixed_fields(cfg, xy, rng_geo, cfg.shadowing_corr_distance)
        amps_s6.append(amp0_s6 * 10.0 ** (-(cfg.reflection_loss_db + cfg.reflection_loss_std_db * loss_s6) / 20.0))
        amps_mm.append(amp0_mm * 10.0 ** (-(cfg.reflection_loss_db + cfg.reflection_loss_std_db * loss_mm) / 20.0))
        sines_s6.append(np.clip(u_direct + cfg.angle_spread * off_s6, -1.0, 1.0))
        sines_mm.append(np.clip(u_direct + cfg.angle_spread * off_mm, -1.0, 1.0))

    phases_s6 = [rng_phase.uniform(0, 2 * np.pi, n) for _ in amps_s6]
    phases_mm = [rng_phase.uniform(0, 2 * np.pi, n) for _ in amps_mm]

    h_s6 = _band_channel(sub6.antennas_y, amps_s6, sines_s6, phases_s6)
    h_mm_nb = _band_channel(mmwave.antennas_y, amps_mm, sines_mm, phases_mm)
    blocked_amps = [amps_mm[0] * 10.0 ** (-cfg.blockage_loss_db / 20.0)] + amps_mm[1:]
    h_mm_b = _band_channel(mmwave.antennas_y, blocked_amps, sines_mm, phases_mm)

    # z direction is kept at broadside, so the elevation dimension only
    # replicates the azimuth response.
    if sub6.antennas_z > 1:
        h_s6 = np.tile(h_s6, (1, sub6.antennas_z))
    if mmwave.antennas_z > 1:
        h_mm_nb = np.tile(h_mm_nb, (1, mmwave.antennas_z))
        h_mm_b = np.tile(h_mm_b, (1, mmwave.antennas_z))

    return [
        ChannelSample(
            ue_id=i,
            coords=(float(coords[i, 0]), float(coords[i, 1]), float(coords[i, 2])),
            h_sub6=h_s6[i],
            h_mm_nb=h_mm_nb[i],
            h_mm_b=h_mm_b[i],
        )
        for i in range(n)
    ]


# --- channel file format (JSON lines) ---------------------------------------
#
# Line 1 header: {"format": "bandswitch-channels", "version": 1,
#                 "sub6": {"center_frequency": ..., "antennas": M},
#                 "mmwave": {"center_frequency": ..., "antennas": M}}
# Then one object per UE:
#   {"ue_id": 0, "x": ..., "y": ..., "z": ...,
#    "h_sub6": [[re, im], ...], "h_mm_nb": [...], "h_mm_b": [...]}

FILE_FORMAT = "bandswitch-channels"
FILE_VERSION = 1


def _vec_to_pairs(vec: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in vec]


def _pairs_to_vec(pairs, name: str, line_no: int) -> np.ndarray:
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ChannelFileError(f"line {line_no}: {name} is not a list of [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ChannelFileError(f"line {line_no}: {name} is not a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def save_channel_file(path, samples: list[ChannelSample], sub6: BandConfig,
                      mmwave: BandConfig) -> None:
    header = {
        "format": FILE_FORMAT,
        "version": FILE_VERSION,
        "sub6": {"center_frequency": sub6.center_frequency, "antennas": sub6.n_antennas},
        "mmwave": {"center_frequency": mmwave.center_frequency, "antennas": mmwave.n_antennas},
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for s in samples:
            row = {
                "ue_id": s.ue_id,
                "x": s.coords[0], "y": s.coords[1], "z": s.coords[2],
                "h_sub6": _vec_to_pairs(s.h_sub6),
                "h_mm_nb": _vec_to_pairs(s.h_mm_nb),
                "h_mm_b": _vec_to_pairs(s.h_mm_b),
            }
            fh.write(json.dumps(row) + "\n")


def load_channel_file(path, sub6: BandConfig | None = None,
                      mmwave: BandConfig | None = None) -> list[ChannelSample]:
    """Parse a channel file; validates the header against configs when given."""
    with open(path) as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise ChannelFileError("line 1: missing header")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ChannelFileError(f"line 1: invalid JSON header: {exc}") from exc
        if header.get("format") != FILE_FORMAT:
            raise ChannelFileError("line 1: not a bandswitch channel file")
        if header.get("version") != FILE_VERSION:
            raise ChannelFileError(f"line 1: unsupported version {header.get('version')!r}")
        for band_key, cfg in (("sub6", sub6), ("mmwave", mmwave)):
            meta = header.get(band_key)
            if not isinstance(meta, dict) or "antennas" not in meta:
                raise ChannelFileError(f"line 1: header missing {band_key} metadata")
            if cfg is not None:
                if meta["antennas"] != cfg.n_antennas:
                    raise ChannelFileError(
                        f"line 1: {band_key} antennas {meta['antennas']} does not match config {cfg.n_antennas}"
                    )
                if meta.get("center_frequency") != cfg.center_frequency:
                    raise ChannelFileError(f"line 1: {band_key} center frequency mismatch with config")
        n_sub6 = int(header["sub6"]["antennas"])
        n_mm = int(header["mmwave"]["antennas"])

        samples = []
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ChannelFileError(f"line {line_no}: invalid JSON: {exc}") from exc
            try:
                ue_id = int(row["ue_id"])
                coords = (float(row["x"]), float(row["y"]), float(row["z"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ChannelFileError(f"line {line_no}: missing or invalid ue fields") from exc
            vecs = {}
            for name, expected in (("h_sub6", n_sub6), ("h_mm_nb", n_mm), ("h_mm_b", n_mm)):
                if name not in row:
                    raise ChannelFileError(f"line {line_no}: missing {name}")
                vec = _pairs_to_vec(row[name], name, line_no)
                if vec.shape[0] != expected:
                    raise ChannelFileError(
                        f"line {line_no}: {name} has length {vec.shape[0]}, expected {expected}"
                    )
                if not np.all(np.isfinite(vec)):
                    raise ChannelFileError(f"line {line_no}: {name} has non-finite entries")
                vecs[name] = vec
            samples.append(ChannelSample(ue_id=ue_id, coords=coords, **vecs))
    return samples
