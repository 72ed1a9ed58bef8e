import numpy as np
import pytest

from bandswitch.channel import BandConfig
from bandswitch.framing import FrameSchedule


@pytest.fixture
def sub6_band():
    return BandConfig(band_id="sub6", center_frequency=3.5e9, bandwidth=180e3,
                      antennas_y=8, antennas_z=1, tx_energy_per_hz=1.0,
                      noise_figure_db=7.0, codebook_size=8)


@pytest.fixture
def mmwave_band():
    return BandConfig(band_id="mmwave", center_frequency=28e9, bandwidth=1800e3,
                      antennas_y=8, antennas_z=1, tx_energy_per_hz=0.1,
                      noise_figure_db=7.0, codebook_size=8)


@pytest.fixture
def reference_schedule():
    # 3.5 / 28 GHz coherence times at 50 km/h, worst-case travel angle
    return FrameSchedule(t_c_sub6=6.17e-3, t_c_mmwave=19.16e-3, t_beam=1e-6,
                         gap_fraction=0.6, signaling_overhead=0.0,
                         n_cb_sub6=64, n_cb_mmwave=64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
