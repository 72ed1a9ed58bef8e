"""Dual-band (sub-6 GHz / mmWave) band-switch policy simulator.

Benchmarks four request/grant policies on a single base station: the
measurement-gap legacy procedure, blind always-grant, a genie-aided
optimal bound, and a gap-free policy that predicts grants with an
online-trained classifier.
"""

from .channel import (
    BandConfig,
    Codebook,
    achievable_rate,
    best_beam,
    build_dft_codebook,
    dft_kron_matrix,
    snr,
)
from .dataset import (
    BlockageModel,
    ChannelSample,
    SyntheticSceneConfig,
    apply_blockage,
    generate_synthetic_scene,
    load_channel_file,
    save_channel_file,
)
from .framing import (
    FrameSchedule,
    MobilityConfig,
    beamwidth_from_antennas,
    coherence_time_mmwave,
    coherence_time_sub6,
    effective_rate,
    throughput_weight,
)
from .metrics import RunReport, confusion_matrix, misclassification, roc_auc, throughput_stats
from .policies import (
    InvalidModelError,
    PolicyKind,
    UserRecord,
    decide_blind,
    decide_legacy,
    decide_optimal,
    decide_proposed,
)
from .simrunner import (
    ScenarioConfig,
    default_mmwave,
    default_sub6,
    run_blockage_sweep,
    run_scenario,
    run_threshold_sweep,
)

__version__ = "0.1.0"
