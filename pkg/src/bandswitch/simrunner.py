"""Scenario orchestration: learning/exploitation runs, sweeps, seeding.

One run processes T_simulation disjoint stratified partitions of the UE
population. Per partition: a learn subset follows the legacy procedure
(threshold relaxed, both bands measured) to produce labeled features, a
classifier is trained on them, all policies are evaluated on the exploit
subset, and the classifier is invalidated before the next partition.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .channel import BandConfig, best_beam_gains, build_dft_codebook
from .dataset import (
    ChannelSample,
    SyntheticSceneConfig,
    blockage_uniforms,
    generate_synthetic_scene,
)
from .framing import (
    FrameSchedule,
    MobilityConfig,
    beamwidth_from_antennas,
    coherence_time_mmwave,
    coherence_time_sub6,
)
from .learner import (
    TRAINERS,
    assemble_features,
    default_gbt_grid,
    default_mlp_grid,
    split_learn_exploit,
    stratified_partition,
)
from .learner.gbt import GbtHyperparams
from .learner.mlp import MlpHyperparams
from .metrics import ClassifierStats, PolicyStats, RunReport, confusion_matrix, roc_auc, throughput_stats
from .policies import UserRecord, decide_blind, decide_legacy, decide_optimal, decide_proposed

POLICY_ORDER = ("legacy", "blind", "proposed", "optimal")

# training fractions probed when studying how little data the classifier
# needs; echoed in reports and usable via the q_training config knob.
Q_TRAINING_SWEEP = (1e-3, 5e-3, 7e-3, 1e-2, 3e-2, 5e-2, 7e-2, 1e-1, 3e-1, 4e-1, 5e-1, 7e-1)


def default_sub6() -> BandConfig:
    return BandConfig(band_id="sub6", center_frequency=3.5e9, bandwidth=180e3,
                      antennas_y=64, antennas_z=1, tx_energy_per_hz=1.0,
                      noise_figure_db=7.0, codebook_size=64)


def default_mmwave() -> BandConfig:
    return BandConfig(band_id="mmwave", center_frequency=28e9, bandwidth=1800e3,
                      antennas_y=64, antennas_z=1, tx_energy_per_hz=0.1,
                      noise_figure_db=7.0, codebook_size=64)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one run needs; all randomness derives from master_seed."""

    scenario: str = "C"                 # A: all sub-6, B: all mmWave, C: mixed
    t_simulation: int = 10              # partitions = radio frames
    q_exploitation: float = 0.8
    q_training: float | None = None     # optional sub-split of each learn set
    threshold_sub6: float = 1.72e6      # bit/s
    threshold_mmwave: float = 7.00e6
    p_learning: float = 0.4
    p_exploitation: float | None = None  # defaults to p_learning
    gap_fraction: float = 0.6
    signaling_overhead: float = 0.0
    t_beam: float = 1e-6
    speed: float = 50.0 / 3.6
    classifier: str = "mlp"             # mlp | gbt
    feature_mode: str = "deployable"    # deployable | full
    grid_mode: str = "small"            # small: single default point; full: whole table
    k_folds: int = 2
    initial_sub6_fraction: float = 0.7  # scenario C / custom
    policies: tuple = POLICY_ORDER
    master_seed: int = 1
    scale: float = 1.0                  # shrinks the UE population proportionally
    q_training_sweep: tuple = Q_TRAINING_SWEEP
    p_exploitation_sweep: tuple = (0.2, 0.4, 0.6, 0.8)
    sub6: BandConfig = field(default_factory=default_sub6)
    mmwave: BandConfig = field(default_factory=default_mmwave)
    scene: SyntheticSceneConfig = field(default_factory=SyntheticSceneConfig)

    def __post_init__(self):
        if self.scenario not in ("A", "B", "C", "custom"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not 0.0 < self.q_exploitation < 1.0:
            raise ValueError("q_exploitation must lie in (0, 1)")
        if self.q_training is not None and not 0.0 < self.q_training <= 1.0:
            raise ValueError("q_training must lie in (0, 1]")
        if not 0.0 <= self.p_learning <= 1.0:
            raise ValueError("p_learning must lie in [0, 1]")
        if self.p_exploitation is not None and not 0.0 <= self.p_exploitation <= 1.0:
            raise ValueError("p_exploitation must lie in [0, 1]")
        if self.classifier not in TRAINERS:
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.feature_mode not in ("full", "deployable"):
            raise ValueError(f"unknown feature mode {self.feature_mode!r}")
        if self.grid_mode not in ("small", "full"):
            raise ValueError(f"unknown grid mode {self.grid_mode!r}")
        if self.t_simulation < 1:
            raise ValueError("need at least one partition")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        bad = [p for p in self.policies if p not in POLICY_ORDER]
        if bad:
            raise ValueError(f"unknown policies {bad}")

    @property
    def p_exploit(self) -> float:
        return self.p_learning if self.p_exploitation is None else self.p_exploitation


def derive_seed(master_seed: int, *labels) -> np.random.SeedSequence:
    """Documented seed-splitting rule: master seed + hashed component labels."""
    hashed = [
        int.from_bytes(hashlib.sha256(str(label).encode()).digest()[:8], "little")
        for label in labels
    ]
    return np.random.SeedSequence([int(master_seed)] + hashed)


def derive_rng(master_seed: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *labels))


def derive_seed_int(master_seed: int, *labels) -> int:
    return int(derive_seed(master_seed, *labels).generate_state(1)[0])


@dataclass
class Environment:
    """Scene-level state shared by every run of a sweep."""

    samples: list[ChannelSample]
    ue_ids: np.ndarray
    coords: np.ndarray
    serving: np.ndarray          # "sub6"/"mmwave" per UE
    rate_sub6: np.ndarray        # raw achievable rates, bit/s
    rate_mm_nb: np.ndarray
    rate_mm_b: np.ndarray
    u_block: np.ndarray          # per-UE uniforms; blocked iff u < p
    schedule: FrameSchedule
    partitions: list[np.ndarray]
    labels_learning: np.ndarray

    def rate_mmwave(self, p: float) -> np.ndarray:
        return np.where(self.u_block < p, self.rate_mm_b, self.rate_mm_nb)


def _scaled_scene(cfg: ScenarioConfig) -> SyntheticSceneConfig:
    spacing = cfg.scene.grid_spacing / math.sqrt(cfg.scale)
    return replace(cfg.scene, grid_spacing=spacing,
                   rng_seed=derive_seed_int(cfg.master_seed, "scene"))


def _band_rates(band: BandConfig, channels: np.ndarray) -> np.ndarray:
    _, gains = best_beam_gains(channels, build_dft_codebook(band))
    snr = band.tx_power / band.noise_power * gains
    return band.bandwidth * np.log2(1.0 + snr)


def _initial_bands(cfg: ScenarioConfig, n: int) -> np.ndarray:
    if cfg.scenario == "A":
        return np.full(n, "sub6")
    if cfg.scenario == "B":
        return np.full(n, "mmwave")
    rng = derive_rng(cfg.master_seed, "initial-band")
    return np.where(rng.random(n) < cfg.initial_sub6_fraction, "sub6", "mmwave")


def _labels(serving: np.ndarray, rate_s6: np.ndarray, rate_mm: np.ndarray) -> np.ndarray:
    on_sub6 = serving == "sub6"
    return np.where(on_sub6, rate_mm > rate_s6, rate_s6 > rate_mm).astype(int)


def build_environment(cfg: ScenarioConfig,
                      samples: list[ChannelSample] | None = None) -> Environment:
    if samples is None:
        samples = generate_synthetic_scene(_scaled_scene(cfg), cfg.sub6, cfg.mmwave)
    if not samples:
        raise ValueError("data source supplied no UEs")
    for s in samples:
        s.validate(cfg.sub6, cfg.mmwave)
    n = len(samples)
    min_rows = cfg.t_simulation * 2
    if n < min_rows:
        raise ValueError(f"insufficient data: {n} UEs for {cfg.t_simulation} partitions")
    ue_ids = np.array([s.ue_id for s in samples])
    coords = np.array([s.coords for s in samples])

    rate_s6 = _band_rates(cfg.sub6, np.stack([s.h_sub6 for s in samples]))
    rate_mm_nb = _band_rates(cfg.mmwave, np.stack([s.h_mm_nb for s in samples]))
    rate_mm_b = _band_rates(cfg.mmwave, np.stack([s.h_mm_b for s in samples]))

    mobility = MobilityConfig(speed=cfg.speed)
    alphas = mobility.sample_alphas(n, rng=derive_rng(cfg.master_seed, "alpha"))
    distances = np.linalg.norm(coords - np.asarray(cfg.scene.bs_position), axis=1)
    t_c_s6 = coherence_time_sub6(cfg.sub6.center_frequency, cfg.speed, alphas)
    t_c_mm = coherence_time_mmwave(
        distances, cfg.speed, alphas, beamwidth_from_antennas(cfg.mmwave.antennas_y)
    )
    schedule = FrameSchedule(
        t_c_sub6=t_c_s6, t_c_mmwave=t_c_mm, t_beam=cfg.t_beam,
        gap_fraction=cfg.gap_fraction, signaling_overhead=cfg.signaling_overhead,
        n_cb_sub6=cfg.sub6.codebook_size, n_cb_mmwave=cfg.mmwave.codebook_size,
    )

    u_block = blockage_uniforms(derive_seed_int(cfg.master_seed, "blockage"), ue_ids)
    serving = _initial_bands(cfg, n)
    rate_mm_learn = np.where(u_block < cfg.p_learning, rate_mm_b, rate_mm_nb)
    labels_learning = _labels(serving, rate_s6, rate_mm_learn)
    partitions = stratified_partition(
        labels_learning, cfg.t_simulation, derive_rng(cfg.master_seed, "partition")
    )
    return Environment(
        samples=samples, ue_ids=ue_ids, coords=coords, serving=serving,
        rate_sub6=rate_s6, rate_mm_nb=rate_mm_nb, rate_mm_b=rate_mm_b,
        u_block=u_block, schedule=schedule, partitions=partitions,
        labels_learning=labels_learning,
    )


def _records(env: Environment, idx: np.ndarray, rate_mm: np.ndarray,
             cfg: ScenarioConfig, t: int) -> list[UserRecord]:
    return [
        UserRecord(
            ue_id=int(env.ue_ids[i]),
            time_step=t,
            serving_band=str(env.serving[i]),
            rate_sub6=float(env.rate_sub6[i]),
            rate_mmwave=float(rate_mm[i]),
            threshold_sub6=cfg.threshold_sub6,
            threshold_mmwave=cfg.threshold_mmwave,
            coords=(float(env.coords[i, 0]), float(env.coords[i, 1]), float(env.coords[i, 2])),
        )
        for i in idx
    ]


def _classifier_grid(cfg: ScenarioConfig):
    """Hyperparameter grid searched per partition.

    "small" keeps runs fast: the depth sweep at the widest layer for the
    MLP (CV dodges depths that train into a bad basin on a given
    partition) and the single default point for the GBT.
    """
    if cfg.grid_mode == "full":
        return default_mlp_grid() if cfg.classifier == "mlp" else default_gbt_grid()
    if cfg.classifier == "mlp":
        return [MlpHyperparams(depth=d, width=10) for d in (1, 3, 5)]
    return [GbtHyperparams()]


def run_scenario(cfg: ScenarioConfig,
                 samples: list[ChannelSample] | None = None,
                 env: Environment | None = None) -> RunReport:
    """Run every requested policy over the exploit population.

    The four policies are evaluated on identical UEs (the union of the
    partitions' exploit subsets); the optimal policy is always computed
    since it is the normalization basis.
    """
    if env is None:
        env = build_environment(cfg, samples)
    p_exploit = cfg.p_exploit
    rate_mm_learn = env.rate_mmwave(cfg.p_learning)
    rate_mm_exploit = env.rate_mmwave(p_exploit)

    wanted = list(dict.fromkeys(cfg.policies))
    eval_policies = list(dict.fromkeys(wanted + ["optimal"]))
    train_needed = "proposed" in eval_policies

    effective: dict[str, list[np.ndarray]] = {p: [] for p in eval_policies}
    requests = {p: 0 for p in eval_policies}
    grants = {p: 0 for p in eval_policies}
    confusion = np.zeros((2, 2), dtype=int)
    pooled_scores: list[np.ndarray] = []
    pooled_labels: list[np.ndarray] = []
    n_training_total = 0
    warnings: list[str] = []

    for t, part in enumerate(env.partitions):
        learn_idx, exploit_idx = split_learn_exploit(
            part, cfg.q_exploitation, derive_rng(cfg.master_seed, "split", t)
        )
        model = None
        if train_needed:
            if cfg.q_training is not None:
                keep = max(2, math.ceil(cfg.q_training * learn_idx.size))
                learn_idx = derive_rng(cfg.master_seed, "qtrain", t).permutation(learn_idx)[:keep]
            learn_records = _records(env, learn_idx, rate_mm_learn, cfg, t)
            x_learn, y_learn = assemble_features(
                learn_records, env.schedule, mode=cfg.feature_mode, force_requested=True
            )
            model = TRAINERS[cfg.classifier](
                x_learn, y_learn, grid=_classifier_grid(cfg), k_folds=cfg.k_folds,
                rng=derive_rng(cfg.master_seed, "train", t),
                feature_mode=cfg.feature_mode, frame_partition_id=t,
            )
            n_training_total += int(learn_idx.size)

        exploit_records = _records(env, exploit_idx, rate_mm_exploit, cfg, t)
        predictions = None
        if model is not None:
            x_ex, y_ex = assemble_features(
                exploit_records, env.schedule, mode=cfg.feature_mode, force_requested=True
            )
            predictions, scores = model.predict(x_ex)
            confusion += confusion_matrix(y_ex, predictions)
            pooled_scores.append(scores)
            pooled_labels.append(y_ex)

        for policy in eval_policies:
            rates = np.empty(len(exploit_records))
            n_req = 0
            n_grant = 0
            for i, rec in enumerate(exploit_records):
                if policy == "legacy":
                    decided = decide_legacy(rec, env.schedule)
                elif policy == "blind":
                    decided = decide_blind(rec, env.schedule)
                elif policy == "optimal":
                    decided = decide_optimal(rec, env.schedule)
                else:
                    decided = decide_proposed(rec, env.schedule, model=model,
                                              prediction=int(predictions[i]))
                rates[i] = decided.effective_rate
                n_req += decided.x_br
                n_grant += 1 if decided.y == 1 else 0
            effective[policy].append(rates)
            requests[policy] += n_req
            grants[policy] += n_grant

        if model is not None:
            model.invalidate()

    policy_stats: dict[str, PolicyStats] = {}
    all_rates = {p: np.concatenate(effective[p]) for p in eval_policies}
    optimal_mean = float(all_rates["optimal"].mean())
    for policy in eval_policies:
        mean, grid, cdf = throughput_stats(all_rates[policy])
        policy_stats[policy] = PolicyStats(
            policy=policy, mean=mean,
            normalized_mean=mean / optimal_mean if optimal_mean > 0 else float("nan"),
            requests=int(requests[policy]), grants=int(grants[policy]),
            n_samples=int(all_rates[policy].size),
            cdf_grid=grid, cdf_values=cdf, samples=all_rates[policy],
        )

    classifier_stats = None
    if train_needed:
        e = int(confusion[0, 1] + confusion[1, 0])
        n_scored = int(confusion.sum())
        mu = e / n_scored if n_scored else float("nan")
        labels_pooled = np.concatenate(pooled_labels)
        scores_pooled = np.concatenate(pooled_scores)
        try:
            xi = roc_auc(scores_pooled, labels_pooled)
        except ValueError:
            xi = None
            warnings.append("ROC area undefined: exploitation labels contain one class")
        if mu > 0.05:
            warnings.append(f"elevated misclassification error ({mu:.1%}); "
                            "consider a larger learning split or the full hyperparameter grid")
        classifier_stats = ClassifierStats(
            kind=cfg.classifier, feature_mode=cfg.feature_mode,
            confusion=confusion, error_count=e, error_rate=mu, roc_area=xi,
            n_scored=n_scored, n_training=n_training_total,
        )

    report_policies = {p: policy_stats[p] for p in POLICY_ORDER if p in eval_policies}
    return RunReport(
        scenario=cfg.scenario, policies=report_policies, classifier=classifier_stats,
        t_c_sub6=env.schedule.t_c_sub6, t_c_mmwave=env.schedule.t_c_mmwave,
        config=config_dict(cfg), warnings=warnings,
    )


def config_dict(cfg: ScenarioConfig) -> dict:
    out = asdict(cfg)
    out["p_exploitation"] = cfg.p_exploit
    return out


def run_threshold_sweep(cfg: ScenarioConfig, thresholds, band: str | None = None,
                        samples: list[ChannelSample] | None = None,
                        env: Environment | None = None) -> list[tuple[float, RunReport]]:
    """One run per threshold on a shared environment.

    The swept band defaults to the scenario's starting band (A: sub-6,
    B: mmWave); otherwise both thresholds move together.
    """
    thresholds = list(thresholds)
    if not thresholds:
        raise ValueError("threshold sweep needs at least one value")
    if band is None:
        band = {"A": "sub6", "B": "mmwave"}.get(cfg.scenario, "both")
    if env is None:
        env = build_environment(cfg, samples)
    out = []
    for thr in thresholds:
        cfg_t = replace(
            cfg,
            threshold_sub6=thr if band in ("sub6", "both") else cfg.threshold_sub6,
            threshold_mmwave=thr if band in ("mmwave", "both") else cfg.threshold_mmwave,
        )
        out.append((float(thr), run_scenario(cfg_t, env=env)))
    return out


def run_blockage_sweep(cfg: ScenarioConfig, p_values=None,
                       samples: list[ChannelSample] | None = None,
                       env: Environment | None = None) -> list[tuple[float, RunReport]]:
    """Learning fixed at cfg.p_learning; exploitation blockage varies."""
    p_values = list(cfg.p_exploitation_sweep if p_values is None else p_values)
    if not p_values:
        raise ValueError("blockage sweep needs at least one probability")
    if env is None:
        env = build_environment(cfg, samples)
    out = []
    for p in p_values:
        out.append((float(p), run_scenario(replace(cfg, p_exploitation=float(p)), env=env)))
    return out
