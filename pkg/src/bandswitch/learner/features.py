"""Feature assembly and data partitioning for the grant classifier.

Feature columns (fixed order):
  x0 bias (1), x1 effective rate sub-6, x2 effective rate mmWave,
  x3 source technology (1 = sub-6), x4..x6 UE coordinates,
  x7 band-switch-requested flag. Label y = 1 iff the target band's raw
  rate exceeds the current band's (strict).
"""

from __future__ import annotations

import math

import numpy as np

from ..framing import FrameSchedule
from ..policies import UserRecord

FEATURE_NAMES = (
    "bias",
    "eff_rate_sub6",
    "eff_rate_mmwave",
    "source_is_sub6",
    "coord_x",
    "coord_y",
    "coord_z",
    "switch_requested",
)

FEATURE_MODES = ("full", "deployable")


class DegenerateLabelsError(ValueError):
    """Learn set contains a single class; the classifier cannot be trained."""


def assemble_features(records: list[UserRecord], frame: FrameSchedule,
                      mode: str = "deployable",
                      force_requested: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Build (X, y) from decided or undecided records.

    x1/x2 are the per-band rates weighted by that band's gap-free frame
    weight. In deployable mode the target band's rate column is zeroed
    (it is unmeasured without a gap); full mode keeps both, which leaks
    the label. In the learning phase x7 is forced to 1 so the classifier
    sees every UE's outcome regardless of threshold.
    """
    if mode not in FEATURE_MODES:
        raise ValueError(f"unknown feature mode {mode!r}")
    n = len(records)
    x = np.zeros((n, len(FEATURE_NAMES)))
    y = np.zeros(n, dtype=int)
    w_s6 = frame.base_weight("sub6")
    w_mm = frame.base_weight("mmwave")
    for i, rec in enumerate(records):
        if not (math.isfinite(rec.rate_sub6) and math.isfinite(rec.rate_mmwave)):
            raise ValueError(f"ue {rec.ue_id}: both band rates must be present and finite")
        is_sub6 = rec.serving_band == "sub6"
        eff_s6 = w_s6 * rec.rate_sub6
        eff_mm = w_mm * rec.rate_mmwave
        if mode == "deployable":
            # Only the serving band's rate is measured without a gap.
            if is_sub6:
                eff_mm = 0.0
            else:
                eff_s6 = 0.0
        x[i] = (
            1.0,
            eff_s6,
            eff_mm,
            1.0 if is_sub6 else 0.0,
            rec.coords[0],
            rec.coords[1],
            rec.coords[2],
            1.0 if force_requested else float(rec.current_rate < rec.current_threshold),
        )
        y[i] = int(rec.target_rate > rec.current_rate)
    return x, y


def stratified_partition(labels, t_simulation: int,
                         rng: np.random.Generator) -> list[np.ndarray]:
    """Split row indices into t_simulation disjoint, class-balanced partitions.

    Sampling is without replacement; every partition preserves the global
    class ratio within one sample per class, and partition sizes are as
    equal as the remainders allow.
    """
    labels = np.asarray(labels, dtype=int)
    n = labels.size
    if t_simulation < 1:
        raise ValueError("need at least one partition")
    if n < t_simulation:
        raise ValueError(f"cannot split {n} rows into {t_simulation} partitions")
    parts: list[list[np.ndarray]] = [[] for _ in range(t_simulation)]
    # Hand each class's remainder to opposite ends of the partition list so
    # totals stay balanced when the overall count divides evenly.
    for cls, from_front in ((1, True), (0, False)):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        base, rem = divmod(idx.size, t_simulation)
        extra = [False] * t_simulation
        targets = range(rem) if from_front else range(t_simulation - rem, t_simulation)
        for t in targets:
            extra[t] = True
        start = 0
        for t in range(t_simulation):
            size = base + (1 if extra[t] else 0)
            parts[t].append(idx[start:start + size])
            start += size
    out = []
    for chunks in parts:
        merged = np.concatenate(chunks)
        rng.shuffle(merged)
        out.append(merged)
    return out


def split_learn_exploit(partition, q_exploitation: float,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniformly draw ceil((1-q)*n) learn rows; the rest exploit."""
    if not 0.0 < q_exploitation < 1.0:
        raise ValueError("exploitation split must lie in (0, 1)")
    partition = np.asarray(partition)
    n_learn = math.ceil((1.0 - q_exploitation) * partition.size)
    perm = rng.permutation(partition)
    return perm[:n_learn], perm[n_learn:]


def class_weights(y) -> np.ndarray:
    """Per-sample weights: inverse class frequency, normalized to mean 1."""
    y = np.asarray(y, dtype=int)
    n = y.size
    counts = np.bincount(y, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        raise DegenerateLabelsError("labels contain a single class")
    per_class = n / (2.0 * counts)
    return per_class[y]
