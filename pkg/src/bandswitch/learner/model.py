"""Trained-classifier handle: grid-search CV, prediction, invalidation, export.

A TrainedModel is bound to one radio-frame partition; invalidate() at the
partition boundary makes further predictions refuse, forcing a retrain on
fresh data.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..framing import FrameSchedule
from ..policies import InvalidModelError
from .features import FEATURE_NAMES, assemble_features, class_weights
from .gbt import GbtClassifier, GbtHyperparams
from .mlp import MlpHyperparams, MlpNetwork, train_mlp_network

EXPORT_VERSION = 1

_EPS = 1e-12


@dataclass
class _Scaler:
    """Column standardization for the MLP; constant columns pass through."""

    center: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "_Scaler":
        center = x.mean(axis=0)
        scale = x.std(axis=0)
        constant = scale < 1e-12
        center[constant] = 0.0
        scale[constant] = 1.0
        return cls(center=center, scale=scale)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.scale


@dataclass
class TrainedModel:
    kind: str                       # "mlp" or "gbt"
    feature_mode: str
    frame_partition_id: int | None
    hyperparams: object
    n_training: int
    valid: bool = True
    cv_results: list = field(default_factory=list)
    _mlp: MlpNetwork | None = None
    _gbt: GbtClassifier | None = None
    _scaler: _Scaler | None = None

    def _scores(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "mlp":
            return self._mlp.scores(self._scaler.transform(x))
        return self._gbt.scores(x)

    def predict(self, x) -> tuple[np.ndarray, np.ndarray]:
        """(y_hat, scores) for feature rows already in this model's mode."""
        if not self.valid:
            raise InvalidModelError("classifier was invalidated; retrain before predicting")
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != len(FEATURE_NAMES):
            raise ValueError(f"expected feature rows of width {len(FEATURE_NAMES)}")
        scores = self._scores(x)
        return (scores >= 0.5).astype(int), scores

    def predict_records(self, records, frame: FrameSchedule) -> tuple[np.ndarray, np.ndarray]:
        x, _ = assemble_features(records, frame, mode=self.feature_mode)
        return self.predict(x)

    def invalidate(self) -> None:
        self.valid = False

    def to_json(self) -> str:
        payload = {
            "format_version": EXPORT_VERSION,
            "kind": self.kind,
            "feature_mode": self.feature_mode,
            "frame_partition_id": self.frame_partition_id,
            "n_training": self.n_training,
            "valid": self.valid,
            "hyperparams": asdict(self.hyperparams),
        }
        if self.kind == "mlp":
            payload["scaler"] = {
                "center": self._scaler.center.tolist(),
                "scale": self._scaler.scale.tolist(),
            }
            payload["network"] = self._mlp.to_dict()
        else:
            payload["ensemble"] = self._gbt.to_dict()
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        data = json.loads(text)
        if data.get("format_version") != EXPORT_VERSION:
            raise ValueError(f"unsupported model format {data.get('format_version')!r}")
        kind = data["kind"]
        if kind == "mlp":
            hp = MlpHyperparams(**data["hyperparams"])
            model = cls(kind=kind, feature_mode=data["feature_mode"],
                        frame_partition_id=data["frame_partition_id"],
                        hyperparams=hp, n_training=data["n_training"],
                        valid=data["valid"])
            model._mlp = MlpNetwork.from_dict(data["network"])
            model._scaler = _Scaler(
                center=np.asarray(data["scaler"]["center"], dtype=float),
                scale=np.asarray(data["scaler"]["scale"], dtype=float),
            )
        elif kind == "gbt":
            hp = GbtHyperparams(**data["hyperparams"])
            model = cls(kind=kind, feature_mode=data["feature_mode"],
                        frame_partition_id=data["frame_partition_id"],
                        hyperparams=hp, n_training=data["n_training"],
                        valid=data["valid"])
            model._gbt = GbtClassifier.from_dict(data["ensemble"], hp)
        else:
            raise ValueError(f"unknown model kind {kind!r}")
        return model


def kfold_indices(n: int, k: int, rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """K shuffled folds as (train_idx, val_idx) pairs."""
    if k < 2:
        raise ValueError("need at least two folds")
    if n < k:
        raise ValueError("fewer rows than folds")
    perm = rng.permutation(n)
    chunks = np.array_split(perm, k)
    return [
        (np.concatenate([c for j, c in enumerate(chunks) if j != i]), chunks[i])
        for i in range(k)
    ]


def _weighted_bce(scores: np.ndarray, y: np.ndarray, sample_weight: np.ndarray) -> float:
    p = np.clip(scores, _EPS, 1.0 - _EPS)
    y = np.asarray(y, dtype=float)
    return float(np.mean(sample_weight * -(y * np.log(p) + (1 - y) * np.log(1 - p))))


def _grid_search(x, y, grid, k_folds, rng, fit_one):
    """Mean class-weighted validation BCE per grid point; first minimum wins."""
    if len(grid) == 1:
        return grid[0], []
    folds = kfold_indices(x.shape[0], k_folds, rng)
    results = []
    for hp in grid:
        losses = []
        for train_idx, val_idx in folds:
            model = fit_one(x[train_idx], y[train_idx], hp,
                            np.random.default_rng(rng.integers(2**32)))
            counts = np.bincount(y[train_idx], minlength=2)
            w_class = y[train_idx].size / (2.0 * np.maximum(counts, 1))
            losses.append(_weighted_bce(model(x[val_idx]), y[val_idx], w_class[y[val_idx]]))
        results.append((hp, float(np.mean(losses))))
    best = min(results, key=lambda r: r[1])  # stable: first minimum
    return best[0], [(asdict(hp), loss) for hp, loss in results]


def train_mlp(x, y, grid: list[MlpHyperparams] | None = None, k_folds: int = 2,
              rng: np.random.Generator | None = None,
              feature_mode: str = "deployable",
              frame_partition_id: int | None = None) -> TrainedModel:
    """Grid-search K-fold CV, then retrain the winner on the full learn set."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    class_weights(y)  # validates both classes are present
    rng = rng if rng is not None else np.random.default_rng(0)
    grid = grid if grid else [MlpHyperparams()]

    scaler = _Scaler.fit(x)
    x_std = scaler.transform(x)

    def fit_one(x_tr, y_tr, hp, fold_rng):
        net, _ = train_mlp_network(x_tr, y_tr, hp, fold_rng)
        return net.scores

    best_hp, cv_results = _grid_search(x_std, y, grid, k_folds, rng, fit_one)
    # Deep sigmoid nets occasionally train into a bad basin; keep the best
    # of two restarts by training loss for the final fit.
    net = None
    best_loss = np.inf
    for _ in range(2):
        candidate, history = train_mlp_network(x_std, y, best_hp,
                                               np.random.default_rng(rng.integers(2**32)))
        if history["train_loss"][-1] < best_loss:
            best_loss = history["train_loss"][-1]
            net = candidate
    model = TrainedModel(kind="mlp", feature_mode=feature_mode,
                         frame_partition_id=frame_partition_id,
                         hyperparams=best_hp, n_training=x.shape[0],
                         cv_results=cv_results)
    model._mlp = net
    model._scaler = scaler
    return model


def train_gbt(x, y, grid: list[GbtHyperparams] | None = None, k_folds: int = 2,
              rng: np.random.Generator | None = None,
              feature_mode: str = "deployable",
              frame_partition_id: int | None = None) -> TrainedModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    class_weights(y)
    rng = rng if rng is not None else np.random.default_rng(0)
    grid = grid if grid else [GbtHyperparams()]

    def fit_one(x_tr, y_tr, hp, fold_rng):
        return GbtClassifier(hp).fit(x_tr, y_tr, fold_rng).scores

    best_hp, cv_results = _grid_search(x, y, grid, k_folds, rng, fit_one)
    ensemble = GbtClassifier(best_hp).fit(x, y, np.random.default_rng(rng.integers(2**32)))
    model = TrainedModel(kind="gbt", feature_mode=feature_mode,
                         frame_partition_id=frame_partition_id,
                         hyperparams=best_hp, n_training=x.shape[0],
                         cv_results=cv_results)
    model._gbt = ensemble
    return model


TRAINERS = {"mlp": train_mlp, "gbt": train_gbt}
