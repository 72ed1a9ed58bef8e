"""Request/grant decision logic for the four band-switch policies.

Every decide_* function takes an undecided UserRecord plus the frame
schedule and returns a new record with x_br, y, post_decision_band and
effective_rate filled in. The effective rate is charged on the
post-decision band with that band's frame parameters; only the legacy
policy pays the measurement gap.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .framing import FrameSchedule


class PolicyKind(str, Enum):
    LEGACY = "legacy"
    BLIND = "blind"
    OPTIMAL = "optimal"
    PROPOSED = "proposed"


class InvalidModelError(RuntimeError):
    """Prediction requested from an invalidated classifier; retrain first."""


@dataclass(frozen=True)
class UserRecord:
    """One UE at one time step, before or after a policy decision.

    y is only defined when a band switch was requested (x_br = 1);
    post_decision_band equals the target band iff y = 1.
    """

    ue_id: int
    time_step: int
    serving_band: str           # "sub6" or "mmwave"
    rate_sub6: float            # ground-truth achievable rate, bit/s
    rate_mmwave: float
    threshold_sub6: float
    threshold_mmwave: float
    coords: tuple[float, float, float] = (0.0, 0.0, 0.0)
    x_br: int | None = None
    y: int | None = None
    post_decision_band: str | None = None
    effective_rate: float | None = None

    @property
    def target_band(self) -> str:
        return "mmwave" if self.serving_band == "sub6" else "sub6"

    @property
    def current_rate(self) -> float:
        return self.rate_sub6 if self.serving_band == "sub6" else self.rate_mmwave

    @property
    def target_rate(self) -> float:
        return self.rate_mmwave if self.serving_band == "sub6" else self.rate_sub6

    @property
    def current_threshold(self) -> float:
        return self.threshold_sub6 if self.serving_band == "sub6" else self.threshold_mmwave

    def rate_on(self, band_id: str) -> float:
        return self.rate_sub6 if band_id == "sub6" else self.rate_mmwave


def _finish(rec: UserRecord, frame: FrameSchedule, kind: str, x_br: int,
            y: int | None, post_band: str) -> UserRecord:
    requested = x_br == 1
    w = frame.weight(post_band, kind, requested)
    return replace(
        rec,
        x_br=x_br,
        y=y,
        post_decision_band=post_band,
        effective_rate=w * rec.rate_on(post_band),
    )


def decide_legacy(rec: UserRecord, frame: FrameSchedule) -> UserRecord:
    """Measurement-based: request below threshold, grant on measured rates.

    The gap is charged whenever a request was made, granted or not.
    """
    x_br = int(rec.current_rate < rec.current_threshold)
    if x_br == 0:
        return _finish(rec, frame, "legacy", 0, None, rec.serving_band)
    y = int(rec.target_rate > rec.current_rate)
    post = rec.target_band if y == 1 else rec.serving_band
    return _finish(rec, frame, "legacy", 1, y, post)


def decide_blind(rec: UserRecord, frame: FrameSchedule) -> UserRecord:
    """Every request is granted; no measurement gap, signaling only."""
    x_br = int(rec.current_rate < rec.current_threshold)
    if x_br == 0:
        return _finish(rec, frame, "blind", 0, None, rec.serving_band)
    return _finish(rec, frame, "blind", 1, 1, rec.target_band)


def decide_optimal(rec: UserRecord, frame: FrameSchedule) -> UserRecord:
    """Genie benchmark: pick the band maximizing (1 - T_B/T_C) * R each frame.

    No threshold; request and decision are combined (x_br = 1 for all).
    Ties stay on the current band.
    """
    weighted_current = frame.base_weight(rec.serving_band) * rec.current_rate
    weighted_target = frame.base_weight(rec.target_band) * rec.target_rate
    y = int(weighted_target > weighted_current)
    post = rec.target_band if y == 1 else rec.serving_band
    return _finish(rec, frame, "optimal", 1, y, post)


def decide_proposed(rec: UserRecord, frame: FrameSchedule, model=None,
                    prediction: int | None = None) -> UserRecord:
    """Classifier-predicted grant: requests as legacy, y^ from the model.

    Either a trained model or a precomputed prediction must be supplied;
    an invalidated model refuses to predict.
    """
    if model is not None and not getattr(model, "valid", False):
        raise InvalidModelError("classifier was invalidated; retrain before predicting")
    x_br = int(rec.current_rate < rec.current_threshold)
    if x_br == 0:
        return _finish(rec, frame, "proposed", 0, None, rec.serving_band)
    if prediction is None:
        if model is None:
            raise ValueError("decide_proposed needs a model or a precomputed prediction")
        prediction = int(model.predict_records([rec], frame)[0][0])
    y = int(prediction)
    post = rec.target_band if y == 1 else rec.serving_band
    return _finish(rec, frame, "proposed", 1, y, post)


