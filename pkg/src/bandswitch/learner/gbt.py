"""Gradient-boosted binary decision trees, second-order logistic loss.

Split gain and leaf weights follow the regularized objective
loss + alpha*||w||_1 + (lambda/2)*||w||_2^2 + gamma*T over leaf weights w
and leaf count T: the l2 term and gamma enter the gain directly, the l1
term soft-thresholds the leaf gradient sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import expit

from .features import DegenerateLabelsError

L1_GRID = (0.0, 1.0)
L2_GRID = (0.0, 1.0)
GAMMA_GRID = (0.0, 0.02, 0.04)
SUBSAMPLE_GRID = (0.5, 0.7)
MIN_CHILD_WEIGHT_GRID = (0.0, 10.0)

_EPS = 1e-12


@dataclass(frozen=True)
class GbtHyperparams:
    l1_alpha: float = 0.0
    l2_lambda: float = 1.0
    complexity_gamma: float = 0.0
    subsample: float = 1.0          # row fraction drawn per tree
    min_child_weight: float = 0.0   # minimum hessian sum per child
    n_trees: int = 100
    max_depth: int = 4
    shrinkage: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must lie in (0, 1]")
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")


def default_gbt_grid(**overrides) -> list[GbtHyperparams]:
    """Full regularization grid from the hyperparameter table."""
    return [
        GbtHyperparams(l1_alpha=a, l2_lambda=l, complexity_gamma=g,
                       subsample=s, min_child_weight=c, **overrides)
        for a, l, g, s, c in product(
            L1_GRID, L2_GRID, GAMMA_GRID, SUBSAMPLE_GRID, MIN_CHILD_WEIGHT_GRID
        )
    ]


def _soft_threshold(g: float, alpha: float) -> float:
    return math.copysign(max(abs(g) - alpha, 0.0), g)


def leaf_weight(g_sum: float, h_sum: float, hp: GbtHyperparams) -> float:
    """Objective-minimizing leaf value -T_alpha(G) / (H + lambda)."""
    return -_soft_threshold(g_sum, hp.l1_alpha) / (h_sum + hp.l2_lambda)


def leaf_score(g_sum: float, h_sum: float, hp: GbtHyperparams) -> float:
    """Objective reduction of one leaf at its optimal weight."""
    t = _soft_threshold(g_sum, hp.l1_alpha)
    return t * t / (h_sum + hp.l2_lambda)


def _soft_threshold_vec(g: np.ndarray, alpha: float) -> np.ndarray:
    return np.sign(g) * np.maximum(np.abs(g) - alpha, 0.0)


def find_best_split(x: np.ndarray, g: np.ndarray, h: np.ndarray,
                    hp: GbtHyperparams):
    """Best (feature, threshold, gain) over all features, or None.

    gain = (score_left + score_right - score_parent)/2 - gamma; splits
    with nonpositive gain or a child below min_child_weight are rejected.
    Ties keep the first candidate in (feature, threshold) order.
    """
    g_total, h_total = float(g.sum()), float(h.sum())
    parent = leaf_score(g_total, h_total, hp)
    best = None
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        gc = np.cumsum(g[order])
        hc = np.cumsum(h[order])
        # candidate split after position i, only between distinct values
        valid = np.flatnonzero(xs[:-1] < xs[1:])
        if valid.size == 0:
            continue
        g_left, h_left = gc[valid], hc[valid]
        g_right, h_right = g_total - g_left, h_total - h_left
        t_left = _soft_threshold_vec(g_left, hp.l1_alpha)
        t_right = _soft_threshold_vec(g_right, hp.l1_alpha)
        gains = 0.5 * (
            t_left * t_left / (h_left + hp.l2_lambda)
            + t_right * t_right / (h_right + hp.l2_lambda)
            - parent
        ) - hp.complexity_gamma
        gains[(h_left < hp.min_child_weight) | (h_right < hp.min_child_weight)] = -np.inf
        k = int(np.argmax(gains))  # first max: lowest threshold wins ties
        if gains[k] > 0 and (best is None or gains[k] > best[2] + 1e-15):
            i = valid[k]
            best = (j, float((xs[i] + xs[i + 1]) / 2.0), float(gains[k]))
    return best


def _build_tree(x, g, h, depth_left, hp) -> dict:
    split = find_best_split(x, g, h, hp) if depth_left > 0 and x.shape[0] > 1 else None
    if split is None:
        return {"value": leaf_weight(float(g.sum()), float(h.sum()), hp)}
    j, threshold, _ = split
    mask = x[:, j] < threshold
    return {
        "feature": j,
        "threshold": threshold,
        "left": _build_tree(x[mask], g[mask], h[mask], depth_left - 1, hp),
        "right": _build_tree(x[~mask], g[~mask], h[~mask], depth_left - 1, hp),
    }


def _tree_margins(node: dict, x: np.ndarray, out: np.ndarray, mask: np.ndarray) -> None:
    if "value" in node:
        out[mask] += node["value"]
        return
    left = mask & (x[:, node["feature"]] < node["threshold"])
    _tree_margins(node["left"], x, out, left)
    _tree_margins(node["right"], x, out, mask & ~left)


def tree_is_leaf(node: dict) -> bool:
    return "value" in node


class GbtClassifier:
    """Boosted ensemble; trees are nested dicts, margins additive."""

    def __init__(self, hp: GbtHyperparams):
        self.hp = hp
        self.base_margin = 0.0
        self.trees: list[dict] = []

    def fit(self, x, y, rng: np.random.Generator) -> "GbtClassifier":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if y.size == 0 or len(np.unique(y)) < 2:
            raise DegenerateLabelsError("labels contain a single class")
        p0 = float(np.clip(y.mean(), _EPS, 1.0 - _EPS))
        self.base_margin = math.log(p0 / (1.0 - p0))
        margins = np.full(y.size, self.base_margin)
        n = y.size
        n_draw = max(1, math.ceil(self.hp.subsample * n))
        for _ in range(self.hp.n_trees):
            p = expit(margins)
            g = p - y
            h = np.maximum(p * (1.0 - p), _EPS)
            rows = rng.choice(n, size=n_draw, replace=False) if n_draw < n else np.arange(n)
            tree = _build_tree(x[rows], g[rows], h[rows], self.hp.max_depth, self.hp)
            self.trees.append(tree)
            delta = np.zeros(n)
            _tree_margins(tree, x, delta, np.ones(n, dtype=bool))
            margins += self.hp.shrinkage * delta
        return self

    def margins(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[0], self.base_margin)
        mask = np.ones(x.shape[0], dtype=bool)
        for tree in self.trees:
            delta = np.zeros(x.shape[0])
            _tree_margins(tree, x, delta, mask)
            out += self.hp.shrinkage * delta
        return out

    def scores(self, x) -> np.ndarray:
        return expit(self.margins(x))

    def to_dict(self) -> dict:
        return {
            "base_margin": self.base_margin,
            "shrinkage": self.hp.shrinkage,
            "trees": self.trees,
        }

    @classmethod
    def from_dict(cls, data: dict, hp: GbtHyperparams) -> "GbtClassifier":
        model = cls(hp)
        model.base_margin = float(data["base_margin"])
        model.trees = data["trees"]
        return model
