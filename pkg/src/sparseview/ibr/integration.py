"""Direction-weighted feature integration across visible source views."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError


def direction_weights(source_dirs: np.ndarray, novel_dir: np.ndarray) -> np.ndarray:
    """Per-view weights ``max(0, cos(angle))`` between unit directions."""
    dirs = np.asarray(source_dirs, dtype=float)
    novel = np.asarray(novel_dir, dtype=float).reshape(3)
    return np.maximum(0.0, dirs @ novel)


def integrate_features(
    features: np.ndarray,
    source_dirs: np.ndarray,
    novel_dir: np.ndarray,
) -> tuple[np.ndarray, float]:
    """Blend per-view features by viewing-direction agreement.

    Args:
        features: (K, D) features sampled from the K visible views.
        source_dirs: (K, 3) unit directions (surface point to camera).
        novel_dir: (3,) unit direction to the novel camera.

    Returns:
        (fused (D,), weight_sum): ``weight_sum == 0`` marks a hole (every
        visible view at 90 degrees or more from the novel direction); the
        fused features are zeros in that case.
    """
    feats = np.asarray(features, dtype=float)
    if feats.ndim != 2 or len(feats) < 1:
        raise ShapeMismatchError("need a (K, D) feature stack with K >= 1")
    if len(source_dirs) != len(feats):
        raise ShapeMismatchError("one direction per feature row is required")
    w = direction_weights(source_dirs, novel_dir)
    total = float(w.sum())
    if total <= 0.0:
        return np.zeros(feats.shape[1]), 0.0
    # Normalize before blending so a lone view's weight cancels exactly.
    normalized = w / total
    return (normalized[:, None] * feats).sum(axis=0), total
