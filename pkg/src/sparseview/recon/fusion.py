"""Cross-view attention fusion of pixel-aligned features.

For one query point the N per-view feature rows are embedded by three
shared linear maps and mixed by scaled dot-product attention, then mean
pooled to a single vector.

Every reduction over the *view* axis is summed in a canonical
(value-sorted) order. Reordering the input rows then reorders identical
summands, so the output rows are bit-exact permutations of each other
instead of drifting by rounding; view order carries no information and
must not leak into results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatchError


@dataclass(frozen=True)
class TransformerWeights:
    """Shared query/key/value embeddings, each (D, d_k)."""

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray

    def __post_init__(self):
        for name in ("w_q", "w_k", "w_v"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 2:
                raise ShapeMismatchError(f"{name} must be a 2-D matrix")
            if not np.all(np.isfinite(arr)):
                raise ShapeMismatchError(f"{name} has non-finite entries")
            object.__setattr__(self, name, arr)
        if not (self.w_q.shape == self.w_k.shape == self.w_v.shape):
            raise ShapeMismatchError("w_q, w_k, w_v must share one shape")

    @property
    def feature_dim(self) -> int:
        return self.w_q.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.w_q.shape[1]

    @classmethod
    def random(cls, feature_dim: int, embed_dim: int, seed: int = 0) -> "TransformerWeights":
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(feature_dim)
        make = lambda: rng.standard_normal((feature_dim, embed_dim)) * scale
        return cls(w_q=make(), w_k=make(), w_v=make())


def _sum_views(values: np.ndarray, axis: int) -> np.ndarray:
    # Canonical-order reduction over a view axis (see module docstring).
    return np.sum(np.sort(values, axis=axis), axis=axis)


def _check_input(phi_mv: np.ndarray, weights: TransformerWeights) -> np.ndarray:
    phi = np.asarray(phi_mv, dtype=float)
    if phi.ndim < 2:
        raise ShapeMismatchError("per-point features must be (N, D)")
    if phi.shape[-1] != weights.feature_dim:
        raise ShapeMismatchError(
            f"feature dim {phi.shape[-1]} does not match weights ({weights.feature_dim})"
        )
    if phi.shape[-2] < 1:
        raise ShapeMismatchError("need at least one view")
    return phi


def _forward(phi: np.ndarray, weights: TransformerWeights):
    q = np.einsum("...nd,dk->...nk", phi, weights.w_q)
    k = np.einsum("...nd,dk->...nk", phi, weights.w_k)
    v = np.einsum("...nd,dk->...nk", phi, weights.w_v)
    logits = np.einsum("...nk,...mk->...nm", q, k) / np.sqrt(weights.embed_dim)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    attn = exp / _sum_views(exp, axis=-1)[..., None]
    fused = _sum_views(attn[..., :, :, None] * v[..., None, :, :], axis=-2)
    return q, k, v, attn, fused


def transformer_fuse(phi_mv: np.ndarray, weights: TransformerWeights) -> np.ndarray:
    """Attention-mixed per-view features.

    Args:
        phi_mv: (N, D) stacked per-view features for one query point;
            leading batch axes are allowed.
        weights: shared embedding matrices.

    Returns:
        (N, d_k) mixed rows (same leading axes as the input).
    """
    phi = _check_input(phi_mv, weights)
    return _forward(phi, weights)[-1]


def transformer_fuse_grad(
    phi_mv: np.ndarray,
    weights: TransformerWeights,
    upstream: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Reverse-mode gradients of :func:`transformer_fuse`.

    Args:
        upstream: (N, d_k) cotangent contracted with the output.

    Returns:
        Gradients w.r.t. ``phi_mv``, ``w_q``, ``w_k``, ``w_v``.
    """
    phi = _check_input(phi_mv, weights)
    if phi.ndim != 2:
        raise ShapeMismatchError("gradients are defined for a single (N, D) point")
    up = np.asarray(upstream, dtype=float)
    if up.shape != (phi.shape[0], weights.embed_dim):
        raise ShapeMismatchError(
            f"upstream shape {up.shape} != {(phi.shape[0], weights.embed_dim)}"
        )
    q, k, v, attn, _ = _forward(phi, weights)
    scale = 1.0 / np.sqrt(weights.embed_dim)

    d_v = attn.T @ up
    d_attn = up @ v.T
    d_logits = attn * (d_attn - np.sum(d_attn * attn, axis=-1, keepdims=True))
    d_q = d_logits @ k * scale
    d_k = d_logits.T @ q * scale
    d_phi = d_q @ weights.w_q.T + d_k @ weights.w_k.T + d_v @ weights.w_v.T
    d_wq = phi.T @ d_q
    d_wk = phi.T @ d_k
    d_wv = phi.T @ d_v
    return d_phi, d_wq, d_wk, d_wv


def fuse_and_pool(phi_att: np.ndarray) -> np.ndarray:
    """Mean over the view rows, (N, d_k) -> (d_k,); batch axes allowed."""
    phi = np.asarray(phi_att, dtype=float)
    if phi.ndim < 2 or phi.shape[-2] < 1:
        raise ShapeMismatchError("pooling needs at least one (N, d_k) row")
    return _sum_views(phi, axis=-2) / phi.shape[-2]
