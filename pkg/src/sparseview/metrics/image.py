"""Image quality metrics on [0, 1] images: PSNR and SSIM.

SSIM follows the standard published formulation: 11x11 Gaussian window
with sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1.0, no sample
covariance correction, and the border where the window does not fit is
excluded from the mean.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import MetricError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _as_float_image(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image)
    if arr.dtype.kind in "ui":
        arr = arr.astype(float) / 255.0
    return np.asarray(arr, dtype=float)


def psnr(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Peak signal-to-noise ratio in dB, peak fixed at 1.0.

    Identical images (MSE of 0) report ``math.inf``. An optional boolean
    mask restricts the mean to selected pixels.
    """
    a = _as_float_image(a)
    b = _as_float_image(b)
    if a.shape != b.shape:
        raise MetricError(f"image shapes differ: {a.shape} vs {b.shape}")
    err = (a - b) ** 2
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != a.shape[:2]:
            raise MetricError("mask shape does not match the images")
        if not mask.any():
            raise MetricError("empty mask")
        err = err[mask]
    mse = float(err.mean())
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) // 2
    x = np.arange(-half, half + 1, dtype=float)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    k /= k.sum()
    return np.outer(k, k)


def _ssim_single(a: np.ndarray, b: np.ndarray, kernel: np.ndarray) -> float:
    win = kernel.shape[0]
    wa = sliding_window_view(a, (win, win))
    wb = sliding_window_view(b, (win, win))
    axes = ([2, 3], [0, 1])
    mu_a = np.tensordot(wa, kernel, axes=axes)
    mu_b = np.tensordot(wb, kernel, axes=axes)
    ex_aa = np.tensordot(wa * wa, kernel, axes=axes)
    ex_bb = np.tensordot(wb * wb, kernel, axes=axes)
    ex_ab = np.tensordot(wa * wb, kernel, axes=axes)
    var_a = ex_aa - mu_a**2
    var_b = ex_bb - mu_b**2
    cov = ex_ab - mu_a * mu_b
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )
    return float(ssim_map.mean())


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local structural similarity; 3-channel images average the
    per-channel values."""
    a = _as_float_image(a)
    b = _as_float_image(b)
    if a.shape != b.shape:
        raise MetricError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise MetricError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    if a.ndim == 2:
        return _ssim_single(a, b, kernel)
    if a.ndim == 3 and a.shape[2] in (1, 3):
        vals = [_ssim_single(a[:, :, c], b[:, :, c], kernel) for c in range(a.shape[2])]
        return float(np.mean(vals))
    raise MetricError(f"expected single- or 3-channel images, got shape {a.shape}")
