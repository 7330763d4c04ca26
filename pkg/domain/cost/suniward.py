"""
S-UNIWARD spatial costs: relative residual change in three directional
Daubechies-8 wavelet sub-bands, summed over the bands.
"""
import numpy as np
from scipy import signal

from domain.cost.model import CostMap, WET_VALUE
from domain.cost.rules import apply_wet_bounds
from domain.image.model import GrayImage

SIGMA = 1.0

# Daubechies-8 decomposition high-pass filter
DB8_HIGH = np.array([
    -0.0544158422, 0.3128715909, -0.6756307363, 0.5853546837,
    0.0158291053, -0.2840155430, -0.0004724846, 0.1287474266,
    0.0173693010, -0.0440882539, -0.0139810279, 0.0087460940,
    0.0048703530, -0.0003917404, -0.0006754494, -0.0001174768,
])
DB8_LOW = ((-1.0) ** np.arange(DB8_HIGH.size)) * DB8_HIGH[::-1]

FILTER_BANK = (
    np.outer(DB8_LOW, DB8_HIGH),
    np.outer(DB8_HIGH, DB8_LOW),
    np.outer(DB8_HIGH, DB8_HIGH),
)
PAD = max(max(f.shape) for f in FILTER_BANK)


def _conv_same(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # central window of the full convolution; for even kernels the window
    # starts one sample later than scipy's own 'same' mode
    full = signal.convolve2d(x, kernel, mode="full")
    r0, c0 = kernel.shape[0] // 2, kernel.shape[1] // 2
    return full[r0:r0 + x.shape[0], c0:c0 + x.shape[1]]


def suniward_profile(pixels: np.ndarray) -> np.ndarray:
    x = np.asarray(pixels, dtype=np.float64)
    padded = np.pad(x, PAD, mode="symmetric")
    total = np.zeros_like(padded)
    for kernel in FILTER_BANK:
        residual = _conv_same(padded, kernel)
        xi = _conv_same(1.0 / (np.abs(residual) + SIGMA), np.rot90(np.abs(kernel), 2))
        if kernel.shape[0] % 2 == 0:
            xi = np.roll(xi, 1, axis=0)
        if kernel.shape[1] % 2 == 0:
            xi = np.roll(xi, 1, axis=1)
        total += xi
    cost = total[PAD:PAD + x.shape[0], PAD:PAD + x.shape[1]]
    cost = np.nan_to_num(cost, nan=WET_VALUE, posinf=WET_VALUE)
    return np.minimum(cost, WET_VALUE)


def suniward_cost(cover: GrayImage) -> CostMap:
    return apply_wet_bounds(CostMap.symmetric(suniward_profile(cover.pixels)), cover)
