import numpy as np
import pytest

from riou.masks import SegMask


def random_mask(rng: np.random.Generator, width: int, height: int,
                density: float = 0.4) -> SegMask:
    """Random non-empty blob-ish mask (thresholded smoothed noise)."""
    noise = rng.random((height, width))
    # cheap smoothing so masks have structure instead of salt-and-pepper
    k = np.ones(3) / 3.0
    for axis in (0, 1):
        noise = np.apply_along_axis(np.convolve, axis, noise, k, mode="same")
    grid = noise > np.quantile(noise, 1.0 - density)
    if not grid.any():
        grid[height // 2, width // 2] = True
    return SegMask.from_array(grid)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(424242)
