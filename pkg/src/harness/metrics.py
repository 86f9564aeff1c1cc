import numpy as np

from src.tensor_core.errors import DimensionMismatchError


def rel_error(x_hat, x):
    x_hat = np.asarray(x_hat, dtype=float)
    x = np.asarray(x, dtype=float)
    if x_hat.shape != x.shape:
        raise DimensionMismatchError(f"Estimate dims {x_hat.shape} do not match truth dims {x.shape}.")
    scale = np.linalg.norm(x)
    if scale == 0.0:
        raise ValueError("Relative error is undefined for a zero ground truth.")
    return float(np.linalg.norm(x_hat - x) / scale)


def degrees_of_freedom(dims, r):
    """r (d1 + d2 + d3): parameters in an r-term CP decomposition."""
    if r < 0:
        raise ValueError("Rank must be nonnegative.")
    return int(r * sum(dims))
