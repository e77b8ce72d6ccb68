"""Input validation shared by the estimators and the experiment drivers."""

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigurationError


def check_points(X, in_unit_square: bool = False) -> np.ndarray:
    """Validate an (n_points, 2) array of coordinates."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected points with 2 coordinates, got {X.shape[1]}")
    if in_unit_square and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError("points must lie in the unit square")
    return X


def check_epsilon(eps: float) -> int:
    """Return k for eps = 1/k, rejecting scales that do not tile the unit square."""
    if not eps > 0 or eps > 1:
        raise ConfigurationError(f"eps must lie in (0, 1], got {eps}")
    k = int(round(1.0 / eps))
    if abs(k * eps - 1.0) > 1e-12:
        raise ConfigurationError(f"1/eps must be an integer, got eps = {eps}")
    return k
