"""Input validation helpers in the style of ``sklearn.utils.validation``."""

import numpy as np
from sklearn.utils import check_array


def check_series(y, name="Y", allow_empty=False):
    """Return ``y`` as a finite 1-D float array.

    Column vectors of shape ``(T, 1)`` are accepted and flattened, which lets
    the estimators sit behind sklearn pipelines that insist on 2-D input.
    """
    arr = check_array(
        y,
        ensure_2d=False,
        dtype=np.float64,
        ensure_all_finite=True,
        ensure_min_samples=0 if allow_empty else 1,
        input_name=name,
    )
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"{name} must be a single series, got shape {arr.shape}")
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got {arr.ndim} dimensions")
    return arr


def check_vector(theta, dim=None, name="theta"):
    arr = np.asarray(theta, dtype=np.float64).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_positive(value, name, strict=True):
    value = float(value)
    if not np.isfinite(value) or (value <= 0 if strict else value < 0):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value}")
    return value
