"""
Context stacking of LPS frames.
"""


import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..type_helpers import FloatArray


def stack_context(values: np.ndarray, context: int) -> FloatArray:
    """
    Pairs every frame with its neighbors. Frames beyond the edges repeat
    the first or last frame.

    Args:
        values: Feature matrix, one row per frame.
        context: Neighbors to include on each side.

    Returns:
        Array of shape (frames, 1, 2 * context + 1, bins), where
        `[f, 0, context]` is frame `f`.

    """
    padded = np.pad(values, ((context, context), (0, 0)), mode="edge")
    windows = sliding_window_view(padded, 2 * context + 1, axis=0)
    # The window axis comes out last.
    return np.ascontiguousarray(windows.transpose(0, 2, 1))[:, None]
