"""Hardy-Littlewood maximal function over grid-aligned intervals."""
import numpy as np

from vlex_multipliers.grid.GridFunction import GridFunction
from vlex_multipliers.utils import get_logger

BLOCK_ROWS = 256
METHODS = ("blocked", "exhaustive")


def _averages(prefix: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Averages over samples j..k for every start j in ``starts`` and every
    end k; entries with k < j are -inf.
    """
    count = len(prefix) - 1
    ends = np.arange(count)
    lengths = ends[None, :] - starts[:, None] + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        averages = (prefix[None, 1:] - prefix[starts][:, None]) / lengths
    averages[lengths <= 0] = -np.inf
    return averages


def maximal_function(f: GridFunction, method: str = "blocked") -> GridFunction:
    """(M f)(t_i) = max over j <= i <= k of the mean of |f_j|, ..., |f_k|.

    Both methods evaluate the same prefix-sum averages and take suffix
    maxima along the interval end, so they agree bit for bit.

    :param f: grid function
    :param method: ``blocked`` (vectorized over row blocks) or
        ``exhaustive`` (one interval start at a time)
    :return: real grid function M f
    """
    if method not in METHODS:
        raise ValueError(f"Unknown maximal function method {method!r}, use one of {METHODS}")
    magnitude = f.magnitude
    count = len(magnitude)
    prefix = np.concatenate([[0.0], np.cumsum(magnitude)])
    result = np.full(count, -np.inf)
    nodes = np.arange(count)

    if method == "exhaustive":
        for j in range(count):
            row = _averages(prefix, np.array([j]))[0]
            suffix = np.maximum.accumulate(row[::-1])[::-1]
            result[j:] = np.maximum(result[j:], suffix[j:])
    else:
        for first in range(0, count, BLOCK_ROWS):
            starts = np.arange(first, min(first + BLOCK_ROWS, count))
            rows = _averages(prefix, starts)
            suffix = np.maximum.accumulate(rows[:, ::-1], axis=1)[:, ::-1]
            suffix[nodes[None, :] < starts[:, None]] = -np.inf
            result = np.maximum(result, np.max(suffix, axis=0))

    get_logger(__name__).debug(f"Maximal function on {count} nodes ({method})")
    return GridFunction(f.grid, result)
