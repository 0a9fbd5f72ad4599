"""Row-parallel assembly of dense matrices."""

import concurrent.futures as cf
import logging
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

RowFiller = Callable[[slice], np.ndarray]


def assemble_rows(n_rows: int, n_cols: int, fill: RowFiller, threads: int = 1, chunk: int = 64) -> np.ndarray:
    """Fill an ``(n_rows, n_cols)`` matrix chunk by chunk.

    Each chunk is computed independently by ``fill(rows)`` and written to its
    own slice, so the result does not depend on the number of threads.

    Args:
        n_rows: Number of rows
        n_cols: Number of columns
        fill: Callable returning the rows selected by a slice
        threads: Worker count; 1 runs inline
        chunk: Rows per task
    """
    out = np.empty((n_rows, n_cols))
    slices = [slice(start, min(start + chunk, n_rows)) for start in range(0, n_rows, chunk)]

    def _run(rows: slice) -> None:
        out[rows] = fill(rows)

    if threads <= 1 or len(slices) <= 1:
        for rows in slices:
            _run(rows)
        return out
    logger.debug(f"Assembling {n_rows}x{n_cols} matrix on {threads} threads")
    with cf.ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [executor.submit(_run, rows) for rows in slices]
        for future in cf.as_completed(futures):
            future.result()
    return out
