# quiet.py
import os
import warnings
import logging
import contextlib

import numpy as np

# Worker processes each run their own numpy; one BLAS thread apiece.
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")


def apply_library_quiet_logging() -> None:
    """
    Set logging levels for chatty libraries to ERROR.
    """
    for name in ("sympy", "mpmath", "multiprocessing", "uvicorn.access", "httpx"):
        logging.getLogger(name).setLevel(logging.ERROR)


@contextlib.contextmanager
def quiet_numerics():
    """
    Silence floating point warnings inside Newton iterations; overflow shows up
    in the residuals instead.
    """
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", RuntimeWarning)
        warnings.simplefilter("ignore", np.exceptions.ComplexWarning)
        yield
