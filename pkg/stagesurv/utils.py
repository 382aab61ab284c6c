import hashlib
import math
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from stagesurv.const import PROBABILITY_CLAMP

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]
BoolArray = NDArray[np.bool_]

# raised by numpy and scipy numerics; caught next to StageSurvException where a failure is recorded, not fatal
NUMERIC_ERRORS = (np.linalg.LinAlgError, ValueError, FloatingPointError)


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Derive an independent random stream from the root seed and fixed offsets.

    Streams depend only on (seed, keys), never on call order, so serial and parallel work agree.

    Example usage:
        rng = derive_rng(42, tree_index)
    """
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def sigmoid(z: FloatArray | float) -> FloatArray:
    return np.asarray(expit(z), dtype=np.float64)


def clamp_probability(p: FloatArray, eps: float = PROBABILITY_CLAMP) -> FloatArray:
    return np.clip(p, eps, 1.0 - eps)


def log_odds(p: float) -> float:
    return math.log(p / (1.0 - p))


def format_count(n: int) -> str:
    return f"{n:,}"


def format_p_value(p: float) -> str:
    """p-values are never printed as 0.0"""
    if p < 1e-4:
        return "<0.0001"
    return f"{p:.4f}"


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
