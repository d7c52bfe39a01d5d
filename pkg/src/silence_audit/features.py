"""Silence-duration feature and standard normalization."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .silence import SilenceProfile

STD_FLOOR = 1e-12


class DurationFeatureMode(str, enum.Enum):
    LEADING = "leading"
    LEADING_PLUS_TRAILING = "leading+trailing"

    @classmethod
    def parse(cls, value: "str | DurationFeatureMode") -> "DurationFeatureMode":
        if isinstance(value, cls):
            return value
        aliases = {"leading_plus_trailing": cls.LEADING_PLUS_TRAILING}
        return aliases.get(value) or cls(value)


def extract(profile: SilenceProfile, mode: DurationFeatureMode | str = DurationFeatureMode.LEADING) -> float:
    mode = DurationFeatureMode.parse(mode)
    if mode is DurationFeatureMode.LEADING:
        return profile.leading_s
    return profile.leading_s + profile.trailing_s


@dataclass(frozen=True)
class Normalizer:
    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError(f"std must be positive, got {self.std}")

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std}


def fit(values: Sequence[float]) -> Normalizer:
    """Mean and population std; a (near-)constant input gets std 1."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise ValueError(f"need at least 2 values to fit a normalizer, got {x.size}")
    std = float(x.std())
    if std < STD_FLOOR:
        std = 1.0
    return Normalizer(float(x.mean()), std)


def apply(n: Normalizer, x):
    """Standardize a scalar or array with a fitted normalizer."""
    if np.ndim(x) == 0:
        return (float(x) - n.mean) / n.std
    return (np.asarray(x, dtype=np.float64) - n.mean) / n.std
