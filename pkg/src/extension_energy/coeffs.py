"""Sparse integer-indexed coefficient vectors (Fourier modes of functions on the circle)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class Coefficients:
    """Finite map ``k -> a_k`` stored as sorted unique frequencies plus values."""

    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.complex128).ravel()
        if freqs.shape != values.shape:
            raise ValueError(f"freqs {freqs.shape} and values {values.shape} differ in shape")
        if freqs.size and np.any(np.diff(freqs) <= 0):
            order = np.argsort(freqs, kind="stable")
            freqs, values = freqs[order], values[order]
            if np.any(np.diff(freqs) == 0):
                raise ValueError("duplicate frequencies")
        freqs.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, complex]) -> "Coefficients":
        keys = sorted(int(k) for k in mapping)
        return cls(np.array(keys, dtype=np.int64), np.array([mapping[k] for k in keys], dtype=complex))

    @classmethod
    def coerce(cls, g) -> "Coefficients":
        if isinstance(g, Coefficients):
            return g
        if isinstance(g, Mapping):
            return cls.from_mapping(g)
        raise TypeError(f"cannot interpret {type(g).__name__} as coefficients")

    @classmethod
    def empty(cls) -> "Coefficients":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex))

    def __len__(self) -> int:
        return int(self.freqs.size)

    def to_dict(self) -> dict[int, complex]:
        return {int(k): complex(v) for k, v in zip(self.freqs, self.values)}

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    @property
    def max_abs_freq(self) -> int:
        return int(np.max(np.abs(self.freqs))) if self.freqs.size else 0

    @property
    def span(self) -> int:
        """Largest frequency difference between two modes in the support."""
        return int(self.freqs[-1] - self.freqs[0]) if self.freqs.size else 0

    def scaled(self, factors) -> "Coefficients":
        return Coefficients(self.freqs, self.values * np.asarray(factors))
