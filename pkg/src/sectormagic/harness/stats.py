"""Streaming summary statistics with exact mergeability (Welford / Chan)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class SummaryStats:
    """Single-pass count / mean / variance (ddof=1) / min / max accumulator.

    update() is the Welford recurrence; merge() is the pairwise (Chan)
    combination, so chunked accumulation is supported.  Results of a fixed
    update order are bit-reproducible.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = field(default=math.inf)
    max: float = field(default=-math.inf)

    def update(self, x: float) -> "SummaryStats":
        x = float(x)
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)
        if x < self.min:
            self.min = x
        if x > self.max:
            self.max = x
        return self

    def update_many(self, xs) -> "SummaryStats":
        for x in xs:
            self.update(x)
        return self

    def merge(self, other: "SummaryStats") -> "SummaryStats":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count = other.count
            self.mean = other.mean
            self.m2 = other.m2
            self.min = other.min
            self.max = other.max
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.mean += delta * other.count / n
        self.count = n
        self.min = min(self.min, other.min)
        self.max = max(self.max, other.max)
        return self

    @classmethod
    def from_values(cls, xs) -> "SummaryStats":
        return cls().update_many(xs)

    @property
    def variance(self) -> float:
        if self.count < 2:
            return math.nan
        return self.m2 / (self.count - 1)

    @property
    def std(self) -> float:
        v = self.variance
        return math.sqrt(v) if v == v else math.nan

    @property
    def sem(self) -> float:
        if self.count < 2:
            return math.nan
        return self.std / math.sqrt(self.count)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean if self.count else None,
            "variance": None if self.count < 2 else self.variance,
            "std": None if self.count < 2 else self.std,
            "sem": None if self.count < 2 else self.sem,
            "min": None if self.count == 0 else self.min,
            "max": None if self.count == 0 else self.max,
        }
