"""Repeated random half-sample partitions of the observation indices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SampleSplit", "SplitPlan", "make_splits", "split_rng", "SPLIT_STREAM", "CV_STREAM"]

# substream tags hung off the master seed; keeping them distinct lets the
# screening stage draw fold assignments without touching the split stream
SPLIT_STREAM = 0
CV_STREAM = 1


def split_rng(seed: int, split_id: int, stream: int = SPLIT_STREAM) -> np.random.Generator:
    """Independent generator for one split's substream of the master seed.

    Streams are keyed by (split_id, stream), so increasing the number of
    splits never reshuffles the ones already drawn.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(split_id, stream)))


@dataclass(frozen=True)
class SampleSplit:
    split_id: int
    screen_idx: np.ndarray  # rows used to select variables
    test_idx: np.ndarray  # rows used to compute p-values


@dataclass(frozen=True)
class SplitPlan:
    n: int
    seed: int
    splits: tuple[SampleSplit, ...]

    @property
    def count(self) -> int:
        return len(self.splits)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "splits": [
                {"screen": s.screen_idx.tolist(), "test": s.test_idx.tolist()}
                for s in self.splits
            ],
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "SplitPlan":
        splits = tuple(
            SampleSplit(
                b,
                np.asarray(entry["screen"], dtype=np.intp),
                np.asarray(entry["test"], dtype=np.intp),
            )
            for b, entry in enumerate(payload["splits"])
        )
        return cls(n=int(payload["n"]), seed=int(payload["seed"]), splits=splits)


def make_splits(n: int, count: int, seed: int) -> SplitPlan:
    """Draw `count` uniform partitions of {0..n-1} into two halves.

    The screening half gets floor(n/2) rows and the testing half the
    rest (one more when n is odd). Each split is a seeded shuffle on its
    own substream, so the plan is reproducible and extensible.
    """
    if n < 4:
        raise ValueError(f"need at least 4 observations to split, got {n}")
    if count < 1:
        raise ValueError("need at least one split")
    half = n // 2
    splits = []
    for b in range(count):
        order = split_rng(seed, b).permutation(n)
        screen_idx = np.sort(order[:half])
        test_idx = np.sort(order[half:])
        splits.append(SampleSplit(b, screen_idx, test_idx))
    return SplitPlan(n=n, seed=seed, splits=tuple(splits))
