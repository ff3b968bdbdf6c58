"""Averaged Nash regret and Nash regret over a recorded sequence of gaps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RegretSeries:
    """NE-gaps recorded at iterations ``steps`` (rows) for every agent (columns)."""

    gaps: np.ndarray
    steps: np.ndarray | None = None

    def __post_init__(self):
        self.gaps = np.atleast_2d(np.asarray(self.gaps, dtype=float))
        if self.gaps.size == 0:
            raise ValueError("empty regret series")
        if np.any(self.gaps < 0):
            raise ValueError("NE-gaps must be non-negative")
        if self.steps is None:
            self.steps = np.arange(len(self.gaps))
        self.steps = np.asarray(self.steps)

    def __len__(self):
        return len(self.gaps)

    @property
    def n_agents(self):
        return self.gaps.shape[1]

    def agent_prefix(self):
        """``(1/M') sum_{m < M'} gap_i(m)`` for every prefix, shape (M, n)."""
        return np.cumsum(self.gaps, axis=0) / np.arange(1, len(self) + 1)[:, None]

    def avg_prefix(self):
        return self.agent_prefix().max(axis=1)

    def nash_prefix(self):
        return np.cumsum(self.gaps.max(axis=1)) / np.arange(1, len(self) + 1)


def _length(series, M):
    M = len(series) if M is None else int(M)
    if not 1 <= M <= len(series):
        raise ValueError(f"prefix length {M} outside 1..{len(series)}")
    return M


def avg_nash_regret(series, agent=None, M=None):
    """Per-agent time-average of gaps over the first ``M`` points; max over agents when ``agent`` is None."""
    M = _length(series, M)
    means = series.gaps[:M].mean(axis=0)
    return float(means.max() if agent is None else means[agent])


def nash_regret(series, M=None):
    """Time-average over the first ``M`` points of the largest per-agent gap."""
    M = _length(series, M)
    return float(series.gaps[:M].max(axis=1).mean())


def sandwich_violation(series):
    """Largest violation of ``NR/n <= ANR <= NR`` across all prefixes (0 when it holds)."""
    anr = series.avg_prefix()
    nr = series.nash_prefix()
    low = np.max(nr / series.n_agents - anr)
    high = np.max(anr - nr)
    return float(max(low, high, 0.0))
