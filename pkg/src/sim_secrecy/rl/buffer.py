"""Replay buffer that keeps high-reward transitions under a dynamic threshold."""

from __future__ import annotations

import heapq
import itertools
import logging
from collections import deque
from typing import Optional

import numpy as np

from ..core.env import Transition
from ..core.exceptions import EmptyBufferError

logger = logging.getLogger(__name__)


class ReplayBuffer:
    """
    Fixed-capacity store of transitions with reward-based priorities.

    A record's priority is max(reward - threshold, floor), where the threshold is the
    running mean of the last `threshold_window` inserted rewards (or a fixed value).
    When full, the lowest-priority record is evicted, the oldest one on ties; a new
    record below every retained priority is dropped instead. Sampling draws with
    probability proportional to priority.
    """

    def __init__(
        self,
        capacity: int,
        priority_floor: float = 1e-3,
        threshold_window: int = 1000,
        fixed_threshold: Optional[float] = None,
    ):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        if priority_floor <= 0:
            raise ValueError(f"priority_floor must be positive, got {priority_floor}")
        self.capacity = capacity
        self.priority_floor = priority_floor
        self.fixed_threshold = fixed_threshold
        self._recent_rewards: deque[float] = deque(maxlen=threshold_window)
        self._records: list[Transition] = []
        self._priorities: list[float] = []
        self._heap: list[tuple[float, int, int]] = []  # (priority, insertion order, slot)
        self._counter = itertools.count()
        self.evictions = 0
        self.dropped = 0

    def __len__(self) -> int:
        return len(self._records)

    @property
    def threshold(self) -> float:
        if self.fixed_threshold is not None:
            return self.fixed_threshold
        if not self._recent_rewards:
            return 0.0
        return float(np.mean(self._recent_rewards))

    @property
    def priorities(self) -> np.ndarray:
        return np.asarray(self._priorities, dtype=float)

    def priority_for(self, reward: float) -> float:
        return max(reward - self.threshold, self.priority_floor)

    def insert(self, transition: Transition) -> bool:
        """
        Add a transition; return False if it was dropped as the lowest priority.
        """
        priority = self.priority_for(transition.reward)
        self._recent_rewards.append(float(transition.reward))
        order = next(self._counter)

        if len(self._records) < self.capacity:
            slot = len(self._records)
            self._records.append(transition)
            self._priorities.append(priority)
            heapq.heappush(self._heap, (priority, order, slot))
            return True

        lowest, _, slot = self._heap[0]
        if priority < lowest:
            self.dropped += 1
            return False

        heapq.heapreplace(self._heap, (priority, order, slot))
        self._records[slot] = transition
        self._priorities[slot] = priority
        self.evictions += 1
        return True

    def extend(self, transitions) -> int:
        return sum(self.insert(t) for t in transitions)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if not self._records:
            raise EmptyBufferError()
        priorities = self.priorities
        probabilities = priorities / priorities.sum()
        return rng.choice(len(priorities), size=batch_size, replace=True, p=probabilities)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        """
        Draw records with replacement, proportionally to priority.

        Raises:
            EmptyBufferError: If the buffer holds nothing
        """
        return [self._records[i] for i in self.sample_indices(batch_size, rng)]

    def rewards(self) -> np.ndarray:
        return np.array([t.reward for t in self._records])
