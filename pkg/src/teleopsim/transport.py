"""Latency-simulating message transport on a pluggable clock.

Messages are delivered in FIFO order after ``latency_mean + N(0, jitter_sd)``
seconds (the draw is clamped at zero); delays apply to each message's own
departure and a later message never overtakes an earlier one (its arrival is
clamped to the previous arrival). Messages drop independently with
``drop_prob``. Delivery timestamps are observable via :meth:`SimulatedLink.poll`.

Tests and scripted sessions drive a :class:`VirtualClock`; live mode uses the
wall clock. One link is single-producer/single-consumer; a session owns both
directions of its channel pair.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, Disconnected


class VirtualClock:
    """Deterministic clock; time advances only when explicitly stepped."""

    def __init__(self, start: float = 0.0):
        self._t = float(start)

    def now(self) -> float:
        return self._t

    def advance(self, dt: float) -> float:
        if dt < 0:
            raise ConfigError("cannot advance a clock backwards")
        self._t += dt
        return self._t

    def advance_to(self, t: float) -> float:
        if t < self._t:
            raise ConfigError("cannot advance a clock backwards")
        self._t = float(t)
        return self._t


class WallClock:
    """Monotonic wall-clock adapter with the same interface."""

    def now(self) -> float:
        return time.monotonic()


@dataclass(frozen=True)
class TransportConfig:
    latency_mean: float = 0.016
    jitter_sd: float = 0.0
    drop_prob: float = 0.0

    def __post_init__(self):
        if self.latency_mean < 0 or self.jitter_sd < 0 or not 0.0 <= self.drop_prob <= 1.0:
            raise ConfigError("invalid transport config")


class SimulatedLink:
    """One direction of a simulated channel."""

    def __init__(self, cfg: TransportConfig, clock, rng: np.random.Generator):
        self.cfg = cfg
        self.clock = clock
        self.rng = rng
        self._queue: deque[tuple[float, bytes]] = deque()
        self._last_arrival = -np.inf
        self._closed = False

    def send(self, payload: bytes) -> None:
        self.send_at(self.clock.now(), payload)

    def send_at(self, t_send: float, payload: bytes) -> None:
        """Enqueue a message stamped at an explicit send time (scripted sources)."""
        if self._closed:
            raise Disconnected("link is closed")
        if self.cfg.drop_prob > 0.0 and self.rng.random() < self.cfg.drop_prob:
            return
        delay = self.cfg.latency_mean
        if self.cfg.jitter_sd > 0.0:
            delay = max(0.0, delay + self.cfg.jitter_sd * self.rng.standard_normal())
        arrival = max(t_send + delay, self._last_arrival)
        self._last_arrival = arrival
        self._queue.append((arrival, payload))

    def poll(self) -> list[tuple[float, bytes]]:
        """Pop every message whose arrival time has passed, oldest first."""
        if self._closed:
            raise Disconnected("link is closed")
        now = self.clock.now()
        out = []
        while self._queue and self._queue[0][0] <= now:
            out.append(self._queue.popleft())
        return out

    def pending(self) -> int:
        return len(self._queue)

    def close(self) -> None:
        self._closed = True


def channel_pair(
    cfg: TransportConfig, clock, rng: np.random.Generator
) -> tuple[SimulatedLink, SimulatedLink]:
    """Independent uplink (cockpit->robot) and downlink (robot->cockpit)."""
    return SimulatedLink(cfg, clock, rng), SimulatedLink(cfg, clock, rng)
