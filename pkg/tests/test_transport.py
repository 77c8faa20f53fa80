import numpy as np
import pytest

from teleopsim.errors import ConfigError, Disconnected
from teleopsim.transport import SimulatedLink, TransportConfig, VirtualClock, channel_pair


def make_link(latency=0.016, jitter=0.0, drop=0.0, seed=0):
    clock = VirtualClock()
    cfg = TransportConfig(latency_mean=latency, jitter_sd=jitter, drop_prob=drop)
    return SimulatedLink(cfg, clock, np.random.default_rng(seed)), clock


def test_exact_delivery_without_jitter():
    link, clock = make_link()
    for i in range(10):
        clock.advance_to(i * 0.1)
        link.send(f"m{i}".encode())
    clock.advance_to(0.9 + 0.016)
    out = link.poll()
    assert len(out) == 10
    for i, (arrival, payload) in enumerate(out):
        assert arrival == i * 0.1 + 0.016
        assert payload == f"m{i}".encode()


def test_nothing_before_latency_elapses():
    link, clock = make_link()
    link.send(b"x")
    clock.advance_to(0.0159)
    assert link.poll() == []
    clock.advance_to(0.016)
    assert len(link.poll()) == 1


def test_full_drop_delivers_nothing():
    link, clock = make_link(drop=1.0)
    for _ in range(100):
        link.send(b"x")
    clock.advance_to(10.0)
    assert link.poll() == []
    assert link.pending() == 0


def test_fifo_under_jitter():
    link, clock = make_link(jitter=0.004, seed=3)
    payloads = [f"{i}".encode() for i in range(500)]
    for i, p in enumerate(payloads):
        clock.advance_to(i * 0.001)  # sends packed tightly so jitter could reorder
        link.send(p)
    clock.advance_to(10.0)
    out = link.poll()
    assert [p for _, p in out] == payloads
    arrivals = [a for a, _ in out]
    assert all(b >= a for a, b in zip(arrivals, arrivals[1:]))


def test_mean_latency_under_jitter():
    link, clock = make_link(jitter=0.002, seed=7)
    n = 2000
    sends = []
    for i in range(n):
        t = i * 0.02
        clock.advance_to(t)
        link.send(b"m")
        sends.append(t)
    clock.advance_to(n * 0.02 + 1.0)
    arrivals = [a for a, _ in link.poll()]
    lat = np.array(arrivals) - np.array(sends)
    assert abs(lat.mean() - 0.016) < 5 * 0.002 / np.sqrt(n)


def test_closed_link_raises():
    link, clock = make_link()
    link.close()
    with pytest.raises(Disconnected):
        link.send(b"x")
    with pytest.raises(Disconnected):
        link.poll()


def test_channel_pair_is_independent():
    clock = VirtualClock()
    up, down = channel_pair(TransportConfig(latency_mean=0.01), clock, np.random.default_rng(0))
    up.send(b"to-robot")
    down.send(b"to-cockpit")
    clock.advance_to(0.02)
    assert [p for _, p in up.poll()] == [b"to-robot"]
    assert [p for _, p in down.poll()] == [b"to-cockpit"]


def test_clock_never_goes_backwards():
    clock = VirtualClock()
    clock.advance_to(1.0)
    with pytest.raises(ConfigError):
        clock.advance_to(0.5)
    with pytest.raises(ConfigError):
        clock.advance(-0.1)


def test_invalid_transport_config():
    with pytest.raises(ConfigError):
        TransportConfig(latency_mean=-1.0)
    with pytest.raises(ConfigError):
        TransportConfig(drop_prob=1.5)
