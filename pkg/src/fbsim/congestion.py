"""Seeded backpressure emulator.

Randomizes bus timing without ever breaking protocol rules: it can delay
when the bridge asserts VALID (R/B responses) and deassert the bridge's
READY toward the DUT (AR/AW/W requests), both driven by per-(port,
channel) SplitMix64 streams. Adding or removing a port never perturbs
another port's draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .axi import CHANNEL_CLASSES

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Tiny, portable PRNG; one instance per (port, channel) stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix64(self.state)

    def next_float(self) -> float:
        # 53 uniform mantissa bits in [0, 1)
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_range(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]. Modulo bias is negligible for the
        single-digit spans used here."""
        if hi <= lo:
            return lo
        return lo + self.next_u64() % (hi - lo + 1)


def fnv1a64(data: str) -> int:
    h = 0xCBF29CE484222325
    for b in data.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def stream_seed(seed: int, port: str, channel: str) -> int:
    """Documented mixing: fold the port name hash and channel ordinal into
    the profile seed through two SplitMix64 scrambles."""
    ordinal = CHANNEL_CLASSES.index(channel)
    s = _mix64((seed ^ fnv1a64(port)) & _MASK64)
    return _mix64((s + (ordinal + 1) * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class ChannelCongestion:
    stall_prob: float = 0.0
    delay_min: int = 0
    delay_max: int = 0

    def __post_init__(self):
        if not 0.0 <= self.stall_prob <= 1.0:
            raise ValueError("stall probability must be in [0, 1]")
        if not 0 <= self.delay_min <= self.delay_max:
            raise ValueError("delay bounds must satisfy 0 <= min <= max")


@dataclass(frozen=True)
class CongestionProfile:
    """Per channel class stall probability and valid-delay bounds.

    seed=None means: inherit the scenario's top-level seed.
    """

    channels: dict[str, ChannelCongestion] = field(
        default_factory=lambda: {ch: ChannelCongestion() for ch in CHANNEL_CLASSES})
    seed: int | None = None

    @classmethod
    def quiet(cls) -> "CongestionProfile":
        return cls()

    @classmethod
    def uniform(cls, stall_prob: float, delay_min: int = 0, delay_max: int = 0,
                seed: int | None = None) -> "CongestionProfile":
        cfg = ChannelCongestion(stall_prob, delay_min, delay_max)
        return cls(channels={ch: cfg for ch in CHANNEL_CLASSES}, seed=seed)

    def channel(self, name: str) -> ChannelCongestion:
        return self.channels.get(name, ChannelCongestion())

    @property
    def is_quiet(self) -> bool:
        return all(c.stall_prob == 0.0 and c.delay_max == 0
                   for c in self.channels.values())


class CongestionStreams:
    """Per-port draw engine used by the bridge.

    stall_gate() must be called exactly once per cycle per channel class so
    the draw sequence depends only on (seed, port, channel, cycle);
    draw_valid_delay() is called once per payload queued for presentation.
    """

    def __init__(self, port: str, profile: CongestionProfile, default_seed: int):
        self.profile = profile
        seed = profile.seed if profile.seed is not None else default_seed
        self._gate_rng = {ch: SplitMix64(stream_seed(seed, port, ch))
                          for ch in CHANNEL_CLASSES}
        self._delay_rng = {ch: SplitMix64(stream_seed(seed ^ _MASK64, port, ch))
                           for ch in CHANNEL_CLASSES}

    def stall_gate(self, channel: str) -> bool:
        """True if the channel may proceed this cycle (Bernoulli pass)."""
        draw = self._gate_rng[channel].next_float()
        return draw >= self.profile.channel(channel).stall_prob

    def draw_valid_delay(self, channel: str) -> int:
        cfg = self.profile.channel(channel)
        return self._delay_rng[channel].next_range(cfg.delay_min, cfg.delay_max)
