"""Leaky integrate-and-fire arithmetic: continuous Euler form, integer
fixed-point form (substrate-accurate), and spike-event scheduling."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

INT32_LIMIT = 2**31
DECAY_SCALE = 4096  # fixed-point decay denominator: factor (4096 - d) / 4096
MANTISSA_SCALE = 64  # thresholds, biases and payloads are mantissa * 64


@dataclass(frozen=True)
class ContinuousLifParams:
    """Euler-integrated leak: tau_m * dv/dt = -(v - v_rest) + r_membrane * i."""

    tau_m: float
    v_thresh: float
    v_rest: float = 0.0
    v_reset: float = 0.0
    r_membrane: float = 1.0

    def __post_init__(self):
        if self.tau_m <= 0:
            raise ValueError("tau_m must be positive")
        if self.v_thresh <= self.v_reset:
            raise ValueError("v_thresh must exceed v_reset")


@dataclass(frozen=True)
class FixedPointLifParams:
    """Integer two-state neuron: current u with decay du, membrane v with
    decay dv, threshold vth_mant*64, constant drive bias_mant*64."""

    du: int
    dv: int
    vth_mant: int
    bias_mant: int = 0

    def __post_init__(self):
        for name in ("du", "dv", "vth_mant", "bias_mant"):
            if not isinstance(getattr(self, name), int):
                raise TypeError(f"{name} must be an int")
        if not 0 <= self.du <= 4095 or not 0 <= self.dv <= 4095:
            raise ValueError("du and dv must lie in [0, 4095]")
        if self.vth_mant < 1:
            raise ValueError("vth_mant must be >= 1")

    @property
    def v_thresh(self) -> int:
        return self.vth_mant * MANTISSA_SCALE

    @property
    def bias(self) -> int:
        return self.bias_mant * MANTISSA_SCALE


@dataclass(frozen=True)
class ContinuousNeuronState:
    v: float = 0.0
    input_current: float = 0.0


@dataclass(frozen=True)
class FixedPointNeuronState:
    u: int = 0
    v: int = 0


def step_continuous(
    state: ContinuousNeuronState,
    params: ContinuousLifParams,
    i_total: float,
    dt: float,
) -> tuple[ContinuousNeuronState, bool]:
    """One Euler step; spike and reset when v reaches threshold."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = state.v + dt / params.tau_m * (
        -(state.v - params.v_rest) + params.r_membrane * i_total
    )
    spiked = v >= params.v_thresh
    if spiked:
        v = params.v_reset
    return ContinuousNeuronState(v=v, input_current=i_total), spiked


def decay_fixed_point(value: int, d: int) -> int:
    """Multiply by (4096 - d)/4096 with an arithmetic shift; d=4095 zeroes."""
    if not 0 <= d <= 4095:
        raise ValueError("decay constant must lie in [0, 4095]")
    if d == 4095:
        return 0
    return (value * (DECAY_SCALE - d)) >> 12


def step_fixed_point(
    state: FixedPointNeuronState,
    params: FixedPointLifParams,
    a_in: int,
) -> tuple[FixedPointNeuronState, bool]:
    """One integer step: u = decay(u) + a_in; v = decay(v) + u + bias;
    spike strictly above vth_mant*64, then v resets to 0."""
    if not isinstance(a_in, int):
        raise TypeError("a_in must be an int (sum of payload*64 terms)")
    u = decay_fixed_point(state.u, params.du) + a_in
    v = decay_fixed_point(state.v, params.dv) + u + params.bias
    spiked = v > params.v_thresh
    if spiked:
        v = 0
    if abs(u) >= INT32_LIMIT or abs(v) >= INT32_LIMIT:
        raise OverflowError("fixed-point state exceeded signed 32-bit range")
    return FixedPointNeuronState(u=u, v=v), spiked


@dataclass(frozen=True)
class SpikeEvent:
    target: int
    payload: float
    deliver_at: float


class SpikeQueue:
    """Pending deliveries ordered by delivery time (FIFO among ties)."""

    def __init__(self):
        self._heap: list[tuple[float, int, SpikeEvent]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, event: SpikeEvent) -> None:
        heapq.heappush(self._heap, (event.deliver_at, self._seq, event))
        self._seq += 1

    def pop_due(self, now: float) -> list[SpikeEvent]:
        """Remove and return every event with deliver_at <= now."""
        due = []
        while self._heap and self._heap[0][0] <= now:
            due.append(heapq.heappop(self._heap)[2])
        return due


def schedule_spike(queue: SpikeQueue, source: int, fanout, now: float, delay: float | None = None) -> SpikeQueue:
    """Enqueue one delivery per outgoing edge of `source` at now + delay.

    `fanout` is an iterable of edges; entries whose src is not `source` are
    ignored so a full edge list may be passed. When `delay` is None each
    edge's own delay is used.
    """
    for edge in fanout:
        if edge.src != source:
            continue
        lag = edge.delay if delay is None else delay
        if lag < 0:
            raise ValueError("spike delay must be non-negative")
        queue.push(SpikeEvent(target=edge.dst, payload=edge.payload, deliver_at=now + lag))
    return queue
