"""Window-driven reservoir simulation.

Two engines share the same presentation protocol (one schedule entry drives
one window of steps; neuron state is never reset between windows):

- continuous: Euler-integrated leaky neurons; a delivered spike of payload w
  contributes current w/dt for exactly one step (a membrane jump of
  w*r/tau_m), and the scheduled input neuron receives constant current i0
  for the whole window. Spikes travel max(1, round(delay/dt)) steps.
- fixed_point: integer arithmetic identical to `neurons.step_fixed_point`;
  spikes deliver payload*64 into the target's current one timestep after
  emission, the scheduled input neuron is driven by its layer bias, and
  spike counts are recovered from non-spiking integrator copies of the
  input and reservoir layers whose membranes are read and reset per window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .neurons import (
    INT32_LIMIT,
    MANTISSA_SCALE,
    ContinuousLifParams,
    FixedPointLifParams,
)
from .topology import ReservoirNetwork


@dataclass(frozen=True)
class ContinuousSimConfig:
    lif: ContinuousLifParams
    dt: float
    steps_per_window: int
    input_current: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.steps_per_window < 1:
            raise ValueError("steps_per_window must be >= 1")

    @property
    def delta(self) -> float:
        return self.dt * self.steps_per_window


@dataclass(frozen=True)
class FixedPointSimConfig:
    input_lif: FixedPointLifParams
    reservoir_lif: FixedPointLifParams
    output_lif: FixedPointLifParams
    steps_per_window: int
    payload_mant: int  # weight mantissa of the one-to-one readout taps

    def __post_init__(self):
        if self.steps_per_window < 1:
            raise ValueError("steps_per_window must be >= 1")
        if not isinstance(self.payload_mant, int) or self.payload_mant < 1:
            raise ValueError("payload_mant must be a positive int")


@dataclass(frozen=True)
class SpikeStats:
    total_spikes: int
    per_neuron_mean: float
    silent_neurons: int


@dataclass(frozen=True)
class FixedPointRun:
    """state_matrix rows: bias row of ones, integrator-recovered counts of the
    input-layer copies, then of every reservoir neuron. direct_counts holds
    the reservoir's true per-window spike counts for cross-checking."""

    state_matrix: np.ndarray
    direct_counts: np.ndarray
    integrator_counts: np.ndarray


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _active_neuron_ids(net: ReservoirNetwork, schedule) -> np.ndarray:
    schedule = np.asarray(schedule)
    if schedule.ndim != 1 or schedule.size == 0:
        raise ValueError("schedule must be a non-empty 1-D index sequence")
    if not np.issubdtype(schedule.dtype, np.integer):
        raise ValueError("schedule must contain integers")
    if len(net.input_neurons) == 0:
        raise ValueError("network declares no input neurons")
    if schedule.min() < 1 or schedule.max() > len(net.input_neurons):
        raise ValueError(
            f"schedule indices must lie in [1, {len(net.input_neurons)}]"
        )
    inputs = np.asarray(net.input_neurons, dtype=np.int64)
    return inputs[schedule - 1]


def simulate(net: ReservoirNetwork, schedule, config) -> np.ndarray:
    """Run the windowed presentation and return the state matrix: row 0 is
    all ones (bias), remaining rows are per-window spike counts."""
    if isinstance(config, ContinuousSimConfig):
        matrix, _ = _run_continuous(net, schedule, config, record_steps=0)
        return matrix
    if isinstance(config, FixedPointSimConfig):
        return fixed_point_readout_counts(net, schedule, config)
    raise TypeError(f"unsupported simulation config: {type(config).__name__}")


def membrane_trace(net: ReservoirNetwork, schedule, config: ContinuousSimConfig, n_steps: int) -> np.ndarray:
    """Membrane potential of every neuron over the first n_steps (post-reset
    values), for inspection dumps."""
    _, trace = _run_continuous(net, schedule, config, record_steps=n_steps)
    return trace


def _run_continuous(net, schedule, config, record_steps):
    active = _active_neuron_ids(net, schedule)
    m = net.n_neurons
    n_windows = len(active)
    steps = config.steps_per_window
    lif = config.lif
    k = config.dt / lif.tau_m
    r = lif.r_membrane
    v_rest = lif.v_rest
    v_thresh = lif.v_thresh
    v_reset = lif.v_reset
    i0 = config.input_current

    # one dense delivery matrix per distinct delay (in steps); entries are the
    # one-step current payload/dt contributed by each source spike
    groups: dict[int, np.ndarray] = {}
    for e in net.edges:
        lag = max(1, _round_half_up(e.delay / config.dt))
        w = groups.setdefault(lag, np.zeros((m, m)))
        w[e.dst, e.src] += e.payload / config.dt
    ring_len = max(groups, default=0) + 1
    buf = np.zeros((ring_len, m))
    group_items = tuple(groups.items())

    v = np.full(m, float(v_rest))
    tmp = np.empty(m)
    counts = np.zeros((m, n_windows), dtype=np.int64)
    trace = np.empty((record_steps, m)) if record_steps > 0 else None

    t = 0
    for n in range(n_windows):
        a = active[n]
        counts_col = counts[:, n]
        for _ in range(steps):
            row = buf[t % ring_len]
            row[a] += i0
            if r != 1.0:
                row *= r
            # v += k * (-(v - v_rest) + r * i_total), same arithmetic as the
            # scalar step so both paths agree bit for bit
            np.subtract(v, v_rest, out=tmp)
            np.subtract(row, tmp, out=tmp)
            tmp *= k
            v += tmp
            if v.max() >= v_thresh:
                fired = np.flatnonzero(v >= v_thresh)
                counts_col[fired] += 1
                v[fired] = v_reset
                if fired.size == 1:
                    src = fired[0]
                    for lag, w in group_items:
                        buf[(t + lag) % ring_len] += w[:, src]
                else:
                    for lag, w in group_items:
                        buf[(t + lag) % ring_len] += w[:, fired].sum(axis=1)
            row[:] = 0.0
            if trace is not None and t < record_steps:
                trace[t] = v
            t += 1

    matrix = np.vstack([np.ones(n_windows), counts.astype(float)])
    return matrix, trace


def _decay_array(values: np.ndarray, keep: np.ndarray, full: np.ndarray) -> np.ndarray:
    out = (values * keep) >> 12
    if full is not None:
        out[full] = 0
    return out


def _layer_vectors(net, input_params, reservoir_params, field):
    vec = np.full(net.n_neurons, getattr(reservoir_params, field), dtype=np.int64)
    vec[list(net.input_neurons)] = getattr(input_params, field)
    return vec


def fixed_point_run(net: ReservoirNetwork, schedule, config: FixedPointSimConfig) -> FixedPointRun:
    active = _active_neuron_ids(net, schedule)
    for e in net.edges:
        if e.delay != 0:
            raise ValueError(
                "fixed-point engine takes no explicit edge delays; "
                "propagation lag comes from the current decay constants"
            )
        if e.payload != int(e.payload):
            raise ValueError("fixed-point edge payloads must be integers")

    m = net.n_neurons
    m_in = len(net.input_neurons)
    n_windows = len(active)
    steps = config.steps_per_window

    w_syn = np.zeros((m, m))
    for e in net.edges:
        w_syn[e.dst, e.src] += int(e.payload) * MANTISSA_SCALE

    du = _layer_vectors(net, config.input_lif, config.reservoir_lif, "du")
    dv = _layer_vectors(net, config.input_lif, config.reservoir_lif, "dv")
    keep_u, full_u = 4096 - du, du == 4095
    keep_v, full_v = 4096 - dv, dv == 4095
    vth = _layer_vectors(net, config.input_lif, config.reservoir_lif, "vth_mant") * MANTISSA_SCALE
    # bias drives the scheduled input neuron only; resident bias applies to
    # the reservoir layer
    bias = np.full(m, config.reservoir_lif.bias, dtype=np.int64)
    bias[list(net.input_neurons)] = 0
    input_bias = config.input_lif.bias

    # non-spiking integrator copies: input layer first, then every reservoir
    # neuron; taps accumulate in the same step their source fires
    copy_idx = np.concatenate(
        [np.asarray(net.input_neurons, dtype=np.int64), np.arange(m, dtype=np.int64)]
    )
    tap = config.payload_mant * MANTISSA_SCALE
    out = config.output_lif
    out_n = m_in + m
    out_u = np.zeros(out_n, dtype=np.int64)
    out_v = np.zeros(out_n, dtype=np.int64)
    keep_ou = np.full(out_n, 4096 - out.du, dtype=np.int64)
    full_ou = np.full(out_n, out.du == 4095)
    keep_ov = np.full(out_n, 4096 - out.dv, dtype=np.int64)
    full_ov = np.full(out_n, out.dv == 4095)

    u = np.zeros(m, dtype=np.int64)
    v = np.zeros(m, dtype=np.int64)
    fired = np.zeros(m, dtype=bool)
    any_fired = False
    direct = np.zeros((m, n_windows), dtype=np.int64)
    integ = np.zeros((out_n, n_windows), dtype=np.int64)

    for n in range(n_windows):
        a = active[n]
        direct_col = direct[:, n]
        for _ in range(steps):
            u = _decay_array(u, keep_u, full_u)
            if any_fired:
                # exact in float64: every partial sum is a small integer
                u += (w_syn @ fired).astype(np.int64)
            v = _decay_array(v, keep_v, full_v)
            v += u
            v += bias
            v[a] += input_bias
            fired = v > vth
            v[fired] = 0
            direct_col += fired
            out_u = _decay_array(out_u, keep_ou, full_ou)
            out_u += tap * fired[copy_idx]
            out_v = _decay_array(out_v, keep_ov, full_ov)
            out_v += out_u
            if out.bias:
                out_v += out.bias
            if out_v.max() > out.v_thresh:
                raise OverflowError(
                    "readout integrator crossed its threshold; counts would be lost"
                )
            any_fired = bool(fired.any())
        if max(np.abs(u).max(), np.abs(v).max()) >= INT32_LIMIT:
            raise OverflowError("fixed-point state exceeded signed 32-bit range")
        if (out_v % tap).any():
            raise ValueError(
                "integrator membranes are not multiples of the tap weight; "
                "output layer parameters do not preserve counts"
            )
        integ[:, n] = out_v // tap
        out_v[:] = 0
    matrix = np.vstack([np.ones(n_windows), integ.astype(float)])
    return FixedPointRun(state_matrix=matrix, direct_counts=direct, integrator_counts=integ)


def fixed_point_readout_counts(net: ReservoirNetwork, schedule, config: FixedPointSimConfig) -> np.ndarray:
    """State matrix (1 + n_inputs + n_neurons) x n_windows recovered from the
    integrator copies: bias row, input-copy counts, reservoir counts."""
    return fixed_point_run(net, schedule, config).state_matrix


def spike_stats(state_matrix: np.ndarray) -> SpikeStats:
    matrix = np.asarray(state_matrix)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ValueError("state matrix must have a bias row plus count rows")
    if not (matrix[0] == 1.0).all():
        raise ValueError("state matrix row 0 must be all ones")
    counts = matrix[1:]
    if (counts < 0).any():
        raise ValueError("spike counts must be non-negative")
    total = int(counts.sum())
    return SpikeStats(
        total_spikes=total,
        per_neuron_mean=total / counts.shape[0],
        silent_neurons=int((counts.sum(axis=1) == 0).sum()),
    )
