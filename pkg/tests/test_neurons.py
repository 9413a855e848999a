import numpy as np
import pytest

from spikerc.neurons import (
    ContinuousLifParams,
    ContinuousNeuronState,
    FixedPointLifParams,
    FixedPointNeuronState,
    SpikeEvent,
    SpikeQueue,
    decay_fixed_point,
    schedule_spike,
    step_continuous,
    step_fixed_point,
)
from spikerc.topology import Edge


def test_continuous_single_step_from_rest():
    # v += dt/tau * (-(0-0) + 100) = 0.005 * 100 = 0.5
    params = ContinuousLifParams(tau_m=1.0, v_thresh=5.0)
    state, spiked = step_continuous(ContinuousNeuronState(), params, 100.0, 0.005)
    assert state.v == pytest.approx(0.5, abs=1e-15)
    assert not spiked


def test_continuous_threshold_resets_membrane():
    params = ContinuousLifParams(tau_m=1.0, v_thresh=5.0, v_reset=0.25)
    state, spiked = step_continuous(
        ContinuousNeuronState(v=4.9), params, 100.0, 0.005
    )
    assert spiked
    assert state.v == 0.25


def test_continuous_leak_decays_toward_rest():
    rng = np.random.default_rng(42)
    for _ in range(200):
        v_rest = float(rng.uniform(-2, 2))
        params = ContinuousLifParams(
            tau_m=float(rng.uniform(0.1, 5)), v_thresh=100.0, v_rest=v_rest
        )
        v0 = float(rng.uniform(-10, 10))
        dt = float(rng.uniform(1e-4, params.tau_m))
        state, _ = step_continuous(ContinuousNeuronState(v=v0), params, 0.0, dt)
        assert abs(state.v - v_rest) <= abs(v0 - v_rest) + 1e-12


def test_continuous_membrane_resistance_scales_input():
    params = ContinuousLifParams(tau_m=2.0, v_thresh=50.0, r_membrane=3.0)
    state, _ = step_continuous(ContinuousNeuronState(), params, 10.0, 0.1)
    assert state.v == pytest.approx(0.1 / 2.0 * 30.0)


def test_continuous_rejects_bad_params():
    with pytest.raises(ValueError):
        ContinuousLifParams(tau_m=0.0, v_thresh=1.0)
    with pytest.raises(ValueError):
        ContinuousLifParams(tau_m=1.0, v_thresh=0.0, v_reset=0.0)
    params = ContinuousLifParams(tau_m=1.0, v_thresh=1.0)
    with pytest.raises(ValueError):
        step_continuous(ContinuousNeuronState(), params, 0.0, 0.0)


def test_fixed_point_full_current_decay_replaces_u():
    params = FixedPointLifParams(du=4095, dv=0, vth_mant=1000)
    state, _ = step_fixed_point(FixedPointNeuronState(u=100, v=0), params, 512)
    assert state.u == 512


def test_fixed_point_dv_zero_keeps_membrane():
    params = FixedPointLifParams(du=4095, dv=0, vth_mant=82)
    state, spiked = step_fixed_point(FixedPointNeuronState(u=0, v=1000), params, 512)
    assert state.v == 1512  # threshold is 82*64 = 5248
    assert not spiked


def test_fixed_point_threshold_is_strict_above_mantissa_times_64():
    params = FixedPointLifParams(du=4095, dv=0, vth_mant=82)
    assert params.v_thresh == 5248
    at, spiked_at = step_fixed_point(FixedPointNeuronState(v=5248 - 512), params, 512)
    assert not spiked_at and at.v == 5248
    above, spiked_above = step_fixed_point(FixedPointNeuronState(v=5249 - 512), params, 512)
    assert spiked_above and above.v == 0


def test_fixed_point_bias_drives_membrane():
    params = FixedPointLifParams(du=4095, dv=0, vth_mant=1, bias_mant=4)
    state, spiked = step_fixed_point(FixedPointNeuronState(), params, 0)
    # bias 256 > threshold 64: fires every step from rest
    assert spiked and state.v == 0 and params.bias == 256


def test_decay_matches_integer_division_for_non_negative_values():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        value = int(rng.integers(0, 2**30))
        d = int(rng.integers(0, 4095))
        assert decay_fixed_point(value, d) == (value * (4096 - d)) // 4096
    assert decay_fixed_point(12345, 4095) == 0
    assert decay_fixed_point(12345, 0) == 12345


def test_decay_rejects_out_of_range_constants():
    with pytest.raises(ValueError):
        decay_fixed_point(1, -1)
    with pytest.raises(ValueError):
        decay_fixed_point(1, 4096)


def test_fixed_point_rejects_non_integers():
    params = FixedPointLifParams(du=0, dv=0, vth_mant=10)
    with pytest.raises(TypeError):
        step_fixed_point(FixedPointNeuronState(), params, 1.5)
    with pytest.raises(TypeError):
        FixedPointLifParams(du=0.5, dv=0, vth_mant=10)
    with pytest.raises(ValueError):
        FixedPointLifParams(du=0, dv=0, vth_mant=0)


def test_fixed_point_overflow_raises():
    params = FixedPointLifParams(du=0, dv=0, vth_mant=2**24)
    state = FixedPointNeuronState(u=2**30, v=2**30)
    with pytest.raises(OverflowError):
        step_fixed_point(state, params, 2**30)


def test_schedule_spike_enqueues_one_event_per_outgoing_edge():
    edges = [
        Edge(0, 1, payload=2.0, delay=0.3, edge_class="internal"),
        Edge(0, 2, payload=1.5, delay=0.3, edge_class="internal"),
        Edge(1, 2, payload=9.0, delay=0.3, edge_class="internal"),
    ]
    queue = SpikeQueue()
    schedule_spike(queue, 0, edges, now=10.0, delay=0.5)
    assert len(queue) == 2
    due = queue.pop_due(10.5)
    assert {(e.target, e.payload) for e in due} == {(1, 2.0), (2, 1.5)}
    assert all(e.deliver_at == 10.5 for e in due)


def test_schedule_spike_uses_edge_delay_when_not_overridden():
    edges = [Edge(3, 4, payload=1.0, delay=0.25, edge_class="internal")]
    queue = SpikeQueue()
    schedule_spike(queue, 3, edges, now=1.0)
    assert queue.pop_due(1.25)[0].deliver_at == 1.25


def test_schedule_spike_rejects_negative_delay():
    edges = [Edge(0, 1, payload=1.0, delay=0.0, edge_class="internal")]
    with pytest.raises(ValueError):
        schedule_spike(SpikeQueue(), 0, edges, now=0.0, delay=-0.1)


def test_spike_queue_orders_by_delivery_time():
    queue = SpikeQueue()
    queue.push(SpikeEvent(target=0, payload=1.0, deliver_at=3.0))
    queue.push(SpikeEvent(target=1, payload=1.0, deliver_at=1.0))
    queue.push(SpikeEvent(target=2, payload=1.0, deliver_at=2.0))
    assert [e.target for e in queue.pop_due(2.5)] == [1, 2]
    assert len(queue) == 1
