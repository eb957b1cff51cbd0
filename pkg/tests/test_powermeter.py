import math
import random
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgesplit.errors import DataFormatError
from edgesplit.powermeter import (
    ConstantSource,
    FunctionSource,
    PowerSample,
    PowerSampler,
    PowerTrace,
    ReplaySource,
    average_power,
    integrate_energy,
    sample_power,
    trace_from_csv,
    trace_to_csv,
    trim_trace,
)


def _trace(ts, ps, interval=0.010):
    samples = tuple(PowerSample(t=float(t), p=float(p))
                    for t, p in zip(ts, ps))
    return PowerTrace(samples=samples, nominal_interval=interval)


class FakeTimer:
    """Virtual clock + sleep for deterministic sampler tests."""

    def __init__(self):
        self.t = 0.0

    def clock(self):
        return self.t

    def sleep(self, seconds):
        self.t += seconds


# --- integration -------------------------------------------------------------

def test_constant_power_trace_matches_reference_energy():
    ts = [k * 0.01 for k in range(32501)]  # spans 325 s at 10 ms
    energy = integrate_energy(_trace(ts, [2.9] * len(ts)))
    assert energy == pytest.approx(942.5, abs=1e-6)
    assert abs(energy - 942.0) / 942.0 < 0.001


def test_single_sample_trace_has_zero_energy():
    assert integrate_energy(_trace([0.5], [10.0])) == 0.0


def test_ramp_left_rectangle_undershoots_true_integral():
    ts = list(range(11))  # 0..10 s
    energy = integrate_energy(_trace(ts, ts))  # p(t) = t
    assert energy == 45.0  # true integral is 50 J


def test_empty_trace_rejected():
    with pytest.raises(ValueError, match="empty trace"):
        integrate_energy(PowerTrace(samples=()))


def test_nonmonotonic_timestamps_rejected():
    with pytest.raises(ValueError, match="strictly increasing"):
        integrate_energy(_trace([0.0, 0.02, 0.02], [1, 1, 1]))
    with pytest.raises(ValueError, match="strictly increasing"):
        integrate_energy(_trace([0.0, 0.02, 0.01], [1, 1, 1]))


def test_negative_power_rejected():
    with pytest.raises(ValueError, match="negative power"):
        integrate_energy(_trace([0.0, 0.01], [1.0, -0.5]))


def test_sinusoid_energy_within_a_tenth_of_a_percent():
    # analytic: integral of (base + amp*sin(w t + phase)) over [0, span]
    base, amp, period, phase = 6.0, 2.5, 1.6, 0.7
    w = 2 * math.pi / period
    for span in (8.0, 7.37):  # whole periods and a ragged end
        n = int(span / 0.01) + 1
        ts = [k * 0.01 for k in range(n)]
        ps = [base + amp * math.sin(w * t + phase) for t in ts]
        analytic = base * span - (amp / w) * (
            math.cos(w * span + phase) - math.cos(phase))
        energy = integrate_energy(_trace(ts, ps))
        # left-rectangle only covers up to the last sample
        analytic_to_last = base * ts[-1] - (amp / w) * (
            math.cos(w * ts[-1] + phase) - math.cos(phase))
        assert abs(energy - analytic_to_last) / analytic < 0.001


@given(data=st.data())
def test_energy_additivity_is_exact_on_dyadic_grids(data):
    # Times and powers on a 2^-6 grid keep every product and partial sum
    # exactly representable, so split-and-sum must match to the last bit.
    n = data.draw(st.integers(min_value=2, max_value=200))
    steps = data.draw(st.lists(st.integers(1, 2 ** 9),
                               min_size=n - 1, max_size=n - 1))
    levels = data.draw(st.lists(st.integers(0, 2 ** 12),
                                min_size=n, max_size=n))
    ts = [0.0]
    for step in steps:
        ts.append(ts[-1] + step * 2.0 ** -6)
    ps = [level * 2.0 ** -6 for level in levels]
    trace = _trace(ts, ps)

    split = data.draw(st.integers(min_value=0, max_value=n - 1))
    first = _trace(ts[:split + 1], ps[:split + 1])
    second = _trace(ts[split:], ps[split:])
    whole = integrate_energy(trace)
    parts = integrate_energy(first) + integrate_energy(second)
    assert parts == whole


@given(data=st.data())
def test_nonnegative_power_gives_nonnegative_energy(data):
    n = data.draw(st.integers(min_value=1, max_value=100))
    steps = data.draw(st.lists(
        st.floats(min_value=1e-6, max_value=10.0, allow_nan=False),
        min_size=n - 1, max_size=n - 1))
    ps = data.draw(st.lists(
        st.floats(min_value=0.0, max_value=1e3, allow_nan=False),
        min_size=n, max_size=n))
    ts = [0.0]
    for step in steps:
        ts.append(ts[-1] + step)
    assert integrate_energy(_trace(ts, ps)) >= 0.0


# --- averaging ---------------------------------------------------------------

def test_average_power_reference_values():
    assert average_power(942.0, 325.0) == pytest.approx(2.9, abs=0.01)
    assert average_power(700.0, 54.0) == pytest.approx(13.0, abs=0.05)
    assert average_power(0.0, 17.0) == 0.0


@pytest.mark.parametrize("duration", [0.0, -1.0])
def test_average_power_needs_positive_duration(duration):
    with pytest.raises(ValueError):
        average_power(100.0, duration)


def test_average_power_reconstructs_energy():
    rng = random.Random(7)
    for _ in range(200):
        energy = rng.uniform(1e-3, 5e3)
        span = rng.uniform(1e-3, 5e3)
        avg = average_power(energy, span)
        assert avg == energy / span
        # two roundings (divide then multiply) bound the reconstruction
        assert avg * span == pytest.approx(energy, rel=5e-16)


# --- sampling ----------------------------------------------------------------

def test_sampling_constant_source_at_ten_ms_for_one_second():
    timer = FakeTimer()
    stop = threading.Event()

    def sleep(seconds):
        timer.sleep(seconds)
        if timer.t >= 0.9999:
            stop.set()

    trace = sample_power(ConstantSource(5.0), 0.010, stop,
                         clock=timer.clock, sleep=sleep)
    assert abs(len(trace.samples) - 100) <= 2
    assert all(s.p == 5.0 for s in trace.samples)
    assert trace.error is None
    ts = [s.t for s in trace.samples]
    assert all(b > a for a, b in zip(ts, ts[1:]))


def test_replay_source_reproduces_the_recording():
    recorded = _trace([k * 0.01 for k in range(40)],
                      [3.0 + 0.125 * (k % 4) for k in range(40)])
    timer = FakeTimer()
    stop = threading.Event()

    def sleep(seconds):
        timer.sleep(seconds)
        if timer.t >= 40 * 0.01 - 1e-9:
            stop.set()

    out = sample_power(ReplaySource.from_trace(recorded), 0.01, stop,
                       clock=timer.clock, sleep=sleep)
    assert [s.p for s in out.samples] == [s.p for s in recorded.samples]
    assert [s.t for s in out.samples] == pytest.approx(
        [s.t for s in recorded.samples], abs=1e-9)


def test_stop_before_first_tick_yields_tiny_trace_without_error():
    stop = threading.Event()
    stop.set()
    trace = sample_power(ConstantSource(5.0), 0.010, stop)
    assert len(trace.samples) <= 1
    assert trace.error is None


def test_source_failure_flags_trace_and_keeps_partial_data():
    class Flaky(ConstantSource):
        def __init__(self):
            super().__init__(2.0)
            self.reads = 0

        def read(self):
            self.reads += 1
            if self.reads > 3:
                raise IOError("sensor gone")
            return super().read()

    timer = FakeTimer()
    trace = sample_power(Flaky(), 0.010, threading.Event(),
                         clock=timer.clock, sleep=timer.sleep)
    assert trace.error is not None and "sensor gone" in trace.error
    assert len(trace.samples) == 3


def test_sample_power_rejects_nonpositive_interval():
    with pytest.raises(ValueError):
        sample_power(ConstantSource(1.0), 0.0, threading.Event())


def test_real_clock_sampler_smoke():
    sampler = PowerSampler(ConstantSource(3.0), interval=0.005)
    sampler.start()
    assert sampler.start_time is not None
    threading.Event().wait(0.06)
    trace = sampler.stop()
    assert 3 <= len(trace.samples) <= 30
    assert all(s.p == 3.0 for s in trace.samples)
    ts = [s.t for s in trace.samples]
    assert all(b > a for a, b in zip(ts, ts[1:]))


def test_function_source_follows_the_clock():
    timer = FakeTimer()
    source = FunctionSource(lambda t: 1.0 + t, clock=timer.clock)
    assert source.read() == 1.0
    timer.sleep(2.0)
    assert source.read() == 3.0


def test_replay_source_holds_last_value():
    source = ReplaySource([1.0, 2.0])
    assert [source.read() for _ in range(4)] == [1.0, 2.0, 2.0, 2.0]


# --- trimming ----------------------------------------------------------------

def test_trim_synthesizes_boundary_samples():
    trace = _trace(range(11), [2.0] * 11)
    trimmed = trim_trace(trace, 2.5, 7.25)
    assert trimmed.samples[0] == PowerSample(t=2.5, p=2.0)
    assert trimmed.samples[-1] == PowerSample(t=7.25, p=2.0)
    assert integrate_energy(trimmed) == pytest.approx(2.0 * 4.75, rel=1e-12)


def test_trim_with_no_samples_before_window_starts_at_first_real_sample():
    trace = _trace([5.0, 6.0, 7.0], [1.0, 1.0, 1.0])
    trimmed = trim_trace(trace, 2.0, 6.5)
    assert trimmed.samples[0].t == 5.0
    assert trimmed.samples[-1].t == 6.5


def test_trim_window_between_samples_extrapolates_last_known_level():
    trace = _trace([0.0, 10.0], [4.0, 4.0])
    trimmed = trim_trace(trace, 2.0, 3.0)
    assert [s.t for s in trimmed.samples] == [2.0, 3.0]
    assert integrate_energy(trimmed) == pytest.approx(4.0, rel=1e-12)


def test_trim_rejects_inverted_window():
    with pytest.raises(ValueError):
        trim_trace(_trace([0.0], [1.0]), 2.0, 1.0)


# --- trace files -------------------------------------------------------------

def test_trace_csv_round_trip(tmp_path):
    trace = _trace([0.0, 0.01, 0.02], [1.25, 2.5, 3.125])
    path = tmp_path / "trace.csv"
    trace_to_csv(trace, str(path))
    content = path.read_text()
    assert content.splitlines()[0] == "t_s,power_w"
    assert "0.010000,2.500000" in content
    back = trace_from_csv(str(path))
    assert [s.p for s in back.samples] == [1.25, 2.5, 3.125]


def test_trace_csv_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t_s,power_w\n0.0,1.0\nabc,2.0\n")
    with pytest.raises(DataFormatError, match="line 3"):
        trace_from_csv(str(path))


def test_trace_csv_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("t_s,power_w\n")
    with pytest.raises(DataFormatError, match="no data rows"):
        trace_from_csv(str(path))
