"""Power sampling and energy accounting.

A pluggable power source is polled on a fixed interval into a PowerTrace;
energy is the left-rectangle sum of power readings times the period between
subsequent samples, and average power is energy over duration. Sources are
a single aggregate channel: constant, function-of-time, or replay of a
recorded trace (stands in for on-board power sensors).
"""

from __future__ import annotations

import csv
import threading
import time
from dataclasses import dataclass
from typing import Callable, Iterable

from edgesplit import kernels
from edgesplit.errors import DataFormatError

DEFAULT_INTERVAL_S = 0.010

TRACE_CSV_HEADER = ("t_s", "power_w")


@dataclass(frozen=True)
class PowerSample:
    """One reading: seconds since trace start, watts."""

    t: float
    p: float


@dataclass(frozen=True)
class PowerTrace:
    """Time-ordered power samples with the interval they were taken at.

    The error field is set when sampling aborted early (source failure);
    the samples collected up to that point are retained.
    """

    samples: tuple[PowerSample, ...]
    nominal_interval: float = DEFAULT_INTERVAL_S
    error: str | None = None

    @property
    def span(self) -> float:
        """Duration from first to last sample; 0 for fewer than 2 samples."""
        if len(self.samples) < 2:
            return 0.0
        return self.samples[-1].t - self.samples[0].t

    def columns(self) -> tuple:
        t = kernels.as_vector(s.t for s in self.samples)
        p = kernels.as_vector(s.p for s in self.samples)
        return t, p


def integrate_energy(trace: PowerTrace) -> float:
    """Energy in joules: sum of p[i] * (t[i+1] - t[i]) over the trace.

    The final sample bounds the last interval and contributes no energy
    itself; a single-sample trace therefore integrates to 0 J.
    """
    if not trace.samples:
        raise ValueError("cannot integrate an empty trace")
    t, p = trace.columns()
    bad = kernels.first_nonincreasing(t)
    if bad != -1:
        raise ValueError(
            f"timestamps are not strictly increasing at sample {bad}")
    neg = kernels.first_negative(p)
    if neg != -1:
        raise ValueError(f"negative power at sample {neg}")
    return kernels.rect_energy(t, p)


def average_power(energy: float, duration: float) -> float:
    """Average watts over a run: energy / duration."""
    if duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    return energy / duration


class PowerSource:
    """Anything that can be polled for an instantaneous power reading."""

    def read(self) -> float:
        raise NotImplementedError


class ConstantSource(PowerSource):
    def __init__(self, watts: float):
        self.watts = watts

    def read(self) -> float:
        return self.watts


class FunctionSource(PowerSource):
    """Power as a function of elapsed seconds since the first read."""

    def __init__(self, fn: Callable[[float], float],
                 clock: Callable[[], float] = time.perf_counter):
        self.fn = fn
        self._clock = clock
        self._start: float | None = None

    def read(self) -> float:
        now = self._clock()
        if self._start is None:
            self._start = now
        return self.fn(now - self._start)


class ReplaySource(PowerSource):
    """Steps through recorded power values, holding the last one."""

    def __init__(self, powers: Iterable[float]):
        self._powers = [float(p) for p in powers]
        if not self._powers:
            raise ValueError("replay source needs at least one sample")
        self._next = 0

    @classmethod
    def from_trace(cls, trace: PowerTrace) -> "ReplaySource":
        return cls(s.p for s in trace.samples)

    @classmethod
    def from_csv(cls, path: str) -> "ReplaySource":
        return cls.from_trace(trace_from_csv(path))

    def read(self) -> float:
        value = self._powers[min(self._next, len(self._powers) - 1)]
        self._next += 1
        return value


def sample_power(source: PowerSource, interval: float, stop: threading.Event,
                 *, clock: Callable[[], float] = time.perf_counter,
                 sleep: Callable[[float], None] = time.sleep,
                 on_start: Callable[[float], None] | None = None) -> PowerTrace:
    """Poll the source every interval seconds until stop is signalled.

    Ticks are scheduled against the trace start (not the previous sample),
    so the sample count stays within a couple of samples of duration/interval.
    A source read failure ends sampling and is reported on the trace's error
    field together with the samples collected so far.
    """
    if interval <= 0:
        raise ValueError(f"interval must be > 0, got {interval}")
    samples: list[PowerSample] = []
    error = None
    t0 = clock()
    if on_start is not None:
        on_start(t0)
    tick = 0
    while not stop.is_set():
        try:
            watts = source.read()
        except Exception as exc:  # noqa: BLE001 - deliberate firewall
            error = f"power source read failed: {exc}"
            break
        samples.append(PowerSample(t=clock() - t0, p=watts))
        tick += 1
        delay = (t0 + tick * interval) - clock()
        if delay > 0:
            sleep(delay)
    return PowerTrace(samples=tuple(samples), nominal_interval=interval,
                      error=error)


class PowerSampler:
    """Runs sample_power on its own thread and owns the growing trace.

    start() returns once the sampling clock is running; stop() joins the
    thread and publishes the immutable trace snapshot.
    """

    def __init__(self, source: PowerSource,
                 interval: float = DEFAULT_INTERVAL_S):
        self._source = source
        self._interval = interval
        self._stop = threading.Event()
        self._started = threading.Event()
        self._trace: PowerTrace | None = None
        self._thread: threading.Thread | None = None
        self.start_time: float | None = None

    def _run(self) -> None:
        def note_start(t0: float) -> None:
            self.start_time = t0
            self._started.set()

        self._trace = sample_power(self._source, self._interval, self._stop,
                                   on_start=note_start)

    def start(self) -> None:
        if self._thread is not None:
            raise RuntimeError("sampler already started")
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        self._started.wait()

    def stop(self) -> PowerTrace:
        if self._thread is None:
            raise RuntimeError("sampler was never started")
        self._stop.set()
        self._thread.join()
        assert self._trace is not None
        return self._trace


def trim_trace(trace: PowerTrace, t_lo: float, t_hi: float) -> PowerTrace:
    """Restrict a trace to [t_lo, t_hi], synthesizing boundary samples.

    The power level in force at t_lo (the last sample at or before it)
    is carried into the window, and the last in-window level is extended
    to t_hi, so integrating the result covers exactly the window.
    """
    if t_hi < t_lo:
        raise ValueError("t_hi must be >= t_lo")
    inside = [s for s in trace.samples if t_lo <= s.t <= t_hi]
    before = [s for s in trace.samples if s.t < t_lo]
    if before and (not inside or inside[0].t > t_lo):
        inside.insert(0, PowerSample(t=t_lo, p=before[-1].p))
    if inside and inside[-1].t < t_hi:
        inside.append(PowerSample(t=t_hi, p=inside[-1].p))
    return PowerTrace(samples=tuple(inside),
                      nominal_interval=trace.nominal_interval,
                      error=trace.error)


def trace_to_csv(trace: PowerTrace, path: str) -> None:
    """Write `t_s,power_w` rows with 6-decimal floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_CSV_HEADER)
        for sample in trace.samples:
            writer.writerow([f"{sample.t:.6f}", f"{sample.p:.6f}"])


def trace_from_csv(path: str,
                   nominal_interval: float = DEFAULT_INTERVAL_S) -> PowerTrace:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot open trace file: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_CSV_HEADER:
            raise DataFormatError(
                f"{path}: expected header '{','.join(TRACE_CSV_HEADER)}'")
        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t, p = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise DataFormatError(
                    f"{path}: malformed row at line {lineno}: {row!r}") from None
            samples.append(PowerSample(t=t, p=p))
    if not samples:
        raise DataFormatError(f"{path}: no data rows")
    return PowerTrace(samples=tuple(samples),
                      nominal_interval=nominal_interval)
