"""Run split plans on pluggable backends while sampling power.

run_experiment launches every worker before awaiting any of them, samples
power concurrently from before the first launch until after the last
completion, trims the trace to that window, and merges the per-segment
outputs back into unit order. Backends: mock (injected durations, threads),
simulated (model-driven durations), and local processes with best-effort
CPU-quota enforcement. A docker command builder covers container runtimes.
"""

from __future__ import annotations

import multiprocessing
import os
import random
import re
import threading
import time
import uuid
import warnings
from dataclasses import dataclass, field
from typing import Callable

from edgesplit import kernels
from edgesplit.errors import DataFormatError
from edgesplit.modelfit import Model, predict
from edgesplit.powermeter import (
    DEFAULT_INTERVAL_S,
    PowerSampler,
    PowerSource,
    PowerTrace,
    integrate_energy,
    trim_trace,
)
from edgesplit.splitter import (
    SHARE_ROUNDING_SLACK,
    Segment,
    SegmentResult,
    SplitPlan,
    merge_segments,
)

REF_BALANCE_TOL = 0.01  # |ref_power*ref_time - ref_energy| / ref_energy

# Contract bound on run_experiment bookkeeping: wall_time may exceed the
# slowest worker's own time by at most this much (launch + join overhead).
OVERHEAD_BOUND_S = 0.5


@dataclass(frozen=True)
class DeviceProfile:
    """A device's core budget, container cap, and benchmark reference run."""

    name: str
    total_cores: float
    max_containers: int
    ref_time: float
    ref_energy: float
    ref_power: float

    def __post_init__(self):
        if self.max_containers < 1:
            raise ValueError("max_containers must be >= 1")
        for attr in ("total_cores", "ref_time", "ref_energy", "ref_power"):
            if not (getattr(self, attr) > 0):
                raise ValueError(f"{attr} must be > 0")
        gap = abs(self.ref_power * self.ref_time - self.ref_energy)
        if gap / self.ref_energy > REF_BALANCE_TOL:
            raise ValueError(
                f"inconsistent references: {self.ref_power} W * "
                f"{self.ref_time} s vs {self.ref_energy} J")


TX2 = DeviceProfile(name="tx2", total_cores=4.0, max_containers=6,
                    ref_time=325.0, ref_energy=942.0, ref_power=2.9)
ORIN = DeviceProfile(name="orin", total_cores=12.0, max_containers=12,
                     ref_time=54.0, ref_energy=700.0, ref_power=13.0)

BUILTIN_PROFILES = {"tx2": TX2, "orin": ORIN}

_PROFILE_FIELDS = ("name", "total_cores", "max_containers", "ref_time",
                   "ref_energy", "ref_power")


def profile_to_text(profile: DeviceProfile) -> str:
    lines = [
        f"name: {profile.name}",
        f"total_cores: {profile.total_cores!r}",
        f"max_containers: {profile.max_containers}",
        f"ref_time: {profile.ref_time!r}",
        f"ref_energy: {profile.ref_energy!r}",
        f"ref_power: {profile.ref_power!r}",
    ]
    return "\n".join(lines) + "\n"


def profile_from_text(text: str) -> DeviceProfile:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if ":" not in line:
            raise DataFormatError(
                f"profile line {lineno}: expected 'key: value'")
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()
    for key in _PROFILE_FIELDS:
        if key not in fields:
            raise DataFormatError(f"profile missing field '{key}'")
    try:
        return DeviceProfile(
            name=fields["name"],
            total_cores=float(fields["total_cores"]),
            max_containers=int(fields["max_containers"]),
            ref_time=float(fields["ref_time"]),
            ref_energy=float(fields["ref_energy"]),
            ref_power=float(fields["ref_power"]),
        )
    except ValueError as exc:
        raise DataFormatError(f"malformed profile: {exc}") from None


def save_profile(profile: DeviceProfile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(profile_to_text(profile))


def load_profile(path: str) -> DeviceProfile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return profile_from_text(fh.read())
    except OSError as exc:
        raise DataFormatError(f"cannot open profile: {exc}") from None


@dataclass(frozen=True)
class RunMetrics:
    """Measured (or simulated) outcome of running one split plan."""

    wall_time: float
    energy: float
    n_containers: int
    per_worker_times: tuple[float, ...] = ()

    @property
    def avg_power(self) -> float:
        # Derived, never measured independently, so E = P*T holds exactly.
        if self.wall_time <= 0:
            return 0.0
        return self.energy / self.wall_time


class WorkerError(RuntimeError):
    """One worker failed; segment_index says which."""

    def __init__(self, segment_index: int, message: str):
        super().__init__(f"worker for segment {segment_index} failed: "
                         f"{message}")
        self.segment_index = segment_index


class ExperimentError(RuntimeError):
    """An experiment had failed workers. Completed segment results and the
    partial power trace are attached for post-mortems."""

    def __init__(self, failures: list[WorkerError],
                 completed: list[SegmentResult], trace: PowerTrace | None):
        names = ", ".join(str(f.segment_index) for f in failures)
        super().__init__(f"experiment failed on segment(s) {names}")
        self.failures = failures
        self.completed = completed
        self.trace = trace


class Backend:
    """Launches one independent worker per segment."""

    def launch(self, segment: Segment, cpu_share: float):
        raise NotImplementedError

    def wait(self, handle) -> SegmentResult:
        raise NotImplementedError


class _ThreadHandle:
    def __init__(self, segment: Segment):
        self.segment = segment
        self.result: SegmentResult | None = None
        self.error: str | None = None
        self.thread: threading.Thread | None = None


class _ThreadBackend(Backend):
    """Shared machinery for backends whose workers are in-process threads."""

    def _duration_for(self, segment: Segment, cpu_share: float) -> float:
        raise NotImplementedError

    def _should_fail(self, segment: Segment) -> bool:
        return False

    def launch(self, segment: Segment, cpu_share: float):
        handle = _ThreadHandle(segment)
        duration = self._duration_for(segment, cpu_share)
        fail = self._should_fail(segment)

        def work() -> None:
            start = time.perf_counter()
            time.sleep(duration)
            if fail:
                handle.error = "injected failure"
                return
            outputs = tuple(range(segment.start_unit,
                                  segment.start_unit + segment.size))
            handle.result = SegmentResult(
                segment_index=segment.index,
                outputs=outputs,
                worker_time=time.perf_counter() - start,
            )

        handle.thread = threading.Thread(target=work, daemon=True)
        handle.thread.start()
        return handle

    def wait(self, handle: _ThreadHandle) -> SegmentResult:
        assert handle.thread is not None
        handle.thread.join()
        if handle.error is not None:
            raise WorkerError(handle.segment.index, handle.error)
        assert handle.result is not None
        return handle.result


class MockBackend(_ThreadBackend):
    """Workers that sleep injected durations and emit their unit indices."""

    def __init__(self, durations, fail_segments=()):
        self._durations = list(durations)
        self._fail = frozenset(fail_segments)

    def _duration_for(self, segment: Segment, cpu_share: float) -> float:
        return self._durations[segment.index % len(self._durations)]

    def _should_fail(self, segment: Segment) -> bool:
        return segment.index in self._fail


class SimulatedBackend(_ThreadBackend):
    """Workers whose durations come from a fitted time model.

    The container count is inferred from the CPU share (shares are
    cores/n), the predicted wall time is scaled by time_scale so sweeps
    stay fast on a desk machine.
    """

    def __init__(self, device: DeviceProfile, time_model: Model,
                 time_scale: float = 0.001):
        if time_scale <= 0:
            raise ValueError("time_scale must be > 0")
        self.device = device
        self.time_model = time_model
        self.time_scale = time_scale

    def _duration_for(self, segment: Segment, cpu_share: float) -> float:
        n = max(1, min(self.device.max_containers,
                       round(self.device.total_cores / cpu_share)))
        return self.device.ref_time * predict(self.time_model, n) \
            * self.time_scale


@dataclass
class SpinPayload:
    """Default per-unit work: a fixed-size CPU spin. Work-based (not
    clock-based) so a CPU-capped worker genuinely takes longer."""

    iterations_per_unit: int = 50_000

    def __call__(self, unit: int):
        checksum = kernels.spin(self.iterations_per_unit)
        return (unit, checksum)


def _process_worker(segment: Segment, payload, conn) -> None:
    start = time.perf_counter()
    try:
        outputs = tuple(payload(unit) for unit in
                        range(segment.start_unit,
                              segment.start_unit + segment.size))
    except Exception as exc:  # noqa: BLE001 - reported to the parent
        conn.send(("err", f"{type(exc).__name__}: {exc}"))
        return
    conn.send(("ok", outputs, time.perf_counter() - start))


CGROUP_ROOT = "/sys/fs/cgroup"


def apply_cpu_quota(pid: int, cpu_share: float,
                    root: str = CGROUP_ROOT) -> str | None:
    """Best-effort cgroup-v2 CPU quota: returns the cgroup dir, or None
    when the host does not let us (no cgroup2, no permission)."""
    try:
        controllers_path = os.path.join(root, "cgroup.controllers")
        with open(controllers_path, "r", encoding="utf-8") as fh:
            if "cpu" not in fh.read().split():
                return None
        group = os.path.join(root, f"edgesplit-{uuid.uuid4().hex[:12]}")
        os.mkdir(group)
        period = 100_000
        quota = max(1000, int(cpu_share * period))
        with open(os.path.join(group, "cpu.max"), "w", encoding="utf-8") as fh:
            fh.write(f"{quota} {period}\n")
        with open(os.path.join(group, "cgroup.procs"), "w",
                  encoding="utf-8") as fh:
            fh.write(f"{pid}\n")
        return group
    except OSError:
        return None


def release_cpu_quota(group: str | None) -> None:
    if group is None:
        return
    try:
        os.rmdir(group)
    except OSError:
        pass


class _ProcessHandle:
    def __init__(self, segment: Segment, process, conn, cgroup: str | None):
        self.segment = segment
        self.process = process
        self.conn = conn
        self.cgroup = cgroup


class LocalProcessBackend(Backend):
    """Real parallel workers as local processes.

    CPU shares are enforced through the host's cgroup-v2 CPU controller
    when writable; otherwise the workers run unrestricted and a warning
    is emitted once per backend instance.
    """

    def __init__(self, payload: Callable[[int], object] | None = None,
                 enforce_quota: bool = True, cgroup_root: str = CGROUP_ROOT):
        self.payload = payload if payload is not None else SpinPayload()
        self.enforce_quota = enforce_quota
        self.cgroup_root = cgroup_root
        self._warned = False

    def launch(self, segment: Segment, cpu_share: float):
        parent_conn, child_conn = multiprocessing.Pipe(duplex=False)
        process = multiprocessing.Process(
            target=_process_worker, args=(segment, self.payload, child_conn),
            daemon=True)
        process.start()
        child_conn.close()
        cgroup = None
        if self.enforce_quota:
            cgroup = apply_cpu_quota(process.pid, cpu_share,
                                     root=self.cgroup_root)
            if cgroup is None and not self._warned:
                self._warned = True
                warnings.warn(
                    "CPU quota enforcement unavailable; workers run "
                    "unrestricted", RuntimeWarning, stacklevel=2)
        return _ProcessHandle(segment, process, parent_conn, cgroup)

    def wait(self, handle: _ProcessHandle) -> SegmentResult:
        try:
            message = handle.conn.recv()
        except EOFError:
            message = ("err", "worker exited without reporting a result")
        handle.process.join()
        release_cpu_quota(handle.cgroup)
        if message[0] != "ok":
            raise WorkerError(handle.segment.index, message[1])
        _, outputs, worker_time = message
        return SegmentResult(segment_index=handle.segment.index,
                             outputs=outputs, worker_time=worker_time)


@dataclass(frozen=True)
class ExperimentOutcome:
    """Everything run_experiment measured, plus the merged outputs."""

    metrics: RunMetrics
    trace: PowerTrace
    outputs: list
    launch_times: tuple[float, ...] = field(default=())
    completion_times: tuple[float, ...] = field(default=())


def run_experiment(plan: SplitPlan, backend: Backend, source: PowerSource,
                   *, interval: float = DEFAULT_INTERVAL_S) -> ExperimentOutcome:
    """Run one split plan: sample power, launch all, await all, merge.

    All workers are launched before any is awaited; wall time spans first
    launch to last completion; the trace is trimmed to that window before
    integration so idle head/tail power is excluded. A failed worker raises
    ExperimentError carrying the completed results and the partial trace.
    """
    sampler = PowerSampler(source, interval)
    sampler.start()
    base = sampler.start_time
    assert base is not None

    launch_times = []
    handles = []
    try:
        for segment in plan.segments:
            launch_times.append(time.perf_counter())
            handles.append(backend.launch(segment,
                                          plan.cpu_share_per_container))

        results: list[SegmentResult] = []
        failures: list[WorkerError] = []
        completion_times = []
        for handle in handles:
            try:
                results.append(backend.wait(handle))
            except WorkerError as err:
                failures.append(err)
            completion_times.append(time.perf_counter())
    finally:
        trace = sampler.stop()

    t_lo = launch_times[0] - base
    t_hi = max(completion_times) - base
    trimmed = trim_trace(trace, t_lo, t_hi)

    if failures:
        raise ExperimentError(failures, completed=results, trace=trimmed)

    wall_time = t_hi - t_lo
    energy = integrate_energy(trimmed) if trimmed.samples else 0.0
    metrics = RunMetrics(
        wall_time=wall_time,
        energy=energy,
        n_containers=plan.n_containers,
        per_worker_times=tuple(r.worker_time for r in results),
    )
    outputs = merge_segments(results, plan)
    return ExperimentOutcome(
        metrics=metrics,
        trace=trimmed,
        outputs=outputs,
        launch_times=tuple(t - base for t in launch_times),
        completion_times=tuple(t - base for t in completion_times),
    )


NOISE_SIGMA = 0.005  # half the sub-1% run-to-run spread seen on hardware


def simulate_run(device: DeviceProfile, time_model: Model, energy_model: Model,
                 n: int, noise_seed: int | None = None) -> RunMetrics:
    """Model-predicted metrics for n containers on a device.

    Optional multiplicative Gaussian noise (sigma 0.5%) is reproducible:
    the same seed yields bit-identical metrics.
    """
    if not 1 <= n <= device.max_containers:
        raise ValueError(
            f"n must be in 1..{device.max_containers}, got {n}")
    wall_time = device.ref_time * predict(time_model, n)
    energy = device.ref_energy * predict(energy_model, n)
    if noise_seed is not None:
        rng = random.Random(noise_seed)
        wall_time *= 1.0 + NOISE_SIGMA * rng.gauss(0.0, 1.0)
        energy *= 1.0 + NOISE_SIGMA * rng.gauss(0.0, 1.0)
    return RunMetrics(
        wall_time=wall_time,
        energy=energy,
        n_containers=n,
        per_worker_times=(wall_time,) * n,
    )


def container_adapter_command(plan: SplitPlan,
                              image_name: str) -> list[list[str]]:
    """One `docker run` invocation per container: the plan's 2-decimal CPU
    share as --cpus, the segment bounds as arguments, a unique name."""
    budget = plan.total_cores + SHARE_ROUNDING_SLACK
    if plan.n_containers * plan.cpu_share_per_container > budget:
        raise ValueError("cpu shares exceed the device's total cores")
    prefix = re.sub(r"[^a-zA-Z0-9_.-]", "-", image_name)
    commands = []
    for segment in plan.segments:
        commands.append([
            "docker", "run", "--rm",
            "--name", f"{prefix}-worker-{segment.index}",
            f"--cpus={plan.cpu_share_per_container:.2f}",
            image_name,
            "--start-unit", str(segment.start_unit),
            "--num-units", str(segment.size),
        ])
    return commands
