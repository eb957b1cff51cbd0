"""Split plans: divide work units and CPU shares evenly across containers.

A workload of W independent units is cut into n contiguous segments whose
sizes differ by at most one unit, and the device's CPU cores are shared
equally (each container gets cores/n, truncated to the 2-decimal granularity
of container runtime CPU limits). Per-segment results merge back into the
original unit order regardless of completion order.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_FLOOR, Decimal
from typing import Sequence

from edgesplit.errors import DataFormatError

SHARE_ROUNDING_SLACK = 0.005  # half of the 2-decimal share granularity


@dataclass(frozen=True)
class Segment:
    """A contiguous run of work units assigned to one container."""

    index: int
    start_unit: int
    size: int


@dataclass(frozen=True)
class SplitPlan:
    total_work_units: int
    n_containers: int
    segments: tuple[Segment, ...]
    cpu_share_per_container: float
    total_cores: float


@dataclass(frozen=True)
class SegmentResult:
    """Outputs produced by one container for its segment."""

    segment_index: int
    outputs: tuple
    worker_time: float


def make_split_plan(total_work_units: int, n_containers: int,
                    total_cores: float) -> SplitPlan:
    """Build the even split of work units and CPU shares for n containers.

    The first (W mod n) segments get one extra unit; every container gets
    the identical CPU share cores/n rounded down to 2 decimals.
    """
    if n_containers < 1:
        raise ValueError(f"n_containers must be >= 1, got {n_containers}")
    if total_work_units < n_containers:
        raise ValueError(
            f"cannot split {total_work_units} work units across "
            f"{n_containers} containers")
    if total_cores <= 0:
        raise ValueError(f"total_cores must be > 0, got {total_cores}")

    base, extra = divmod(total_work_units, n_containers)
    segments = []
    start = 0
    for i in range(n_containers):
        size = base + 1 if i < extra else base
        segments.append(Segment(index=i, start_unit=start, size=size))
        start += size

    share = Decimal(str(total_cores)) / n_containers
    share = float(share.quantize(Decimal("0.01"), rounding=ROUND_FLOOR))

    return SplitPlan(
        total_work_units=total_work_units,
        n_containers=n_containers,
        segments=tuple(segments),
        cpu_share_per_container=share,
        total_cores=float(total_cores),
    )


def merge_segments(results: Sequence[SegmentResult], plan: SplitPlan) -> list:
    """Concatenate per-segment outputs in segment order.

    Arrival order of results is irrelevant; exactly one result per segment
    is required and each must match its segment's size.
    """
    by_index: dict[int, SegmentResult] = {}
    for result in results:
        if result.segment_index in by_index:
            raise ValueError(
                f"duplicate segment index {result.segment_index}")
        by_index[result.segment_index] = result

    known = {seg.index for seg in plan.segments}
    unknown = sorted(set(by_index) - known)
    if unknown:
        raise ValueError(f"unknown segment index {unknown[0]}")
    missing = sorted(known - set(by_index))
    if missing:
        raise ValueError(f"incomplete results: missing segments {missing}")

    merged: list = []
    for seg in plan.segments:
        result = by_index[seg.index]
        if len(result.outputs) != seg.size:
            raise ValueError(
                f"segment {seg.index} produced {len(result.outputs)} outputs, "
                f"expected {seg.size}")
        merged.extend(result.outputs)
    return merged


def plan_to_text(plan: SplitPlan) -> str:
    """Serialize a plan to the key-value document consumed by the executor
    and the CLI. Segments are index:start_unit:size triples."""
    segments = ", ".join(
        f"{s.index}:{s.start_unit}:{s.size}" for s in plan.segments)
    return (
        f"total_work_units: {plan.total_work_units}\n"
        f"n_containers: {plan.n_containers}\n"
        f"segments: {segments}\n"
        f"cpu_share_per_container: {plan.cpu_share_per_container:.2f}\n"
        f"total_cores: {plan.total_cores!r}\n"
    )


def plan_from_text(text: str) -> SplitPlan:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if ":" not in line:
            raise DataFormatError(f"plan line {lineno}: expected 'key: value'")
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()

    required = ("total_work_units", "n_containers", "segments",
                "cpu_share_per_container", "total_cores")
    for key in required:
        if key not in fields:
            raise DataFormatError(f"plan document missing field '{key}'")

    try:
        segments = []
        for chunk in fields["segments"].split(","):
            idx, start, size = (int(part) for part in chunk.strip().split(":"))
            segments.append(Segment(index=idx, start_unit=start, size=size))
        plan = SplitPlan(
            total_work_units=int(fields["total_work_units"]),
            n_containers=int(fields["n_containers"]),
            segments=tuple(segments),
            cpu_share_per_container=float(fields["cpu_share_per_container"]),
            total_cores=float(fields["total_cores"]),
        )
    except (ValueError, TypeError) as exc:
        raise DataFormatError(f"malformed plan document: {exc}") from None

    _validate_plan(plan)
    return plan


def _validate_plan(plan: SplitPlan) -> None:
    if plan.n_containers != len(plan.segments):
        raise DataFormatError("segment count does not match n_containers")
    expected_start = 0
    sizes = []
    for i, seg in enumerate(plan.segments):
        if seg.index != i or seg.start_unit != expected_start or seg.size < 1:
            raise DataFormatError("segments are not contiguous and ordered")
        expected_start += seg.size
        sizes.append(seg.size)
    if expected_start != plan.total_work_units:
        raise DataFormatError("segment sizes do not sum to total_work_units")
    if max(sizes) - min(sizes) > 1:
        raise DataFormatError("segment sizes differ by more than one unit")
    budget = plan.total_cores + SHARE_ROUNDING_SLACK
    if plan.n_containers * plan.cpu_share_per_container > budget:
        raise DataFormatError("cpu shares exceed the device core budget")


def save_plan(plan: SplitPlan, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(plan_to_text(plan))


def load_plan(path: str) -> SplitPlan:
    with open(path, "r", encoding="utf-8") as fh:
        return plan_from_text(fh.read())
