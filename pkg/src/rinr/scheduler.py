"""Batched decoding with architecture grouping.

Decode latency of a batch is set by its slowest member, so mixing networks of
different sizes in one batch wastes time on every smaller member. Grouping
jobs by architecture keeps per-batch latency uniform. Remainder jobs (the
tail of each group that cannot fill a batch) are packed together in descending
cost order; that keeps the total batch count at ceil(n / batch_size) via
sum(floor(n_g/B)) + ceil(sum(n_g mod B)/B) = ceil(n/B), which a strict
one-group-per-batch rule would exceed whenever two groups both have tails.
The resulting plan minimizes total latency over all capacity-respecting
partitions for any latency model that increases with cost.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from rinr.codec import EncodedImage, decode


@dataclass(frozen=True)
class LatencyModel:
    """Affine cost-to-time proxy: time = base + per_param * cost."""

    base: float = 0.0
    per_param: float = 1.0

    def __post_init__(self):
        if self.base < 0.0:
            raise ValueError("base latency must be >= 0")
        if self.per_param <= 0.0:
            raise ValueError("per-parameter latency must be > 0")

    def time(self, cost: float) -> float:
        return self.base + self.per_param * cost


@dataclass(frozen=True)
class DecodeJob:
    """One image to decode. `encoded` may be None for planning-only jobs."""

    image_id: str
    arch_key: str
    cost: float
    encoded: EncodedImage | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.cost <= 0:
            raise ValueError(f"job {self.image_id!r}: cost must be > 0")
        if self.encoded is not None:
            expected = (
                self.encoded.bg_arch.parameter_count
                + self.encoded.obj_arch.parameter_count
            )
            if self.cost != expected:
                raise ValueError(
                    f"job {self.image_id!r}: cost {self.cost} != parameter total {expected}"
                )

    @classmethod
    def from_encoded(cls, image_id: str, encoded: EncodedImage) -> "DecodeJob":
        key = f"{encoded.bg_arch}+{encoded.obj_arch}"
        cost = encoded.bg_arch.parameter_count + encoded.obj_arch.parameter_count
        return cls(image_id=image_id, arch_key=key, cost=cost, encoded=encoded)


@dataclass(frozen=True)
class BatchPlan:
    """Ordered batches of job ids; every job appears in exactly one batch."""

    batches: tuple[tuple[str, ...], ...]
    batch_size: int

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        seen: set[str] = set()
        for batch in self.batches:
            if len(batch) == 0:
                raise ValueError("empty batch in plan")
            if len(batch) > self.batch_size:
                raise ValueError(f"batch of {len(batch)} exceeds size {self.batch_size}")
            for job_id in batch:
                if job_id in seen:
                    raise ValueError(f"job {job_id!r} appears twice in plan")
                seen.add(job_id)

    @property
    def job_ids(self) -> set[str]:
        return {job_id for batch in self.batches for job_id in batch}


class DecodeJobError(Exception):
    """Decode failure carrying the offending job's image_id."""

    def __init__(self, image_id: str, cause: Exception):
        super().__init__(f"decode failed for {image_id!r}: {cause}")
        self.image_id = image_id
        self.cause = cause


def _check_unique_ids(jobs: list[DecodeJob]) -> None:
    seen: set[str] = set()
    for job in jobs:
        if job.image_id in seen:
            raise ValueError(f"duplicate image_id {job.image_id!r}")
        seen.add(job.image_id)


def group_by_arch(jobs: list[DecodeJob], batch_size: int, seed: int = 0) -> BatchPlan:
    """Partition jobs into batches, keeping one architecture per batch where
    the group sizes allow it.

    Jobs sharing an arch_key form a group; the order within each group and the
    emission order of the groups are shuffled by `seed`. Each group emits
    size-`batch_size` batches until fewer than `batch_size` jobs remain; those
    tails are then packed together in descending cost order, so at most the
    final ceil(sum of tails / batch_size) batches mix architectures.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    _check_unique_ids(jobs)
    if not jobs:
        return BatchPlan(batches=(), batch_size=batch_size)

    groups: dict[str, list[DecodeJob]] = {}
    for job in jobs:
        groups.setdefault(job.arch_key, []).append(job)

    rng = np.random.default_rng(seed)
    keys = sorted(groups)
    order = rng.permutation(len(keys))

    batches: list[tuple[str, ...]] = []
    leftovers: list[DecodeJob] = []
    for idx in order:
        members = groups[keys[idx]]
        perm = rng.permutation(len(members))
        shuffled = [members[i] for i in perm]
        full_count = len(shuffled) // batch_size * batch_size
        for start in range(0, full_count, batch_size):
            batches.append(tuple(j.image_id for j in shuffled[start : start + batch_size]))
        leftovers.extend(shuffled[full_count:])

    leftovers.sort(key=lambda j: (-j.cost, j.arch_key, j.image_id))
    for start in range(0, len(leftovers), batch_size):
        batches.append(tuple(j.image_id for j in leftovers[start : start + batch_size]))
    return BatchPlan(batches=tuple(batches), batch_size=batch_size)


def batch_latency(batch_jobs: list[DecodeJob], model: LatencyModel) -> float:
    """Latency of one batch: the slowest member sets the pace."""
    if not batch_jobs:
        raise ValueError("batch_latency of an empty batch")
    return max(model.time(job.cost) for job in batch_jobs)


def plan_latency(plan: BatchPlan, jobs: list[DecodeJob], model: LatencyModel) -> float:
    """Total latency of a plan: batches run back to back."""
    _check_unique_ids(jobs)
    by_id = {job.image_id: job for job in jobs}
    if plan.job_ids != set(by_id):
        raise ValueError("plan does not cover exactly the given jobs")
    total = 0.0
    for batch in plan.batches:
        total += batch_latency([by_id[job_id] for job_id in batch], model)
    return total


def decode_batch(jobs: list[DecodeJob], thread_budget: int = 1) -> list[np.ndarray]:
    """Decode every job's image, in job order, using up to `thread_budget`
    worker threads.

    All weights are already in memory; decoding performs no file access.
    Output bits do not depend on the thread budget: each decode is a pure
    function of its EncodedImage.
    """
    if thread_budget < 1:
        raise ValueError("thread_budget must be >= 1")
    _check_unique_ids(jobs)
    for job in jobs:
        if job.encoded is None:
            raise ValueError(f"job {job.image_id!r} has no encoded image to decode")
    if not jobs:
        return []

    def run(job: DecodeJob) -> np.ndarray:
        try:
            return decode(job.encoded)
        except Exception as e:
            raise DecodeJobError(job.image_id, e) from e

    with ThreadPoolExecutor(max_workers=thread_budget) as pool:
        futures = [pool.submit(run, job) for job in jobs]
        return [f.result() for f in futures]
