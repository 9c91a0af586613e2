"""Why decode batches should be grouped by architecture.

A batch finishes when its slowest member finishes, so mixing a large
network into a batch of small ones makes the small ones wait. This script
works the four-job example by hand, then checks a bigger random workload
against every chunked ordering by brute force.
"""

import itertools
import math

import numpy as np

from rinr.scheduler import (
    BatchPlan,
    DecodeJob,
    LatencyModel,
    batch_latency,
    group_by_arch,
    plan_latency,
)

MODEL = LatencyModel(base=0.0, per_param=1.0)


def chunked_latency(jobs_in_order, batch_size):
    total = 0.0
    for i in range(0, len(jobs_in_order), batch_size):
        total += batch_latency(list(jobs_in_order[i : i + batch_size]), MODEL)
    return total


def main():
    # Two small jobs (cost 1) and two large ones (cost 4), batch size 2.
    # Interleaved the two batches cost 4 + 4 = 8; grouped they cost 1 + 4 = 5.
    jobs = [
        DecodeJob("s0", "small", 1.0),
        DecodeJob("s1", "small", 1.0),
        DecodeJob("l0", "large", 4.0),
        DecodeJob("l1", "large", 4.0),
    ]
    interleaved = BatchPlan(batches=(("s0", "l0"), ("s1", "l1")), batch_size=2)
    grouped = group_by_arch(jobs, batch_size=2, seed=0)
    print(f"interleaved plan latency {plan_latency(interleaved, jobs, MODEL):g}")
    print(f"grouped plan latency     {plan_latency(grouped, jobs, MODEL):g}")

    # A random 8-job workload over three architectures, checked against
    # every permutation chunked into consecutive batches.
    rng = np.random.default_rng(5)
    arch_costs = {"2x6": 63.0, "3x10": 163.0, "5x17": 1000.0}
    keys = rng.choice(sorted(arch_costs), size=8)
    workload = [
        DecodeJob(f"img{i}", key, arch_costs[key]) for i, key in enumerate(keys)
    ]
    batch_size = 3

    plan = group_by_arch(workload, batch_size, seed=1)
    ours = plan_latency(plan, workload, MODEL)

    best = math.inf
    for perm in itertools.permutations(workload):
        best = min(best, chunked_latency(perm, batch_size))

    counts = {k: int(np.sum(keys == k)) for k in sorted(arch_costs)}
    print(f"workload {counts}, batch size {batch_size}")
    print(f"grouped latency {ours:g}, brute-force best over "
          f"{math.factorial(len(workload))} orderings {best:g}")
    assert ours <= best + 1e-9


if __name__ == "__main__":
    main()
