"""
Racks, carriers and a loading area
==================================

Jobs ride on racks, racks ride on carriers, and carriers queue at a
loading area that takes two loads per interval. The same plan costs more
once those limits bite.
"""

from pathlib import Path

import numpy as np

from jobshop_mcts import makespan
from jobshop_mcts.resources import (ResourcePool, gen_problem3, occupancy_violations,
                                    resource_dispatch)
from jobshop_mcts.schedulers import online_dispatch

out = Path("demo_output")
out.mkdir(exist_ok=True)

jobs, pool = gen_problem3(60, n_carriers=4, racks_per_type=2, seed=3)
plan = np.random.default_rng(0).permutation(jobs.n)

free = online_dispatch(plan, jobs)
sched, log = resource_dispatch(plan, jobs, pool)
print("makespan without resources:", makespan(free))
print("makespan with 4 carriers:  ", makespan(sched))
print("rack changes:", sum(e.job_id < 0 for e in log))
print("violations:", occupancy_violations(log, pool))

# an unlimited pool with no loading area is the plain dispatcher again
same, _ = resource_dispatch(plan, jobs, ResourcePool.unlimited(jobs))
print("unlimited equals plain:", same == free)

log.to_csv(out / "resource_log.csv")
print("wrote", out / "resource_log.csv")
