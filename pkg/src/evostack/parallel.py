"""Order-preserving parallel map over worker processes.

Results are assembled by input position, so the outcome never depends on the
schedule; `jobs <= 1` runs inline on the same code path.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def run_tasks(fn, tasks, jobs: int = 1) -> list:
    tasks = list(tasks)
    if jobs is None:
        jobs = 1
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))
