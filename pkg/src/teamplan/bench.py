"""Benchmark sweeps over generated maps.

One cell per (robots, tasks, failpoints, seed) grid point: the team of
identical robots is planned with reallocation, the joint baseline is
built and solved when its size bound fits the ceiling, and everything
lands in one CSV row. State columns report full unpruned sizes while
transition columns count what the reachable build materialized. Time
columns are medians over repeated runs and are the only columns allowed
to differ between identical sweeps.
"""

import csv
import itertools
import logging
import statistics
import time
from dataclasses import dataclass

from .baseline import CeilingExceeded, build_mamdp, solve_mamdp
from .maps import MapSpec, gen_map, map_mission
from .product import compile_mission, local_product
from .realloc import run_stapu_with_realloc
from .team import build_team

log = logging.getLogger(__name__)

COLUMNS = (
    "robots",
    "tasks",
    "failpoints",
    "seed",
    "team_states",
    "team_trans",
    "stapu_ms",
    "reallocations",
    "guarantee",
    "mamdp_states",
    "mamdp_trans",
    "mamdp_ms",
    "mamdp_value",
)

DEFAULT_CEILING = 60_000


@dataclass
class BenchRow:
    robots: int
    tasks: int
    failpoints: int
    seed: int
    team_states: int
    team_trans: int
    stapu_ms: float
    reallocations: int
    guarantee: float
    mamdp_states: int | None = None
    mamdp_trans: int | None = None
    mamdp_ms: float | None = None
    mamdp_value: float | None = None

    def csv_values(self):
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        out = []
        for name in COLUMNS:
            v = getattr(self, name)
            if name.endswith("_ms") and v is not None:
                out.append(f"{v:.3f}")
            else:
                out.append(cell(v))
        return out


def _timed(fn, reps):
    """Result of the first run plus the median wall time in ms."""
    result = None
    times = []
    for rep in range(reps):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1000.0)
        if rep == 0:
            result = out
    return result, statistics.median(times)


def run_cell(
    robots,
    tasks,
    failpoints,
    seed,
    nodes=30,
    pfail=0.1,
    hazards=0,
    reps=3,
    ceiling=DEFAULT_CEILING,
    max_realloc=None,
    epsilon=1e-6,
):
    """Measure one grid point; MAMDP columns stay empty above the ceiling."""
    spec = MapSpec(
        nodes=nodes, failpoints=failpoints, pfail=pfail, tasks=tasks,
        hazards=hazards, seed=seed,
    )
    model = gen_map(spec)
    mission = map_mission(spec)
    models = [model] * robots
    with_safety = mission.safety is not None

    shared = compile_mission(mission)
    pm = local_product(model, mission, automata=shared)
    team = build_team([pm] * robots)

    (jp, report), stapu_ms = _timed(
        lambda: run_stapu_with_realloc(
            models, mission, max_realloc=max_realloc, epsilon=epsilon
        ),
        reps,
    )
    row = BenchRow(
        robots=robots,
        tasks=tasks,
        failpoints=failpoints,
        seed=seed,
        team_states=team.full_size(with_safety),
        team_trans=team.mdp.transition_count(),
        stapu_ms=stapu_ms,
        reallocations=report.reallocations,
        guarantee=report.value,
    )
    try:
        (mm, value), mamdp_ms = _timed(
            lambda: _solve_joint(models, mission, ceiling, shared, epsilon), reps
        )
    except CeilingExceeded as e:
        log.info(
            "cell robots=%d tasks=%d failpoints=%d seed=%d: %s", robots, tasks,
            failpoints, seed, e,
        )
        return row
    row.mamdp_states = mm.full_size(with_safety)
    row.mamdp_trans = mm.mdp.transition_count()
    row.mamdp_ms = mamdp_ms
    row.mamdp_value = value
    return row


def _solve_joint(models, mission, ceiling, shared, epsilon):
    mm = build_mamdp(models, mission, ceiling=ceiling, automata=shared)
    value, _ = solve_mamdp(mm, epsilon=epsilon)
    return mm, value


def _grid(config, key):
    v = config.get(key)
    if v is None:
        raise ValueError(f"sweep config needs a {key!r} list")
    if isinstance(v, int):
        v = [v]
    if not isinstance(v, list) or not v or not all(isinstance(x, int) for x in v):
        raise ValueError(f"sweep config {key!r} must be a nonempty list of integers")
    return v


def bench_sweep(config):
    """Run every grid cell; failed cells are logged and skipped."""
    grids = [_grid(config, k) for k in ("robots", "tasks", "failpoints", "seeds")]
    kwargs = {
        "nodes": config.get("nodes", 30),
        "pfail": config.get("pfail", 0.1),
        "hazards": config.get("hazards", 0),
        "reps": config.get("reps", 3),
        "ceiling": config.get("ceiling", DEFAULT_CEILING),
        "max_realloc": config.get("max_realloc"),
        "epsilon": config.get("epsilon", 1e-6),
    }
    rows = []
    for robots, tasks, failpoints, seed in itertools.product(*grids):
        try:
            rows.append(run_cell(robots, tasks, failpoints, seed, **kwargs))
        except Exception:
            log.exception(
                "cell robots=%d tasks=%d failpoints=%d seed=%d failed; continuing",
                robots, tasks, failpoints, seed,
            )
    return rows


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values())
