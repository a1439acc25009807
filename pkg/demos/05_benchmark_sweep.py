"""A small scalability sweep, printed as CSV.

Each cell generates a seeded map, plans the team with reallocation, and
solves the joint multi-agent baseline when its size bound fits the
ceiling; above the ceiling those columns stay blank. Team sizes double
with every added task, which is the whole story of why the sequential
model scales and the joint one does not.
"""

import sys

from teamplan.bench import COLUMNS, bench_sweep

config = {
    "robots": [2],
    "tasks": [1, 2, 3],
    "failpoints": [3, 6],
    "seeds": [0],
    "nodes": 10,
    "pfail": 0.15,
    "reps": 3,
    "ceiling": 2_000,
}

rows = bench_sweep(config)
print(",".join(COLUMNS))
for row in rows:
    print(",".join(row.csv_values()))

ratio = rows[-1].team_states / rows[0].team_states
print(f"\nteam size ratio from 1 to 3 tasks: {ratio:g} (2 doublings)", file=sys.stderr)
