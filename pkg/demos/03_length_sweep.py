"""MSE against sequence length for the three designs.

Writes results.csv, summary.json and plotdata_<name>.csv to ./sweep_out and
prints the per-length means. Pass a sweep JSON file to use it instead of the
built-in quick setting (the demos/configs files give the full grid).
"""

import sys
from pathlib import Path

from onebit_crew import bench
from onebit_crew.scenario import jamming_scenario, load_json

if len(sys.argv) > 1:
    cfg = bench.SweepConfig.from_dict(load_json(sys.argv[1]))
else:
    cfg = bench.SweepConfig(scenario=jamming_scenario(25, "spot"), Ns=(16, 32, 48), trials=2,
                            name="quick")

table = bench.run_sweep(cfg, jobs=1)
out = Path("sweep_out")
for p in bench.emit_report(table, out):
    print("wrote", p)

print(f"{'N':>4s}" + "".join(f"{a:>16s}" for a in cfg.algorithms))
for n in cfg.Ns:
    print(f"{n:4d}" + "".join(f"{table.aggregates[a][n]['mean']:16.6f}" for a in cfg.algorithms))

if table.errors:
    print(len(table.errors), "cells failed")
