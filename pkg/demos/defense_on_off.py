"""Same networks, same attackers, with and without the defense.

Runs a handful of 50-node networks with 30% sinkholes twice each and prints
detection and delivery side by side.

    python demos/defense_on_off.py [seeds]
"""

import statistics
import sys

from dshrpl.sim import ScenarioConfig, run_scenario

seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5

print("seed  attackers  caught  pdr(on)  pdr(off)")
on_all, off_all = [], []
for seed in range(1, seeds + 1):
    cfg = ScenarioConfig(seed=seed, sinkhole_rate=0.3, keep_records=False)
    on = run_scenario(cfg).metrics_row()
    off_res = run_scenario(cfg.replace(defense=False))
    off = off_res.metrics_row()
    on_all.append(on.pdr)
    off_all.append(off.pdr)
    caught = round(on.dr * len(off_res.attackers) / 100)
    print(f"{seed:>4}  {len(off_res.attackers):>9}  {caught:>6}  {on.pdr:7.2f}  {off.pdr:8.2f}")

print(f"\nmean pdr with defense {statistics.fmean(on_all):.2f}%, "
      f"without {statistics.fmean(off_all):.2f}%")
