"""Measured errors next to the theoretical bounds for a small batch.

Run with ``python3 demos/bound_report.py``.
"""

from rpconic.experiments import ExperimentConfig, batch_specs, containment_rates, run_pipeline

cfg = ExperimentConfig(gen=tuple(batch_specs(side=10, m=120, count=5, seed=1)), epsilon=0.4)
table = run_pipeline(cfg)

print(f"{'instance':>14} {'gap':>10} {'gap bound':>10} {'residual':>10} {'res bound':>10}")
for r in table:
    m, t = r.measured, r.theoretical
    if "value_PT" not in m:
        print(f"{r.info['instance']:>14}  projected solve ended with {r.info['status_PT']}")
        continue
    gap = m["value_P"] - m["value_PT"]
    print(f"{r.info['instance']:>14} {gap:10.3e} {t['optimality_gap_bound']:10.3e} "
          f"{m['feasibility_residual']:10.3e} {t['feasibility_error_bound']:10.3e}")

print()
for k, v in containment_rates(table).items():
    print(f"{k:>20}: inside the bound in {100 * v:.0f}% of runs")

# every report stores the inputs of its bounds and reproduces them exactly
assert all(r.recompute() == r.theoretical for r in table)
