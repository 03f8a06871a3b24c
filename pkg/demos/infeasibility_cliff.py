"""Detection of infeasibility after projection, at two projection sizes.

Each instance carries a planted Farkas certificate. A projected program
inherits infeasibility when eps*||y||*(||b|| + sum rho(A_i)) < 1; for these
instances that forces eps so small that no compression happens. Cutting
the dimension to about 30% of n breaks the condition and some projected
programs turn feasible.

Run with ``python3 demos/infeasibility_cliff.py`` (a few seconds).
"""

import math

from rpconic.experiments import (
    ExperimentConfig,
    batch_specs,
    largest_admissible_epsilon,
    load_infeasible,
    run_infeasibility_trial,
)

specs = batch_specs(side=20, m=300, count=20, seed=0, feasibility="infeasible")
cfg = ExperimentConfig(gen=tuple(specs))
instances = load_infeasible(cfg)

eps_ok = largest_admissible_epsilon(instances)
d_small = 64
eps_small = math.sqrt(1.75 * math.log(300) / d_small)

rows, _ = run_infeasibility_trial(cfg.with_overrides(epsilons=(eps_ok,)), instances)
rows += run_infeasibility_trial(cfg.with_overrides(epsilons=(eps_small,), d_override=d_small), instances)[0]

print(f"{'epsilon':>10} {'d':>4} {'condition':>9} {'detected':>9}")
for r in rows:
    print(f"{r['epsilon']:10.3g} {r['d']:>4} {str(r['condition_holds']):>9} {r['detected']:>5}/{r['instances']}")
