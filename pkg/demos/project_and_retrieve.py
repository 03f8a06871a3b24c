"""Solve a random SDP directly and through a projected version of it.

Run with ``python3 demos/project_and_retrieve.py``.
"""

import numpy as np

from rpconic import GenSpec, embed_dimension, generate_feasible, jordan, project_program, retrieve_solution
from rpconic.pipeline import lift_dual
from rpconic.model import dual_slack
from rpconic.sketch import sample_rp
from rpconic.solver import solve

# 12 x 12 PSD variable (78 coordinates), 150 equality constraints
p, witness = generate_feasible(GenSpec.psd(12, 150, seed=4))
print(f"original program: m={p.m} constraints, n={p.n} coordinates")

full = solve(p)
print(f"  v(P)   = {full.objective:.8f}  ({full.iterations} iterations)")

eps = 0.4
d = embed_dimension(p.m, eps)
sketch = sample_rp(d, p.m, seed=7, epsilon=eps)
projected = project_program(p, sketch)
small = solve(projected.program)
print(f"projected program: d={d} aggregated constraints")
print(f"  v(P_T) = {small.objective:.8f}  (never above v(P))")

# x_T generally violates the original constraints; project it back
ret = retrieve_solution(small.x, p.operator, p.b, p.c)
print(f"  residual before retrieval {ret.residual_before:.3e}, after {ret.residual_after:.3e}")
print(f"  <c, x_retrieved> = {jordan.inner_product(p.c, ret.x_tilde):.8f}")
print(f"  lambda_min(x_retrieved) = {ret.lambda_min_after:.3e}")

# the projected dual lifts to a feasible dual of the original
y, nu = lift_dual(sketch, small.y, small.nu)
print(f"  lifted dual slack lambda_min = {jordan.lambda_min(dual_slack(p, y, nu)):.3e}")
print(f"  lifted dual objective = {p.b @ y - p.theta * nu:.8f}")
