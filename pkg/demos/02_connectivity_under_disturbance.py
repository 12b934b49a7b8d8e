"""
Keeping a swarm connected under bounded disturbances
====================================================

"""
from dataclasses import replace

import numpy as np

from robconn.controllers import design, validate_params
from robconn.graph import random_connected_graph
from robconn.simulator import DISTURBANCE_KINDS, DisturbanceSpec, SimConfig, ich_initial_state, run

rng = np.random.default_rng(3)
net = random_connected_graph(6, rng)
print("edges:", net.edges)

# Largest initial edge length and disturbance bound for the nonlinear weight.
params, pot = design(net, "piecewise_nl", R=2.0)
print(params)
print(validate_params(net, pot, params))

# Start every case at the worst allowed spread and let each disturbance act.
x0 = ich_initial_state(net, 2, params.R_tilde, rng)
for kind in DISTURBANCE_KINDS:
    trace = run(SimConfig(net, pot, params, x0, DisturbanceSpec(kind, seed=1), t_end=20.0))
    print(f"{kind:12s} max edge {trace.dx_inf.max():.4f} (R = {params.R}), final V {trace.energy[-1]:.4f}")

# The bound is conservative: the push has to grow a lot before an edge breaks.
for factor in (10, 100, 1000):
    loud = replace(params, delta=factor * params.delta)
    trace = run(SimConfig(net, pot, loud, x0, DisturbanceSpec("adversarial"), t_end=20.0))
    print(f"delta x{factor:<5d} {trace.status:24s} max edge {trace.dx_inf.max():.4f}")
