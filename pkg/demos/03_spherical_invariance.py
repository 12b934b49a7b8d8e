"""
Staying inside a ball with a boundary-layer repulsion
=====================================================

"""
import numpy as np

from robconn.controllers import DomainParams, PowerShape, design
from robconn.graph import ring_graph
from robconn.simulator import DisturbanceSpec, SimConfig, ich_initial_state, run

net = ring_graph(4)
params, pot = design(net, "linear", R=1.0)
rng = np.random.default_rng(0)
x0 = ich_initial_state(net, 2, params.R_tilde, rng)
x0 += np.array([1.0, 0.0]) * (9.0 - np.linalg.norm(x0, axis=1).max())

# The field only acts within epsilon of the boundary. Its depth settles where
# the gain c*delta*h(depth/epsilon) meets the outward push.
for exponent in (1.0, 2.0):
    dom = DomainParams(radius=10.0, epsilon=1.0, c=2.0, h=PowerShape(exponent))
    trace = run(SimConfig(net, pot, params, x0, DisturbanceSpec("constant", direction=(1.0, 0.0)),
                          t_end=30.0, domain=dom))
    print(f"h(s) = s^{exponent:g}: c~ = {dom.c_tilde:.4f}, max depth m = {trace.m.max():.4f} "
          f"(bound eps/c~ = {dom.epsilon / dom.c_tilde:.4f}), max |x| = {np.linalg.norm(trace.positions, axis=2).max():.4f}")
