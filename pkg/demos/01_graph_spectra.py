"""
Incidence matrices, Laplacians and algebraic connectivity
=========================================================

"""
import numpy as np

from robconn.graph import (incidence_matrix, laplacian, path_graph, ring_graph, spectral_summary, star_graph,
                           complete_graph, weighted_laplacian)
from robconn.potentials import PiecewiseNLPotential
from robconn.controllers import compute_K

np.set_printoptions(precision=4, suppress=True)

# Edges run from the lower-numbered agent (tail, -1) to the higher one (head, +1).
net = path_graph(3)
print("D =\n", incidence_matrix(net))
print("L = D D^T =\n", laplacian(net))

# The spectrum comes from a cyclic Jacobi solver; lambda_2 > 0 means connected.
s = spectral_summary(laplacian(net))
print("eigenvalues", s.eigenvalues, "lambda_2", s.lambda2, "|D^T|", s.op_norm_DT)

# State-dependent weights r(|x_i - x_j|) stretch the spectrum.
x = np.array([[0.0], [1.0], [3.0]])
print("L_w(x) =\n", weighted_laplacian(net, x, PiecewiseNLPotential(1.0, 4.0)))

# The gain K shrinks the admissible disturbance; well-connected graphs do better.
for name, build in [("path", path_graph), ("ring", ring_graph), ("star", star_graph), ("complete", complete_graph)]:
    g = build(6)
    print(f"{name:9s} M={g.n_edges:2d} lambda_2={spectral_summary(laplacian(g)).lambda2:.4f} K={compute_K(g):.3f}")
