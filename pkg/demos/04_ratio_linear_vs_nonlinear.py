"""
How much initial spread each weight allows
==========================================

"""
import numpy as np

from robconn.controllers import max_R_tilde
from robconn.verifier import rat, rat_table

R = 10.0
for M in (1, 2, 5, 12, 50, 150):
    lin, nl = max_R_tilde("linear", R, M), max_R_tilde("piecewise_nl", R, M)
    print(f"M={M:4d}  linear R~={lin:7.4f}  nonlinear R~={nl:7.4f}  ratio={rat(M):.4f}")

# The ratio falls monotonically: the nonlinear weight buys more room as graphs grow.
values = np.array([v for _, v in rat_table(150)])
print("strictly decreasing on 2..150:", bool(np.all(np.diff(values[1:]) < 0)))
