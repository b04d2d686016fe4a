"""Where do the closed-form conditions hold?

Scan the cross-competition rates (a2, b1) with the other rates fixed and
mark which regime the checker certifies:

    P  persistence (h4 or h5)       X  extinction of u
    .  neither                      ?  instability only (no chemotaxis-aware guarantee)
"""

import numpy as np

from chemolab import ExtremaTable, ModelParams
from chemolab import hypothesis

params = ModelParams(1, 1, 1, 0.1, 0.1, 1, 1, 1)
a2_values = np.linspace(0.05, 4.0, 50)
b1_values = np.linspace(0.05, 4.0, 20)

print("b1 \\ a2 ->")
for b1 in b1_values[::-1]:
    row = []
    for a2 in a2_values:
        rep = hypothesis.evaluate(ExtremaTable.constant(1.0, 2.0, a2, 1.0, b1, 2.0), params)
        if rep.h4 or rep.h5:
            row.append("P")
        elif rep.alpha_beta is not None:
            row.append("X")
        elif rep.instability:
            row.append("?")
        else:
            row.append(".")
    print(f"{b1:5.2f} " + "".join(row))
