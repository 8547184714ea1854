"""Weak-residual decay of a regularized singular shock as the width shrinks.

Writes association.csv and association.svg to the working directory.
"""

from charwave.association import association_sweep, report_csv, report_svg
from charwave.riemann import singular_params_gas

params = singular_params_gas((1, 2), (2, 1))
report = association_sweep(None, params, eps_list=[0.2, 0.1, 0.05, 0.025])
for k, eps in enumerate(report.eps):
    print(f"eps {eps:.4f}: " + "  ".join(f"eq{i} {report.sup_residual[k][i]:.3e}" for i in (0, 1)))
print("slopes", [round(s, 3) for s in report.slopes()], "verdict", "pass" if report.passed else "fail")
with open("association.csv", "w") as fh:
    fh.write(report_csv(report))
with open("association.svg", "w") as fh:
    fh.write(report_svg(report))
