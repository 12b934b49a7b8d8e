"""
Monte-Carlo checks of the supporting inequalities
=================================================

"""
from robconn import verifier

# Every margin is LHS - RHS of an inequality; negative beyond roundoff would be a bug.
for report in verifier.run_all(seed=42, budget=2000):
    print(report.line())
