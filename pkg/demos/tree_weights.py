# Why a structure-aware enumerator pays off on tree-shaped weights.
#
# A weight built from nested if-then-else terms has one polynomial per
# root-to-leaf path. Enumerating total assignments re-integrates the same
# leaf once per value of every irrelevant Boolean; enumerating partial
# assignments against a skeleton of the weight does not.

from sawmi import bundled
from sawmi.skeleton import build_skeleton, dimacs
from sawmi.wmi import oracle_wmi, sae4wmi, wmi_pa

problem = bundled.load("example5")
print(bundled.text("example5"))

# the skeleton: one clause group per condition, guarded by its branch
sk = build_skeleton(problem.w)
print(f"skeleton has {sk.clause_count} clauses")
print(dimacs(sk.cnf))

pa = wmi_pa(problem, breakdown=True)
sae = sae4wmi(problem, breakdown=True)
print(f"total enumeration: {pa.n_integrals} integrals, value {pa.value}")
print(f"skeleton-guided:   {sae.n_integrals} integrals, value {sae.value}")

# each partial assignment stands for 2^k total ones (k Booleans left free)
for entry in sae.breakdown:
    lits = ", ".join(f"{'' if v else '~'}{a}" for a, v in entry.assignment.items())
    print(f"  x{entry.multiplicity}  {entry.integral!s:>10}   {lits}")

# the brute-force oracle walks every region separately
print("oracle:", oracle_wmi(problem).value)
