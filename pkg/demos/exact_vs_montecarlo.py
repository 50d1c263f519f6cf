# Exact polytope integration next to a seeded Monte-Carlo estimate.
#
# Both integrators share one interface, so swapping them is a single
# argument. The exact one triangulates each region and integrates every
# monomial in closed form; the sampler draws from the region's bounding box.

import statistics

from sawmi import ExactIntegrator, MonteCarloIntegrator, random_problem, sae4wmi

problem = random_problem(seed=1003, bools=2, reals=2, depth=3)
exact = sae4wmi(problem, ExactIntegrator()).value
print(f"exact value {exact} ~ {float(exact):.6f}")

for n in (100, 1_000, 10_000):
    errs = []
    for seed in range(10):
        est = sae4wmi(problem, MonteCarloIntegrator(n, seed, strict=False)).value
        errs.append(abs(est - float(exact)) / float(exact))
    print(f"N={n:>6}: median relative error {statistics.median(errs):.4f}")

# same seed, same estimate
a = sae4wmi(problem, MonteCarloIntegrator(1000, 7)).value
b = sae4wmi(problem, MonteCarloIntegrator(1000, 7)).value
assert a == b
