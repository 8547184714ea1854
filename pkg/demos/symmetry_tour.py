"""Compute point symmetries of the built-in systems and check a few group actions."""

from charwave.groups import factorization_check, groups_for
from charwave.symmetry import find_symmetries, product_filter
from charwave.systems import builtin_system

system1 = builtin_system("system1")
basis = find_symmetries(system1, 1, 1)
print(f"system1: {len(basis)} generators with affine ansatz")
for field in basis:
    print("  ", field.to_string())

gas = builtin_system("gas-reduced")
kept = product_filter(find_symmetries(gas, 2, 2), gas)
print(f"\ngas-reduced: {len(kept)} generators preserve products with u")
for field in kept:
    print("  ", field.to_string())

full = builtin_system("gas-full")
print("\nfactorization residuals on gas-full at eta = 0.3:")
for name, g in groups_for("gas").items():
    report = factorization_check(full, g, 0.3, trials=20, rng=0)
    print(f"  {name}: {report.max_residual:.2e}")
