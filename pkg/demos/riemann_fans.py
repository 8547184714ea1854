"""Solve classical and singular Riemann problems and print the wave fans."""

from charwave.riemann import classify_system1, solve

cases = [("system1", (0, 0), (1, 0)), ("system1", (0, 0), (-3, 3)),
         ("system1", (1, 0), (-4, 0)), ("gas-full", (1, 2), (2, 1)), ("gas-full", (1, -1), (1, 1))]
for system, left, right in cases:
    fan = solve(system, left, right)
    label = f" [{classify_system1(left, right)}]" if system == "system1" else ""
    print(f"{system} {left} -> {right}{label}")
    for wave in fan.waves:
        speeds = ", ".join(f"{s:.4f}" for s in wave.speeds)
        print(f"  {wave.kind:<15} ({wave.left.u:.4f}, {wave.left.v:.4f}) -> "
              f"({wave.right.u:.4f}, {wave.right.v:.4f})  speed {speeds}")
    if fan.singular:
        p = fan.singular
        print(f"  singular shock: c = {p.c:.6f}, sigma1 = {p.sigma1:.6f}")
