"""
verify_oracles.py

Quick manual check of the adaptive solver against an independent
fixed-step classical RK4 integration of the Lane-Emden equation.

Usage:
  py -m verify_oracles
  python3 -m verify_oracles
"""

import math
from typing import Optional

from polytrope.core_ode import first_zero

ORACLE_STEP = 1e-5
ORACLE_START = 1e-3
ORACLE_R_MAX = 20.0

# xi1 from the fixed-step oracle, to the digits it is trusted
REFERENCE_XI1 = {1.5: 3.65375, 3.0: 6.89685}


def rk4_first_zero(n: float, h: float = ORACLE_STEP, r_max: float = ORACLE_R_MAX) -> Optional[float]:
    """
    First zero of psi'' + 2 psi'/r = -psi^n by classical RK4 with a fixed step.

    Starts at r = 1e-3 from the two leading series terms and locates the sign
    change by linear interpolation inside the last step.
    """

    def f(r: float, psi: float, dpsi: float) -> tuple[float, float]:
        return dpsi, -(max(psi, 0.0) ** n) - 2.0 * dpsi / r

    r = ORACLE_START
    psi = 1.0 - r * r / 6.0 + n * r**4 / 120.0
    dpsi = -r / 3.0 + n * r**3 / 30.0
    while r < r_max:
        k1 = f(r, psi, dpsi)
        k2 = f(r + h / 2, psi + h / 2 * k1[0], dpsi + h / 2 * k1[1])
        k3 = f(r + h / 2, psi + h / 2 * k2[0], dpsi + h / 2 * k2[1])
        k4 = f(r + h, psi + h * k3[0], dpsi + h * k3[1])
        psi_new = psi + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dpsi_new = dpsi + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if psi_new <= 0.0:
            return r + h * psi / (psi - psi_new)
        r, psi, dpsi = r + h, psi_new, dpsi_new
    return None


def main() -> None:
    """Compare adaptive and fixed-step first zeros, plus the closed-form ones."""
    for n, expected in ((0, math.sqrt(6.0)), (1, math.pi)):
        xi1 = first_zero(n)
        print(f"[closed form] n={n}: xi1={xi1:.9f} expected={expected:.9f} diff={abs(xi1 - expected):.2e}")

    for n, reference in REFERENCE_XI1.items():
        adaptive = first_zero(n)
        oracle = rk4_first_zero(n)
        print(
            f"[rk4 oracle] n={n}: adaptive={adaptive:.7f} oracle={oracle:.7f} "
            f"diff={abs(adaptive - oracle):.2e} reference={reference}"
        )


if __name__ == "__main__":
    main()
