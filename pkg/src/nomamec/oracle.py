"""Exhaustive two-user reference optimizer, independent of the solvers.

Sweeps a dense power grid, recovers partition ratios from the equal-time
relations at every grid point, applies the full constraint set, and
returns the smallest feasible delay. This is deliberately a brute-force
re-derivation used to cross-check both the bisection solver and the
analytic solution; it shares no code path with either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ChannelRealization, ScenarioConfig, UsageError

__all__ = ["OracleResult", "grid_oracle_two_user"]


@dataclass(frozen=True)
class OracleResult:
    delay: float
    p1: float
    p2: float
    beta1: float
    beta2: float
    grid_effect: float  # local delay sensitivity to one grid cell
    feasible_points: int


def grid_oracle_two_user(gains, config: ScenarioConfig, n: int = 400) -> OracleResult:
    """Minimum feasible delay over an n-by-n power grid on [0, p_max]^2.

    Raises UsageError when the scenario is not a two-user one and
    RuntimeError when no grid point is feasible.
    """
    g = gains.gains if isinstance(gains, ChannelRealization) else tuple(gains)
    if len(g) != 2 or len(config.users) != 2:
        raise UsageError("grid oracle handles exactly two users")
    g1, g2 = float(g[0]), float(g[1])
    u1, u2 = config.users
    a1 = u1.task_bits + u2.task_bits
    b1 = u1.cpu_freq / u1.cycles_per_bit + u2.cpu_freq / u2.cycles_per_bit
    bw = config.bandwidth
    e_max = config.e_max
    kf3_1 = u1.kappa * u1.cpu_freq**3
    kf3_2 = u2.kappa * u2.cpu_freq**3

    p = np.linspace(0.0, config.p_max, n)
    p1g, p2g = np.meshgrid(p, p, indexing="ij")
    snr = g1 * p1g + g2 * p2g
    rate = bw * np.log2(1.0 + snr)
    tau = a1 / (b1 + rate)

    beta1 = 1.0 - tau * u1.cpu_freq / (u1.task_bits * u1.cycles_per_bit)
    beta2 = 1.0 - tau * u2.cpu_freq / (u2.task_bits * u2.cycles_per_bit)

    slack = 1e-12
    ok = (beta1 >= -slack) & (beta1 <= 1.0 + slack)
    ok &= (beta2 >= -slack) & (beta2 <= 1.0 + slack)
    ok &= a1 * (kf3_1 + p1g) / (b1 + rate) <= e_max * (1.0 + slack)
    ok &= a1 * (kf3_2 + p2g) / (b1 + rate) <= e_max * (1.0 + slack)
    # the weak user's own bits must fit its interference-free decode rate
    rate1 = bw * np.log2(1.0 + g1 * p1g)
    ok &= beta1 * u1.task_bits <= tau * rate1 * (1.0 + 1e-12) + 1e-9

    if not ok.any():
        raise RuntimeError("grid oracle found no feasible point")
    masked = np.where(ok, tau, np.inf)
    idx = np.unravel_index(int(np.argmin(masked)), masked.shape)
    delay = float(masked[idx])
    p1s, p2s = float(p1g[idx]), float(p2g[idx])
    b1s = float(np.clip(beta1[idx], 0.0, 1.0))
    b2s = float(np.clip(beta2[idx], 0.0, 1.0))

    h = config.p_max / (n - 1)
    snr_opt = 1.0 + g1 * p1s + g2 * p2s
    sens = delay**2 * bw * (g1 + g2) / (a1 * math.log(2.0) * snr_opt)
    return OracleResult(
        delay=delay,
        p1=p1s,
        p2=p2s,
        beta1=b1s,
        beta2=b2s,
        grid_effect=sens * h,
        feasible_points=int(ok.sum()),
    )
