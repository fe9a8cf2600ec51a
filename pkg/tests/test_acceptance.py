"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
report. "Random feasible" two-user scenarios are rejection-sampled from
the reference parameter envelope (1 MHz band, 5-50 mW power budgets,
0.1-0.4 J energy budgets, 0.5-3 Mb tasks); feasible means the analytic
equal-time structure is attainable. The solver-agreement criteria (1, 2)
additionally require the energy budgets to be slack at full power, the
premise under which that structure is the true optimum; tight-budget
cases are validated against the grid oracle in the closed-form tests.
"""

import math
import time

import numpy as np

from nomamec import (
    Allocation,
    ScenarioConfig,
    Seed,
    ServerSpec,
    UserSpec,
    aggregated_offload_time,
    bss_solve,
    check_feasibility,
    full_local_delay,
    generate_channels,
    grid_oracle_two_user,
    init_bounds,
    lambert_w0,
    local_time,
    max_violation,
    reorder_users,
    solve_noma_full_offload,
    solve_two_user,
    solve_two_user_limited,
    sum_rate,
    user_rate,
)
from nomamec.cli import run_sweep
from nomamec.configio import LoadedScenario
from nomamec.lambertw import BRANCH_POINT
from nomamec.solver import InfeasibleScenarioError
from conftest import (
    S1_MASTER_SEED,
    draw_envelope_scenario,
    feasible_two_user_scenarios,
    random_gain_power_instance,
    s1_config,
)


def report(num: int, name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {num} ({name}): {status}  {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def s1_scenario():
    cfg = s1_config()
    realization = generate_channels(Seed(master=S1_MASTER_SEED), cfg)
    return realization, reorder_users(cfg, realization)


def test_c1_grid_oracle_equivalence():
    start = time.perf_counter()
    scenarios = [s1_scenario()] + [
        (r, c)
        for r, c, _, _ in feasible_two_user_scenarios(25, seed=101, energy_slack_only=True)
    ]
    worst = 0.0
    for realization, cfg in scenarios:
        oracle = grid_oracle_two_user(realization, cfg, n=400)
        tol = 2.0 * (oracle.grid_effect + 1e-4)
        from nomamec import TwoUserParams

        sol = solve_two_user(TwoUserParams.from_scenario(realization, cfg))
        res = bss_solve(realization, cfg, eps=1e-4)
        gap = max(abs(sol.delay - oracle.delay), abs(res.optimal_delay - oracle.delay))
        worst = max(worst, gap / tol)
        assert gap <= tol, (gap, tol)
    elapsed = time.perf_counter() - start
    report(
        1,
        "grid-oracle equivalence",
        worst <= 1.0 and elapsed < 60.0,
        f"26 scenarios, worst gap {worst:.2f}x tolerance, {elapsed:.1f}s < 60s",
    )


def test_c2_bss_closed_form_agreement():
    worst = 0.0
    for realization, cfg, params, sol in feasible_two_user_scenarios(
        100, seed=202, energy_slack_only=True
    ):
        # eps is an absolute bracket width; envelope delays go down to
        # ~50 ms, so bisect finer than the 1e-3 relative agreement target
        res = bss_solve(realization, cfg, eps=1e-5)
        worst = max(worst, abs(sol.delay - res.optimal_delay) / sol.delay)
    report(
        2,
        "bss vs closed form on 100 random feasible scenarios",
        worst <= 1e-3,
        f"max relative delay gap {worst:.2e} <= 1e-3",
    )


def test_c3_iteration_count():
    realization, cfg = s1_scenario()
    lo, hi = init_bounds(cfg)
    res = bss_solve(realization, cfg, eps=1e-4)
    ok = (lo, hi) == (0.0, 1.6) and res.iterations == 14
    width = hi - lo
    halving = True
    blo, bhi = lo, hi
    for mid, feasible in res.trace:
        if feasible:
            bhi = mid
        else:
            blo = mid
        halving &= abs((bhi - blo) - 0.5 * width) <= 1e-12 * width
        width = bhi - blo
    report(
        3,
        "iteration count",
        ok and halving and width <= 1e-4,
        f"bracket [0, 1.6], eps 1e-4: {res.iterations} iterations, exact halving",
    )


def test_c4_equal_time_invariants():
    scenarios = [s1_scenario()]
    picked = feasible_two_user_scenarios(30, seed=303)
    worst_prop3 = 0.0
    worst_fill = 0.0
    region_ok = True
    cases = []
    for realization, cfg, params, sol in (
        [(r, c, None, None) for r, c in scenarios] + picked
    ):
        if sol is None:
            from nomamec import TwoUserParams

            params = TwoUserParams.from_scenario(realization, cfg)
            sol = solve_two_user(params)
        assert sol.valid
        cases.append(sol.case_label)
        betas = (sol.beta1, sol.beta2)
        powers = (sol.p1, sol.p2)
        # the common transmit window, recomputed through the model formula
        window = aggregated_offload_time(2, betas, realization, powers, cfg.users, cfg.bandwidth)
        for m in (1, 2):
            t_loc = local_time(betas[m - 1], cfg.users[m - 1])
            worst_prop3 = max(worst_prop3, abs(window - t_loc) / t_loc)
        # all users finish together: realized rate split sits in the
        # successive-decoding rate region at the reported delay
        bits1 = sol.beta1 * cfg.users[0].task_bits
        bits2 = sol.beta2 * cfg.users[1].task_bits
        r1_cap = user_rate(1, realization, powers, cfg.bandwidth)
        rsum_cap = sum_rate(realization, powers, cfg.bandwidth, 2)
        region_ok &= bits1 <= sol.delay * r1_cap * (1 + 1e-3) + 1e-6
        region_ok &= bits1 + bits2 <= sol.delay * rsum_cap * (1 + 1e-3) + 1e-6
        worst_fill = max(worst_fill, abs((bits1 + bits2) - sol.delay * rsum_cap) / (bits1 + bits2))
    report(
        4,
        "equal-time invariants",
        worst_prop3 <= 1e-6 and worst_fill <= 1e-3 and region_ok,
        f"31 valid solutions ({len(set(cases))} case labels): "
        f"max |offload-local|/local {worst_prop3:.2e} <= 1e-6, "
        f"window fill error {worst_fill:.2e} <= 1e-3, rate region ok",
    )


def test_c5_telescoping_identity():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(1000):
        realization, powers = random_gain_power_instance(rng, max_users=8)
        m = len(realization.gains)
        total = sum_rate(realization, powers, 1e6, m)
        split = sum(user_rate(i, realization, powers, 1e6) for i in range(1, m + 1))
        if total > 0:
            worst = max(worst, abs(total - split) / total)
    report(
        5,
        "rate telescoping identity",
        worst <= 1e-9,
        f"1000 instances (M<=8), max relative error {worst:.2e} <= 1e-9",
    )


def test_c6_monotone_feasibility_and_dominance():
    rng = np.random.default_rng(505)
    violations = 0
    pairs = 0
    while pairs < 200:
        n = int(rng.integers(2, 5))
        realization, cfg = draw_envelope_scenario(rng, n_users=n)
        hi = init_bounds(cfg)[1]
        a_lo, a_hi = np.sort(rng.uniform(0.05 * hi, 1.2 * hi, 2))
        if a_hi - a_lo < 1e-6:
            continue
        pairs += 1
        r_lo = check_feasibility(a_lo, realization, cfg)
        if not r_lo.feasible:
            continue
        r_hi = check_feasibility(a_hi, realization, cfg, warm=r_lo.witness)
        if not r_hi.feasible:
            scaled = Allocation(
                betas=r_lo.witness.betas,
                powers=tuple(p * a_lo / a_hi for p in r_lo.witness.powers),
            )
            if max_violation(a_hi, scaled, realization, cfg) > 1e-8:
                violations += 1

    dominance_ok = True
    checked = 0
    rng2 = np.random.default_rng(506)
    while checked < 40:
        realization, cfg = draw_envelope_scenario(rng2)
        try:
            partial = bss_solve(realization, cfg, eps=1e-4)
        except InfeasibleScenarioError:
            continue
        checked += 1
        full = solve_noma_full_offload(realization, cfg, eps=1e-4)
        dominance_ok &= partial.optimal_delay <= full.delay + 2e-4
        if all(u.local_full_energy <= cfg.e_max for u in cfg.users):
            local = full_local_delay(cfg)
            dominance_ok &= partial.optimal_delay <= local.delay + 2e-4
    report(
        6,
        "monotone feasibility and scheme dominance",
        violations == 0 and dominance_ok,
        f"200 alpha pairs, {violations} monotonicity violations; "
        f"partial <= min(full, local) on {checked} feasible draws",
    )


def test_c7_lambert_identity():
    worst = 0.0
    points = BRANCH_POINT + 1e-12 + np.logspace(
        -12, math.log10(1e6 - BRANCH_POINT), 10000
    )
    for x in points:
        w = lambert_w0(float(x))
        worst = max(worst, abs(w * math.exp(w) - x) / max(1.0, abs(x)))
    report(
        7,
        "lambert w defining identity",
        worst <= 1e-12,
        f"10000 log-spaced points in [-1/e+1e-12, 1e6], max residual {worst:.2e}",
    )


def test_c8_figure_shapes():
    # e_max is set high enough that fully-local computing stays energy
    # feasible: with the reference 0.2 J budget a deep-fade draw can make
    # the whole scenario infeasible (energy forces offloading through a
    # dead channel), which poisons the seed means with infinities
    base = ScenarioConfig(
        bandwidth=1e6,
        noise_density_dbm=-174.0,
        users=(UserSpec(1.6e6, 1e3, 1e9, 1e-27), UserSpec(1.6e6, 1e3, 1e9, 1e-28)),
        p_max=0.01,
        e_max=2.0,
    )
    shape_ok = True
    detail = []
    for p_max in (0.01, 0.02):
        loaded = LoadedScenario(
            config=ScenarioConfig(
                bandwidth=base.bandwidth,
                noise_density_dbm=base.noise_density_dbm,
                users=base.users,
                p_max=p_max,
                e_max=base.e_max,
            ),
            master_seed=S1_MASTER_SEED,
        )
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            _, mean_path, _ = run_sweep(
                loaded,
                axis="user_count",
                values=[float(m) for m in range(2, 9)],
                schemes=["noma-partial", "noma-full"],
                n_seeds=50,
                eps=1e-3,
                out_dir=tmp,
            )
            rows = [l.split(",") for l in open(mean_path).read().splitlines()[1:]]
        mean = {(float(r[1]), r[2]): float(r[4]) for r in rows}
        partial = [mean[(float(m), "noma-partial")] for m in range(2, 9)]
        full = [mean[(float(m), "noma-full")] for m in range(2, 9)]
        nondecreasing = all(b >= a - 1e-9 for a, b in zip(partial, partial[1:]))
        nondecreasing &= all(b >= a - 1e-9 for a, b in zip(full, full[1:]))
        rowwise = all(p <= f + 2e-3 for p, f in zip(partial, full))
        shape_ok &= nondecreasing and rowwise
        detail.append(
            f"p_max={p_max}: partial {partial[0]:.3f}->{partial[-1]:.3f}s, "
            f"full {full[0]:.3f}->{full[-1]:.3f}s"
        )

    realization, cfg = s1_scenario()
    from nomamec import TwoUserParams

    params = TwoUserParams.from_scenario(realization, cfg)
    sol = solve_two_user(params)
    fast = solve_two_user_limited(params, ServerSpec(cycles_per_bit=1e3, cpu_freq=1e17, kappa=1e-28))
    server_ok = abs(fast.delay - sol.delay) <= 1e-6 * sol.delay
    report(
        8,
        "figure shapes and fast-server consistency",
        shape_ok and server_ok,
        "; ".join(detail) + f"; fast-server gap {abs(fast.delay - sol.delay) / sol.delay:.2e}",
    )


def test_c9_determinism():
    import tempfile

    loaded = LoadedScenario(config=s1_config(), master_seed=S1_MASTER_SEED)
    kwargs = dict(
        axis="p_max",
        values=[0.01, 0.02],
        schemes=["noma-partial", "noma-full"],
        n_seeds=2,
        eps=1e-3,
    )
    with tempfile.TemporaryDirectory() as ta, tempfile.TemporaryDirectory() as tb:
        a_csv, a_mean, a_man = run_sweep(loaded, out_dir=ta, **kwargs)
        b_csv, b_mean, b_man = run_sweep(loaded, out_dir=tb, **kwargs)
        same = (
            open(a_csv, "rb").read() == open(b_csv, "rb").read()
            and open(a_mean, "rb").read() == open(b_mean, "rb").read()
            and open(a_man, "rb").read() == open(b_man, "rb").read()
        )
    report(9, "byte-identical reruns", same, "sweep csv, mean csv and manifest match")
