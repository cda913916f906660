"""Acceptance suite: one test per criterion, thresholds from acceptance.cfg."""

import itertools
import math
import time

import numpy as np

import oracles
from htype import cli
from htype.clifford import build_structure, is_admissible
from htype.estimates import (
    crude_bounds_check,
    hadamard_descent_check,
    heat_residual,
    ratio_sweep,
    sweep_grid,
)
from htype.geometry import distance, geodesic, geodesic_point, phase
from htype.group import GroupPoint, dilate, jz_identities
from htype.heatkernel import DEFAULT_CONFIG, kernel, kernel_norms


def test_01_algebra_suite(thresholds, verdict):
    t0 = time.perf_counter()
    worst = 0.0
    cases = 0
    for n in range(1, 9):
        for m in range(1, 20):
            if not is_admissible(n, m):
                continue
            s = build_structure(n, m)
            errs = jz_identities(s, samples=int(thresholds["algebra_samples"]), seed=n * 100 + m)
            worst = max(worst, max(errs.values()))
            cases += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= thresholds["algebra_tol"] and elapsed < thresholds["algebra_runtime_s"]
    verdict("criterion 1 algebra", ok, f"{cases} structures, max err {worst:.2e}, {elapsed:.2f} s")


def test_02_distance_geodesic(thresholds, verdict):
    rng = np.random.default_rng(2)
    n_targets = int(thresholds["geodesic_targets"])
    w_len = w_end = w_ode = w_dil = 0.0
    for dims in [(1, 1), (2, 1), (2, 3)]:
        s = build_structure(*dims)
        for _ in range(n_targets):
            g = GroupPoint(rng.standard_normal(2 * dims[0]), rng.standard_normal(dims[1]))
            sol = geodesic(s, g)
            d = distance(s, g)
            w_len = max(w_len, abs(sol.length - d))
            end = geodesic_point(sol, s, 1.0)
            w_end = max(w_end, np.abs(end.x - g.x).max(), np.abs(end.z - g.z).max())
            x, z = oracles.hamilton_flow(s.generators, sol.xi0, sol.eta0)
            w_ode = max(w_ode, np.abs(x - end.x).max(), np.abs(z - end.z).max())
            alpha = rng.uniform(0.1, 10.0)
            w_dil = max(w_dil, abs(distance(s, dilate(g, alpha)) - alpha * d) / (alpha * d))
    ok = (w_len <= thresholds["geodesic_length_tol"] and w_end <= thresholds["geodesic_endpoint_tol"]
          and w_ode <= thresholds["geodesic_ode_tol"] and w_dil <= thresholds["distance_dilation_tol"])
    verdict("criterion 2 geodesics", ok,
            f"length {w_len:.1e}, endpoint {w_end:.1e}, ode {w_ode:.1e}, dilation {w_dil:.1e}")


def test_03_kernel_origin_value(thresholds, verdict):
    p = kernel((1, 1), 1.0, (0.0, 0.0)).p
    target = math.pi / 16
    err = abs(p - target)
    verdict("criterion 3 p_1(0,0) = pi/16", err <= thresholds["origin_value_tol"],
            f"p = {p:.15g}, target {target:.15g}, |diff| = {err:.3e} "
            f"(series oracle gives {oracles.heisenberg_origin_value():.15g})")


def test_04_normalization(thresholds, verdict):
    t0 = time.perf_counter()
    worst = 0.0
    masses = {}
    for n, m in [(1, 1), (2, 1), (1, 2)]:
        # the direct evaluator is enough here: only absolute accuracy matters
        mass = oracles.total_mass(
            lambda r, z: kernel_norms(n, m, 1.0, r, z, method="direct-radial").p,
            n, m, rx=12.0, rz=12.0, panels=(4, 4), order=16)
        masses[(n, m)] = mass
        worst = max(worst, abs(mass - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst <= thresholds["normalization_tol"] and elapsed < thresholds["normalization_runtime_s"]
    verdict("criterion 4 normalization", ok,
            ", ".join(f"{k}: {v:.10f}" for k, v in masses.items()) + f"; {elapsed:.1f} s")


def _applicable(n, m, r, zeta):
    methods = ["direct-radial"]
    if r > 0 and zeta > 0 and phase(4 * zeta / (r * r))[1] > 1e-6:
        methods.append("contour-shift")
    if m % 2 and zeta > 0 and zeta >= DEFAULT_CONFIG.b1 * r * r:
        methods.append("hankel-residue")
    return methods


def test_05_evaluator_agreement(thresholds, verdict):
    worst_rel = 0.0
    outside = []
    pairs = 0
    for n, m in [(1, 1), (2, 3)]:
        for r, zeta in sweep_grid((n, m), 1.0, 8.0, int(thresholds["agreement_points"])):
            evs = {meth: kernel_norms(n, m, 1.0, r, zeta, method=meth)
                   for meth in _applicable(n, m, r, zeta)}
            for a, b in itertools.combinations(evs.values(), 2):
                pairs += 1
                diff = abs(a.p - b.p)
                worst_rel = max(worst_rel, diff / a.p)
                if diff > a.err_estimate + b.err_estimate:
                    outside.append((n, m, r, zeta, a.method, b.method, diff))
    ok = not outside and worst_rel <= thresholds["agreement_rel_tol"]
    verdict("criterion 5 evaluator agreement", ok,
            f"{pairs} pairs, max rel {worst_rel:.2e}, outside err estimates: {len(outside)}")


def test_06_scaling(thresholds, verdict):
    rng = np.random.default_rng(6)
    worst = 0.0
    dims_list = [(1, 1), (2, 1), (2, 3)]
    for i in range(int(thresholds["scaling_samples"])):
        n, m = dims_list[i % 3]
        alpha = rng.uniform(0.3, 3.0)
        t = rng.uniform(0.2, 5.0)
        g = GroupPoint(rng.standard_normal(2 * n), rng.standard_normal(m))
        lhs = kernel((n, m), t, g).p
        rhs = alpha ** (2 * (m + n)) * kernel((n, m), alpha ** 2 * t, dilate(g, alpha)).p
        worst = max(worst, abs(lhs - rhs) / lhs)
    verdict("criterion 6 scaling", worst <= thresholds["scaling_rel_tol"], f"max rel {worst:.2e}")


def test_07_heat_residual(thresholds, verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    ratios = []
    for dims in [(1, 1), (2, 1)]:
        s = build_structure(*dims)
        count = 0
        while count < int(thresholds["residual_points"]):
            g = GroupPoint(rng.standard_normal(2 * dims[0]), rng.standard_normal(dims[1]))
            if distance(s, g) > 3.0:
                continue
            count += 1
            worst = max(worst, heat_residual(dims, 1.0, g))
            ratios.append(heat_residual(dims, 1.0, g, 0.04) / heat_residual(dims, 1.0, g, 0.02))
    lo, hi = min(ratios), max(ratios)
    ok = (worst <= thresholds["residual_tol"]
          and thresholds["residual_halving_ratio_lo"] <= lo
          and hi <= thresholds["residual_halving_ratio_hi"])
    verdict("criterion 7 heat residual", ok,
            f"max residual {worst:.2e}, halving ratios in [{lo:.3f}, {hi:.3f}]")


def test_08_two_sided_estimates(thresholds, verdict):
    n_pts = int(thresholds["sweep_points"])
    spreads = {}
    ok = True
    for dims in [(1, 1), (2, 1), (2, 3)]:
        for target in ("kernel", "gradient"):
            rep = ratio_sweep(dims, 1.0, 3.0, 8.0, n_pts, target)
            finite = all(math.isfinite(q) and q > 0 for q in rep.ratios)
            spreads[(dims, target)] = rep.spread
            ok &= finite and not rep.failures and len(rep.grid) == n_pts
            ok &= rep.spread <= thresholds["ratio_spread_max"]
    verdict("criterion 8 two-sided estimates", ok,
            ", ".join(f"{d}/{t}: {v:.2f}" for (d, t), v in spreads.items()))


def test_09_crude_bounds(thresholds, verdict):
    ok = True
    parts = []
    for dims in [(1, 1), (2, 1), (2, 3)]:
        coarse = crude_bounds_check(dims, sweep_grid(dims, 1.0, 8.0, 100))
        fine = crude_bounds_check(dims, sweep_grid(dims, 1.0, 8.0, 200))
        for a, b in zip(coarse, fine):
            ok &= math.isfinite(a) and math.isfinite(b)
            ok &= abs(b - a) <= thresholds["crude_stability"] * abs(a)
        parts.append(f"{dims}: grad {coarse[0]:.4f}->{fine[0]:.4f}, vert {coarse[1]:.4f}->{fine[1]:.4f}")
    verdict("criterion 9 crude bounds", ok, "; ".join(parts))


def test_10_hadamard_descent(thresholds, verdict):
    rng = np.random.default_rng(10)
    worst = 0.0
    for dims in [(1, 1), (1, 2)]:
        for _ in range(int(thresholds["descent_points"])):
            r, zeta = rng.uniform(0.0, 3.0, size=2)
            worst = max(worst, hadamard_descent_check(dims, (r, zeta)))
    verdict("criterion 10 Hadamard descent", worst <= thresholds["descent_tol"], f"max rel {worst:.2e}")


def test_11_determinism(tmp_path, verdict):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("n = 1\nm = 1\nt = 1\ntarget = kernel\nd_lo = 3\nd_hi = 8\nn_points = 200\n")
    outputs = {}
    for threads in (1, 2, 8):
        out = tmp_path / f"out{threads}.csv"
        code = cli.main(["--threads", str(threads), "sweep", "--config", str(cfg), "--output", str(out)])
        assert code == 0
        outputs[threads] = out.read_bytes()
    same = outputs[1] == outputs[2] == outputs[8]
    rows = outputs[1].decode().count("\n") - 2
    verdict("criterion 11 determinism", same and rows == 200,
            f"{rows} rows, identical across 1/2/8 workers: {same}")
