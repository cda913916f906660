"""Correction functions for the two-sided kernel bounds and numerical checks.

The sharp estimates say that, away from the origin,

    p_1(x, z)    ~ Q(x, z) exp(-d**2 / 4),
    |grad p_1|   ~ |x| d**(2n-m+1) / (1 + (|x| d)**(n+1/2)) exp(-d**2 / 4),

with ``Q = d**(2n-m-1) / (1 + (|x| d)**(n-1/2))``.  The constants are not
known; :func:`ratio_sweep` measures how much ``measured / bound`` varies
over a grid.  The remaining functions are consistency checks: crude
gradient bounds, the Hadamard descent identity and the heat equation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clifford import build_structure
from .errors import DomainError, HTypeError, PreconditionError, QuadratureError
from .geometry import distance_from_norms, nu
from .group import GroupPoint, multiply
from .heatkernel import DEFAULT_CONFIG, QuadratureConfig, kernel_norms, prefactor
from .quadrature import gauss_kronrod

THETAS = (0.1, math.pi / 4, math.pi / 2, 3 * math.pi / 4, 3.0)
TARGETS = ("kernel", "gradient", "vertical")


def _point_norms(g) -> tuple[float, float]:
    if isinstance(g, GroupPoint):
        return g.x_norm, g.z_norm
    r, zeta = (float(v) for v in g)
    return r, zeta


def q_correction(dims, t: float, g) -> float:
    """Time-``t`` correction ``Q_t`` in the kernel bound.

    ``t**(-m-n) (1 + (d/sqrt t)**(2n-m-1)) / (1 + (|x| d / t)**(n-1/2))``,
    which equals ``t**(-m-n)`` times the time-1 correction at the dilated
    point ``(x / sqrt t, z / t)``.  At ``d = 0`` with ``2n - m - 1 < 0`` the
    value is infinite.
    """
    n, m = dims
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    r, zeta = _point_norms(g)
    d = distance_from_norms(r, zeta)
    a = d / math.sqrt(t)
    e = 2 * n - m - 1
    if a == 0.0 and e < 0:
        return math.inf
    num = 1.0 + a ** e
    den = 1.0 + (r * d / t) ** (n - 0.5)
    return t ** (-m - n) * num / den


def grad_correction(dims, g) -> float:
    """``|x| d**(2n-m+1) / (1 + (|x| d)**(n+1/2))`` at time 1."""
    n, m = dims
    r, zeta = _point_norms(g)
    if r == 0.0:
        return 0.0
    d = distance_from_norms(r, zeta)
    return r * d ** (2 * n - m + 1) / (1.0 + (r * d) ** (n + 0.5))


def _bound(target: str, dims, t: float, r: float, zeta: float, d: float) -> float:
    """Correction times the Gaussian factor for the given target."""
    n, m = dims
    gauss = math.exp(-0.25 * d * d / t)
    if target == "gradient":
        # |grad p_t(g)| = t^(-m-n-1/2) |grad p_1(g_t)| with g_t = (x/sqrt t, z/t)
        rt = r / math.sqrt(t)
        return t ** (-m - n - 0.5) * grad_correction(dims, (rt, zeta / t)) * gauss
    if target == "vertical":
        # |Z p_t(g)| = t^(-m-n-1) |Z p_1(g_t)|
        return t ** (-1.0) * q_correction(dims, t, (r, zeta)) * gauss
    return q_correction(dims, t, (r, zeta)) * gauss


def _measured(target: str, dims, ev) -> float:
    if target == "gradient":
        return ev.grad_norm
    if target == "vertical":
        return prefactor(*dims) * abs(ev.q2)
    return ev.p


@dataclass
class SweepReport:
    """Outcome of :func:`ratio_sweep`.

    ``ratios`` is aligned with ``grid``; points where the evaluator failed
    hold ``nan`` and are listed in ``failures`` as ``(index, message)``.
    ``rows`` holds one record per grid point with the full evaluation.
    """

    dims: tuple[int, int]
    t: float
    target: str
    grid: list[GroupPoint]
    ratios: list[float]
    ratio_min: float
    ratio_max: float
    d_range: tuple[float, float]
    method_tags: list[str]
    rows: list[dict] = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def spread(self) -> float:
        return self.ratio_max / self.ratio_min


def sweep_grid(dims, d_lo: float, d_hi: float, n_points: int, thetas=THETAS):
    """``(|x|, |z|)`` pairs: log-spaced distances crossed with phases.

    For phase ``theta`` and distance ``d`` the point has
    ``|x| = d sin(theta) / theta`` and ``|z| = nu(theta) |x|**2 / 4``.
    Ordered by distance, then phase; truncated to ``n_points``.
    """
    if n_points < 1:
        raise ValueError("n_points must be positive")
    if not 0 < d_lo <= d_hi:
        raise ValueError(f"need 0 < d_lo <= d_hi, got {d_lo}, {d_hi}")
    n_d = -(-n_points // len(thetas))
    ds = np.geomspace(d_lo, d_hi, n_d) if n_d > 1 else np.array([d_lo])
    pts = []
    for d in ds:
        for th in thetas:
            r = float(d * math.sin(th) / th)
            pts.append((r, nu(th) * r * r / 4.0))
    return pts[:n_points]


def _evaluate(args):
    dims, t, r, zeta, cfg, target = args
    n, m = dims
    try:
        ev = kernel_norms(n, m, t, r, zeta, cfg)
    except HTypeError as exc:
        return None, f"{type(exc).__name__}: {exc}"
    d = distance_from_norms(r, zeta)
    corr = _bound(target, dims, t, r, zeta, d) / math.exp(-0.25 * d * d / t)
    bound = _bound(target, dims, t, r, zeta, d)
    ratio = _measured(target, dims, ev) / bound if bound > 0 else math.nan
    row = {
        "n": n, "m": m, "t": t, "x_norm": r, "z_norm": zeta, "d": d,
        "p": ev.p, "q1": ev.q1, "q2": ev.q2, "grad_norm": ev.grad_norm,
        "correction": corr, "ratio": ratio, "method": ev.method,
        "err_estimate": ev.err_estimate,
    }
    return row, None


def parallel_map(func, items, threads: int | None = 1) -> list:
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(func, items, chunksize=1))


def ratio_sweep(dims, t: float, d_lo: float, d_hi: float, n_points: int,
                target: str = "kernel", cfg: QuadratureConfig = DEFAULT_CONFIG,
                thetas=THETAS, threads: int | None = 1) -> SweepReport:
    """Ratio of a measured quantity to its conjectured-sharp bound over a grid.

    Parameters
    ----------
    dims : (int, int)
    t : float
        Time.
    d_lo, d_hi : float
        Distance range of the grid; ``d_lo >= 3``.
    n_points : int
        Total number of grid points.
    target : {"kernel", "gradient", "vertical"}
        ``p_t``, ``|grad p_t|`` or the vertical gradient ``|Z p_t|``.
        For ``"vertical"`` only the upper bound is meaningful.
    threads : int or None
        Worker processes; ``None`` uses every core.  Results do not depend
        on it.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
    if d_lo < 3.0:
        raise PreconditionError(f"ratio sweeps start at d >= 3, got d_lo = {d_lo}")
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    dims = tuple(int(v) for v in dims)
    pts = sweep_grid(dims, d_lo, d_hi, n_points, thetas)
    if target == "gradient":
        pts = [p for p in pts if p[0] > 0.0]
    results = parallel_map(_evaluate, [(dims, t, r, z, cfg, target) for r, z in pts], threads)

    grid, ratios, tags, rows, failures = [], [], [], [], []
    for i, ((r, zeta), (row, err)) in enumerate(zip(pts, results)):
        grid.append(GroupPoint.from_norms(dims[0], dims[1], r, zeta))
        if row is None:
            failures.append((i, err))
            ratios.append(math.nan)
            tags.append("failed")
            continue
        rows.append(row)
        ratios.append(row["ratio"])
        tags.append(row["method"])
    good = [q for q in ratios if math.isfinite(q)]
    ds = [distance_from_norms(r, z) for r, z in pts]
    return SweepReport(
        dims, t, target, grid, ratios,
        min(good) if good else math.nan, max(good) if good else math.nan,
        (min(ds), max(ds)), tags, rows, failures,
    )


def crude_bounds_check(dims, grid, cfg: QuadratureConfig = DEFAULT_CONFIG,
                       threads: int | None = 1) -> tuple[float, float]:
    """Largest ``|grad p_1| / ((1 + d) p_1)`` and ``|Z p_1| / p_1`` over ``grid``.

    ``grid`` holds group points or ``(|x|, |z|)`` pairs.
    """
    pts = [_point_norms(g) for g in grid]
    if not pts:
        raise ValueError("grid must be nonempty")
    n, m = dims
    evs = parallel_map(_kernel_point, [(n, m, r, z, cfg) for r, z in pts], threads)
    c = prefactor(n, m)
    a = max(ev.grad_norm / ((1.0 + distance_from_norms(r, z)) * ev.p) for (r, z), ev in zip(pts, evs))
    b = max(c * abs(ev.q2) / ev.p for ev in evs)
    return float(a), float(b)


def _kernel_point(args):
    n, m, r, z, cfg = args
    return kernel_norms(n, m, 1.0, r, z, cfg)


def descent_cutoff(x_norm: float, z_norm: float, margin: float = 120.0) -> float:
    """Cutoff ``Z`` with ``d(x, (z, Z))**2 - d(x, z)**2 >= margin``.

    ``d`` is increasing in ``|z|`` at fixed ``|x|``, so the Gaussian factor
    ``exp(-d**2 / 4)`` has dropped by ``exp(-margin / 4)`` beyond ``Z``.
    """
    d0 = distance_from_norms(x_norm, z_norm)
    target = d0 * d0 + margin
    Z = 1.0
    while distance_from_norms(x_norm, math.hypot(z_norm, Z)) ** 2 < target:
        Z *= 2.0
    return Z


def hadamard_descent_check(dims, g, cfg: QuadratureConfig = DEFAULT_CONFIG,
                           return_values: bool = False, method: str = "direct-radial"):
    """Relative error of ``p^(n,m)(x, z) = int p^(n,m+1)(x, (z, s)) ds``.

    The right side is even in ``s``; it is integrated on ``[0, Z]`` and
    doubled, with ``Z`` from :func:`descent_cutoff`.
    """
    n, m = dims
    r, zeta = _point_norms(g)
    lhs = kernel_norms(n, m, 1.0, r, zeta, cfg).p

    def p_up(si):
        # only accuracy relative to lhs matters here, which the cheap
        # direct evaluator delivers; fall back if it runs out of panels
        try:
            return kernel_norms(n, m + 1, 1.0, r, math.hypot(zeta, si), cfg, method).p
        except QuadratureError:
            return kernel_norms(n, m + 1, 1.0, r, math.hypot(zeta, si), cfg).p

    def f(s):
        return np.array([p_up(si) for si in s])

    Z = descent_cutoff(r, zeta)
    res = gauss_kronrod(f, 0.0, Z, rel_tol=1e-8, abs_tol=1e-10 * lhs,
                        max_subdivisions=cfg.max_subdivisions)
    rhs = 2.0 * float(res.value[0])
    rel = abs(lhs - rhs) / abs(lhs)
    if return_values:
        return rel, lhs, rhs
    return rel


def heat_residual(dims, t: float, g: GroupPoint, h: float | None = None,
                  cfg: QuadratureConfig | None = None) -> float:
    """Relative residual ``|L p_t - d/dt p_t| / p_t`` by finite differences.

    ``X_i**2 p`` is the second central difference along the curve
    ``s -> g (s e_i, 0)`` (a one-parameter subgroup, so this is exact up to
    the difference formula); ``d/dt`` is a central difference in ``t``.
    Needs an H-type structure for ``dims``.
    """
    n, m = dims
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    s = build_structure(n, m)
    if h is None:
        h = 1e-3 * max(1.0, math.hypot(np.linalg.norm(g.x), np.linalg.norm(g.z)))
    if h <= 0 or h >= t:
        raise DomainError(f"step must lie in (0, t), got {h}")
    if cfg is None:
        cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-16)

    def p(tt, pt):
        return kernel_norms(n, m, tt, pt.x_norm, pt.z_norm, cfg).p

    p0 = p(t, g)
    lap = 0.0
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = h
        fwd = multiply(s, g, GroupPoint(e, np.zeros(m)))
        bwd = multiply(s, g, GroupPoint(-e, np.zeros(m)))
        lap += (p(t, fwd) - 2.0 * p0 + p(t, bwd)) / (h * h)
    dt = (p(t + h, g) - p(t - h, g)) / (2.0 * h)
    return abs(lap - dt) / p0
