"""Heat kernel ``p_t`` and its gradient components on H-type groups.

The kernel is the Fourier integral

    p_t(x, z) = (2 pi)^-m (4 pi)^-n  int_{R^m} exp(i <lam, z> - |lam| coth(t |lam|) |x|^2 / 4)
                                              (|lam| / sinh(t |lam|))^n  d lam,

which only depends on ``|x|`` and ``|z|``.  Three evaluators are provided:

``direct-radial``
    polar coordinates in ``lam``; the angular integral is the sphere
    factor ``S_m``.
``contour-shift``
    the same integrand along ``R^m + i theta z_hat`` where ``i theta z_hat``
    is the saddle point; cylindrical coordinates reduce it to one or two
    real integrals with no oscillatory cancellation.
``hankel-residue``
    odd ``m`` only: the sphere factor becomes a trigonometric polynomial,
    and each term is a line integral on ``Im rho = 3 pi / 2`` plus a loop
    integral around the pole at ``i pi``.

``q1`` and ``q2`` are stored without the ``(2 pi)^-m (4 pi)^-n`` prefactor::

    q1 = -(2 / |x|) d p_1 / d|x| / prefactor
    q2 = -d p_1 / d|z| / prefactor
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DomainError, FallbackWarning, PreconditionError, QuadratureError
from .geometry import distance_from_norms, phase_of_norms
from .group import GroupPoint
from .quadrature import circle_trapezoid, gauss_kronrod

METHODS = ("direct-radial", "contour-shift", "hankel-residue")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and knobs shared by all evaluators.

    ``abs_tol`` is measured in units of ``exp(-d**2 / 4)`` at the (time-1)
    evaluation point, which keeps it meaningful when the kernel is many
    orders of magnitude below one.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 4000
    truncation_safety: float = 1.0
    b1: float = 4.0

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1 or self.truncation_safety <= 0 or self.b1 <= 0:
            raise ValueError("invalid quadrature configuration")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class KernelEvaluation:
    """Kernel value, gradient components and quadrature diagnostics."""

    p: float
    q1: float
    q2: float
    grad_norm: float
    err_estimate: float
    method: str
    details: dict = field(default_factory=dict, compare=False)


def prefactor(n: int, m: int) -> float:
    return (2.0 * math.pi) ** (-m) * (4.0 * math.pi) ** (-n)


def sphere_area(m: int) -> float:
    """Surface area of the unit sphere ``S^{m-1}`` in ``R^m``."""
    return 2.0 * math.pi ** (0.5 * m) / math.gamma(0.5 * m)


# ---------------------------------------------------------------- sphere factor

def hankel_coefficients(m: int) -> list[float]:
    """Coefficients ``c_{m,k}``, ``k = 1..(m-1)/2``, of the odd-``m`` sphere factor."""
    if m % 2 == 0:
        raise DomainError(f"hankel coefficients need odd m, got {m}")
    if m < 3:
        raise DomainError(f"hankel coefficients need m >= 3, got {m}")
    h = (m - 1) // 2
    return [
        float(Fraction(math.factorial(m - k - 2),
                       2 ** (h - k) * math.factorial(h - k) * math.factorial(k - 1)))
        for k in range(1, h + 1)
    ]


def _hankel_terms(m: int) -> list[tuple[int, float]]:
    if m == 1:
        return [(0, 1.0)]
    return list(enumerate(hankel_coefficients(m), start=1))


def _sphere_series(m: int, w: np.ndarray) -> np.ndarray:
    # 2 pi^(m/2) sum_j (-w^2/4)^j / (j! Gamma(j + m/2))
    q = -0.25 * w * w
    term = np.full_like(w, 1.0 / math.gamma(0.5 * m))
    total = term.copy()
    for j in range(1, 200):
        term = term * q / (j * (j - 1 + 0.5 * m))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return 2.0 * math.pi ** (0.5 * m) * total


def sphere_factor(m: int, w):
    """``S_m(w)``: integral of ``exp(i w sigma_1)`` over the unit sphere ``S^{m-1}``.

    Closed trigonometric form for odd ``m``, Bessel ``J_{m/2-1}`` for even
    ``m``, power series near ``w = 0``.
    """
    if m < 1:
        raise DomainError(f"sphere factor needs m >= 1, got {m}")
    w = np.abs(np.asarray(w, dtype=float))
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if m == 1:
        out = 2.0 * np.cos(w)
    else:
        out = np.empty_like(w)
        small = w < 2.0 + 0.5 * m
        if np.any(small):
            out[small] = _sphere_series(m, w[small])
        big = ~small
        if np.any(big):
            wb = w[big]
            if m % 2:
                acc = np.zeros(wb.shape, dtype=complex)
                for k, c in _hankel_terms(m):
                    acc += c * (-1j * wb) ** k
                out[big] = 2.0 * (2.0 * math.pi) ** (0.5 * (m - 1)) * np.real(
                    np.exp(1j * wb) * acc / wb ** (m - 1))
            else:
                nu_ = 0.5 * m - 1.0
                out[big] = (2.0 * math.pi) ** (0.5 * m) * wb ** (-nu_) * special.jv(nu_, wb)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------- amplitudes

def _sinhc_ratio(w):
    """``w / sinh w`` and ``w coth w`` for real or complex arrays."""
    w = np.asarray(w)
    small = np.abs(w) < 1e-3
    # past |Re w| = 700 sinh overflows; a underflows to 0 and coth is +-1
    big = np.abs(np.real(w)) > 700.0
    ws = np.where(small | big, 1.0, w)
    a = ws / np.sinh(ws)
    b = ws / np.tanh(ws)
    w2 = w * w
    a = np.where(small, 1.0 - w2 / 6.0 + 7.0 * w2 * w2 / 360.0, a)
    b = np.where(small, 1.0 + w2 / 3.0 - w2 * w2 / 45.0, b)
    a = np.where(big, 0.0, a)
    b = np.where(big, w * np.sign(np.real(w)), b)
    return a, b


def _gamma_tail(a: float, rate: float, start: float) -> float:
    """``int_start^inf y**a exp(-rate y) dy``."""
    if start <= 0:
        return math.gamma(a + 1.0) / rate ** (a + 1.0)
    return float(special.gammaincc(a + 1.0, rate * start) * special.gamma(a + 1.0) / rate ** (a + 1.0))


def _shift_tail(n: int, m: int, start: float, tau: float, extra: int) -> float:
    """Bound on the radial tail beyond ``start`` for a contour at height ``tau``.

    Uses ``|w| <= rho + tau``, ``Re w >= rho - tau`` and ``|sinh w| >= sinh Re w``;
    valid once ``start - tau >= 3`` (then ``Re(w coth w) >= 0``).
    """
    c = 2.0 / (1.0 - math.exp(-2.0))
    a = n + m - 1 + extra
    return sphere_area(m) * c ** n * math.exp(2.0 * n * tau) * _gamma_tail(a, n, start + tau) * 1.02


def _truncation(n: int, m: int, cfg: QuadratureConfig, scale: float, tau: float = 0.0,
                decay: float = 0.0, log_factor: float = 0.0) -> tuple[float, float]:
    """Radius ``R`` whose certified tail is below ``abs_tol * scale``.

    Starts from ``max(50, 2 (n+m) ln(1/abs_tol) / n)`` and grows as needed.
    ``decay`` multiplies the bound by ``exp(-decay * R)`` and ``log_factor``
    by ``exp(log_factor)``.  Returns ``(R, tail)``.
    """
    R = cfg.truncation_safety * max(50.0, 2.0 * (n + m) * math.log(1.0 / cfg.abs_tol) / n) + tau
    target = cfg.abs_tol * scale
    while True:
        tail = max(_shift_tail(n, m, R, tau, extra) for extra in (0, 1)) * math.exp(log_factor - decay * R)
        if tail <= target or R > 700.0 - tau:
            return R, tail
        R *= 1.25


def _envelope_radius(n: int, m: int, target: float, R: float, decay: float = 0.0) -> float:
    """Smallest radius on a geometric ladder past which the certified tail is below ``target``."""
    rho = 3.0
    while rho < R:
        tail = max(_shift_tail(n, m, rho, 0.0, extra) for extra in (0, 1)) * math.exp(-decay * rho)
        if tail <= target:
            return rho
        rho *= 1.1
    return R


# ---------------------------------------------------------------- direct radial

def _direct(n: int, m: int, r: float, zeta: float, cfg: QuadratureConfig):
    d = distance_from_norms(r, zeta)
    scale = math.exp(-0.25 * d * d)
    R, tail = _truncation(n, m, cfg, scale, decay=0.25 * r * r)
    r2 = 0.25 * r * r

    def f(rho):
        a, b = _sinhc_ratio(rho)
        base = np.exp(-r2 * b) * a ** n * rho ** (m - 1)
        w = rho * zeta
        s = sphere_factor(m, w)
        if zeta > 0:
            s2 = rho * rho * zeta / (2.0 * math.pi) * sphere_factor(m + 2, w)
        else:
            s2 = np.zeros_like(rho)
        return np.stack([s * base, s * base * b, s2 * base])

    breaks = None
    if zeta * R > 8.0 * math.pi:
        # half-period splits only where the integrand is above tolerance;
        # beyond that one panel covers the rest of [0, R]
        edge = _envelope_radius(n, m, 0.01 * cfg.abs_tol * scale, R, 0.25 * r * r)
        step = math.pi / zeta
        breaks = np.append(np.arange(1, int(edge / step) + 1) * step, edge)
    res = gauss_kronrod(
        f, 0.0, R, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol * scale,
        max_subdivisions=cfg.max_subdivisions, breakpoints=breaks,
    )
    val = res.value.real
    err = res.error + tail
    return val, err, {"R": R, "panels": res.intervals, "roundoff_limited": res.roundoff_limited}


# ---------------------------------------------------------------- contour shift

def _shift_integrand_1d(n, r2, zeta, tau):
    def f(u):
        lam = u + 1j * tau
        a, b = _sinhc_ratio(lam)
        F = np.exp(1j * lam * zeta - r2 * b) * a ** n
        return np.stack([F.real, (F * b).real, (F * (-1j) * lam).real])
    return f


def _shift(n: int, m: int, r: float, zeta: float, tau: float, cfg: QuadratureConfig):
    d = distance_from_norms(r, zeta)
    scale = math.exp(-0.25 * d * d)
    r2 = 0.25 * r * r
    R, tail = _truncation(n, m, cfg, scale, tau=tau + 3.0, log_factor=-tau * zeta)
    # the near-pole peak sits at u = 0 (and rho_perp = 0)
    gap = max(math.pi - tau, 1e-3)
    breaks = [gap * k for k in (0.25, 0.5, 1.0, 2.0, 4.0)]
    if m == 1:
        res = gauss_kronrod(
            _shift_integrand_1d(n, r2, zeta, tau), 0.0, R,
            rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol * scale,
            max_subdivisions=cfg.max_subdivisions, breakpoints=breaks,
        )
        val = 2.0 * res.value.real
        err = 2.0 * (res.error + tail)
        return val, err, {"R": R, "panels": res.intervals}

    area = sphere_area(m - 1)

    def run(inner_abs):
        def outer(rp):
            # one shared inner mesh for every outer node
            k = rp.size

            def inner(u):
                lam_z = (u + 1j * tau)[None, :]
                w = np.sqrt(lam_z * lam_z + rp[:, None] ** 2)
                a, b = _sinhc_ratio(w)
                F = np.exp(1j * lam_z * zeta - r2 * b) * a ** n
                return np.concatenate([F.real, (F * b).real, (F * (-1j) * lam_z).real])

            res_in = gauss_kronrod(
                inner, 0.0, R, rel_tol=0.1 * cfg.rel_tol, abs_tol=inner_abs,
                max_subdivisions=cfg.max_subdivisions, breakpoints=breaks,
            )
            wgt = area * rp ** (m - 2)
            return np.concatenate([
                res_in.value.real.reshape(3, k) * wgt,
                res_in.error.reshape(3, k) * wgt,
            ])

        tol_rel = np.array([cfg.rel_tol] * 3 + [1.0] * 3)
        tol_abs = np.array([cfg.abs_tol * scale] * 3 + [math.inf] * 3)
        return gauss_kronrod(
            outer, 0.0, R, rel_tol=tol_rel, abs_tol=tol_abs,
            max_subdivisions=cfg.max_subdivisions, breakpoints=breaks,
        )

    rough = run(1e-6 * scale)
    mag = np.maximum(np.abs(rough.value[:3].real), cfg.abs_tol * scale)
    res = run(0.05 * cfg.rel_tol * mag.min() / R)
    val = 2.0 * res.value[:3].real
    err = 2.0 * (res.error[:3] + np.abs(res.value[3:].real) + tail)
    return val, err, {"R": R, "panels": res.intervals}


# ---------------------------------------------------------------- hankel / residue

def _loop_radius(n: int, r: float, zeta: float) -> float:
    # balances exp(r|z|) growth against exp(pi |x|^2 / 4r) and the pole order
    k = n + 1
    rad = (k + math.sqrt(k * k + math.pi * r * r * zeta)) / (2.0 * zeta)
    return min(rad, 0.5 * math.pi)


def _hankel(n: int, m: int, r: float, zeta: float, cfg: QuadratureConfig, with_parts: bool = False):
    terms = _hankel_terms(m)
    kmax = max(k for k, _ in terms) + 1
    K = (2.0 * math.pi) ** (0.5 * (m - 1))
    r2 = 0.25 * r * r
    d = distance_from_norms(r, zeta)
    scale = math.exp(-0.25 * d * d)
    top = 1.5j * math.pi

    def G(rho):
        a, b = _sinhc_ratio(rho)
        base = np.exp(1j * rho * zeta - r2 * b) * a ** n
        rows = []
        for k in range(kmax + 1):
            pk = (-1j * rho) ** k
            rows.append(base * pk)          # p amplitude
            rows.append(base * b * pk)      # q1 amplitude
        return np.stack(rows)

    # line Im rho = 3 pi / 2: |integrand| <= exp(-3 pi |z| / 2) (rho + 5)^(n+k) 2^n e^(-n rho)
    R = cfg.truncation_safety * max(50.0, 2.0 * (n + m) * math.log(1.0 / cfg.abs_tol) / n)
    line_scale = math.exp(-1.5 * math.pi * zeta)
    tail = 2.0 ** n * line_scale * math.exp(1.5 * math.pi * n) * _gamma_tail(n + kmax + 1, n, R + 1.5 * math.pi)
    line = gauss_kronrod(
        lambda u: np.real(G(u + top)), 0.0, R,
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol * scale,
        max_subdivisions=cfg.max_subdivisions,
    )
    line_val = 2.0 * line.value.real
    line_err = 2.0 * (line.error + tail)
    rad = _loop_radius(n, r, zeta)
    loop_val, loop_err, nodes = circle_trapezoid(
        G, 1j * math.pi, rad, rel_tol=0.1 * cfg.rel_tol, abs_tol=0.1 * cfg.abs_tol * scale,
    )
    H = line_val + loop_val.real
    Herr = line_err + loop_err

    p_raw = 0.0
    q1_raw = 0.0
    q2_raw = 0.0
    errs = np.zeros(3)
    for k, c in terms:
        zk = zeta ** (k - m + 1)
        p_raw += c * zk * H[2 * k]
        q1_raw += c * zk * H[2 * k + 1]
        errs[0] += c * zk * Herr[2 * k]
        errs[1] += c * zk * Herr[2 * k + 1]
        dz = -(k - m + 1) * zeta ** (k - m)
        q2_raw += c * (dz * H[2 * k] + zk * H[2 * k + 2])
        errs[2] += c * (abs(dz) * Herr[2 * k] + zk * Herr[2 * k + 2])
    val = K * np.array([p_raw, q1_raw, q2_raw])
    err = K * errs
    info = {"loop_radius": rad, "loop_nodes": nodes, "line_panels": line.intervals}
    if with_parts:
        hl = K * sum(c * zeta ** (k - m + 1) * line_val[2 * k] for k, c in terms)
        hr = K * sum(c * zeta ** (k - m + 1) * loop_val[2 * k].real for k, c in terms)
        info["h_line"] = hl
        info["h_residue"] = hr
    return val, err, info


# ---------------------------------------------------------------- public API

def _assemble(n, m, r, val, err, method, info) -> KernelEvaluation:
    c = prefactor(n, m)
    p = c * float(val[0])
    q1 = float(val[1])
    q2 = float(val[2])
    grad = 0.5 * c * r * math.hypot(q1, q2)
    info = dict(info)
    info["err_q1"] = float(err[1])
    info["err_q2"] = float(err[2])
    return KernelEvaluation(p, q1, q2, grad, c * float(err[0]), method, info)


def _dims(s_dims) -> tuple[int, int]:
    n, m = (int(v) for v in s_dims)
    if n < 1 or m < 1:
        raise DomainError(f"dimensions must be positive, got {s_dims}")
    return n, m


def _norms(g) -> tuple[float, float]:
    if isinstance(g, GroupPoint):
        return g.x_norm, g.z_norm
    r, zeta = (float(v) for v in g)
    if r < 0 or zeta < 0:
        raise DomainError("norms must be nonnegative")
    return r, zeta


def choose_method(n: int, m: int, r: float, zeta: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> str:
    """Evaluator picked by ``method="auto"`` for a time-1 point."""
    if m % 2 and zeta >= max(4.0, cfg.b1 * r * r):
        return "hankel-residue"
    if zeta >= 4.0 and r > 0:
        theta, s = phase_of_norms(r, zeta)
        if s > 1e-6:
            return "contour-shift"
    return "direct-radial"


def kernel_norms(n: int, m: int, t: float, x_norm: float, z_norm: float,
                 cfg: QuadratureConfig = DEFAULT_CONFIG, method: str = "auto") -> KernelEvaluation:
    """:func:`kernel` for a point given by ``(|x|, |z|)``."""
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    r = x_norm / math.sqrt(t)
    zeta = z_norm / t
    if t == 1.0:
        ev = _kernel1(n, m, r, zeta, cfg, method)
    else:
        ev = _kernel1(n, m, r, zeta, cfg, method)
        sp = t ** (-m - n)
        sq = t ** (-m - n - 1)
        q1, q2 = ev.q1 * sq, ev.q2 * sq
        details = dict(ev.details)
        details["err_q1"] = details.get("err_q1", 0.0) * sq
        details["err_q2"] = details.get("err_q2", 0.0) * sq
        ev = KernelEvaluation(
            ev.p * sp, q1, q2, 0.5 * prefactor(n, m) * x_norm * math.hypot(q1, q2),
            ev.err_estimate * sp, ev.method, details,
        )
    return ev


def _kernel1(n, m, r, zeta, cfg, method) -> KernelEvaluation:
    if method == "auto":
        method = choose_method(n, m, r, zeta, cfg)
    if method == "direct-radial":
        val, err, info = _direct(n, m, r, zeta, cfg)
    elif method == "contour-shift":
        return kernel_shifted((n, m), (r, zeta), cfg)
    elif method == "hankel-residue":
        return hankel_residue((n, m), (r, zeta), cfg)
    else:
        raise ValueError(f"unknown method {method!r}; expected auto or one of {METHODS}")
    return _assemble(n, m, r, val, err, method, info)


def kernel(s_dims, t: float, g, cfg: QuadratureConfig = DEFAULT_CONFIG,
           method: str = "auto") -> KernelEvaluation:
    """Heat kernel ``p_t(g)`` with gradient data.

    Parameters
    ----------
    s_dims : (int, int)
        ``(n, m)``.  Any positive pair is accepted; the integral formula does
        not need an H-type structure to exist.
    t : float
        Time, ``t > 0``.  Reduced to ``t = 1`` by parabolic scaling.
    g : GroupPoint or (float, float)
        Evaluation point, or its norms ``(|x|, |z|)``.
    cfg : QuadratureConfig
    method : str
        ``"auto"`` or one of :data:`METHODS`.
    """
    n, m = _dims(s_dims)
    r, zeta = _norms(g)
    return kernel_norms(n, m, t, r, zeta, cfg, method)


def kernel_shifted(s_dims, g, cfg: QuadratureConfig = DEFAULT_CONFIG,
                   shift: float | None = None) -> KernelEvaluation:
    """``p_1`` integrated along ``R^m + i shift z_hat``.

    By default the shift is the saddle phase ``theta(x, z)``.  A zero shift
    is the real contour and returns the direct evaluation unchanged.  Within
    ``1e-6`` of ``theta = pi`` the evaluation is delegated (with a
    :class:`FallbackWarning`) to the residue evaluator for odd ``m`` and to
    the direct one otherwise.
    """
    n, m = _dims(s_dims)
    r, zeta = _norms(g)
    if shift is not None and shift == 0.0:
        val, err, info = _direct(n, m, r, zeta, cfg)
        return _assemble(n, m, r, val, err, "direct-radial", info)
    if r == 0.0 or zeta == 0.0:
        raise PreconditionError("contour shift needs x != 0 and z != 0")
    theta, s = phase_of_norms(r, zeta)
    tau = theta if shift is None else float(shift)
    if not 0.0 <= tau < math.pi:
        raise DomainError(f"shift must lie in [0, pi), got {tau}")
    if math.pi - tau < 1e-6:
        if m % 2:
            warnings.warn("saddle within 1e-6 of the pole; using the residue evaluator",
                          FallbackWarning, stacklevel=2)
            val, err, info = _hankel(n, m, r, zeta, cfg)
            return _assemble(n, m, r, val, err, "hankel-residue", info)
        warnings.warn("saddle within 1e-6 of the pole; using the direct evaluator",
                      FallbackWarning, stacklevel=2)
        val, err, info = _direct(n, m, r, zeta, cfg)
        return _assemble(n, m, r, val, err, "direct-radial", info)
    val, err, info = _shift(n, m, r, zeta, tau, cfg)
    info["shift"] = tau
    return _assemble(n, m, r, val, err, "contour-shift", info)


def hankel_residue(s_dims, g, cfg: QuadratureConfig = DEFAULT_CONFIG,
                   with_parts: bool = False) -> KernelEvaluation:
    """``p_1`` for odd ``m`` from the line ``Im rho = 3 pi / 2`` plus the loop around ``i pi``.

    Only valid where ``|z| >= b1 |x|**2`` (``cfg.b1``), with ``z != 0``.
    With ``with_parts`` the line and loop contributions to the kernel (raw,
    without prefactor) are returned in ``details`` as ``h_line`` and
    ``h_residue``.
    """
    n, m = _dims(s_dims)
    if m % 2 == 0:
        raise DomainError(f"the residue evaluator needs odd m, got {m}")
    r, zeta = _norms(g)
    if zeta == 0.0 or zeta < cfg.b1 * r * r:
        raise PreconditionError(
            f"residue evaluator needs |z| >= b1 |x|^2 = {cfg.b1 * r * r:.6g} and z != 0, got |z| = {zeta:.6g}")
    val, err, info = _hankel(n, m, r, zeta, cfg, with_parts)
    return _assemble(n, m, r, val, err, "hankel-residue", info)


def with_tolerance(cfg: QuadratureConfig, **changes) -> QuadratureConfig:
    return replace(cfg, **changes)
