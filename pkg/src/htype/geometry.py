"""Carnot-Caratheodory distance and minimizing geodesics from the origin.

Everything is driven by the phase function

    nu(theta) = (2 theta - sin 2 theta) / (1 - cos 2 theta),

which increases from 0 to infinity on ``[0, pi)``.  For phases close to
``pi`` the code works with the complement ``s = pi - theta`` so that large
ratios ``4|z| / |x|**2`` keep full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clifford import HTypeStructure, j_map
from .errors import DomainError
from .group import GroupPoint, _check

_TINY = 1e-300


def _x_minus_sin(x: float) -> float:
    """``x - sin x`` without cancellation for small ``x``."""
    if abs(x) >= 1.0:
        return x - math.sin(x)
    term = x ** 3 / 6.0
    total = term
    k = 1
    while abs(term) > 1e-18 * abs(total):
        term *= -x * x / ((2 * k + 2) * (2 * k + 3))
        total += term
        k += 1
    return total


def _sin_minus_xcos(x: float) -> float:
    """``sin x - x cos x`` without cancellation for small ``x``."""
    if abs(x) >= 1.0:
        return math.sin(x) - x * math.cos(x)
    # sum_k (-1)**(k+1) 2k x**(2k+1) / (2k+1)!
    total = 0.0
    power = x
    fact = 1.0
    for k in range(1, 12):
        power *= x * x
        fact *= (2 * k) * (2 * k + 1)
        total += (-1) ** (k + 1) * 2 * k * power / fact
    return total


def nu(theta: float) -> float:
    """Phase function ``nu(theta)`` on ``[0, pi)``; ``nu(0) = 0``."""
    theta = float(theta)
    if not 0.0 <= theta < math.pi:
        raise DomainError(f"nu is defined on [0, pi), got {theta!r}")
    if theta < 1e-4:
        t2 = theta * theta
        return theta * (2.0 / 3.0 + t2 * (4.0 / 45.0 + t2 * 4.0 / 315.0))
    if theta > 0.5 * math.pi:
        return _nu_complement(math.pi - theta)
    return _x_minus_sin(2.0 * theta) / (2.0 * math.sin(theta) ** 2)


def nu_prime(theta: float) -> float:
    """Derivative ``2 (sin theta - theta cos theta) / sin**3 theta``."""
    theta = float(theta)
    if not 0.0 <= theta < math.pi:
        raise DomainError(f"nu' is defined on [0, pi), got {theta!r}")
    if theta < 1e-8:
        return 2.0 / 3.0
    return 2.0 * _sin_minus_xcos(theta) / math.sin(theta) ** 3


def _nu_complement(s: float) -> float:
    """``nu(pi - s)`` evaluated from the complement ``s`` in ``(0, pi/2]``."""
    return (2.0 * math.pi - 2.0 * s + math.sin(2.0 * s)) / (2.0 * math.sin(s) ** 2)


def _nu_complement_prime(s: float) -> float:
    """``d/ds nu(pi - s) = -nu'(pi - s)``."""
    return -2.0 * (math.sin(s) + (math.pi - s) * math.cos(s)) / math.sin(s) ** 3


def _newton_bisect(f, fprime, lo: float, hi: float, x0: float, maxiter: int = 200) -> float:
    """Root of a monotone ``f`` on ``[lo, hi]``, Newton steps kept in the bracket."""
    flo = f(lo)
    x = min(max(x0, lo), hi)
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        d = fprime(x)
        step = fx / d if d != 0.0 else math.inf
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 2.0 * np.finfo(float).eps * max(abs(x_new), _TINY) or hi - lo <= 2.0 * np.finfo(float).eps * max(abs(hi), _TINY):
            return x_new
        x = x_new
    return x


def phase(y: float) -> tuple[float, float]:
    """Solve ``nu(theta) = y``; returns ``(theta, pi - theta)``.

    The complement is computed directly, not by subtraction, when theta
    is past ``pi/2``.
    """
    y = float(y)
    if y < 0.0 or math.isnan(y):
        raise DomainError(f"nu_inverse needs y >= 0, got {y!r}")
    if y == 0.0:
        return 0.0, math.pi
    if math.isinf(y):
        return math.pi, 0.0
    if y <= 0.5 * math.pi:
        theta = _newton_bisect(
            lambda t: (nu(t) if t > 0 else 0.0) - y,
            lambda t: nu_prime(t),
            0.0, 0.5 * math.pi, 1.5 * y,
        )
        return theta, math.pi - theta
    if y > 1e16:
        # nu(pi - s) = pi / s**2 + pi / 3 + O(s), exact to rounding here
        s = math.sqrt(math.pi / (y - math.pi / 3.0))
        return math.pi - s, s
    # nu(pi - s) >= pi / (2 s**2) on (0, pi/2], so the lower end brackets
    s0 = min(math.sqrt(math.pi / y), 0.5 * math.pi)
    s = _newton_bisect(
        lambda u: _nu_complement(u) - y,
        _nu_complement_prime,
        0.5 * math.sqrt(math.pi / y), 0.5 * math.pi, s0,
    )
    return math.pi - s, s


def phase_of_norms(x_norm: float, z_norm: float) -> tuple[float, float]:
    """:func:`phase` of ``4 |z| / |x|**2``, infinite when ``|x|**2`` underflows."""
    r2 = float(x_norm) * float(x_norm)
    return phase(4.0 * float(z_norm) / r2 if r2 > 0.0 else math.inf)


def nu_inverse(y: float) -> float:
    """The unique ``theta`` in ``[0, pi)`` with ``nu(theta) = y``."""
    theta, s = phase(y)
    if theta >= math.pi:
        # y overflows the representable phases; nearest float below pi
        return math.nextafter(math.pi, 0.0)
    return theta


def distance_from_norms(x_norm: float, z_norm: float) -> float:
    """Distance from the origin as a function of ``|x|`` and ``|z|``."""
    r = float(x_norm)
    zeta = float(z_norm)
    if r < 0 or zeta < 0:
        raise DomainError("norms must be nonnegative")
    if r < _TINY and zeta < _TINY:
        return 0.0
    if zeta == 0.0:
        return r
    if r == 0.0:
        return math.sqrt(4.0 * math.pi * zeta)
    theta, s = phase_of_norms(r, zeta)
    if s == 0.0:
        return math.sqrt(4.0 * math.pi * zeta)
    if theta <= 0.5 * math.pi:
        return r / np.sinc(theta / math.pi)
    return r * theta / math.sin(s)


def distance(s: HTypeStructure, g: GroupPoint) -> float:
    """Carnot-Caratheodory distance ``d(g)`` from the origin."""
    _check(s, g)
    return distance_from_norms(g.x_norm, g.z_norm)


@dataclass(frozen=True)
class GeodesicSolution:
    """Initial covectors and length of a geodesic from the origin.

    ``theta`` is half of ``|eta0|``.  For targets on the center (``x = 0``)
    the branch index ``k`` is recorded and ``theta = k pi``.
    """

    xi0: np.ndarray
    eta0: np.ndarray
    theta: float
    k: int | None
    length: float


def geodesic(s: HTypeStructure, target: GroupPoint, k: int = 1) -> GeodesicSolution:
    """Geodesic from the origin to ``target``.

    For ``x != 0`` the minimizing branch (phase in ``[0, pi)``) is
    returned.  For ``x = 0`` the ``k``-th branch is returned, with the free
    direction of ``xi0`` fixed to ``e_1``; only ``k = 1`` is minimizing.
    """
    _check(s, target)
    r, zeta = target.x_norm, target.z_norm
    if r == 0.0 and zeta == 0.0:
        raise DomainError("geodesic to the origin is degenerate")
    if zeta == 0.0:
        xi0 = target.x.copy()
        return GeodesicSolution(xi0, np.zeros(s.m), 0.0, None, float(np.linalg.norm(xi0)))
    zhat = target.z / zeta
    if r * r == 0.0:
        # |x| below sqrt of the smallest subnormal counts as the center
        if k < 1:
            raise DomainError(f"branch index must be >= 1, got {k}")
        eta0 = 2.0 * math.pi * k * zhat
        xi0 = np.zeros(2 * s.n)
        xi0[0] = math.sqrt(4.0 * k * math.pi * zeta)
        return GeodesicSolution(xi0, eta0, k * math.pi, k, float(xi0[0]))
    theta, comp = phase_of_norms(r, zeta)
    # theta cot theta, stable at both ends of [0, pi)
    if theta <= 0.5 * math.pi:
        tcot = 1.0 if theta == 0.0 else theta * math.cos(theta) / math.sin(theta)
    else:
        tcot = -theta * math.cos(comp) / math.sin(comp)
    J = j_map(s, zhat)
    xi0 = tcot * target.x - theta * (J @ target.x)
    eta0 = 2.0 * theta * zhat
    return GeodesicSolution(xi0, eta0, theta, None, float(np.linalg.norm(xi0)))


def geodesic_point(sol: GeodesicSolution, s: HTypeStructure, t: float) -> GroupPoint:
    """Point at time ``t`` in ``[0, 1]`` on the geodesic described by ``sol``."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    xi0 = np.asarray(sol.xi0, dtype=float)
    eta0 = np.asarray(sol.eta0, dtype=float)
    if xi0.shape != (2 * s.n,) or eta0.shape != (s.m,):
        raise ValueError("geodesic solution does not match structure")
    a = float(np.linalg.norm(eta0))
    if a == 0.0:
        return GroupPoint(t * xi0, np.zeros(s.m))
    phi = a * t
    Jh = j_map(s, eta0 / a)
    sin_term = t * np.sinc(phi / math.pi)                             # sin(phi)/a
    cos_term = t * math.sin(0.5 * phi) * np.sinc(phi / (2 * math.pi))  # (1-cos phi)/a
    x = sin_term * xi0 + cos_term * (Jh @ xi0)
    z = 0.5 * float(xi0 @ xi0) * _x_minus_sin(phi) / (a * a) * (eta0 / a)
    return GroupPoint(x, z)
