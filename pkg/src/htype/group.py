"""Group law, bracket and dilations on ``R^{2n} x R^m``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import HTypeStructure, j_map
from .errors import DomainError


@dataclass(frozen=True)
class GroupPoint:
    """A point ``g = (x, z)`` with horizontal part ``x`` and central part ``z``."""

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        z = np.array(self.z, dtype=float).reshape(-1)
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def origin(cls, n: int, m: int) -> "GroupPoint":
        return cls(np.zeros(2 * n), np.zeros(m))

    @classmethod
    def from_norms(cls, n: int, m: int, x_norm: float, z_norm: float) -> "GroupPoint":
        """Point with ``x`` along ``e_1`` and ``z`` along ``u_1``."""
        x = np.zeros(2 * n)
        z = np.zeros(m)
        x[0] = x_norm
        z[0] = z_norm
        return cls(x, z)

    @property
    def x_norm(self) -> float:
        return float(np.linalg.norm(self.x))

    @property
    def z_norm(self) -> float:
        return float(np.linalg.norm(self.z))

    def inverse(self) -> "GroupPoint":
        return GroupPoint(-self.x, -self.z)


def _check(s: HTypeStructure, g: GroupPoint) -> None:
    if g.x.shape != (2 * s.n,) or g.z.shape != (s.m,):
        raise ValueError(
            f"point of shape ({g.x.size}, {g.z.size}) does not match "
            f"structure (2n={2 * s.n}, m={s.m})"
        )


def bracket(s: HTypeStructure, x, y) -> np.ndarray:
    """Lie bracket ``[x, y]_j = <J_{u_j} x, y>`` of two horizontal vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (2 * s.n,) or y.shape != (2 * s.n,):
        raise ValueError(f"horizontal vectors must have shape ({2 * s.n},)")
    return np.einsum("jab,b,a->j", s.generators, x, y)


def multiply(s: HTypeStructure, g: GroupPoint, h: GroupPoint) -> GroupPoint:
    """Group law ``(x, z)(x', z') = (x + x', z + z' + [x, x']/2)``."""
    _check(s, g)
    _check(s, h)
    return GroupPoint(g.x + h.x, g.z + h.z + 0.5 * bracket(s, g.x, h.x))


def dilate(g: GroupPoint, alpha: float) -> GroupPoint:
    """Parabolic dilation ``(x, z) -> (alpha x, alpha**2 z)``."""
    if alpha == 0:
        raise DomainError("dilation factor must be nonzero")
    return GroupPoint(alpha * g.x, alpha * alpha * g.z)


def radial_subgradient(f_r: float, f_s: float, g: GroupPoint, s: HTypeStructure) -> np.ndarray:
    """Horizontal gradient of a radial function ``f(|x|, |z|)``.

    ``f_r`` and ``f_s`` are the partial derivatives in ``|x|`` and ``|z|``
    at ``g``.  Returns ``f_r x_hat + f_s |x| J_{z_hat} x_hat / 2``; its norm is
    ``sqrt(f_r**2 + f_s**2 |x|**2 / 4)``.
    """
    _check(s, g)
    r = g.x_norm
    if r == 0.0:
        if f_r != 0.0:
            raise DomainError("radial derivative in |x| is undefined at x = 0")
        return np.zeros(2 * s.n)
    xh = g.x / r
    out = f_r * xh
    rz = g.z_norm
    if rz == 0.0:
        if f_s != 0.0:
            raise DomainError("radial derivative in |z| is undefined at z = 0")
        return out
    return out + 0.5 * f_s * r * (j_map(s, g.z / rz) @ xh)


def jz_identities(s: HTypeStructure, samples: int = 100, seed: int = 0) -> dict[str, float]:
    """Largest violation of each ``J_z`` identity over random samples.

    Checks skew-symmetry and orthogonality of ``J_z`` for unit ``z``,
    ``J_z**2 = -|z|**2 I``, ``J_z J_w + J_w J_z = -2 <z, w> I``,
    ``<J_z x, J_w x> = <z, w> |x|**2`` and ``[x, J_z x] = |x|**2 z``.
    Errors are relative to the natural scale of each identity.
    """
    rng = np.random.default_rng(seed)
    eye = np.eye(2 * s.n)
    out = dict.fromkeys(
        ("skew", "orthogonal", "square", "anticommute", "inner_product", "bracket"), 0.0)
    for _ in range(samples):
        z = rng.standard_normal(s.m)
        w = rng.standard_normal(s.m)
        x = rng.standard_normal(2 * s.n)
        zz, ww, xx = z @ z, w @ w, x @ x
        Jz = j_map(s, z)
        Jw = j_map(s, w)
        Ju = Jz / np.sqrt(zz)
        out["skew"] = max(out["skew"], np.abs(Ju + Ju.T).max())
        out["orthogonal"] = max(out["orthogonal"], np.abs(Ju.T @ Ju - eye).max())
        out["square"] = max(out["square"], np.abs(Jz @ Jz + zz * eye).max() / zz)
        scale = np.sqrt(zz * ww)
        out["anticommute"] = max(
            out["anticommute"], np.abs(Jz @ Jw + Jw @ Jz + 2.0 * (z @ w) * eye).max() / scale)
        out["inner_product"] = max(
            out["inner_product"], abs((Jz @ x) @ (Jw @ x) - (z @ w) * xx) / (scale * xx))
        out["bracket"] = max(
            out["bracket"], np.abs(bracket(s, x, Jz @ x) - xx * z).max() / (xx * np.sqrt(zz)))
    return {k: float(v) for k, v in out.items()}
