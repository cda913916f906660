"""Real Clifford generators and H-type structures.

An H-type structure on ``R^{2n} x R^m`` is fixed by ``m`` skew-symmetric,
orthogonal, pairwise anticommuting ``2n x 2n`` matrices.  They are built
here from the classical division-algebra multiplication tables (complex,
quaternion, octonion) plus the period-8 tensor construction, and padded
to size ``2n`` by block-diagonal repetition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import AdmissibilityError, DomainError


def hurwitz_radon(k: int) -> int:
    """Hurwitz-Radon number ``rho(k) = 8p + 2**q`` for ``k = a * 2**(4p+q)``.

    ``a`` is odd and ``0 <= q <= 3``.

    >>> [hurwitz_radon(k) for k in (1, 2, 4, 8, 16)]
    [1, 2, 4, 8, 9]
    """
    k = int(k)
    if k < 1:
        raise DomainError(f"hurwitz_radon needs k >= 1, got {k}")
    e = (k & -k).bit_length() - 1
    p, q = divmod(e, 4)
    return 8 * p + 2 ** q


def is_admissible(n: int, m: int) -> bool:
    """True iff an H-type algebra with ``dim z_perp = 2n``, ``dim z = m`` exists."""
    if n < 1 or m < 1:
        raise DomainError(f"dimensions must be positive, got n={n}, m={m}")
    return m < hurwitz_radon(2 * n)


def minimal_dimension(m: int) -> int:
    """Smallest even ``d`` carrying ``m`` anticommuting complex structures."""
    if m < 1:
        raise DomainError(f"m must be positive, got {m}")
    table = (2, 4, 4, 8, 8, 8, 8, 16)
    q, r = divmod(m - 1, 8)
    return table[r] * 16 ** q


# Cayley-Dickson doubling: (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))
def _cd_conj(x):
    y = -x.copy()
    y[0] = x[0]
    return y


def _cd_mul(x, y):
    n = x.size
    if n == 1:
        return x * y
    h = n // 2
    a, b = x[:h], x[h:]
    c, d = y[:h], y[h:]
    return np.concatenate([
        _cd_mul(a, c) - _cd_mul(_cd_conj(d), b),
        _cd_mul(d, a) + _cd_mul(b, _cd_conj(c)),
    ])


def _left_mult(dim: int, unit: int) -> np.ndarray:
    """Matrix of ``x -> e_unit * x`` in the Cayley-Dickson algebra of size dim."""
    e = np.zeros(dim)
    e[unit] = 1.0
    mat = np.empty((dim, dim))
    for j in range(dim):
        b = np.zeros(dim)
        b[j] = 1.0
        mat[:, j] = _cd_mul(e, b)
    return mat


@lru_cache(maxsize=None)
def _minimal_generators(m: int) -> tuple[np.ndarray, ...]:
    if m <= 1:
        return (_left_mult(2, 1),)
    if m <= 3:
        return tuple(_left_mult(4, j) for j in range(1, m + 1))
    if m <= 7:
        return tuple(_left_mult(8, j) for j in range(1, m + 1))
    octo = _minimal_generators(7)
    zero = np.zeros((8, 8))
    eye = np.eye(8)
    eight = [np.block([[zero, e], [e, zero]]) for e in octo]
    eight.append(np.block([[zero, -eye], [eye, zero]]))
    if m == 8:
        return tuple(eight)
    # Cl(0, m) from Cl(0, m-8) and Cl(0, 8): A_i (x) vol, I (x) B_j
    vol = np.linalg.multi_dot(eight)
    inner = _minimal_generators(m - 8)
    d = inner[0].shape[0]
    gens = [np.kron(a, vol) for a in inner]
    gens.extend(np.kron(np.eye(d), b) for b in eight)
    return tuple(gens)


@dataclass(frozen=True)
class HTypeStructure:
    """Generators ``J_{u_1}, ..., J_{u_m}`` of an H-type algebra.

    ``generators`` has shape ``(m, 2n, 2n)`` and is read-only.
    """

    n: int
    m: int
    generators: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.n + self.m

    def check(self, atol: float = 1e-13) -> dict[str, float]:
        """Largest violation of each defining identity."""
        eye = np.eye(2 * self.n)
        J = self.generators
        skew = max(np.abs(j + j.T).max() for j in J)
        orth = max(np.abs(j.T @ j - eye).max() for j in J)
        anti = 0.0
        for a in range(self.m):
            for b in range(self.m):
                target = -2.0 * eye if a == b else 0.0
                anti = max(anti, np.abs(J[a] @ J[b] + J[b] @ J[a] - target).max())
        return {"skew": skew, "orthogonal": orth, "anticommute": anti}


def build_structure(n: int, m: int) -> HTypeStructure:
    """Deterministic H-type structure for admissible ``(n, m)``.

    Raises
    ------
    AdmissibilityError
        If ``m >= rho(2n)``.
    """
    if not is_admissible(n, m):
        raise AdmissibilityError(
            f"no H-type structure for n={n}, m={m}: "
            f"m < rho(2n) violated (rho({2 * n}) = {hurwitz_radon(2 * n)})"
        )
    base = _minimal_generators(m)
    d = base[0].shape[0]
    reps = 2 * n // d
    gens = np.stack([np.kron(np.eye(reps), b) for b in base])
    gens.setflags(write=False)
    return HTypeStructure(n, m, gens)


def j_map(s: HTypeStructure, z) -> np.ndarray:
    """The matrix ``J_z = sum_j z_j J_{u_j}``."""
    z = np.asarray(z, dtype=float)
    if z.shape != (s.m,):
        raise ValueError(f"z must have shape ({s.m},), got {z.shape}")
    return np.tensordot(z, s.generators, axes=1)
