"""Quantum Fisher information optimized over collective spin generators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dicke

PAIR_CUTOFF = 1e-12
# F_max/N landing within this of an integer is treated as that integer, so
# round-off on e.g. a coherent state (F = N exactly) does not witness anything
WITNESS_RTOL = 1e-9


@dataclass(frozen=True)
class QfiResult:
    gamma: np.ndarray
    f_max: float
    witnessed_depth: int


def _cubic_roots(a: np.ndarray):
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = np.trace(a) / 3.0
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    if p == 0.0:
        return None
    b = (a - q * np.eye(3)) / p
    r = np.clip(np.linalg.det(b) / 2.0, -1.0, 1.0)
    phi = math.acos(r) / 3.0
    e_hi = q + 2.0 * p * math.cos(phi)
    e_lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return np.array([e_lo, 3.0 * q - e_hi - e_lo, e_hi])


def _eig2(m) -> tuple[float, float]:
    mean = 0.5 * (m[0, 0] + m[1, 1])
    rad = math.hypot(0.5 * (m[0, 0] - m[1, 1]), m[0, 1])
    return mean - rad, mean + rad


def symmetric_eigvals_3x3(a) -> np.ndarray:
    """Eigenvalues of a real symmetric 3x3 matrix, ascending, in closed form.

    The trigonometric cubic solution is only accurate to ~sqrt(eps) near a
    double root, so the most isolated root is kept, its eigenvector is taken
    from a cross product of two rows of (a - e I), and the remaining pair comes
    from the 2x2 block on the orthogonal complement.
    """
    a = np.asarray(a, dtype=float)
    if a[0, 1] == 0.0 and a[0, 2] == 0.0 and a[1, 2] == 0.0:
        return np.sort(np.diag(a))
    roots = _cubic_roots(a)
    if roots is None:
        return np.full(3, np.trace(a) / 3.0)
    gaps = [roots[1] - roots[0], min(roots[1] - roots[0], roots[2] - roots[1]), roots[2] - roots[1]]
    i = 0 if gaps[0] >= gaps[2] else 2
    shifted = a - roots[i] * np.eye(3)
    crosses = [np.cross(shifted[0], shifted[1]), np.cross(shifted[0], shifted[2]),
               np.cross(shifted[1], shifted[2])]
    u = max(crosses, key=lambda c: c @ c)
    norm = math.sqrt(u @ u)
    if norm == 0.0:
        return roots
    u = u / norm
    # orthonormal complement of u
    seed = np.eye(3)[int(np.argmin(np.abs(u)))]
    v1 = np.cross(u, seed)
    v1 /= math.sqrt(v1 @ v1)
    v2 = np.cross(u, v1)
    basis = np.column_stack([v1, v2])
    lo, hi = _eig2(basis.T @ a @ basis)
    isolated = float(u @ a @ u)
    return np.sort([isolated, lo, hi])


def witness_depth(f_max: float, N: int) -> int:
    """Largest k with F_max/N > k - 1; 0 when F_max <= N witnesses nothing."""
    if f_max < 0:
        raise ValueError(f"f_max must be non-negative, got {f_max}")
    ratio = f_max / N
    if ratio <= 1.0 + WITNESS_RTOL:
        return 0
    return int(math.ceil(ratio - WITNESS_RTOL))


def qfi_from_eigh(p, V, ops: dicke.CollectiveOperators) -> QfiResult:
    """Gamma matrix from a spectral decomposition rho = V diag(p) V^dagger."""
    p = np.where(p < PAIR_CUTOFF, 0.0, np.asarray(p, dtype=float))
    psum = p[:, None] + p[None, :]
    keep = psum > PAIR_CUTOFF
    w = np.zeros_like(psum)
    w[keep] = (p[:, None] - p[None, :])[keep] ** 2 / psum[keep]
    rotated = [V.conj().T @ g @ V for g in ops.cartesian()]
    gamma = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            # sum_ij w_ij <j|J_a|i><i|J_b|j> = sum_ij w_ij conj(Ja_ij) Jb_ij
            val = 2.0 * np.sum(w * rotated[a].conj() * rotated[b]).real
            gamma[a, b] = gamma[b, a] = val
    f_max = float(max(symmetric_eigvals_3x3(gamma)[-1], 0.0))
    return QfiResult(gamma, f_max, witness_depth(f_max, ops.N))


def qfi_gamma(rho, ops: dicke.CollectiveOperators | None = None) -> QfiResult:
    """Optimal QFI over Jx, Jy, Jz and the entanglement depth it certifies."""
    rho = np.asarray(rho)
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > dicke.HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
    ops = ops or dicke.build_collective_ops(dicke.num_spins(rho))
    p, V = np.linalg.eigh(rho)
    return qfi_from_eigh(p, V, ops)
