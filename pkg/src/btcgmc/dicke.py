"""Permutation-symmetric spin states in the Dicke basis.

Basis vectors are indexed by the number of excited (up) spins ``n``,
``0 <= n <= N``.  Collective operators use the spin-1/2 convention
``J_a = (1/2) sum_i sigma_a^i`` so that ``S = N/2`` and ``J_z = n - N/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9
EIG_CLIP = 1e-12
FULL_SPACE_LIMIT = 12


@dataclass(frozen=True)
class ModelParams:
    """Driven collective decay: system size, drive amplitude, decay rate."""

    N: int
    omega0: float
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be non-negative, got {self.omega0}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def S(self) -> float:
        return self.N / 2


@dataclass(frozen=True)
class CollectiveOperators:
    N: int
    jplus: np.ndarray
    jminus: np.ndarray
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def S(self) -> float:
        return self.N / 2

    def cartesian(self):
        return self.jx, self.jy, self.jz


def ladder_elements(N: int) -> np.ndarray:
    """Off-diagonal elements ``<n-1|J-|n> = sqrt(n (N - n + 1))`` for n = 1..N."""
    n = np.arange(1, N + 1, dtype=float)
    return np.sqrt(n * (N - n + 1))


@lru_cache(maxsize=64)
def _collective_ops_cached(N: int) -> CollectiveOperators:
    s = ladder_elements(N)
    jminus = np.diag(s, 1).astype(complex)
    jplus = jminus.conj().T.copy()
    jx = 0.5 * (jplus + jminus)
    jy = (jplus - jminus) / 2j
    jz = np.diag(np.arange(N + 1) - N / 2).astype(complex)
    for a in (jminus, jplus, jx, jy, jz):
        a.setflags(write=False)
    return CollectiveOperators(N, jplus, jminus, jx, jy, jz)


def build_collective_ops(N: int) -> CollectiveOperators:
    """Matrices of J+, J-, Jx, Jy, Jz on the (N+1)-dimensional Dicke space.

    J+ raises the excitation number.  Returned arrays are read-only and
    shared between calls with the same ``N``.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    return _collective_ops_cached(int(N))


def log_binom(n, k):
    """Elementwise log C(n, k) via log-gamma; -inf where k is out of range."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    valid = (k >= 0) & (k <= n)
    with np.errstate(invalid="ignore"):
        out = gammaln(n + 1) - gammaln(np.where(valid, k, 0) + 1) - gammaln(
            np.where(valid, n - k, 0) + 1
        )
    return np.where(valid, out, -np.inf)


def dicke_state(N: int, n: int) -> np.ndarray:
    """Density matrix |N,n><N,n|."""
    if not 0 <= n <= N:
        raise ValueError(f"excitation number {n} outside 0..{N}")
    rho = np.zeros((N + 1, N + 1), dtype=complex)
    rho[n, n] = 1.0
    return rho


def check_density_matrix(rho, *, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL,
                         pos_tol=None) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Positivity is only checked when ``pos_tol`` is given since it costs an
    eigendecomposition.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm_err = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm_err > herm_tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"trace is {tr!r}, expected 1")
    if pos_tol is not None:
        lmin = np.linalg.eigvalsh(rho).min()
        if lmin < -pos_tol:
            raise ValueError(f"matrix has negative eigenvalue {lmin:.3e}")
    return rho.astype(complex, copy=False)


def num_spins(rho) -> int:
    return np.shape(rho)[0] - 1


# --- partial traces ---------------------------------------------------------

def _marginal_weights(N: int, k: int) -> np.ndarray:
    """Kernel amplitudes a[r, m] for a k-spin marginal of an N-spin Dicke state.

    ``|N, m + r> = sum_m a[r, m] |k, m> |N-k, r>`` with
    ``a[r, m] = sqrt(C(k,m) C(N-k,r) / C(N,m+r))``.
    """
    r = np.arange(N - k + 1)[:, None]
    m = np.arange(k + 1)[None, :]
    loga = 0.5 * (log_binom(k, m) + log_binom(N - k, r) - log_binom(N, m + r))
    return np.exp(loga)


def reduce_to_k(rho, k: int) -> np.ndarray:
    """k-spin marginal of a symmetric N-spin state, in the k-spin Dicke basis."""
    rho = np.asarray(rho)
    N = num_spins(rho)
    if not 1 <= k <= N:
        raise ValueError(f"marginal size k={k} outside 1..{N}")
    if k == N:
        return np.array(rho, dtype=complex)
    a = _marginal_weights(N, k)
    # Blocks rho[r:r+k+1, r:r+k+1] for every number r of excitations traced out.
    idx = np.arange(N - k + 1)[:, None] + np.arange(k + 1)[None, :]
    blocks = rho[idx[:, :, None], idx[:, None, :]]
    return np.einsum("rm,rmp,rp->mp", a, blocks, a)


def trace_out_one(rho) -> np.ndarray:
    """Trace a single spin out of a symmetric k-spin state."""
    rho = np.asarray(rho)
    k = num_spins(rho)
    if k < 1:
        raise ValueError("cannot trace a spin out of a zero-spin state")
    m = np.arange(k, dtype=float)
    down = np.sqrt(k - m) / np.sqrt(k)
    up = np.sqrt(m + 1) / np.sqrt(k)
    return (rho[:-1, :-1] * np.outer(down, down)
            + rho[1:, 1:] * np.outer(up, up))


def marginal_chain(rho, kmin: int = 1) -> dict[int, np.ndarray]:
    """All marginals from size N down to ``kmin`` by repeated single-spin traces."""
    cur = np.asarray(rho, dtype=complex)
    N = num_spins(cur)
    out = {N: cur}
    for k in range(N, kmin, -1):
        cur = trace_out_one(cur)
        out[k - 1] = cur
    return out


# --- spectral functionals ---------------------------------------------------

def clipped_eigvalsh(rho, clip=EIG_CLIP) -> np.ndarray:
    p = np.linalg.eigvalsh(rho)
    return np.where(p < clip, 0.0, p)


def entropy_from_spectrum(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > EIG_CLIP]
    # an eigenvalue of 1 + eps would give a tiny negative value
    return max(float(-np.sum(p * np.log(p))), 0.0) + 0.0


def von_neumann_entropy(rho) -> float:
    """Entropy in nats; eigenvalues below 1e-12 count as zero."""
    rho = np.asarray(rho)
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
    return entropy_from_spectrum(clipped_eigvalsh(rho))


def purity(rho) -> float:
    rho = np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def l1_coherence(rho) -> float:
    """Sum of absolute off-diagonal elements in the Dicke basis."""
    mag = np.abs(np.asarray(rho))
    return float(mag.sum() - np.trace(mag))


def element_magnitudes(rho) -> np.ndarray:
    return np.abs(np.asarray(rho))


def expectation(rho, op) -> complex:
    return complex(np.sum(np.asarray(rho) * np.asarray(op).T))


def magnetization(rho, ops: CollectiveOperators | None = None) -> np.ndarray:
    """Normalized magnetizations <J_a>/S for a = x, y, z."""
    rho = np.asarray(rho)
    N = num_spins(rho)
    ops = ops or build_collective_ops(N)
    return np.array([expectation(rho, o).real for o in ops.cartesian()]) / ops.S


# --- full tensor-product space (test oracle) --------------------------------

def symmetric_isometry(N: int, limit: int = FULL_SPACE_LIMIT) -> np.ndarray:
    """Columns are Dicke states written on the 2**N computational basis.

    Bit value 1 marks an up spin; the first spin is the most significant bit.
    """
    if N > limit:
        raise ValueError(f"full-space embedding limited to N <= {limit}, got {N}")
    idx = np.arange(2 ** N)
    pop = np.array([bin(i).count("1") for i in idx])
    V = np.zeros((2 ** N, N + 1))
    V[idx, pop] = 1.0
    return V / np.sqrt(V.sum(axis=0))


def embed_full_space(rho, limit: int = FULL_SPACE_LIMIT) -> np.ndarray:
    """Map a Dicke-basis density matrix onto the full 2**N-dimensional space."""
    rho = np.asarray(rho)
    V = symmetric_isometry(num_spins(rho), limit)
    return V @ rho @ V.T
