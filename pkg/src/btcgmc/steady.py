"""Exact non-equilibrium steady state and a null-space oracle.

The steady state is rho = eta eta^dagger / Tr(eta eta^dagger) with

    eta = sum_{j=0}^{ltr} (J- / g*)^j,    g = i w0 S / gamma.

J- is a single superdiagonal, so eta[a, n] = i^(n-a) exp(L[n] - L[a]) for
0 <= n - a <= ltr, where L[m] = sum_{q<=m} log sqrt(q (N-q+1)) - m log|g|.
All magnitudes are handled through L to survive N in the thousands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import dicke
from .dynamics import lindblad_rhs

ORACLE_LIMIT = 30


@dataclass(frozen=True)
class NessSpec:
    params: dicke.ModelParams
    ltr: int | None = None  # truncation order; None means exact (ltr = N)

    def __post_init__(self):
        if self.ltr is not None and not 0 <= self.ltr <= self.params.N:
            raise ValueError(f"ltr={self.ltr} outside 0..{self.params.N}")

    @property
    def order(self) -> int:
        return self.params.N if self.ltr is None else self.ltr


def _log_ladder(params: dicke.ModelParams) -> np.ndarray:
    s = dicke.ladder_elements(params.N)
    g_abs = params.omega0 * params.S / params.gamma
    return np.concatenate([[0.0], np.cumsum(np.log(s) - np.log(g_abs))])


def _phase(a, b):
    """i^(b - a) for integer arrays."""
    return np.array([1, 1j, -1, -1j])[(b - a) % 4]


def build_eta(spec: NessSpec, scaled: bool = False) -> np.ndarray:
    """The (optionally truncated) eta operator as a dense upper-triangular matrix.

    With ``scaled=True`` the matrix is divided by its largest magnitude so
    that it stays finite for any N; the steady state is unaffected.
    """
    p = spec.params
    N = p.N
    if p.omega0 == 0:
        if spec.order < N:
            raise ValueError("truncated eta is undefined at omega0 = 0")
        # (J-/g*)^N dominates: everything maps onto the all-down state
        eta = np.zeros((N + 1, N + 1), dtype=complex)
        eta[0, N] = 1.0
        return eta
    L = _log_ladder(p)
    a = np.arange(N + 1)
    diff = a[None, :] - a[:, None]
    band = (diff >= 0) & (diff <= spec.order)
    logmag = np.where(band, L[None, :] - L[:, None], -np.inf)
    if scaled:
        logmag = logmag - logmag[band].max()
    with np.errstate(under="ignore"):
        return np.where(band, _phase(a[:, None], a[None, :]) * np.exp(logmag), 0)


def ness(spec: NessSpec) -> np.ndarray:
    """Normalized steady state eta eta^dagger / Tr."""
    p = spec.params
    N = p.N
    if p.omega0 == 0:
        return dicke.dicke_state(N, 0)
    if spec.order < N:
        eta = build_eta(spec, scaled=True)
        rho = eta @ eta.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        return rho / np.trace(rho).real
    # rho[a, b] = i^(b-a) exp(-L[a] - L[b]) sum_{n >= max(a, b)} exp(2 L[n])
    L = _log_ladder(p)
    tail = np.logaddexp.accumulate((2.0 * L)[::-1])[::-1]
    a = np.arange(N + 1)
    logrho = -L[:, None] - L[None, :] + tail[np.maximum.outer(a, a)]
    logrho -= logrho.max()
    diag_log = np.diag(logrho)
    with np.errstate(under="ignore"):
        rho = _phase(a[:, None], a[None, :]) * np.exp(logrho)
    return rho / np.exp(logsumexp(diag_log))


# --- null-space oracle ------------------------------------------------------

def liouvillian_matrix(params: dicke.ModelParams) -> np.ndarray:
    """Dense superoperator acting on row-major vec(rho)."""
    N = params.N
    d = N + 1
    ops = dicke.build_collective_ops(N)
    eye = np.eye(d)
    jx, jm, jp = ops.jx, ops.jminus, ops.jplus
    kk = jp @ jm
    # vec(A rho B) = kron(A, B^T) vec(rho)
    lv = 1j * params.omega0 * (np.kron(eye, jx.T) - np.kron(jx, eye))
    lv += (params.gamma / params.S) * (
        np.kron(jm, jp.T) - 0.5 * np.kron(kk, eye) - 0.5 * np.kron(eye, kk.T)
    )
    return lv


def ness_nullspace_oracle(params: dicke.ModelParams, limit: int = ORACLE_LIMIT,
                          tol: float = 1e-10) -> np.ndarray:
    """Steady state as the unit-trace kernel vector of the dense Lindbladian."""
    N = params.N
    if N > limit:
        raise ValueError(f"null-space oracle limited to N <= {limit}, got {N}")
    lv = liouvillian_matrix(params)
    _, sv, vh = np.linalg.svd(lv)
    kernel_dim = int(np.sum(sv < tol * sv[0]))
    if kernel_dim != 1:
        raise ValueError(f"Lindbladian kernel has dimension {kernel_dim}, expected 1")
    rho = vh[-1].conj().reshape(N + 1, N + 1)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def trace_distance(rho, sigma) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma))).sum())


def steady_state_residual(rho, params: dicke.ModelParams) -> float:
    """Largest |element| of L[rho]."""
    return float(np.abs(lindblad_rhs(rho, params)).max())
