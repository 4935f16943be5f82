"""Brute-force reference implementations on the full 2^N-dimensional space.

Nothing here imports the package's symmetric-basis machinery; every object is
built from single-spin matrices and Kronecker products.  Basis convention:
bit value 1 = spin up, first spin = most significant bit.
"""

import itertools
from math import comb

import numpy as np
from scipy.linalg import expm, solve_sylvester

SPIN_UP = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
SZ = np.diag([-0.5, 0.5]).astype(complex)


def single_site(op, site, N):
    out = np.ones((1, 1), dtype=complex)
    for j in range(N):
        out = np.kron(out, op if j == site else np.eye(2))
    return out


def collective(N):
    """Full-space J+, J-, Jx, Jy, Jz as sums of single-spin operators."""
    jp = sum(single_site(SPIN_UP, j, N) for j in range(N))
    jz = sum(single_site(SZ, j, N) for j in range(N))
    jm = jp.conj().T
    return {"jp": jp, "jm": jm, "jx": (jp + jm) / 2, "jy": (jp - jm) / 2j, "jz": jz}


def dicke_vector(N, n):
    """Normalized symmetric superposition of all bit strings with n ones."""
    v = np.zeros(2 ** N, dtype=complex)
    for ones in itertools.combinations(range(N), n):
        idx = sum(1 << (N - 1 - j) for j in ones)
        v[idx] = 1.0
    return v / np.sqrt(comb(N, n))


def isometry(N):
    return np.column_stack([dicke_vector(N, n) for n in range(N + 1)])


def to_full(rho):
    V = isometry(rho.shape[0] - 1)
    return V @ rho @ V.conj().T


def from_full(rho_full, N):
    V = isometry(N)
    return V.conj().T @ rho_full @ V


def partial_trace_keep_first(rho_full, N, k):
    a, b = 2 ** k, 2 ** (N - k)
    return np.trace(rho_full.reshape(a, b, a, b), axis1=1, axis2=3)


def entropy(rho):
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-12]
    return float(-np.sum(p * np.log(p)))


def residual_correlations_full(rho, k):
    """I^{k->N} from generic partial traces of the embedded state."""
    N = rho.shape[0] - 1
    full = to_full(rho)
    q, r = divmod(N, k)
    val = q * entropy(partial_trace_keep_first(full, N, k)) - entropy(full)
    if r:
        val += entropy(partial_trace_keep_first(full, N, r))
    return val


def lindblad_full(rho_full, N, omega0, gamma=1.0):
    """Master-equation right-hand side evaluated on the full space."""
    ops = collective(N)
    S = N / 2
    h = omega0 * ops["jx"]
    jm, jp = ops["jm"], ops["jp"]
    return (-1j * (h @ rho_full - rho_full @ h)
            + (gamma / S) * (jm @ rho_full @ jp - 0.5 * (jp @ jm @ rho_full + rho_full @ jp @ jm)))


def superoperator(N, omega0, gamma=1.0):
    """Column-stacking vectorization built by applying the generator to unit matrices."""
    d = N + 1
    jp = np.diag(np.sqrt([(n + 1) * (N - n) for n in range(N)]), -1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    S = N / 2

    def rhs(r):
        return (1j * omega0 * (r @ jx - jx @ r)
                + (gamma / S) * (jm @ r @ jp - 0.5 * (jp @ jm @ r + r @ jp @ jm)))

    L = np.zeros((d * d, d * d), dtype=complex)
    for c in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[c] = 1
        L[:, c] = rhs(e.reshape(d, d, order="F")).reshape(-1, order="F")
    return L


def exact_step(rho, N, omega0, h, gamma=1.0):
    L = superoperator(N, omega0, gamma)
    d = N + 1
    return (expm(L * h) @ rho.reshape(-1, order="F")).reshape(d, d, order="F")


def qfi_matrix_sld(rho, gens):
    """QFI matrix from symmetric logarithmic derivatives (full-rank rho)."""
    sld = []
    for g in gens:
        drho = 1j * (rho @ g - g @ rho)
        sld.append(solve_sylvester(rho, rho, 2 * drho))
    F = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            F[a, b] = 0.5 * np.trace(rho @ (sld[a] @ sld[b] + sld[b] @ sld[a])).real
    return F


def pure_state_qfi(psi, gens):
    """4 x symmetric covariance of the generators in a pure state."""
    psi = psi / np.linalg.norm(psi)
    mean = [np.vdot(psi, g @ psi) for g in gens]
    F = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            sym = 0.5 * np.vdot(psi, (gens[a] @ gens[b] + gens[b] @ gens[a]) @ psi)
            F[a, b] = 4 * (sym - mean[a] * mean[b]).real
    return F


def random_symmetric_state(N, rng, rank=None):
    d = N + 1
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
