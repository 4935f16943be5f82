"""RK4 time evolution of the collective master equation.

    d rho/dt = i w0 [rho, Jx] + (gamma/S) (J- rho J+ - {J+ J-, rho}/2)

Written as ``A rho + (A rho)^dagger + (gamma/S) J- rho J+`` with the
tridiagonal non-Hermitian generator ``A = -i w0 Jx - (gamma/2S) J+ J-``,
which keeps every right-hand side exactly Hermitian and costs O(N^2).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import dicke
from .correlations import correlations_from_entropies, required_sizes
from .qfi import qfi_from_eigh, witness_depth

log = logging.getLogger(__name__)

TRACE_DRIFT_TOL = 1e-6
POSITIVITY_FAIL_TOL = 1e-6


class IntegrationError(RuntimeError):
    """Raised when the propagated state leaves the physical domain."""


def default_dt(omega0: float) -> float:
    return min(0.005, 0.01 / max(omega0, 1.0))


@dataclass
class IntegrationControls:
    t_max: float
    dt: float | None = None
    snapshot_stride: int = 10
    state_snapshot_times: tuple = ()

    def resolved_dt(self, omega0: float) -> float:
        dt = self.dt if self.dt is not None else default_dt(omega0)
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if self.t_max < dt:
            raise ValueError(f"t_max={self.t_max} is shorter than one step dt={dt}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")
        return dt


@dataclass
class TrajectoryRecord:
    params: dicke.ModelParams
    k_list: tuple
    times: np.ndarray
    mx: np.ndarray
    my: np.ndarray
    mz: np.ndarray
    purity: np.ndarray
    l1_coherence: np.ndarray
    correlations: dict  # k -> I^k(t); k = 1 holds the total correlations
    f_max: np.ndarray
    depth: np.ndarray
    states: dict = field(default_factory=dict)  # requested time -> rho

    def columns(self) -> dict:
        cols = {"t": self.times, "mx": self.mx, "my": self.my, "mz": self.mz,
                "purity": self.purity, "coherence_l1": self.l1_coherence}
        for k in self.k_list:
            cols[f"I{k}"] = self.correlations[k]
        cols["Fmax"] = self.f_max
        cols["witnessed_depth"] = self.depth
        return cols


class _Generator:
    """Precomputed coefficients of the right-hand side for one parameter set."""

    def __init__(self, params: dicke.ModelParams):
        N = params.N
        S = params.S
        s = dicke.ladder_elements(N)
        d = np.zeros(N + 1)
        d[1:] = s ** 2  # diagonal of J+ J-
        self.N = N
        self.diag = -(0.5 * params.gamma / S) * d + 0j
        self.off = -0.5j * params.omega0 * s  # -i w0 Jx off-diagonal
        self.jump = (params.gamma / S) * np.outer(s, s)

        n = N + 1
        self._diag = self.diag[:, None].copy()
        self._off = self.off[:, None].copy()
        self._b = np.empty((n, n), dtype=complex)
        self._tmp = np.empty((n - 1, n), dtype=complex)

    def __call__(self, rho, out=None):
        if out is None:
            out = np.empty_like(rho, dtype=complex)
        b, tmp = self._b, self._tmp
        np.multiply(self._diag, rho, out=b)
        np.multiply(self._off, rho[1:], out=tmp)
        b[:-1] += tmp
        np.multiply(self._off, rho[:-1], out=tmp)
        b[1:] += tmp
        np.add(b, b.conj().T, out=out)
        jump = tmp[:, :-1]
        np.multiply(self.jump, rho[1:, 1:], out=jump)
        out[:-1, :-1] += jump
        return out


class _RK4:
    """Classical RK4 updating rho in place with preallocated stage buffers."""

    def __init__(self, f, shape):
        self.f = f
        self.k = np.empty(shape, dtype=complex)
        self.acc = np.empty(shape, dtype=complex)
        self.y = np.empty(shape, dtype=complex)

    def step(self, rho, dt):
        f, k, acc, y = self.f, self.k, self.acc, self.y
        f(rho, k)
        np.copyto(acc, k)
        for frac, weight in ((0.5, 2.0), (0.5, 2.0), (1.0, 1.0)):
            np.multiply(k, frac * dt, out=y)
            y += rho
            f(y, k)
            if weight == 2.0:
                acc += k
            acc += k
        acc *= dt / 6.0
        rho += acc
        return rho


def lindblad_rhs(rho, params: dicke.ModelParams) -> np.ndarray:
    """Time derivative of ``rho`` under the boundary master equation."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (params.N + 1, params.N + 1):
        raise ValueError(
            f"state of shape {rho.shape} does not match N={params.N}"
        )
    return _Generator(params)(rho)


def initial_state_minus_x(N: int) -> np.ndarray:
    """|->^{(x)N}, the ground state of w0*Jx, as a Dicke-basis density matrix."""
    n = np.arange(N + 1)
    amp = np.exp(0.5 * dicke.log_binom(N, n) - 0.5 * N * np.log(2.0))
    amp = amp * (-1.0) ** n
    return np.outer(amp, amp).astype(complex)


def rk4_step(f, rho, dt):
    k1 = f(rho)
    k2 = f(rho + (0.5 * dt) * k1)
    k3 = f(rho + (0.5 * dt) * k2)
    k4 = f(rho + dt * k3)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def propagate(rho0, params: dicke.ModelParams, dt: float, n_steps: int) -> np.ndarray:
    """Bare RK4 propagation with per-step trace renormalization."""
    rho = np.array(rho0, dtype=complex)
    stepper = _RK4(_Generator(params), rho.shape)
    for _ in range(n_steps):
        stepper.step(rho, dt)
        tr = np.trace(rho).real
        if abs(tr - 1) > TRACE_DRIFT_TOL:
            raise IntegrationError(f"trace drifted to {tr!r}")
        rho /= tr
    return rho


def state_observables(rho, ops: dicke.CollectiveOperators, k_list, *,
                      validate=True) -> dict:
    """Magnetizations, purity, coherence, I^k for k in ``k_list`` and F_max.

    One eigendecomposition of rho serves the global entropy, the QFI and the
    positivity check.
    """
    N = ops.N
    p, V = np.linalg.eigh(rho)
    if validate and p[0] < -POSITIVITY_FAIL_TOL:
        raise IntegrationError(f"state lost positivity (eigenvalue {p[0]:.3e})")
    p = np.where(p < dicke.EIG_CLIP, 0.0, p)
    entropies = {N: dicke.entropy_from_spectrum(p)}
    for k in required_sizes(N, k_list):
        if k not in entropies:
            entropies[k] = dicke.von_neumann_entropy(dicke.reduce_to_k(rho, k))
    corr = correlations_from_entropies(N, entropies, k_list)
    q = qfi_from_eigh(p, V, ops)
    m = dicke.magnetization(rho, ops)
    return {
        "m": m,
        "purity": dicke.purity(rho),
        "coherence": dicke.l1_coherence(rho),
        "corr": corr,
        "f_max": q.f_max,
        "depth": q.witnessed_depth,
    }


def evolve(rho0, params: dicke.ModelParams, controls: IntegrationControls,
           k_list=(1, 2, 3, 4, 5, 6)) -> TrajectoryRecord:
    """Integrate from ``rho0`` and record observables every ``snapshot_stride`` steps.

    Full density matrices are kept only at ``controls.state_snapshot_times``
    (each mapped to the nearest step).
    """
    rho = np.array(dicke.check_density_matrix(rho0), dtype=complex)
    if rho.shape[0] != params.N + 1:
        raise ValueError(f"initial state dimension {rho.shape[0]} != N+1={params.N + 1}")
    k_list = tuple(k for k in k_list if k <= params.N)
    dt = controls.resolved_dt(params.omega0)
    n_steps = int(round(controls.t_max / dt))
    stride = controls.snapshot_stride
    ops = dicke.build_collective_ops(params.N)
    stepper = _RK4(_Generator(params), rho.shape)

    # RK4 is stable on the imaginary axis up to |h lambda| ~ 2.8
    spectral_radius = params.omega0 * params.N + params.gamma * params.S
    if dt * spectral_radius > 2.5:
        log.warning("dt=%g is close to the RK4 stability limit for N=%d, w0=%g",
                    dt, params.N, params.omega0)

    want_states = {int(round(t / dt)): t for t in controls.state_snapshot_times}
    rows = []
    states = {}
    for step in range(n_steps + 1):
        if step in want_states:
            states[want_states[step]] = rho.copy()
        if step % stride == 0:
            obs = state_observables(rho, ops, k_list)
            rows.append((step * dt, obs))
        if step == n_steps:
            break
        stepper.step(rho, dt)
        tr = np.trace(rho).real
        if abs(tr - 1) > TRACE_DRIFT_TOL:
            raise IntegrationError(
                f"trace drifted to {tr!r} at t={step * dt:.4f} "
                f"(N={params.N}, w0={params.omega0})"
            )
        rho /= tr

    times = np.array([t for t, _ in rows])
    m = np.array([o["m"] for _, o in rows])
    return TrajectoryRecord(
        params=params,
        k_list=k_list,
        times=times,
        mx=m[:, 0], my=m[:, 1], mz=m[:, 2],
        purity=np.array([o["purity"] for _, o in rows]),
        l1_coherence=np.array([o["coherence"] for _, o in rows]),
        correlations={k: np.array([o["corr"][k] for _, o in rows]) for k in k_list},
        f_max=np.array([o["f_max"] for _, o in rows]),
        depth=np.array([o["depth"] for _, o in rows], dtype=int),
        states=states,
    )
