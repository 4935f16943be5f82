"""Steady-state observables at N -> infinity from asymptotic trace identities.

For large S and j << S,

    Tr(J-^j J+^j Jz^l) ~ 2 S^(2j+l+1) c(j, l+1),
    c(j, a) = sum_m (-1)^m C(j,m) / (2m + a) = B(a/2, j+1) / 2,

and every collective moment of the steady state reduces to a ratio of
series in x = 1/|g~|^2, g~ = i w0/gamma:

    <m-^j1 m+^j2 mz^j3> = g~*^j1 g~^j2 sum_{J>=max(j1,j2)} x^J c(J, j3+1)
                          / sum_{J>=0} x^J c(J, 1)

with m_a = J_a/S and odd j3 giving zero.  These moments behave as moments
of a distribution of unit Bloch vectors, so k-spin marginals follow either
from Pauli-string tomography or directly in the k-spin Dicke basis.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
from scipy.optimize import curve_fit
from scipy.special import gammaln, logsumexp

from . import dicke
from .steady import NessSpec, ness

log = logging.getLogger(__name__)

EXACT_LIMIT = 64
JMAX_CAP = 1_000_000
DIVERGENT_JMAX = 200
TAIL_TOL = 1e-17
NEGATIVITY_FAIL = 1e-3
NEGATIVITY_CLIP = 1e-6


class SeriesError(RuntimeError):
    pass


# --- inner sums and asymptotic traces ---------------------------------------

@lru_cache(maxsize=4096)
def _inner_exact(j: int, offset: int) -> Fraction:
    return sum(
        (Fraction((-1) ** m * comb(j, m), 2 * m + offset) for m in range(j + 1)),
        Fraction(0),
    )


def log_inner_binomial_sum(j, offset):
    """log of sum_m (-1)^m C(j,m)/(2m+offset), vectorized over j, via the Beta form."""
    j = np.asarray(j, dtype=float)
    a = offset / 2.0
    return np.log(0.5) + gammaln(a) + gammaln(j + 1) - gammaln(j + 1 + a)


def inner_binomial_sum(j: int, offset: int) -> float:
    """sum_{m=0}^{j} (-1)^m C(j,m) / (2m + offset).

    Exact rational arithmetic up to j = 64; beyond that the alternating sum
    cancels catastrophically and the equivalent Beta-function form is used.
    """
    if j < 0 or offset < 1:
        raise ValueError(f"need j >= 0 and offset >= 1, got j={j}, offset={offset}")
    if j <= EXACT_LIMIT:
        return float(_inner_exact(int(j), int(offset)))
    return float(np.exp(log_inner_binomial_sum(j, offset)))


def trace_asymptotic(j: int, S: float, strict: bool = True) -> float:
    """Large-S estimate 2 S^(2j+1) c(j,1) of Tr(J-^j J+^j).

    With ``S = inf`` the S-independent coefficient 2 c(j,1) is returned.
    ``strict`` enforces j <= 0.05 S, the regime where the estimate applies.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    coeff = 2.0 * inner_binomial_sum(j, 1)
    if np.isinf(S):
        return coeff
    if strict and j > 0.05 * S:
        raise ValueError(f"j={j} is not small compared with S={S}")
    return coeff * S ** (2 * j + 1)


def trace_exact(j: int, N: int) -> float:
    """Tr(J-^j J+^j) on the (N+1)-dimensional Dicke space."""
    ops = dicke.build_collective_ops(N)
    a = np.linalg.matrix_power(ops.jminus, j) @ np.linalg.matrix_power(ops.jplus, j)
    return float(np.trace(a).real)


# --- series ------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesSum:
    """Partial sum of sum_{J >= jstart} x^J c(J, offset), kept in log form."""

    log_value: float
    n_terms: int
    converged: bool

    @property
    def value(self) -> float:
        return float(np.exp(self.log_value))


def _x_of(gtilde) -> float:
    mag = abs(complex(gtilde))
    if mag == 0:
        raise ValueError("gtilde must be nonzero")
    return 1.0 / mag ** 2


def resolve_jmax(gtilde, jmax=None) -> tuple[int, bool]:
    """Number of series terms and whether the tail is below TAIL_TOL.

    ``jmax=None`` picks the length automatically for convergent series
    (|g~| > 1) and falls back to ``DIVERGENT_JMAX`` otherwise.
    """
    x = _x_of(gtilde)
    if x < 1:
        needed = int(np.ceil(np.log(TAIL_TOL) / np.log(x))) + 8
        if jmax is None:
            return min(needed, JMAX_CAP), needed <= JMAX_CAP
        return int(jmax), needed <= jmax
    return (DIVERGENT_JMAX if jmax is None else int(jmax)), False


def _log_terms(x, offset, jstart, jmax):
    J = np.arange(jstart, jmax + 1, dtype=float)
    return J * np.log(x) + log_inner_binomial_sum(J, offset)


def series_sum(gtilde, offset=1, jstart=0, jmax=None) -> SeriesSum:
    x = _x_of(gtilde)
    n, conv = resolve_jmax(gtilde, jmax)
    if jstart > n:
        return SeriesSum(-np.inf, 0, conv)
    return SeriesSum(float(logsumexp(_log_terms(x, offset, jstart, n))), n - jstart + 1, conv)


def normalization_D(gtilde, jmax=None) -> SeriesSum:
    """Per-spin normalization D/(2S) = sum_j |g~|^(-2j) c(j, 1)."""
    return series_sum(gtilde, 1, 0, jmax)


def correlator(j1: int, j2: int, j3: int, gtilde, jmax=None) -> complex:
    """<J-^j1 J+^j2 Jz^j3> / S^(j1+j2+j3) in the thermodynamic limit."""
    if min(j1, j2, j3) < 0:
        raise ValueError("monomial powers must be non-negative")
    if j3 % 2:
        return 0j
    g = complex(gtilde)
    num = series_sum(g, j3 + 1, max(j1, j2), jmax)
    den = normalization_D(g, jmax)
    return complex(g.conjugate() ** j1 * g ** j2 * np.exp(num.log_value - den.log_value))


class _Moments:
    """Cached correlator values for one coupling."""

    def __init__(self, gtilde, jmax=None):
        self.gtilde = complex(gtilde)
        self.jmax = jmax
        self.converged = resolve_jmax(gtilde, jmax)[1]
        self._den = normalization_D(self.gtilde, jmax).log_value
        self._cache = {}

    def __call__(self, j1, j2, j3):
        key = (j1, j2, j3)
        if key not in self._cache:
            if j3 % 2:
                val = 0j
            else:
                num = series_sum(self.gtilde, j3 + 1, max(j1, j2), self.jmax).log_value
                g = self.gtilde
                val = complex(g.conjugate() ** j1 * g ** j2 * np.exp(num - self._den))
            self._cache[key] = val
        return self._cache[key]

    def cartesian(self, nx, ny, nz):
        """<mx^nx my^ny mz^nz> with mx = (m+ + m-)/2, my = (m+ - m-)/2i."""
        total = 0j
        for a in range(nx + 1):  # a factors of m+ from mx
            for b in range(ny + 1):  # b factors of m+ from my
                coeff = comb(nx, a) * comb(ny, b) * (-1) ** (ny - b)
                total += coeff * self(nx - a + ny - b, a + b, nz)
        return total / (2 ** nx * (2j) ** ny)


# --- marginals ---------------------------------------------------------------

@dataclass
class ThermoMarginal:
    """k-spin marginal, stored in the (k+1)-dimensional symmetric subspace.

    ``elements`` gives the 2^k-dimensional matrix.  ``min_eig`` is the
    smallest eigenvalue before clipping.
    """

    k: int
    dicke_elements: np.ndarray
    min_eig: float
    converged: bool
    flags: list = field(default_factory=list)

    @property
    def elements(self) -> np.ndarray:
        return dicke.embed_full_space(self.dicke_elements)

    def full(self) -> np.ndarray:
        return self.elements

    def entropy(self) -> float:
        return dicke.von_neumann_entropy(self.dicke_elements)

    def bloch(self) -> np.ndarray:
        """Single-spin Bloch vector (k = 1 only)."""
        if self.k != 1:
            raise ValueError("Bloch vector defined for k = 1 only")
        return dicke.magnetization(self.dicke_elements)


def _sanitize(rho, k, converged):
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    p, V = np.linalg.eigh(rho)
    flags = []
    if p[0] < -NEGATIVITY_FAIL:
        raise SeriesError(
            f"reconstructed {k}-spin marginal has eigenvalue {p[0]:.3e}; "
            "series truncation too aggressive"
        )
    if p[0] < -NEGATIVITY_CLIP:
        flags.append("clipped")
        p = np.clip(p, 0, None)
        rho = (V * p) @ V.conj().T
        rho /= np.trace(rho).real
    if not converged:
        flags.append("jmax_cap")
    return rho, float(p[0]), flags


def subcritical_bloch(gtilde) -> np.ndarray:
    """Mean-field fixed point (0, |g~|, -sqrt(1 - |g~|^2)) for |g~| < 1.

    Below the transition every spin relaxes to the same pure state, so all
    marginals are pure products and the entropies vanish.
    """
    mag = abs(complex(gtilde))
    if mag >= 1:
        raise ValueError(f"|g~| = {mag} is not below 1")
    return np.array([0.0, mag, -np.sqrt(1.0 - mag ** 2)])


def _product_state(k, bloch):
    """|psi>^{(x)k} in the k-spin Dicke basis for a unit Bloch vector."""
    mx, my, mz = bloch
    alpha = np.sqrt(max(0.5 * (1.0 - mz), 0.0))
    beta = np.sqrt(max(0.5 * (1.0 + mz), 0.0)) * np.exp(-1j * np.arctan2(my, mx))
    m = np.arange(k + 1)
    amp = np.sqrt([comb(k, i) for i in m]) * beta ** m * alpha ** (k - m)
    return np.outer(amp, amp.conj())


def thermo_marginal(k: int, gtilde, jmax=None) -> ThermoMarginal:
    """k-spin marginal of the infinite-size steady state.

    Each product component ``(alpha|dn> + beta|up>)^{(x)k}`` contributes
    ``sqrt(C(k,m) C(k,m')) |beta|^{2m'} |alpha|^{2(k-m)} (alpha* beta)^{m-m'}``
    for m >= m', with |beta|^2 = (1+mz)/2, |alpha|^2 = (1-mz)/2 and
    alpha* beta = m-/2; expanding in mz turns this into correlator values.
    """
    if not 1 <= k <= 10:
        raise ValueError(f"k={k} outside 1..10")
    if abs(complex(gtilde)) < 1:
        # the series diverges; its capped partial sums do not describe a state
        rho = _product_state(k, subcritical_bloch(gtilde))
        return ThermoMarginal(k, rho, 0.0, False, ["jmax_cap", "subcritical_product"])
    mom = _Moments(gtilde, jmax)
    rho = np.zeros((k + 1, k + 1), dtype=complex)
    for m in range(k + 1):
        for mp in range(m + 1):
            d = m - mp
            # (1+z)^mp (1-z)^(k-m) = sum_p poly[p] z^p
            poly = np.polynomial.polynomial.polymul(
                [comb(mp, i) for i in range(mp + 1)],
                [comb(k - m, i) * (-1) ** i for i in range(k - m + 1)],
            )
            val = sum(c * mom(d, 0, p) for p, c in enumerate(poly))
            val *= np.sqrt(comb(k, m) * comb(k, mp)) / 2 ** k
            rho[m, mp] = val
            rho[mp, m] = np.conj(val)
    rho, lmin, flags = _sanitize(rho, k, mom.converged)
    return ThermoMarginal(k, rho, lmin, mom.converged, flags)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# Computational basis with bit 1 = up matches dicke.symmetric_isometry; in that
# ordering sigma_z = diag(-1, +1) and sigma_y flips sign.
_PAULI_UP1 = {
    "I": _PAULI["I"],
    "x": _PAULI["x"],
    "y": -_PAULI["y"],
    "z": -_PAULI["z"],
}


def thermo_marginal_pauli(k: int, gtilde, jmax=None) -> np.ndarray:
    """Tomographic assembly sum_strings <sigma...sigma> sigma...sigma / 2^k.

    Cost grows as 8^k; intended for k <= 6 as a cross-check of
    ``thermo_marginal``.  Returned in the same 2^k basis as ``ThermoMarginal.full``.
    """
    if not 1 <= k <= 7:
        raise ValueError(f"Pauli assembly supports 1 <= k <= 7, got {k}")
    if abs(complex(gtilde)) < 1:
        raise SeriesError("moment series diverges for |g~| < 1")
    mom = _Moments(gtilde, jmax)
    coeff = {}
    rho = np.zeros((2 ** k, 2 ** k), dtype=complex)
    for labels in itertools.product("Ixyz", repeat=k):
        counts = (labels.count("x"), labels.count("y"), labels.count("z"))
        if counts not in coeff:
            coeff[counts] = mom.cartesian(*counts)
        op = np.ones((1, 1), dtype=complex)
        for lab in labels:
            op = np.kron(op, _PAULI_UP1[lab])
        rho += coeff[counts] * op
    rho /= 2 ** k
    return 0.5 * (rho + rho.conj().T)


def thermo_total_per_spin(gtilde, jmax=None) -> float:
    """I^1/N at N -> infinity, which reduces to S(rho_1) in the symmetric sector."""
    return thermo_marginal(1, gtilde, jmax).entropy()


def thermo_gmc_per_spin(k: int, gtilde, jmax=None) -> float:
    """I^k/N ~ S(rho_{k-1})/(k-1) - S(rho_k)/k at N -> infinity."""
    if not 2 <= k <= 10:
        raise ValueError(f"k={k} outside 2..10")
    s_prev = thermo_marginal(k - 1, gtilde, jmax).entropy()
    s_k = thermo_marginal(k, gtilde, jmax).entropy()
    return s_prev / (k - 1) - s_k / k


def gtilde_of(omega0: float, gamma: float = 1.0) -> complex:
    return 1j * omega0 / gamma


# --- truncation convergence --------------------------------------------------

def _exp_model(l, A, alpha, B):
    return A * np.exp(-alpha * l) + B


def _pow_model(l, A, alpha, B):
    return A * l ** (-alpha) + B


@dataclass
class ModelFit:
    model_id: str
    params: dict
    uncertainties: dict
    residual: float
    ok: bool
    message: str = ""


@dataclass
class TruncationReport:
    omega0: float
    k: int
    n: int
    ltr: np.ndarray
    values: np.ndarray  # S_ltr(rho_k)/k
    exact: float  # value at ltr = N
    exponential: ModelFit
    power: ModelFit

    @property
    def preferred(self) -> str:
        if not self.power.ok:
            return self.exponential.model_id
        if not self.exponential.ok:
            return self.power.model_id
        if self.exponential.residual <= self.power.residual:
            return self.exponential.model_id
        return self.power.model_id


def _fit_model(model_id, f, l, y, p0):
    try:
        popt, pcov = curve_fit(f, l, y, p0=p0, maxfev=50_000)
    except (RuntimeError, ValueError) as exc:
        return ModelFit(model_id, {}, {}, np.inf, False, str(exc))
    err = np.sqrt(np.abs(np.diag(pcov))) if np.all(np.isfinite(pcov)) else np.full(3, np.nan)
    names = ("A", "alpha", "B")
    return ModelFit(
        model_id,
        dict(zip(names, map(float, popt))),
        dict(zip(names, map(float, err))),
        float(np.linalg.norm(f(l, *popt) - y)),
        True,
    )


DEFAULT_LTR = tuple(range(3, 17))


def truncated_entropy_per_spin(k, omega0, ltr, n=50, gamma=1.0) -> float:
    spec = NessSpec(dicke.ModelParams(n, omega0, gamma), ltr)
    return dicke.von_neumann_entropy(dicke.reduce_to_k(ness(spec), k)) / k


def truncation_convergence(k, omega0, ltr_list=DEFAULT_LTR, n=50, gamma=1.0) -> TruncationReport:
    """S_ltr(rho_k)/k of the finite-n truncated steady state and its two fits.

    Both A e^{-alpha l} + B and A l^{-alpha} + B are fitted with B free,
    since B is the extrapolated value of the untruncated state.
    """
    l = np.asarray(ltr_list, dtype=float)
    if l.size < 4 or np.any(l < 1):
        raise ValueError("need at least four truncation orders, all >= 1")
    y = np.array([truncated_entropy_per_spin(k, omega0, int(x), n, gamma) for x in l])
    exact = truncated_entropy_per_spin(k, omega0, n, n, gamma)
    amp = y[0] - y[-1]
    expo = _fit_model("exponential", _exp_model, l, y,
                      (amp * np.exp(0.5 * l[0]), 0.5, y[-1]))
    power = _fit_model("power_law", _pow_model, l, y, (amp * l[0], 1.0, y[-1]))
    for fit in (expo, power):
        if not fit.ok:
            log.warning("truncation fit %s failed: %s", fit.model_id, fit.message)
    return TruncationReport(omega0, k, n, l, y, exact, expo, power)
