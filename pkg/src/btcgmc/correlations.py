"""Genuine multipartite correlations of permutation-invariant states.

For a symmetric N-spin state the residual correlations beyond order k are

    I^{k->N} = floor(N/k) S(rho_k) + [N mod k != 0] S(rho_{N mod k}) - S(rho_N)

and the genuine k-partite correlations are I^k = I^{k-1->N} - I^{k->N}
with I^1 = I^{1->N} the total correlations.  Entropies are in nats.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import dicke

log = logging.getLogger(__name__)

NEGATIVE_SLACK = 1e-9


class CorrelationError(ValueError):
    """Negative correlations beyond round-off, i.e. an unphysical state."""


@dataclass
class CorrelationSpectrum:
    """Residual and genuine correlations of every order.

    Arrays are indexed directly by the order k; unused slots hold NaN
    (``residual[0]``, ``genuine[0]`` and ``genuine[1]``).  ``genuine`` keeps
    the raw differences of the residuals so that the telescoping sum is
    exact; ``n_clipped`` counts entries that were negative within slack.
    """

    n: int
    residual: np.ndarray
    genuine: np.ndarray
    entropies: np.ndarray
    n_clipped: int = 0

    @property
    def i_total(self) -> float:
        return float(self.residual[1])

    def genuine_clipped(self) -> np.ndarray:
        g = self.genuine.copy()
        g[2:] = np.maximum(g[2:], 0.0)
        return g


def _check_order(N, k, kmin=1):
    if not kmin <= k <= N:
        raise ValueError(f"order k={k} outside {kmin}..{N}")


def _clip(value, what):
    if value < -NEGATIVE_SLACK:
        raise CorrelationError(f"{what} = {value:.3e} is negative beyond round-off")
    return max(value, 0.0)


def residual_from_entropies(N: int, k: int, entropy_of) -> float:
    """I^{k->N} given a mapping ``size -> S(rho_size)`` (raw, unclipped)."""
    q, r = divmod(N, k)
    val = q * entropy_of[k] - entropy_of[N]
    if r:
        val += entropy_of[r]
    return val


def required_sizes(N: int, k_list) -> set[int]:
    """Marginal sizes needed to evaluate I^k for all k in ``k_list``."""
    sizes = {N}
    for k in k_list:
        for j in ({1} if k == 1 else {k - 1, k}):
            sizes.add(j)
            if N % j:
                sizes.add(N % j)
    return sizes


def correlations_from_entropies(N: int, entropy_of, k_list) -> dict:
    """I^1 (total) and I^k (genuine, k >= 2) from precomputed marginal entropies."""
    out = {}
    for k in k_list:
        if k == 1:
            out[1] = _clip(residual_from_entropies(N, 1, entropy_of), "I^1")
        else:
            raw = (residual_from_entropies(N, k - 1, entropy_of)
                   - residual_from_entropies(N, k, entropy_of))
            out[k] = _clip(raw, f"I^{k}")
    return out


def _marginal_entropy(rho, k):
    return dicke.von_neumann_entropy(dicke.reduce_to_k(rho, k))


def _entropies(rho, sizes):
    return {j: _marginal_entropy(rho, j) for j in sizes}


def residual_correlations(rho, k: int) -> float:
    """Correlations of order higher than k, I^{k->N}, clipped at zero."""
    N = dicke.num_spins(rho)
    _check_order(N, k)
    sizes = {k, N} | ({N % k} if N % k else set())
    return _clip(residual_from_entropies(N, k, _entropies(rho, sizes)), f"I^{{{k}->N}}")


def genuine_correlations(rho, k: int) -> float:
    """Genuine k-partite correlations I^k for 2 <= k <= N."""
    N = dicke.num_spins(rho)
    _check_order(N, k, kmin=2)
    return correlations_from_entropies(N, _entropies(rho, required_sizes(N, [k])), [k])[k]


def total_correlations(rho) -> float:
    """I^1 = N S(rho_1) - S(rho_N)."""
    N = dicke.num_spins(rho)
    ent = {1: _marginal_entropy(rho, 1), N: dicke.von_neumann_entropy(rho)}
    return _clip(N * ent[1] - ent[N], "I^1")


def correlation_spectrum(rho) -> CorrelationSpectrum:
    """All residual and genuine correlations, one marginal entropy per size.

    Marginals come from successive single-spin traces, so the whole spectrum
    costs O(N^3) for the traces plus one small eigensolve per size.
    """
    rho = np.asarray(rho)
    N = dicke.num_spins(rho)
    chain = dicke.marginal_chain(rho)
    ent = np.zeros(N + 1)
    for j in range(1, N + 1):
        ent[j] = dicke.von_neumann_entropy(chain[j])

    residual = np.full(N + 1, np.nan)
    for k in range(1, N + 1):
        raw = residual_from_entropies(N, k, ent)
        residual[k] = _clip(raw, f"I^{{{k}->N}}")
    residual[N] = 0.0

    genuine = np.full(N + 1, np.nan)
    genuine[2:] = residual[1:-1] - residual[2:]
    neg = genuine[2:]
    if np.any(neg < -NEGATIVE_SLACK):
        k = 2 + int(np.argmin(neg))
        raise CorrelationError(f"I^{k} = {neg.min():.3e} is negative beyond round-off")
    n_clipped = int(np.sum(neg < 0))
    if n_clipped:
        log.debug("%d genuine correlations negative within slack", n_clipped)
    return CorrelationSpectrum(N, residual, genuine, ent, n_clipped)
