"""Can the malicious agent identify the weight pair (A, b) from data?

The answer is governed by the rank of the subspace reachable from the
initial state and the input column.  When that subspace is deficient, a
second stochastic weight pair reproducing every trajectory exists, and we
construct one explicitly as a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CertificateNotConstructible
from .weights import AdjacencyPartition

# Singular values below RANK_RTOL * sigma_max count as zero.
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class DiscoverabilityVerdict:
    span_rank: int
    controllability_rank: int
    discoverable: bool
    certificate: tuple[np.ndarray, np.ndarray] | None = None
    note: str | None = None


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def _krylov(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Columns v, Av, ..., A^{d-1}v where d is the state dimension."""
    d = A.shape[0]
    cols = [v]
    for _ in range(d - 1):
        cols.append(A @ cols[-1])
    return np.column_stack(cols)


def controllability_rank(p: AdjacencyPartition) -> int:
    """Rank of (b, Ab, ..., A^{n-2}b)."""
    return _rank(_krylov(p.A, p.b))


def span_generators(p: AdjacencyPartition, x0: np.ndarray) -> np.ndarray:
    """Matrix whose columns are 1, b, Ab, ..., A^{n-2}b, x0, Ax0, ..., A^{n-2}x0."""
    x0 = np.asarray(x0, dtype=float)
    d = p.A.shape[0]
    if x0.shape != (d,):
        raise ValueError(f"initial state must have length {d}, got shape {x0.shape}")
    return np.column_stack([np.ones(d), _krylov(p.A, p.b), _krylov(p.A, x0)])


def discoverability_span_rank(p: AdjacencyPartition, x0: np.ndarray) -> DiscoverabilityVerdict:
    """Rank verdict: the pair (A, b) is identifiable from trajectories
    started at x0 exactly when the generator span fills the state space."""
    srank = _rank(span_generators(p, x0))
    return DiscoverabilityVerdict(
        span_rank=srank,
        controllability_rank=controllability_rank(p),
        discoverable=(srank == p.A.shape[0]),
    )


def nondiscoverability_certificate(
    p: AdjacencyPartition, x0: np.ndarray
) -> tuple[np.ndarray, np.ndarray] | None:
    """A second stochastic pair (A*, b) indistinguishable from (A, b).

    Returns None when the span is full (the pair is identifiable).  When
    the span is deficient, one strictly positive row of A is shifted along
    a direction orthogonal to the span, scaled to keep the row positive;
    since the orthogonal direction annihilates every reachable state, both
    pairs generate identical trajectories for every input sequence.
    """
    S = span_generators(p, x0)
    d = p.A.shape[0]
    U, s, _ = np.linalg.svd(S)
    rank = 0 if s[0] == 0.0 else int(np.sum(s > RANK_RTOL * s[0]))
    if rank == d:
        return None

    rows = np.where(np.all(p.A > 0.0, axis=1))[0]
    if rows.size == 0:
        raise CertificateNotConstructible(
            "span is deficient but no strictly positive row of A is available to perturb"
        )
    row = int(rows[0])

    c = U[:, rank]
    c = c / np.max(np.abs(c))
    nz = np.nonzero(c)[0]
    if c[nz[0]] < 0:
        c = -c
    # Half the smallest entry of the perturbed row keeps it strictly positive.
    eps = 0.5 * float(np.min(p.A[row]))
    A_star = p.A.copy()
    A_star[row] = A_star[row] - eps * c
    return A_star, p.b.copy()


def analyze(p: AdjacencyPartition, x0: np.ndarray) -> DiscoverabilityVerdict:
    """Full verdict: ranks plus a certificate when one is constructible."""
    base = discoverability_span_rank(p, x0)
    if base.discoverable:
        return base
    try:
        cert = nondiscoverability_certificate(p, x0)
    except CertificateNotConstructible as exc:
        return DiscoverabilityVerdict(
            base.span_rank, base.controllability_rank, False, None, note=str(exc)
        )
    return DiscoverabilityVerdict(
        base.span_rank, base.controllability_rank, False, cert
    )
