"""Weighted Fekete configurations by greedy initialization plus single-point
exchange search, weighted k-th order diameters, and transfinite-diameter
extrapolation.

The exchange engine works on a row-scaled weighted design matrix
B[i, c] = e_i(z_c) e^{-kQ(z_c)} / s_i over all candidates. Replacing the
j-th point of the current configuration by candidate c multiplies the
determinant by X[j, c] where X = V^{-1} B, so one triangular solve scores
every exchange at once; accepted exchanges update X by a rank-one formula
and each sweep refactorizes from scratch to control drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import CompactSetSpec, DiscreteMeasure, Weight, weak_star_distance
from .polynomials import Configuration, MonomialBasis, monomial_basis

__all__ = [
    "FeketeReport",
    "ExchangeResult",
    "TransfiniteDiameterResult",
    "EmpiricalConvergenceTable",
    "exchange_search",
    "weighted_design",
    "leja_sequence",
    "fekete_exchange",
    "fekete_points",
    "transfinite_diameter",
    "fekete_empirical_convergence",
    "write_fekete_csv",
]

EXCHANGE_TOL = 1e-12


def weighted_design(spec: CompactSetSpec, Q: Weight, k: int,
                    columns: np.ndarray | None = None):
    """Row-scaled weighted design matrix B (N_basis, M) over the candidates.

    Returns (B, log_scale_sum, basis, candidates). ``columns`` restricts the
    basis to a subset of monomials (used for rank-deficient grids).
    """
    candidates = spec.candidates
    basis = monomial_basis(spec.ambient_n, k)
    V = basis.evaluate(candidates)  # (M, N)
    if columns is not None:
        V = V[:, columns]
    if k > 0 and not Q.is_zero():
        qvals = Q(candidates)
        with np.errstate(over="ignore"):
            V = V * np.exp(-k * qvals)[:, None]
    B = V.T.copy()
    scales = np.abs(B).max(axis=1)
    if (scales == 0).any():
        raise ValueError("a basis function vanishes on every candidate")
    B /= scales[:, None]
    return B, float(np.log(scales).sum()), basis, candidates


def _logabsdet(V: np.ndarray) -> float:
    sign, val = np.linalg.slogdet(V)
    return float(val) if sign != 0 and np.isfinite(val) else -math.inf


def _exchange_update(X: np.ndarray, j: int, c: int) -> None:
    """Rank-one update of X = V^{-1}B after replacing point j by candidate c."""
    u = X[:, c].copy()
    row_j = X[j, :].copy()
    X -= np.outer(u, row_j) / u[j]
    X[j, :] = row_j / u[j]


@dataclass
class ExchangeResult:
    indices: np.ndarray
    log_det: float  # scaled units; add the design's log_scale_sum for true value
    exchanges: int
    sweeps: int
    converged: bool
    sweep_objectives: list[float]
    final_ratios: np.ndarray | None = None


def exchange_search(B: np.ndarray, start_indices: np.ndarray, *,
                    max_sweeps: int = 50, tol: float = EXCHANGE_TOL,
                    adjust_fn=None, track_ratios: bool = False,
                    exchanges_per_sweep: int | None = None) -> ExchangeResult:
    """Best-exchange local search maximizing log|det B[:, indices]|.

    ``adjust_fn(indices) -> (N, M)`` adds a score term to each candidate
    exchange (used for neighborhood-constrained searches); convergence means
    no exchange improves the (adjusted) objective by more than ``tol``.
    """
    N, M = B.shape
    idx = np.asarray(start_indices, dtype=int).copy()
    if idx.shape != (N,):
        raise ValueError(f"start must provide {N} candidate indices")
    cap = exchanges_per_sweep or max(32, 4 * N)
    total_exchanges = 0
    converged = False
    sweep_objectives: list[float] = []
    final_ratios = None
    log_det = _logabsdet(B[:, idx])
    if not math.isfinite(log_det):
        raise ValueError("degenerate start configuration")
    for sweep in range(1, max_sweeps + 1):
        V = B[:, idx]
        log_det = _logabsdet(V)
        sweep_objectives.append(log_det)
        X = sla.solve(V, B, check_finite=False)
        improved_in_sweep = False
        for _ in range(cap):
            with np.errstate(divide="ignore"):
                score = np.log(np.abs(X))
            score[np.arange(N), idx] = 0.0  # self-exchange is a no-op
            if adjust_fn is not None:
                score = score + adjust_fn(idx)
            j, c = np.unravel_index(np.argmax(score), score.shape)
            gain = score[j, c]
            if not (gain > tol) or c in idx:
                break
            log_det += float(np.log(np.abs(X[j, c])))
            _exchange_update(X, j, c)
            idx[j] = c
            total_exchanges += 1
            improved_in_sweep = True
        if not improved_in_sweep:
            converged = True
            if track_ratios:
                final_ratios = np.abs(X)
            break
    log_det = _logabsdet(B[:, idx])
    return ExchangeResult(idx, log_det, total_exchanges, sweep, converged,
                          sweep_objectives, final_ratios)


def greedy_rows(B: np.ndarray) -> np.ndarray:
    """Leja-style greedy pivot rows of the design matrix: at step t choose the
    candidate maximizing the incremental determinant growth (ties by index)."""
    N, M = B.shape
    R = B.T.copy()  # (M, N): rows candidates, columns basis
    idx = np.empty(N, dtype=int)
    for t in range(N):
        c = int(np.argmax(np.abs(R[:, t])))
        pivot = R[c, t]
        if abs(pivot) < 1e-300:
            raise ValueError("too few independent candidates for this degree")
        idx[t] = c
        if t + 1 < N:
            R[:, t + 1:] -= np.outer(R[:, t], R[c, t + 1:] / pivot)
        R[c, :] = 0.0  # never re-pick the same candidate
    return idx


@dataclass
class FeketeReport:
    """Exchange-search outcome for one degree k."""

    k: int
    config: Configuration
    log_vdm_q: float
    delta_qk: float
    normalized: float
    iterations: int
    converged: bool
    sweep_objectives: list[float] = field(default_factory=list)

    @property
    def N(self) -> int:
        return self.config.N


def _make_report(spec: CompactSetSpec, Q: Weight, k: int,
                 result: ExchangeResult, log_scale: float,
                 candidates: np.ndarray) -> FeketeReport:
    n = spec.ambient_n
    log_vdm_q = result.log_det + log_scale
    config = Configuration(candidates[result.indices], k=k,
                           log_vdm_q=log_vdm_q, weight_hash=Q.weight_hash)
    N = config.N
    if k > 0:
        delta = math.exp(log_vdm_q * (n + 1) / (n * k * N))
        normalized = math.exp(log_vdm_q / (k * N))
    else:
        delta = normalized = math.nan
    return FeketeReport(k, config, log_vdm_q, delta, normalized,
                        result.exchanges, result.converged,
                        [v + log_scale for v in result.sweep_objectives])


def leja_sequence(spec: CompactSetSpec, Q: Weight, k: int) -> Configuration:
    """Greedy weighted configuration; deterministic given the spec."""
    B, log_scale, basis, candidates = weighted_design(spec, Q, k)
    if candidates.shape[0] < B.shape[0]:
        raise ValueError(f"need at least {B.shape[0]} candidates, have {candidates.shape[0]}")
    idx = greedy_rows(B)
    return Configuration(candidates[idx], k=k)


def fekete_exchange(start: Configuration, spec: CompactSetSpec, Q: Weight,
                    max_sweeps: int = 50) -> FeketeReport:
    """Single-point exchange local search from ``start``; the objective
    log|VDM^Q| is nondecreasing and the search stops at a local maximum."""
    B, log_scale, basis, candidates = weighted_design(spec, Q, start.k)
    idx = _match_indices(start.points, candidates)
    result = exchange_search(B, idx, max_sweeps=max_sweeps)
    return _make_report(spec, Q, start.k, result, log_scale, candidates)


def _match_indices(points: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Map configuration points to candidate indices (nearest match)."""
    idx = np.empty(points.shape[0], dtype=int)
    for i, p in enumerate(points):
        d = np.abs(candidates - p[None, :]).sum(axis=1)
        idx[i] = int(np.argmin(d))
    return idx


def fekete_points(spec: CompactSetSpec, Q: Weight, k: int, *,
                  restarts: int = 3, seed: int = 0,
                  max_sweeps: int = 50) -> FeketeReport:
    """Near-maximal weighted configuration: greedy start plus seeded random
    restarts, best exchange-search result kept."""
    B, log_scale, basis, candidates = weighted_design(spec, Q, k)
    M = candidates.shape[0]
    N = B.shape[0]
    if M < N:
        raise ValueError(f"need at least {N} candidates, have {M}")
    starts = [greedy_rows(B)]
    rng = np.random.default_rng(np.random.SeedSequence([seed, k, 0xFE7E]))
    for _ in range(restarts):
        starts.append(rng.choice(M, size=N, replace=False))
    best: ExchangeResult | None = None
    for s in starts:
        try:
            result = exchange_search(B, s, max_sweeps=max_sweeps)
        except ValueError:
            continue  # degenerate random start
        if best is None or result.log_det > best.log_det:
            best = result
    if best is None:
        raise ValueError("no nondegenerate start configuration found")
    return _make_report(spec, Q, k, best, log_scale, candidates)


@dataclass
class TransfiniteDiameterResult:
    reports: list[FeketeReport]
    extrapolated: float
    monotone: bool
    diffs: np.ndarray

    @property
    def normalized_sequence(self) -> np.ndarray:
        return np.array([r.normalized for r in self.reports])


def richardson_limit(ks: np.ndarray, values: np.ndarray) -> float:
    """Polynomial-in-1/k extrapolation to k = infinity through the last
    (up to three) points, by Lagrange evaluation at 1/k = 0."""
    m = min(3, len(ks))
    x = 1.0 / np.asarray(ks[-m:], dtype=float)
    f = np.asarray(values[-m:], dtype=float)
    total = 0.0
    for i in range(m):
        li = 1.0
        for j in range(m):
            if j != i:
                li *= (0.0 - x[j]) / (x[i] - x[j])
        total += f[i] * li
    return float(total)


def transfinite_diameter(spec: CompactSetSpec, Q: Weight, k_max: int, *,
                         restarts: int = 3, seed: int = 0,
                         max_sweeps: int = 50) -> TransfiniteDiameterResult:
    """Fekete reports for k = 1..k_max plus the extrapolated normalized limit."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    reports = [fekete_points(spec, Q, k, restarts=restarts, seed=seed,
                             max_sweeps=max_sweeps) for k in range(1, k_max + 1)]
    ks = np.array([r.k for r in reports])
    normalized = np.array([r.normalized for r in reports])
    extrapolated = richardson_limit(ks, normalized)
    diffs = np.diff(normalized)
    monotone = bool((diffs <= 0).all() or (diffs >= 0).all())
    return TransfiniteDiameterResult(reports, extrapolated, monotone, diffs)


@dataclass
class EmpiricalConvergenceTable:
    ks: list[int]
    distances: list[float]
    decreasing: bool
    reference: DiscreteMeasure


def fekete_empirical_convergence(spec: CompactSetSpec, Q: Weight, k_max: int, *,
                                 reference: DiscreteMeasure | None = None,
                                 restarts: int = 3, seed: int = 0,
                                 k_min: int = 1) -> EmpiricalConvergenceTable:
    """Moment-metric distances of Fekete empirical measures to the weighted
    equilibrium measure (computed by the energy module when n = 1)."""
    if reference is None:
        if spec.ambient_n != 1:
            raise ValueError("a reference measure is required when n >= 2")
        from .energy import equilibrium_measure
        reference = equilibrium_measure(spec, Q).mu_eq
    ks, distances = [], []
    for k in range(k_min, k_max + 1):
        report = fekete_points(spec, Q, k, restarts=restarts, seed=seed)
        empirical = report.config.empirical_measure()
        ks.append(k)
        distances.append(weak_star_distance(empirical, reference))
    decreasing = len(distances) < 2 or distances[-1] < distances[0]
    return EmpiricalConvergenceTable(ks, distances, decreasing, reference)


def write_fekete_csv(reports: list[FeketeReport], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("k,N_k,log_vdm_q,delta_qk,normalized,iterations\n")
        for r in reports:
            fh.write(f"{r.k},{r.N},{r.log_vdm_q:.17g},{r.delta_qk:.17g},"
                     f"{r.normalized:.17g},{r.iterations}\n")
