"""Monomial bases, log-domain Vandermonde determinants, Gram matrices,
orthonormal polynomial systems, and weighted Christoffel functions.

All determinant work happens in the log domain: |VDM| overflows doubles
around degree 20 already, while every downstream quantity is a (1/kN)-scaled
logarithm. Monomial columns are rescaled by their max magnitude before
factorization and the scales are added back as log corrections.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
import scipy.linalg as sla

from .core import CompactSetSpec, DiscreteMeasure, Weight, as_points

__all__ = [
    "MonomialBasis",
    "Configuration",
    "OrthonormalSystem",
    "BASIS_SIZE_CAP",
    "PIVOT_FLOOR",
    "monomial_basis",
    "log_abs_vdm",
    "log_abs_vdm_weighted",
    "log_abs_vdm_batch",
    "gram_matrix",
    "orthonormalize",
    "orthonormal_system",
    "christoffel",
    "bm_constant",
]

#: refuse bases larger than this (N_k grows like k^n)
BASIS_SIZE_CAP = 5000
#: pivot magnitudes below this count as a true collision -> log|VDM| = -inf
PIVOT_FLOOR = 1e-300


def _binomial(n: int, k: int) -> int:
    return math.comb(n, k)


@dataclass(frozen=True)
class MonomialBasis:
    """Monomials of degree <= k in n complex variables, graded lex order."""

    n: int
    k: int
    exponents: tuple[tuple[int, ...], ...]

    @property
    def N(self) -> int:
        return len(self.exponents)

    @property
    def degree_sum(self) -> int:
        return sum(sum(e) for e in self.exponents)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Design matrix V with V[j, i] = e_i(points[j]), shape (M, N)."""
        pts = as_points(points)
        if pts.shape[1] != self.n:
            raise ValueError(f"points are in C^{pts.shape[1]}, basis is for C^{self.n}")
        M = pts.shape[0]
        # powers[c][d] = z_c^d for all needed degrees
        max_deg = self.k
        powers = np.ones((self.n, max_deg + 1, M), dtype=complex)
        for c in range(self.n):
            for d in range(1, max_deg + 1):
                powers[c, d] = powers[c, d - 1] * pts[:, c]
        V = np.empty((M, self.N), dtype=complex)
        for i, expo in enumerate(self.exponents):
            col = np.ones(M, dtype=complex)
            for c, d in enumerate(expo):
                if d:
                    col = col * powers[c, d]
            V[:, i] = col
        return V


def monomial_basis(n: int, k: int, cap: int = BASIS_SIZE_CAP) -> MonomialBasis:
    """Graded lexicographic monomial basis; N_k = binomial(n+k, k)."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    N = _binomial(n + k, k)
    if N > cap:
        raise ValueError(f"basis size {N} exceeds cap {cap}")
    exponents: list[tuple[int, ...]] = []
    for total in range(k + 1):
        level = []
        for combo in combinations_with_replacement(range(n), total):
            e = [0] * n
            for v in combo:
                e[v] += 1
            level.append(tuple(e))
        # lexicographic with z1 > z2 > ...: higher exponent on earlier
        # variables comes first
        level.sort(reverse=True)
        exponents.extend(level)
    basis = MonomialBasis(n, k, tuple(exponents))
    assert basis.N == N
    return basis


@dataclass
class Configuration:
    """Ordered tuple of N_k points in C^n with a cached weighted log-VDM.

    Treated as immutable after construction except for the cache fields.
    """

    points: np.ndarray
    k: int
    log_vdm_q: float | None = None
    weight_hash: str | None = None

    def __post_init__(self):
        pts = as_points(self.points)
        expected = _binomial(pts.shape[1] + self.k, self.k)
        if pts.shape[0] != expected:
            raise ValueError(
                f"configuration for (n={pts.shape[1]}, k={self.k}) needs {expected} points, got {pts.shape[0]}"
            )
        pts.setflags(write=False)
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def N(self) -> int:
        return self.points.shape[0]

    def empirical_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure.from_points(self.points)


def _scaled_logabsdet(V: np.ndarray) -> float:
    """log|det V| with per-column max-magnitude scaling, -inf when singular."""
    scales = np.abs(V).max(axis=0)
    if (scales == 0).any() or not np.isfinite(scales).all():
        return -math.inf
    A = V / scales
    with warnings.catch_warnings():
        # a singular factorization is a value (-inf), not an error
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu))
    if (diag < PIVOT_FLOOR).any():
        return -math.inf
    return float(np.log(diag).sum() + np.log(scales).sum())


def log_abs_vdm(config: Configuration) -> float:
    """log |det [e_i(x_j)]| for the monomial basis of degree config.k."""
    basis = monomial_basis(config.n, config.k)
    V = basis.evaluate(config.points)
    return _scaled_logabsdet(V)


def log_abs_vdm_weighted(config: Configuration, Q: Weight) -> float:
    """log |VDM| - k * sum_j Q(x_j); cached on the configuration per weight."""
    if config.log_vdm_q is not None and config.weight_hash == Q.weight_hash:
        return config.log_vdm_q
    qvals = Q(config.points)
    if np.isposinf(qvals).any() and config.k > 0:
        value = -math.inf
    else:
        raw = log_abs_vdm(config)
        value = raw - config.k * float(qvals.sum()) if math.isfinite(raw) else -math.inf
    config.log_vdm_q = value
    config.weight_hash = Q.weight_hash
    return value


def log_abs_vdm_batch(points: np.ndarray, k: int, Q: Weight | None = None) -> np.ndarray:
    """Weighted log-VDM for a batch of configurations, shape (S, N, n) -> (S,).

    Uses batched slogdet on column-scaled design matrices; -inf marks
    singular or weight-annihilated configurations.
    """
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 2:
        pts = pts[:, :, None]
    S, N, n = pts.shape
    basis = monomial_basis(n, k)
    if basis.N != N:
        raise ValueError(f"configurations need {basis.N} points for (n={n}, k={k})")
    flat = basis.evaluate(pts.reshape(S * N, n))
    V = flat.reshape(S, N, basis.N)
    scales = np.abs(V).max(axis=1)  # (S, N_basis)
    safe = np.where(scales > 0, scales, 1.0)
    sign, logdet = np.linalg.slogdet(V / safe[:, None, :])
    out = logdet + np.log(safe).sum(axis=1)
    out[(scales == 0).any(axis=1)] = -math.inf
    out[~np.isfinite(logdet)] = -math.inf
    if Q is not None and k > 0:
        qv = Q(pts.reshape(S * N, n)).reshape(S, N)
        with np.errstate(invalid="ignore"):
            out = out - k * qv.sum(axis=1)
        out[np.isnan(out)] = -math.inf
    return out


def _weight_factors(nu: DiscreteMeasure, Q: Weight, k: int) -> np.ndarray:
    """Per-atom e^{-2kQ}; exactly 1 when k = 0 even where Q = +inf."""
    if k == 0:
        return np.ones(len(nu))
    qvals = Q(nu.atoms)
    with np.errstate(over="ignore"):
        return np.exp(-2.0 * k * qvals)


def gram_matrix(nu: DiscreteMeasure, Q: Weight, k: int,
                basis: MonomialBasis | None = None) -> np.ndarray:
    """Hermitian PSD matrix G_ij = sum_atoms mass e_i conj(e_j) e^{-2kQ}."""
    if basis is None:
        basis = monomial_basis(nu.n, k)
    w = nu.masses * _weight_factors(nu, Q, k)
    if not (w > 0).any():
        raise ValueError("weight annihilates all of the measure's mass")
    V = basis.evaluate(nu.atoms)
    G = (V * w[:, None]).T @ V.conj()
    return (G + G.conj().T) / 2


@dataclass
class OrthonormalSystem:
    """Polynomials p_1..p_r orthonormal in L^2(e^{-2kQ} dnu), as coefficient
    rows over the monomial basis. r < N_k signals a rank-deficient Gram."""

    coefficients: np.ndarray  # (r, N) complex
    basis: MonomialBasis
    nu: DiscreteMeasure | None
    weight: Weight | None
    k: int

    @property
    def rank(self) -> int:
        return self.coefficients.shape[0]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values p_j(z), shape (M, r)."""
        V = self.basis.evaluate(points)
        return V @ self.coefficients.T


def orthonormalize(gram: np.ndarray, basis: MonomialBasis | None = None,
                   tol: float = 1e-10) -> OrthonormalSystem:
    """Orthonormalize via pivoted Cholesky of the Gram matrix.

    Coefficients are the inverse conjugate-transpose of the (permuted)
    Cholesky factor; rank deficiency yields an explicit reduced system.
    """
    G = np.asarray(gram, dtype=complex)
    N = G.shape[0]
    if G.shape != (N, N):
        raise ValueError("gram must be square")
    if basis is None:
        basis = monomial_basis(1, N - 1) if _binomial(1 + N - 1, N - 1) == N else None
    scale = float(np.abs(np.diag(G)).max()) or 1.0
    eigs = np.linalg.eigvalsh(G)
    if eigs[0] < -tol * max(scale, 1.0):
        raise ValueError(f"gram is not PSD beyond tolerance (min eig {eigs[0]:g})")
    pstrf, = sla.get_lapack_funcs(("pstrf",), (G,))
    c, piv, rank, info = pstrf(G, tol=scale * 1e-13, lower=1)
    if info < 0:
        raise ValueError("pivoted Cholesky failed")
    rank = int(rank)
    if rank == 0:
        raise ValueError("gram has numeric rank 0")
    L = np.tril(c)[:rank, :rank]
    inv_L = sla.solve_triangular(L, np.eye(rank, dtype=complex), lower=True,
                                 check_finite=False)
    coeffs = np.zeros((rank, N), dtype=complex)
    coeffs[:, piv[:rank] - 1] = inv_L
    return OrthonormalSystem(coeffs, basis, None, None, 0)


def orthonormal_system(nu: DiscreteMeasure, Q: Weight, k: int) -> OrthonormalSystem:
    """Orthonormal polynomials of degree <= k for the weighted measure."""
    basis = monomial_basis(nu.n, k)
    sys = orthonormalize(gram_matrix(nu, Q, k, basis), basis)
    sys.nu = nu
    sys.weight = Q
    sys.k = k
    return sys


def christoffel(z, sys: OrthonormalSystem) -> np.ndarray | float:
    """Weighted kernel diagonal sum_j |p_j(z)|^2 e^{-2kQ(z)} (>= 0)."""
    pts = as_points(z)
    P = sys.evaluate(pts)
    values = (np.abs(P) ** 2).sum(axis=1)
    if sys.weight is not None and sys.k > 0:
        with np.errstate(over="ignore"):
            values = values * np.exp(-2.0 * sys.k * sys.weight(pts))
    scalar = np.asarray(z).ndim == 0 or (np.asarray(z).ndim == 1 and sys.basis.n > 1)
    return float(values[0]) if scalar and values.shape[0] == 1 else values


def bm_constant(spec: CompactSetSpec, nu: DiscreteMeasure, Q: Weight, k: int) -> float:
    """Optimal constant M_k relating sup and L^2 norms of weighted polynomials:
    the max over candidates of sqrt(christoffel)."""
    sys = orthonormal_system(nu, Q, k)
    values = christoffel(spec.candidates, sys)
    return float(np.sqrt(np.max(values)))
