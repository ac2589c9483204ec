"""Univariate logarithmic potential theory: potentials, (weighted) energies,
equilibrium measures on candidate grids, the rate function, and the
monotone-weight approximation pipeline.

Continuum-mode energies treat each grid atom as a uniform mini-segment of
its cell length h; the exact self-energy of such a segment is
(3/2 - log h) per unit mass^2, which replaces the undefined diagonal of the
logarithmic kernel and makes the discretization second-order accurate.

The equilibrium problem is the convex QP
    minimize m^T A m + 2 q^T m   over the probability simplex,
with A the continuum-mode kernel and q the weight on the grid. It is solved
by accelerated projected gradient with simplex projection, then polished by
an equality-constrained KKT solve on the detected support. The Robin-type
constant F is the simplex multiplier: p + Q = F on the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import CompactSetSpec, DiscreteMeasure, Weight, as_points, grid_cell_sizes

__all__ = [
    "EquilibriumResult",
    "LastStepTable",
    "IdentityReport",
    "log_potential",
    "energy",
    "weighted_energy",
    "kernel_matrix",
    "equilibrium_measure",
    "equilibrium_from_values",
    "rate_function",
    "w_energy_identity_check",
    "monotone_weight_approximation",
    "simplex_projection",
    "arcsine_measure",
    "semicircle_measure",
    "uniform_measure",
    "arcsine_cdf",
    "semicircle_cdf",
    "cdf_sup_distance",
]


def _require_univariate(mu_or_n) -> None:
    n = mu_or_n.n if hasattr(mu_or_n, "n") else int(mu_or_n)
    if n != 1:
        raise ValueError("energy computations are univariate (n = 1)")


# ---------------------------------------------------------------------------
# Potentials and energies
# ---------------------------------------------------------------------------

def log_potential(mu: DiscreteMeasure, z) -> np.ndarray | float:
    """p_mu(z) = integral of log(1/|z - zeta|) dmu; +inf at atoms of positive mass."""
    _require_univariate(mu)
    pts = as_points(z)[:, 0]
    atoms = mu.atoms[:, 0]
    with np.errstate(divide="ignore"):
        logd = np.log(np.abs(pts[:, None] - atoms[None, :]))
    hit = np.isneginf(logd) & (mu.masses[None, :] > 0)
    contrib = np.where(np.isneginf(logd), 0.0, logd) * mu.masses[None, :]
    out = -contrib.sum(axis=1)
    out[hit.any(axis=1)] = math.inf
    scalar = np.asarray(z).ndim == 0
    return float(out[0]) if scalar else out


def kernel_matrix(atoms: np.ndarray, cell_sizes: np.ndarray) -> np.ndarray:
    """Continuum-mode logarithmic kernel: A_ij = log 1/|z_i - z_j| off the
    diagonal, A_ii = 3/2 - log h_i (exact uniform-segment self-energy)."""
    z = as_points(atoms)[:, 0]
    cells = np.asarray(cell_sizes, dtype=float)
    if (cells <= 0).any():
        raise ValueError("continuum mode needs positive cell sizes")
    with np.errstate(divide="ignore"):
        A = -np.log(np.abs(z[:, None] - z[None, :]))
    np.fill_diagonal(A, 1.5 - np.log(cells))
    if np.isinf(A).any():
        raise ValueError("coincident distinct atoms in continuum mode")
    return A


def energy(mu: DiscreteMeasure, mode: str = "offdiag",
           cell_sizes: np.ndarray | None = None) -> float:
    """Logarithmic energy I(mu).

    offdiag: sum over distinct atom pairs only, so I(point mass) = 0 by the
    empty-sum convention (continuum semantics would give +inf).
    continuum: adds the per-cell self-energy mass^2 (3/2 - log h); requires
    grid metadata via mu.cell_sizes or the cell_sizes argument.
    """
    _require_univariate(mu)
    z = mu.atoms[:, 0]
    m = mu.masses
    if mode == "offdiag":
        with np.errstate(divide="ignore"):
            logd = np.log(np.abs(z[:, None] - z[None, :]))
        np.fill_diagonal(logd, 0.0)
        clash = np.isneginf(logd) & np.outer(m > 0, m > 0)
        if clash.any():
            return math.inf
        logd[np.isneginf(logd)] = 0.0
        return float(-(m @ logd @ m))
    if mode == "continuum":
        cells = cell_sizes if cell_sizes is not None else mu.cell_sizes
        if cells is None:
            raise ValueError("continuum mode requires cell sizes (grid spacing)")
        A = kernel_matrix(mu.atoms, cells)
        return float(m @ A @ m)
    raise ValueError(f"unknown energy mode {mode!r}")


def weighted_energy(mu: DiscreteMeasure, Q: Weight, mode: str = "offdiag",
                    cell_sizes: np.ndarray | None = None) -> float:
    """I^Q(mu) = I(mu) + 2 integral Q dmu."""
    base = energy(mu, mode, cell_sizes)
    qint = mu.integrate(Q(mu.atoms))
    return base + 2.0 * qint


# ---------------------------------------------------------------------------
# Equilibrium measure QP
# ---------------------------------------------------------------------------

def simplex_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass
class EquilibriumResult:
    """Discrete weighted equilibrium measure and its KKT certificates.

    extremal_values holds V(z) = F - p(z) on the grid; kkt_residual bounds
    both the support-equality and grid-inequality violations of p + Q >= F.
    """

    mu_eq: DiscreteMeasure
    F: float
    IQ_min: float
    extremal_values: np.ndarray
    kkt_residual: float
    converged: bool
    iterations: int
    grid: np.ndarray
    q_values: np.ndarray
    cell_sizes: np.ndarray
    kernel: np.ndarray = field(repr=False, default=None)

    def potential_on_grid(self) -> np.ndarray:
        return self.kernel @ self.mu_eq.masses

    def to_json_dict(self) -> dict:
        d = self.mu_eq.to_json_dict()
        d.update(F=self.F, IQ_min=self.IQ_min, kkt_residual=self.kkt_residual)
        return d


def _kkt_residual(A, q, m, support_mask):
    g = A @ m + q  # p + Q on the grid
    F = float(np.median(g[support_mask]))
    eq_res = float(np.abs(g[support_mask] - F).max()) if support_mask.any() else math.inf
    slack = g - F
    ineq_res = float(max(0.0, -(slack.min())))
    return F, max(eq_res, ineq_res)


def _polish(A, q, masses, support_tol):
    """Equality-constrained KKT solve on the detected support; shrinks the
    support while the solve produces negative masses."""
    M = len(masses)
    support = masses > support_tol
    for _ in range(40):
        S = np.flatnonzero(support)
        if len(S) == 0:
            return None
        k = len(S)
        KKT = np.zeros((k + 1, k + 1))
        KKT[:k, :k] = 2.0 * A[np.ix_(S, S)]
        KKT[:k, k] = -1.0
        KKT[k, :k] = 1.0
        rhs = np.concatenate([-2.0 * q[S], [1.0]])
        try:
            sol = sla.solve(KKT, rhs, check_finite=False)
        except sla.LinAlgError:
            return None
        mS = sol[:k]
        if (mS >= -1e-14).all():
            out = np.zeros(M)
            out[S] = np.maximum(mS, 0.0)
            out /= out.sum()
            return out
        support[S[mS < -1e-14]] = False
    return None


def equilibrium_from_values(atoms: np.ndarray, q_values: np.ndarray,
                            cell_sizes: np.ndarray, *, kkt_tol: float = 1e-7,
                            max_iter: int = 100_000) -> EquilibriumResult:
    """Solve the discrete weighted equilibrium problem for tabulated Q values."""
    atoms = as_points(atoms)
    q_all = np.asarray(q_values, dtype=float)
    finite = np.isfinite(q_all)
    if not finite.any():
        raise ValueError("weight is +inf on the whole grid")
    z = atoms[finite]
    q = q_all[finite]
    cells = np.asarray(cell_sizes, dtype=float)[finite]
    A = kernel_matrix(z, cells)
    M = len(q)

    # Lipschitz constant of the gradient from the dominant eigenvalue
    rng = np.random.default_rng(7)
    v = rng.standard_normal(M)
    v /= np.linalg.norm(v)
    lam = 1.0
    for _ in range(60):
        w = A @ v
        lam = float(np.linalg.norm(w))
        if lam == 0:
            break
        v = w / lam
    step = 1.0 / (2.0 * max(lam, 1e-12))

    w0 = np.exp(-(q - q.min()))
    m = simplex_projection(w0 / w0.sum())
    y = m.copy()
    t = 1.0
    obj = m @ A @ m + 2 * q @ m
    best = (m.copy(), math.inf)
    iterations = 0
    next_check = 50
    next_polish = 200
    done = False
    for it in range(1, max_iter + 1):
        iterations = it
        grad = 2.0 * (A @ y + q)
        m_new = simplex_projection(y - step * grad)
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = m_new + ((t - 1.0) / t_new) * (m_new - m)
        obj_new = m_new @ A @ m_new + 2 * q @ m_new
        if obj_new > obj:  # function restart
            y = m_new.copy()
            t_new = 1.0
        m, t, obj = m_new, t_new, obj_new
        if it >= next_check:
            next_check = it + max(50, it // 4)
            support = m > max(1e-12, m.max() * 1e-9)
            F, res = _kkt_residual(A, q, m, support)
            if res < best[1]:
                best = (m.copy(), res)
            if res < kkt_tol:
                done = True
            elif it >= next_polish:
                # an exact support solve usually finishes long before the
                # first-order iteration reaches tight tolerances
                next_polish = int(it * 2.2)
                polished = _polish(A, q, m, support_tol=max(1e-12, m.max() * 1e-7))
                if polished is not None:
                    Fp, resp = _kkt_residual(A, q, polished, polished > 0)
                    if resp < best[1]:
                        best = (polished, resp)
                    if resp < kkt_tol:
                        done = True
        if done:
            break

    if best[1] < math.inf:
        m = best[0]
    support = m > max(1e-12, m.max() * 1e-9)
    F, res = _kkt_residual(A, q, m, support)
    if res >= kkt_tol:
        polished = _polish(A, q, m, support_tol=max(1e-12, m.max() * 1e-7))
        if polished is not None:
            Fp, resp = _kkt_residual(A, q, polished, polished > 0)
            if resp < res:
                m, F, res = polished, Fp, resp
    converged = res < kkt_tol

    masses_full = np.zeros(len(q_all))
    masses_full[finite] = m
    mu = DiscreteMeasure(atoms, masses_full, np.asarray(cell_sizes, dtype=float))
    IQ_min = float(m @ A @ m + 2 * q @ m)
    p_full = np.full(len(q_all), math.inf)
    p_full[finite] = A @ m
    extremal = F - p_full
    return EquilibriumResult(mu, F, IQ_min, extremal, res, converged,
                             iterations, atoms, q_all, np.asarray(cell_sizes, float),
                             kernel=_embed_kernel(A, finite, len(q_all)))


def _embed_kernel(A: np.ndarray, finite: np.ndarray, M: int) -> np.ndarray:
    if finite.all():
        return A
    out = np.zeros((M, M))
    idx = np.flatnonzero(finite)
    out[np.ix_(idx, idx)] = A
    return out


def equilibrium_measure(spec: CompactSetSpec, Q: Weight, *, kkt_tol: float = 1e-7,
                        max_iter: int = 100_000) -> EquilibriumResult:
    """Weighted equilibrium measure of the grid K: the I^Q minimizer."""
    _require_univariate(spec.ambient_n)
    grid = spec.candidates
    cells = grid_cell_sizes(spec)
    qvals = Q(grid)
    if not np.isfinite(qvals).any():
        raise ValueError("weight is +inf on every candidate")
    return equilibrium_from_values(grid, qvals, cells, kkt_tol=kkt_tol,
                                   max_iter=max_iter)


def rate_function(mu: DiscreteMeasure, eq: EquilibriumResult, Q: Weight) -> float:
    """Half the excess weighted energy over the equilibrium value:
    (I^Q(mu) - I^Q(mu_eq)) / 2, nonnegative up to solver tolerance."""
    _require_univariate(mu)
    grid = eq.grid[:, 0]
    idx = _match_to_grid(mu.atoms[:, 0], grid)
    cells = eq.cell_sizes[idx]
    iq = weighted_energy(mu, Q, "continuum", cells)
    return 0.5 * (iq - eq.IQ_min)


def _match_to_grid(atoms: np.ndarray, grid: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    idx = np.empty(len(atoms), dtype=int)
    for i, a in enumerate(atoms):
        j = int(np.argmin(np.abs(grid - a)))
        if abs(grid[j] - a) > tol * max(1.0, abs(a)):
            raise ValueError(f"atom {a} does not lie on the candidate grid")
        idx[i] = j
    return idx


# ---------------------------------------------------------------------------
# Identity checks and the monotone-weight pipeline
# ---------------------------------------------------------------------------

@dataclass
class IdentityReport:
    delta_fekete: float
    delta_energy: float
    rel_gap: float
    k_max: int
    IQ_min: float


def w_energy_identity_check(spec: CompactSetSpec, Q: Weight, *, k_max: int = 16,
                            seed: int = 0) -> IdentityReport:
    """Compare the Fekete-side normalized transfinite diameter against the
    energy-side value exp(-I^Q(mu_eq)/2); the two agree in one variable."""
    from .fekete import transfinite_diameter
    eq = equilibrium_measure(spec, Q)
    delta_energy = math.exp(-0.5 * eq.IQ_min)
    td = transfinite_diameter(spec, Q, k_max, seed=seed)
    delta_fekete = td.extrapolated
    rel_gap = abs(delta_fekete - delta_energy) / delta_energy
    return IdentityReport(delta_fekete, delta_energy, rel_gap, k_max, eq.IQ_min)


@dataclass
class LastStepTable:
    """Convergence table for the continuous-majorant approximation of a
    finite-energy measure: weights Q_j decrease to u = -p_mu, and the Robin
    constants, energies, and extremal integrals converge as tabulated."""

    js: list[int]
    F: list[float]
    I_mu_j: list[float]
    int_uj: list[float]
    I_mu: float
    int_u: float

    @property
    def F_gaps(self) -> list[float]:
        return [abs(f) for f in self.F]

    @property
    def I_gaps(self) -> list[float]:
        return [abs(i - self.I_mu) for i in self.I_mu_j]

    @property
    def int_gaps(self) -> list[float]:
        return [abs(v - self.int_u) for v in self.int_uj]


def monotone_weight_approximation(mu: DiscreteMeasure, spec: CompactSetSpec,
                                  j_max: int, *, kkt_tol: float = 1e-7) -> LastStepTable:
    """For mu with finite continuum energy, build continuous weights
    Q_j = max(u, c_j) + 1/j^2 decreasing to u = -p_mu on the grid, solve each
    weighted equilibrium problem, and tabulate F_j, I(mu_j), and the
    extremal integral int u_j dmu_j = F_j - I(mu_j)."""
    _require_univariate(mu)
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    grid = spec.candidates
    cells = grid_cell_sizes(spec)
    idx = _match_to_grid(mu.atoms[:, 0], grid[:, 0])
    masses = np.zeros(len(grid))
    np.add.at(masses, idx, mu.masses)
    mu_grid = DiscreteMeasure(grid, masses, cells)
    A = kernel_matrix(grid, cells)
    I_mu = float(masses @ A @ masses)
    if not math.isfinite(I_mu):
        raise ValueError("mu must have finite continuum energy")
    u = -(A @ masses)
    u_min, u_max = float(u.min()), float(u.max())
    int_u = -I_mu  # integral of u dmu with the same kernel convention
    js, Fs, Is, int_ujs = [], [], [], []
    for j in range(1, j_max + 1):
        c_j = u_min + (u_max - u_min) / j
        q_j = np.maximum(u, c_j) + 1.0 / j**2
        eq = equilibrium_from_values(grid, q_j, cells, kkt_tol=kkt_tol)
        m_j = eq.mu_eq.masses
        I_j = float(m_j @ A @ m_j)
        js.append(j)
        Fs.append(eq.F)
        Is.append(I_j)
        int_ujs.append(eq.F - I_j)
    return LastStepTable(js, Fs, Is, int_ujs, I_mu, int_u)


# ---------------------------------------------------------------------------
# Classical densities on grids and CDF comparison
# ---------------------------------------------------------------------------

def _interval_hull(spec: CompactSetSpec) -> tuple[float, float]:
    x = spec.candidates[:, 0].real
    return float(x.min()), float(x.max())


def _cells_to_edges(x: np.ndarray, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(x)
    xs, cs = x[order], cells[order]
    left = xs - cs / 2
    right = xs + cs / 2
    # endpoint cells are half-width and one-sided
    left[0], right[0] = xs[0], xs[0] + cs[0]
    left[-1], right[-1] = xs[-1] - cs[-1], xs[-1]
    return order, np.stack([left, right])


def _cdf_measure(spec: CompactSetSpec, cdf) -> DiscreteMeasure:
    grid = spec.candidates
    x = grid[:, 0].real
    cells = grid_cell_sizes(spec)
    order, edges = _cells_to_edges(x, cells)
    masses_sorted = np.maximum(cdf(edges[1]) - cdf(edges[0]), 0.0)
    masses = np.empty_like(masses_sorted)
    masses[order] = masses_sorted
    return DiscreteMeasure.from_unnormalized(grid, masses, cells)


def arcsine_cdf(x: np.ndarray, a: float = -1.0, b: float = 1.0) -> np.ndarray:
    t = np.clip((2.0 * np.asarray(x, float) - (a + b)) / (b - a), -1.0, 1.0)
    return 0.5 + np.arcsin(t) / np.pi


def semicircle_cdf(x: np.ndarray, radius: float = math.sqrt(2.0)) -> np.ndarray:
    t = np.clip(np.asarray(x, float), -radius, radius)
    return 0.5 + (t * np.sqrt(radius**2 - t**2)
                  + radius**2 * np.arcsin(t / radius)) / (math.pi * radius**2)


def arcsine_measure(spec: CompactSetSpec) -> DiscreteMeasure:
    """Cell-integrated arcsine (unweighted equilibrium) measure on an
    interval grid."""
    a, b = _interval_hull(spec)
    return _cdf_measure(spec, lambda x: arcsine_cdf(x, a, b))


def semicircle_measure(spec: CompactSetSpec, radius: float = math.sqrt(2.0)) -> DiscreteMeasure:
    """Cell-integrated semicircle density of the given support radius."""
    return _cdf_measure(spec, lambda x: semicircle_cdf(x, radius))


def uniform_measure(spec: CompactSetSpec) -> DiscreteMeasure:
    """Length-proportional masses: the uniform density on the grid hull
    (equal masses on a circle grid)."""
    grid = spec.candidates
    cells = grid_cell_sizes(spec)
    if (cells <= 0).any():
        return DiscreteMeasure.from_points(grid)
    return DiscreteMeasure.from_unnormalized(grid, cells, cells)


def cdf_sup_distance(mu: DiscreteMeasure, cdf) -> float:
    """Sup distance between the atomic CDF and a reference CDF, compared at
    cell right-boundaries (each atom represents its grid cell)."""
    _require_univariate(mu)
    x = mu.atoms[:, 0].real
    order = np.argsort(x)
    xs = x[order]
    cum = np.cumsum(mu.masses[order])
    if mu.cell_sizes is not None:
        cells = mu.cell_sizes[order]
        _, edges = _cells_to_edges(xs, cells)
        ref = cdf(edges[1])
    else:
        ref = cdf(xs)
    return float(np.abs(cum - ref).max())
