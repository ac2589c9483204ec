"""Determinantal ensembles on discrete supports: exact partition functions,
exact projection-DPP sampling, Metropolis sampling, the tail-bound check,
and the pushforward to empirical measures.

With a discrete base measure the partition function is exact:
Z_k = N_k! det(Gram), so the ensemble's normalization never relies on Monte
Carlo. The exact sampler draws from the projection kernel by the sequential
conditional algorithm on the feature matrix Phi[z, j] =
sqrt(mass_z) e^{-kQ(z)} p_j(z), whose columns are orthonormal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .core import DiscreteMeasure, Weight
from .fekete import _exchange_update, greedy_rows
from .polynomials import (
    Configuration,
    gram_matrix,
    log_abs_vdm_batch,
    monomial_basis,
    orthonormal_system,
)

__all__ = [
    "PartitionFunction",
    "EnsembleSample",
    "TailBoundReport",
    "partition_function",
    "dpp_feature_matrix",
    "dpp_intensity",
    "sample_dpp",
    "sample_mcmc",
    "tail_bound_check",
    "pushforward_sigma_k",
    "save_sample_jsonl",
    "load_sample_jsonl",
    "write_partition_csv",
]

#: target entries per work chunk in the batched sampler
_CHUNK_BUDGET = 2_000_000


@dataclass
class PartitionFunction:
    """Exact normalization of the degree-k ensemble: log Z = log N! + logdet G."""

    k: int
    N: int
    log_Z: float
    normalized: float

    @classmethod
    def from_parts(cls, k: int, N: int, log_factorial: float, log_det_gram: float):
        log_Z = log_factorial + log_det_gram
        if k > 0 and math.isfinite(log_Z):
            normalized = math.exp(log_Z / (2.0 * k * N))
        else:
            normalized = math.nan if k == 0 else 0.0
        return cls(k, N, log_Z, normalized)


def partition_function(nu: DiscreteMeasure, Q: Weight, k: int) -> PartitionFunction:
    """Z_k = integral of |VDM^Q|^2 over nu^(N_k), computed as N_k! det(Gram)."""
    basis = monomial_basis(nu.n, k)
    G = gram_matrix(nu, Q, k, basis)
    sign, logdet = np.linalg.slogdet(G)
    log_det = float(logdet) if sign.real > 0 and np.isfinite(logdet) else -math.inf
    return PartitionFunction.from_parts(k, basis.N, float(gammaln(basis.N + 1)), log_det)


@dataclass
class EnsembleSample:
    """A batch of configurations drawn from the degree-k ensemble.

    atom_indices rows index into the base measure's atoms; log_vdm_q caches
    the weighted log-VDM of every draw. ``configurations`` materializes
    Configuration objects on demand.
    """

    k: int
    nu: DiscreteMeasure
    atom_indices: np.ndarray  # (S, N) int
    log_vdm_q: np.ndarray  # (S,)
    sampler: str
    seed: int
    tasks: int = 1
    acceptance_rate: float | None = None
    nu_id: str = ""
    q_id: str = ""
    _configs: list | None = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return self.atom_indices.shape[0]

    @property
    def N(self) -> int:
        return self.atom_indices.shape[1]

    @property
    def configurations(self) -> list[Configuration]:
        if self._configs is None:
            self._configs = [
                Configuration(self.nu.atoms[row], k=self.k,
                              log_vdm_q=float(lv), weight_hash=self.q_id)
                for row, lv in zip(self.atom_indices, self.log_vdm_q)
            ]
        return self._configs


def dpp_feature_matrix(nu: DiscreteMeasure, Q: Weight, k: int) -> np.ndarray:
    """Feature matrix Phi (M, N) with orthonormal columns; the projection
    kernel is K(z, w) = Phi Phi^H. Raises when the Gram is rank-deficient."""
    sys = orthonormal_system(nu, Q, k)
    N = monomial_basis(nu.n, k).N
    if sys.rank != N:
        raise ValueError(
            f"rank-deficient kernel: Gram rank {sys.rank} < N_k = {N}; "
            "the ensemble is not defined on this support"
        )
    P = sys.evaluate(nu.atoms)  # (M, N)
    if k > 0:
        with np.errstate(over="ignore"):
            damp = np.exp(-k * Q(nu.atoms))
        P = P * damp[:, None]
    return P * np.sqrt(nu.masses)[:, None]


def dpp_intensity(nu: DiscreteMeasure, Q: Weight, k: int) -> np.ndarray:
    """1-point inclusion intensities K(z,z) mass(z); sums to N_k exactly."""
    Phi = dpp_feature_matrix(nu, Q, k)
    return (np.abs(Phi) ** 2).sum(axis=1)


def _chunk_size(M: int, N: int) -> int:
    return max(1, _CHUNK_BUDGET // max(1, M * N))


def _sample_dpp_chunk(Phi: np.ndarray, count: int, rng) -> np.ndarray:
    """Exact sequential sampler for the projection DPP, vectorized over a
    batch of draws."""
    M, N = Phi.shape
    B = np.broadcast_to(Phi, (count, M, N)).copy()
    chosen = np.empty((count, N), dtype=int)
    rows = np.arange(count)
    for t in range(N):
        probs = (np.abs(B) ** 2).sum(axis=2)  # (S, M)
        totals = probs.sum(axis=1, keepdims=True)
        u = rng.random((count, 1)) * totals
        idx = (np.cumsum(probs, axis=1) < u).sum(axis=1)
        idx = np.minimum(idx, M - 1)
        chosen[:, t] = idx
        v = B[rows, idx, :]  # (S, N)
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        u_dir = v / norms
        proj = np.einsum("smn,sn->sm", B, u_dir.conj())
        B -= proj[:, :, None] * u_dir[:, None, :]
    return chosen


def sample_dpp(nu: DiscreteMeasure, Q: Weight, k: int, count: int, seed: int,
               tasks: int = 1) -> EnsembleSample:
    """Exact draws from the degree-k determinantal ensemble.

    Reproducible for a fixed (seed, tasks) pair: each task consumes its own
    counter-split substream and the chunking is a deterministic function of
    the support size.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    Phi = dpp_feature_matrix(nu, Q, k)
    M, N = Phi.shape
    streams = np.random.SeedSequence(seed).spawn(tasks)
    per_task = [count // tasks + (1 if t < count % tasks else 0) for t in range(tasks)]
    pieces = []
    chunk = _chunk_size(M, N)
    for t, (ss, c_task) in enumerate(zip(streams, per_task)):
        rng = np.random.default_rng(ss)
        done = 0
        while done < c_task:
            c = min(chunk, c_task - done)
            pieces.append(_sample_dpp_chunk(Phi, c, rng))
            done += c
    indices = np.concatenate(pieces, axis=0)
    log_vdm = log_abs_vdm_batch(nu.atoms[indices.reshape(-1)].reshape(count, N, nu.n), k, Q)
    return EnsembleSample(k, nu, indices, log_vdm, "dpp_exact", seed, tasks,
                          nu_id=nu.measure_id(), q_id=Q.weight_hash)


def _start_indices(nu: DiscreteMeasure, Q: Weight, k: int) -> np.ndarray:
    """Nondegenerate start for the Metropolis chain via the greedy pivots."""
    basis = monomial_basis(nu.n, k)
    V = basis.evaluate(nu.atoms)
    if k > 0:
        with np.errstate(over="ignore"):
            V = V * np.exp(-k * Q(nu.atoms))[:, None]
    V = V * (nu.masses > 0)[:, None]
    B = V.T.copy()
    scales = np.abs(B).max(axis=1)
    if (scales <= 0).any():
        raise ValueError("no nondegenerate start configuration with positive mass")
    return greedy_rows(B / scales[:, None])


def sample_mcmc(nu: DiscreteMeasure, Q: Weight, k: int, count: int,
                burn_in: int = 1000, thin: int = 10, seed: int = 0,
                start: np.ndarray | None = None) -> EnsembleSample:
    """Metropolis chain with single-point uniform-replacement proposals,
    reversible for the ensemble restricted to the support of nu."""
    if count < 1 or thin < 1 or burn_in < 0:
        raise ValueError("bad chain parameters")
    basis = monomial_basis(nu.n, k)
    N = basis.N
    M = len(nu)
    V_all = basis.evaluate(nu.atoms)
    if k > 0:
        with np.errstate(over="ignore"):
            V_all = V_all * np.exp(-k * Q(nu.atoms))[:, None]
    B = V_all.T.copy()
    scales = np.abs(B).max(axis=1)
    if (scales <= 0).any():
        raise ValueError("a basis function vanishes on the whole support")
    B /= scales[:, None]
    with np.errstate(divide="ignore"):
        log_mass = np.log(nu.masses)

    idx = np.asarray(start, dtype=int) if start is not None else _start_indices(nu, Q, k)
    sign, logdet = np.linalg.slogdet(B[:, idx])
    if sign == 0 or not np.isfinite(logdet) or not np.isfinite(log_mass[idx]).all():
        raise ValueError("start configuration has zero probability")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    X = np.linalg.solve(B[:, idx], B)
    steps = burn_in + count * thin
    positions = rng.integers(0, N, size=steps)
    proposals_c = rng.integers(0, M, size=steps)
    log_us = np.log(rng.random(size=steps))
    kept = np.empty((count, N), dtype=int)
    accepted = 0
    since_refactor = 0
    out = 0
    for s in range(steps):
        j = positions[s]
        c = proposals_c[s]
        if c in idx:
            pass  # duplicate point makes the VDM vanish; always rejected
        else:
            ratio = X[j, c]
            log_alpha = 2.0 * math.log(abs(ratio)) + log_mass[c] - log_mass[idx[j]] \
                if ratio != 0 else -math.inf
            if log_alpha >= 0 or log_us[s] < log_alpha:
                _exchange_update(X, j, c)
                idx[j] = c
                accepted += 1
                since_refactor += 1
                if since_refactor >= 64:
                    X = np.linalg.solve(B[:, idx], B)
                    since_refactor = 0
        if s >= burn_in and (s - burn_in + 1) % thin == 0:
            kept[out] = idx
            out += 1
    indices = kept[:out]
    log_vdm = log_abs_vdm_batch(nu.atoms[indices.reshape(-1)].reshape(out, N, nu.n), k, Q)
    return EnsembleSample(k, nu, indices, log_vdm, "mcmc", seed,
                          acceptance_rate=accepted / steps,
                          nu_id=nu.measure_id(), q_id=Q.weight_hash)


@dataclass
class TailBoundReport:
    k: int
    N: int
    eta: float
    delta_bar: float
    threshold_log: float
    empirical_fraction: float
    mc_stderr: float
    bound: float
    passed: bool


def tail_bound_check(sample: EnsembleSample, eta: float, delta_bar: float) -> TailBoundReport:
    """Empirical mass of configurations with |VDM^Q|^2 < (delta_bar - eta)^{2kN},
    against the geometric bound (1 - eta/(2 delta_bar))^{2kN}."""
    if not (0 < eta < delta_bar):
        raise ValueError("need 0 < eta < delta_bar")
    k, N = sample.k, sample.N
    threshold_log = k * N * math.log(delta_bar - eta)  # on log|VDM^Q|
    outside = sample.log_vdm_q < threshold_log
    frac = float(outside.mean())
    stderr = math.sqrt(max(frac * (1 - frac), 1e-300) / sample.count)
    bound = (1.0 - eta / (2.0 * delta_bar)) ** (2 * k * N)
    return TailBoundReport(k, N, eta, delta_bar, threshold_log, frac, stderr,
                           bound, frac <= bound + 2 * stderr)


def pushforward_sigma_k(sample: EnsembleSample) -> list[DiscreteMeasure]:
    """Uniform empirical measure of each configuration (the push to M(K))."""
    return [DiscreteMeasure.from_points(sample.nu.atoms[row])
            for row in sample.atom_indices]


# ---------------------------------------------------------------------------
# Archives
# ---------------------------------------------------------------------------

def save_sample_jsonl(sample: EnsembleSample, path) -> None:
    with open(path, "w", newline="") as fh:
        for row in sample.atom_indices:
            pts = sample.nu.atoms[row]
            entry = {"k": sample.k, "seed": sample.seed,
                     "points": [[z.real, z.imag] for z in pts[:, 0]] if sample.nu.n == 1
                     else [[[z.real, z.imag] for z in p] for p in pts]}
            fh.write(json.dumps(entry) + "\n")


def load_sample_jsonl(path) -> list[Configuration]:
    configs = []
    with open(path) as fh:
        for line in fh:
            entry = json.loads(line)
            pts = entry["points"]
            if pts and isinstance(pts[0][0], list):
                points = [[complex(re, im) for re, im in p] for p in pts]
            else:
                points = [complex(re, im) for re, im in pts]
            configs.append(Configuration(np.asarray(points, dtype=complex), k=entry["k"]))
    return configs


def write_partition_csv(parts: list[PartitionFunction], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("k,N_k,log_Z_k,normalized\n")
        for p in parts:
            fh.write(f"{p.k},{p.N},{p.log_Z:.17g},{p.normalized:.17g}\n")
