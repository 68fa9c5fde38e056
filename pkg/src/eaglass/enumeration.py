"""Exact enumeration engine for one-, two-, and three-replica systems.

Partition functions, overlap moments, overlap histograms, and quenched
averages at desk scale. Two- and three-replica sums use the conditional
factorization A(c1) = sum_{c2} exp(-beta H(c2) + beta lam O(c1, c2)): since
replicas 2 and 3 couple only through replica 1, the total cost is O(4^N),
never O(8^N). All log-domain arithmetic is max-shifted; free energies are in
natural log units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .lattice import (
    BoundaryConfig,
    DisorderRealization,
    Distribution,
    Lattice,
    ReplicaCoupling,
    effective_field,
    sample_disorder,
    spawn_rng,
)

CAP_ONE_REPLICA = 24
CAP_TWO_REPLICA = 12
CAP_DISORDER_ENUM_BONDS = 20

__all__ = [
    "CAP_ONE_REPLICA",
    "CAP_TWO_REPLICA",
    "EnumerationCapError",
    "LogPartition",
    "OverlapHistogram",
    "FreeEnergySample",
    "ObservableEstimate",
    "lattice_energies",
    "log_z1",
    "inner_sum_table",
    "log_z2",
    "log_z3",
    "overlap_moments",
    "overlap_moments3",
    "overlap_histogram",
    "site_magnetizations",
    "pair_correlations",
    "quenched_average",
    "quenched_average_exact_pm_j",
    "disorder_samples",
    "pairwise_sum",
    "free_energy_samples",
]


class EnumerationCapError(ValueError):
    """Requested system exceeds the enumeration size caps."""


@dataclass(frozen=True)
class LogPartition:
    """log Z together with the parameters that produced it."""

    log_z: float
    beta: float
    n_replicas: int
    coupling: ReplicaCoupling | None = None

    def free_energy(self, n_sites: int) -> float:
        """Free energy density -log Z / (beta L^d) for this single realization."""
        return -self.log_z / (self.beta * n_sites)


@dataclass(frozen=True)
class OverlapHistogram:
    """Exact overlap distribution on its discrete support q_k = (2k - N)/N.

    weights[k] is the probability that the two replicas agree on exactly k
    sites; weights sum to 1.
    """

    n_sites: int
    weights: np.ndarray
    beta: float
    lam: float

    @property
    def support(self) -> np.ndarray:
        k = np.arange(self.n_sites + 1)
        return (2.0 * k - self.n_sites) / self.n_sites

    def moment(self, power: int) -> float:
        return float(np.dot(self.weights, self.support**power))


@dataclass(frozen=True)
class FreeEnergySample:
    """Disorder-averaged free energy density estimate."""

    beta: float
    lam: float
    lam_prime: float
    f_value: float
    stderr: float
    n_disorder: int

    def __post_init__(self) -> None:
        if self.stderr < 0 or self.n_disorder < 1:
            raise ValueError("stderr must be >= 0 and n_disorder >= 1")


@dataclass(frozen=True)
class ObservableEstimate:
    """Mean and standard error of a disorder-averaged observable."""

    mean: float
    stderr: float
    n: int


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise EnumerationCapError(msg)


def _check_beta(beta: float) -> None:
    if not beta > 0:
        raise ValueError(f"beta={beta} must be positive")


def lattice_energies(disorder: DisorderRealization, boundary: BoundaryConfig) -> np.ndarray:
    """Energy of every configuration (index = packed spin bits)."""
    lat = disorder.lattice
    _require(lat.n_sites <= CAP_ONE_REPLICA, f"L^d={lat.n_sites} exceeds the cap {CAP_ONE_REPLICA}")
    bi, bj = lat.bond_arrays
    return kernels.all_energies(
        lat.n_sites, bi, bj, disorder.j_bonds, effective_field(disorder, boundary)
    )


def _sanity_lower_bound(log_z: float, n_log_conf: float, beta: float, max_energy: float) -> None:
    # Z >= n_conf * exp(-beta max H)
    lower = n_log_conf - beta * max_energy
    if log_z < lower - 1e-6 * max(1.0, abs(lower)):
        raise AssertionError(f"log Z = {log_z} below its counting lower bound {lower}")


def log_z1(beta: float, disorder: DisorderRealization, boundary: BoundaryConfig) -> LogPartition:
    """Single-replica log partition function by exact enumeration."""
    _check_beta(beta)
    e = lattice_energies(disorder, boundary)
    lz = float(logsumexp(-beta * e))
    n = disorder.lattice.n_sites
    _sanity_lower_bound(lz, n * np.log(2.0), beta, float(e.max()))
    return LogPartition(log_z=lz, beta=beta, n_replicas=1)


def _two_replica_energies(disorder: DisorderRealization, boundary: BoundaryConfig) -> np.ndarray:
    lat = disorder.lattice
    _require(
        lat.n_sites <= CAP_TWO_REPLICA,
        f"L^d={lat.n_sites} exceeds the two/three-replica cap {CAP_TWO_REPLICA}",
    )
    return lattice_energies(disorder, boundary)


def inner_sum_table(
    beta: float, lam: float, disorder: DisorderRealization, boundary: BoundaryConfig
) -> np.ndarray:
    """log A(c1; lam) = log sum_{c2} exp(-beta H(c2) + beta lam O(c1, c2)) per config."""
    _check_beta(beta)
    e = _two_replica_energies(disorder, boundary)
    log_a, _, _ = kernels.inner_sums(e, beta, lam)
    return log_a


def _coupled_from_energies(energies: np.ndarray, beta: float, lam: float):
    """(log_z2, mean R, mean R^2) for the coupled pair, from an energy table."""
    log_a, r1, r2 = kernels.inner_sums(energies, beta, lam)
    w = -beta * energies + log_a
    lz2 = float(logsumexp(w))
    p = np.exp(w - lz2)
    return lz2, float(np.dot(p, r1)), float(np.dot(p, r2))


def _three_replica_from_energies(energies: np.ndarray, beta: float, lam: float, lam_prime: float):
    """(log_z3, mean R12, mean R13). lam and lam' tables share one code path.

    The two inner tables are added before the single-replica term so that
    swapping (lam, lam') is bit-exact.
    """
    log_a, r1, _ = kernels.inner_sums(energies, beta, lam)
    log_ap, r1p, _ = kernels.inner_sums(energies, beta, lam_prime)
    w = -beta * energies + (log_a + log_ap)
    lz3 = float(logsumexp(w))
    p = np.exp(w - lz3)
    return lz3, float(np.dot(p, r1)), float(np.dot(p, r1p))


def log_z2(
    beta: float, lam: float, disorder: DisorderRealization, boundary: BoundaryConfig
) -> LogPartition:
    """Two-replica log partition function with overlap coupling lam."""
    _check_beta(beta)
    e = _two_replica_energies(disorder, boundary)
    lz2, _, _ = _coupled_from_energies(e, beta, lam)
    n = disorder.lattice.n_sites
    _sanity_lower_bound(
        lz2, 2 * n * np.log(2.0), beta, 2.0 * float(e.max()) + abs(lam) * n
    )
    return LogPartition(log_z=lz2, beta=beta, n_replicas=2, coupling=ReplicaCoupling(lam))


def log_z3(
    beta: float,
    lam: float,
    lam_prime: float,
    disorder: DisorderRealization,
    boundary: BoundaryConfig,
) -> LogPartition:
    """Three-replica log partition function; 1-2 coupled by lam, 1-3 by lam'."""
    _check_beta(beta)
    e = _two_replica_energies(disorder, boundary)
    lz3, _, _ = _three_replica_from_energies(e, beta, lam, lam_prime)
    n = disorder.lattice.n_sites
    _sanity_lower_bound(
        lz3, 3 * n * np.log(2.0), beta, 3.0 * float(e.max()) + (abs(lam) + abs(lam_prime)) * n
    )
    return LogPartition(
        log_z=lz3, beta=beta, n_replicas=3, coupling=ReplicaCoupling(lam, lam_prime)
    )


def overlap_moments(
    beta: float, lam: float, disorder: DisorderRealization, boundary: BoundaryConfig
) -> tuple[float, float]:
    """Thermal (<R>, <R^2>) under the coupled two-replica Gibbs weight."""
    _check_beta(beta)
    e = _two_replica_energies(disorder, boundary)
    _, r1, r2 = _coupled_from_energies(e, beta, lam)
    return r1, r2


def overlap_moments3(
    beta: float,
    lam: float,
    lam_prime: float,
    disorder: DisorderRealization,
    boundary: BoundaryConfig,
) -> tuple[float, float]:
    """Thermal (<R^{1,2}>, <R^{1,3}>) in the three-replica system."""
    _check_beta(beta)
    e = _two_replica_energies(disorder, boundary)
    _, r12, r13 = _three_replica_from_energies(e, beta, lam, lam_prime)
    return r12, r13


def overlap_histogram(
    beta: float,
    disorder: DisorderRealization,
    boundary: BoundaryConfig,
    lam: float = 0.0,
) -> OverlapHistogram:
    """Exact overlap distribution of the two-replica system.

    The lam=0 case is the standard decoupled-replica distribution; lam != 0
    is exposed as a diagnostic for the coupled ensemble.
    """
    _check_beta(beta)
    e = _two_replica_energies(disorder, boundary)
    w = kernels.pair_histogram(e, beta, lam)
    return OverlapHistogram(
        n_sites=disorder.lattice.n_sites, weights=w / w.sum(), beta=beta, lam=lam
    )


def site_magnetizations(energies: np.ndarray, beta: float) -> np.ndarray:
    """<sigma_x> for every site from an energy table."""
    n_conf = len(energies)
    n = n_conf.bit_length() - 1
    w = -beta * energies
    p = np.exp(w - logsumexp(w))
    s = _spin_matrix(n)
    return s.T @ p


def pair_correlations(energies: np.ndarray, beta: float) -> np.ndarray:
    """Full matrix <sigma_x sigma_y> from an energy table."""
    n_conf = len(energies)
    n = n_conf.bit_length() - 1
    w = -beta * energies
    p = np.exp(w - logsumexp(w))
    s = _spin_matrix(n)
    sp = s * np.sqrt(p)[:, None]
    return sp.T @ sp


def _spin_matrix(n: int) -> np.ndarray:
    """(2^n, n) matrix of +/-1 spins, config index = packed bits."""
    c = np.arange(1 << n, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    return ((c[:, None] >> shifts[None, :]) & 1).astype(np.float64) * 2.0 - 1.0


def pairwise_sum(values: np.ndarray) -> float:
    """Fixed-shape pairwise-tree sum; the tree depends only on len(values).

    Used for all disorder reductions so results are identical no matter how
    the per-sample work was scheduled.
    """
    vals = np.asarray(values, dtype=np.float64)
    n = len(vals)
    if n == 0:
        return 0.0
    work = vals.copy()
    while n > 1:
        half = n // 2
        work[:half] = work[0 : 2 * half : 2] + work[1 : 2 * half : 2]
        if n % 2:
            work[half] = work[n - 1]
            n = half + 1
        else:
            n = half
    return float(work[0])


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    mean = pairwise_sum(values) / n
    if n < 2:
        return mean, 0.0
    var = pairwise_sum((values - mean) ** 2) / (n - 1)
    return mean, float(np.sqrt(var / n))


def disorder_samples(
    lattice: Lattice,
    j_dist: Distribution,
    h_dist: Distribution,
    n_disorder: int,
    seed: int,
):
    """Independent disorder realizations keyed by (seed, sample index)."""
    for i in range(n_disorder):
        yield sample_disorder(lattice, j_dist, h_dist, seed=seed, sample_index=i)


def quenched_average(
    observable_fn: Callable[[DisorderRealization], float],
    lattice: Lattice,
    j_dist: Distribution,
    h_dist: Distribution,
    n_disorder: int,
    seed: int,
) -> ObservableEstimate:
    """Sample mean and standard error of an observable over disorder draws.

    Deterministic given seed; the reduction is a fixed-order pairwise tree,
    so the result does not depend on how samples were computed.
    """
    if n_disorder < 1:
        raise ValueError("n_disorder must be >= 1")
    values = np.array(
        [observable_fn(d) for d in disorder_samples(lattice, j_dist, h_dist, n_disorder, seed)]
    )
    mean, stderr = _mean_stderr(values)
    return ObservableEstimate(mean=mean, stderr=stderr, n=n_disorder)


def quenched_average_exact_pm_j(
    observable_fn: Callable[[DisorderRealization], float],
    lattice: Lattice,
    p: float,
    h_dist: Distribution,
    j_magnitude: float = 1.0,
    h_seed: int = 0,
) -> float:
    """Exact quenched average for +/-J disorder by enumerating sign patterns.

    Enumerates all 2^(n_bonds) sign assignments over interior and boundary
    bonds with probability weights p^(#+) (1-p)^(#-). The field must be
    non-random (constant) for the enumeration to be exact.
    """
    if h_dist.kind != "constant":
        raise ValueError("exact +/-J averaging requires a constant field distribution")
    n_bonds = lattice.n_bonds + len(lattice.boundary_bonds)
    _require(
        n_bonds <= CAP_DISORDER_ENUM_BONDS,
        f"{n_bonds} bonds exceeds the exact +/-J cap {CAP_DISORDER_ENUM_BONDS}",
    )
    h = np.full(lattice.n_sites, h_dist.params[0])
    total = 0.0
    for pattern in range(1 << n_bonds):
        signs = np.array([1.0 if (pattern >> k) & 1 else -1.0 for k in range(n_bonds)])
        n_plus = int(pattern).bit_count()
        weight = p**n_plus * (1.0 - p) ** (n_bonds - n_plus)
        if weight == 0.0:
            continue
        dis = DisorderRealization(
            lattice=lattice,
            j_bonds=j_magnitude * signs[: lattice.n_bonds],
            j_boundary=j_magnitude * signs[lattice.n_bonds :],
            h=h,
            dist_meta={"j": {"kind": "pm_j_exact", "p": p}, "h": h_dist.meta()},
            seed=h_seed,
        )
        total += weight * observable_fn(dis)
    return total


def free_energy_samples(
    beta: float,
    lattice: Lattice,
    j_dist: Distribution,
    h_dist: Distribution,
    boundary_fn: Callable[[Lattice], BoundaryConfig],
    n_disorder: int,
    seed: int,
    lam: float | None = None,
    lam_prime: float | None = None,
) -> FreeEnergySample:
    """Disorder-averaged free energy density for 1, 2, or 3 replicas.

    Replica count follows which couplings are given: none -> 1, lam -> 2,
    lam and lam_prime -> 3.
    """
    n = lattice.n_sites
    vals = []
    for dis in disorder_samples(lattice, j_dist, h_dist, n_disorder, seed):
        bc = boundary_fn(lattice)
        if lam is None:
            lp = log_z1(beta, dis, bc)
        elif lam_prime is None:
            lp = log_z2(beta, lam, dis, bc)
        else:
            lp = log_z3(beta, lam, lam_prime, dis, bc)
        vals.append(lp.free_energy(n))
    mean, stderr = _mean_stderr(np.array(vals))
    return FreeEnergySample(
        beta=beta,
        lam=0.0 if lam is None else lam,
        lam_prime=0.0 if lam_prime is None else lam_prime,
        f_value=mean,
        stderr=stderr,
        n_disorder=n_disorder,
    )
