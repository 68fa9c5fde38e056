"""Finite hypercubic lattices, quenched disorder, boundaries, and Hamiltonians.

Site indexing is row-major over 1-based coordinates (x_1, ..., x_d) in
{1..L}^d: index(x) = sum_i (x_i - 1) * L^(d-i), so the last coordinate varies
fastest. Bit i of a packed spin configuration refers to site index i, with a
set bit meaning sigma_i = +1. These bijections are load-bearing: enumeration
kernels, JSON serialization, and seeded disorder streams all rely on them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

__all__ = [
    "Lattice",
    "DisorderRealization",
    "BoundaryConfig",
    "SpinConfig",
    "ReplicaCoupling",
    "Distribution",
    "constant",
    "pm_j",
    "gaussian",
    "uniform",
    "build_lattice",
    "sample_disorder",
    "effective_field",
    "energy1",
    "energy2",
    "energy3",
    "overlap",
    "gauge_transform",
    "open_boundary",
    "plus_boundary",
]


class LatticeError(ValueError):
    """Invalid lattice geometry request."""


class DistributionError(ValueError):
    """Invalid disorder distribution parameters."""


@dataclass(frozen=True)
class Distribution:
    """Disorder distribution descriptor.

    Supported kinds: constant(c), pm_j(p, j) giving +j with probability p and
    -j with probability 1-p, gaussian(mean, sd), uniform(a, b). All have
    finite mean absolute value.
    """

    kind: str
    params: tuple[float, ...]

    def validate(self) -> None:
        if self.kind == "constant":
            (c,) = self.params
            if not np.isfinite(c):
                raise DistributionError("constant value must be finite")
        elif self.kind == "pm_j":
            p, j = self.params
            if not 0.0 <= p <= 1.0:
                raise DistributionError(f"pm_j probability p={p} not in [0, 1]")
            if not np.isfinite(j):
                raise DistributionError("pm_j magnitude must be finite")
        elif self.kind == "gaussian":
            mean, sd = self.params
            if sd < 0 or not np.isfinite(sd) or not np.isfinite(mean):
                raise DistributionError(f"gaussian sd={sd} must be finite and >= 0")
        elif self.kind == "uniform":
            a, b = self.params
            if not (np.isfinite(a) and np.isfinite(b)) or a > b:
                raise DistributionError(f"uniform bounds ({a}, {b}) invalid")
        else:
            raise DistributionError(f"unknown distribution kind {self.kind!r}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        self.validate()
        if self.kind == "constant":
            return np.full(n, self.params[0])
        if self.kind == "pm_j":
            p, j = self.params
            return np.where(rng.random(n) < p, j, -j)
        if self.kind == "gaussian":
            mean, sd = self.params
            return mean + sd * _box_muller(rng, n)
        a, b = self.params
        return a + (b - a) * rng.random(n)

    def meta(self) -> dict:
        names = {
            "constant": ("c",),
            "pm_j": ("p", "j"),
            "gaussian": ("mean", "sd"),
            "uniform": ("a", "b"),
        }[self.kind]
        return {"kind": self.kind, **dict(zip(names, self.params))}

    @staticmethod
    def from_meta(meta: dict) -> "Distribution":
        kind = meta["kind"]
        names = {
            "constant": ("c",),
            "pm_j": ("p", "j"),
            "gaussian": ("mean", "sd"),
            "uniform": ("a", "b"),
        }[kind]
        return Distribution(kind, tuple(float(meta[k]) for k in names))


def constant(c: float) -> Distribution:
    return Distribution("constant", (float(c),))


def pm_j(p: float, j: float = 1.0) -> Distribution:
    return Distribution("pm_j", (float(p), float(j)))


def gaussian(mean: float, sd: float) -> Distribution:
    return Distribution("gaussian", (float(mean), float(sd)))


def uniform(a: float, b: float) -> Distribution:
    return Distribution("uniform", (float(a), float(b)))


def _box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """Standard normals via Box-Muller on Philox/PCG uniforms.

    Pinned transform (rather than numpy's ziggurat) so Gaussian disorder and
    REM energy streams are reproducible across numpy versions: with
    u1 in (0, 1], u2 in [0, 1),
        z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2).
    """
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:n]


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the stream identified by (seed, *key).

    Philox is counter-based, so independent streams are cheap and the mapping
    from (seed, key) to a stream is platform-stable.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, *key))))


@dataclass(frozen=True)
class Lattice:
    """Finite d-dimensional hypercubic lattice {1..L}^d with its boundary.

    bonds are unordered nearest-neighbor pairs inside the box, stored as
    (i, j) site-index pairs with i < j in a fixed deterministic order.
    boundary_bonds are (interior site index, boundary site index) pairs; each
    boundary site sits at L1-distance 1 from exactly one interior site.
    """

    d: int
    L: int
    sites: tuple[tuple[int, ...], ...]
    bonds: tuple[tuple[int, int], ...]
    boundary_sites: tuple[tuple[int, ...], ...]
    boundary_bonds: tuple[tuple[int, int], ...]

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_sites)

    def site_index(self, coords: tuple[int, ...]) -> int:
        idx = 0
        for x in coords:
            if not 1 <= x <= self.L:
                raise LatticeError(f"coordinate {coords} outside the box")
            idx = idx * self.L + (x - 1)
        return idx

    @cached_property
    def bond_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        bi = np.array([b[0] for b in self.bonds], dtype=np.int32)
        bj = np.array([b[1] for b in self.bonds], dtype=np.int32)
        bi.flags.writeable = False
        bj.flags.writeable = False
        return bi, bj

    @cached_property
    def boundary_site_of_bond(self) -> np.ndarray:
        arr = np.array([b[0] for b in self.boundary_bonds], dtype=np.int32)
        arr.flags.writeable = False
        return arr

    @cached_property
    def neighbor_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR neighbor table: (offsets, neighbor site, bond index).

        Bond index points into self.bonds so per-disorder couplings can be
        gathered without rebuilding the structure.
        """
        n = self.n_sites
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for k, (i, j) in enumerate(self.bonds):
            adj[i].append((j, k))
            adj[j].append((i, k))
        offsets = np.zeros(n + 1, dtype=np.int32)
        sites = []
        bond_ids = []
        for i in range(n):
            for j, k in adj[i]:
                sites.append(j)
                bond_ids.append(k)
            offsets[i + 1] = len(sites)
        return offsets, np.array(sites, dtype=np.int32), np.array(bond_ids, dtype=np.int32)


def build_lattice(d: int, L: int) -> Lattice:
    """Construct the lattice, its bond set, and its boundary.

    Rejects d outside {1, 2, 3} and L < 2.
    """
    if d not in (1, 2, 3):
        raise LatticeError(f"dimension d={d} not supported (need 1, 2, or 3)")
    if L < 2:
        raise LatticeError(f"side length L={L} must be >= 2")

    ranges = [range(1, L + 1)] * d
    sites: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...]) -> None:
        if len(prefix) == d:
            sites.append(prefix)
            return
        for x in ranges[len(prefix)]:
            rec(prefix + (x,))

    rec(())
    index = {s: i for i, s in enumerate(sites)}

    bonds: list[tuple[int, int]] = []
    boundary_sites: list[tuple[int, ...]] = []
    boundary_bonds: list[tuple[int, int]] = []
    for s in sites:
        i = index[s]
        for axis in range(d):
            for step in (-1, 1):
                t = list(s)
                t[axis] += step
                t = tuple(t)
                if t in index:
                    if step == 1:
                        bonds.append((i, index[t]))
                else:
                    boundary_sites.append(t)
                    boundary_bonds.append((i, len(boundary_sites) - 1))

    return Lattice(
        d=d,
        L=L,
        sites=tuple(sites),
        bonds=tuple(bonds),
        boundary_sites=tuple(boundary_sites),
        boundary_bonds=tuple(boundary_bonds),
    )


@dataclass(frozen=True)
class DisorderRealization:
    """Quenched couplings and fields on a lattice.

    j_bonds aligns with lattice.bonds, j_boundary with lattice.boundary_bonds,
    h with site indices. Arrays are read-only after construction.
    """

    lattice: Lattice
    j_bonds: np.ndarray
    j_boundary: np.ndarray
    h: np.ndarray
    dist_meta: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        lat = self.lattice
        if len(self.j_bonds) != lat.n_bonds:
            raise ValueError("j_bonds length does not match the lattice bond set")
        if len(self.j_boundary) != len(lat.boundary_bonds):
            raise ValueError("j_boundary length does not match the boundary bond set")
        if len(self.h) != lat.n_sites:
            raise ValueError("h length does not match the site set")
        for name in ("j_bonds", "j_boundary", "h"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @cached_property
    def neighbor_couplings(self) -> np.ndarray:
        _, _, bond_ids = self.lattice.neighbor_csr
        out = self.j_bonds[bond_ids]
        out.flags.writeable = False
        return out

    def to_json(self) -> str:
        """Serialize to the replay schema (arrays in site/bond index order)."""
        return json.dumps(
            {
                "version": 1,
                "d": self.lattice.d,
                "L": self.lattice.L,
                "dist_meta": self.dist_meta,
                "seed": self.seed,
                "j_bonds": self.j_bonds.tolist(),
                "j_boundary": self.j_boundary.tolist(),
                "h": self.h.tolist(),
            }
        )

    @staticmethod
    def from_json(text: str) -> "DisorderRealization":
        doc = json.loads(text)
        if doc.get("version") != 1:
            raise ValueError(f"unsupported disorder schema version {doc.get('version')}")
        lat = build_lattice(doc["d"], doc["L"])
        return DisorderRealization(
            lattice=lat,
            j_bonds=np.array(doc["j_bonds"], dtype=np.float64),
            j_boundary=np.array(doc["j_boundary"], dtype=np.float64),
            h=np.array(doc["h"], dtype=np.float64),
            dist_meta=doc["dist_meta"],
            seed=doc["seed"],
        )


def sample_disorder(
    lattice: Lattice,
    j_dist: Distribution,
    h_dist: Distribution,
    seed: int,
    sample_index: int = 0,
) -> DisorderRealization:
    """Draw one disorder realization, reproducible from (seed, sample_index).

    Interior bond couplings, boundary bond couplings, and fields are drawn in
    that order from a single Philox stream keyed by (seed, sample_index).
    """
    j_dist.validate()
    h_dist.validate()
    rng = spawn_rng(seed, sample_index)
    j_all = j_dist.sample(rng, lattice.n_bonds + len(lattice.boundary_bonds))
    h = h_dist.sample(rng, lattice.n_sites)
    return DisorderRealization(
        lattice=lattice,
        j_bonds=j_all[: lattice.n_bonds],
        j_boundary=j_all[lattice.n_bonds :],
        h=h,
        dist_meta={"j": j_dist.meta(), "h": h_dist.meta()},
        seed=seed,
    )


@dataclass(frozen=True)
class BoundaryConfig:
    """Boundary values b_u in [-1, 1], aligned with lattice.boundary_sites."""

    lattice: Lattice
    b: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.b, dtype=np.float64)
        if len(arr) != self.lattice.n_boundary:
            raise ValueError("boundary value count does not match the boundary site set")
        if np.any(np.abs(arr) > 1.0) or not np.all(np.isfinite(arr)):
            raise ValueError("boundary values must lie in [-1, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "b", arr)


def open_boundary(lattice: Lattice) -> BoundaryConfig:
    return BoundaryConfig(lattice, np.zeros(lattice.n_boundary))


def plus_boundary(lattice: Lattice) -> BoundaryConfig:
    return BoundaryConfig(lattice, np.ones(lattice.n_boundary))


@dataclass(frozen=True)
class SpinConfig:
    """Bit-packed Ising configuration; bit i set means sigma_i = +1."""

    n_sites: int
    bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.bits < (1 << self.n_sites):
            raise ValueError("bits outside the configuration space")

    @staticmethod
    def from_spins(spins) -> "SpinConfig":
        spins = np.asarray(spins)
        if not np.all(np.abs(spins) == 1):
            raise ValueError("spins must be +/-1")
        bits = 0
        for i, s in enumerate(spins):
            if s > 0:
                bits |= 1 << i
        return SpinConfig(n_sites=len(spins), bits=bits)

    def to_spins(self) -> np.ndarray:
        out = np.empty(self.n_sites, dtype=np.int8)
        for i in range(self.n_sites):
            out[i] = 1 if (self.bits >> i) & 1 else -1
        return out

    def flip(self, site: int) -> "SpinConfig":
        return SpinConfig(self.n_sites, self.bits ^ (1 << site))

    def global_flip(self) -> "SpinConfig":
        return SpinConfig(self.n_sites, self.bits ^ ((1 << self.n_sites) - 1))


@dataclass(frozen=True)
class ReplicaCoupling:
    """Inter-replica couplings: lam ties replicas 1-2, lam_prime ties 1-3."""

    lam: float
    lam_prime: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lam) and np.isfinite(self.lam_prime)):
            raise ValueError("replica couplings must be finite")


def _check_same_lattice(*objs) -> Lattice:
    lat = objs[0].lattice if hasattr(objs[0], "lattice") else None
    for o in objs:
        other = getattr(o, "lattice", None)
        if other is not None and lat is not None:
            if other.d != lat.d or other.L != lat.L:
                raise ValueError("mismatched lattice shapes")
    return lat


def effective_field(disorder: DisorderRealization, boundary: BoundaryConfig) -> np.ndarray:
    """Per-site field h_x + sum_u J_{x,u} b_u (boundary bonds are linear in b)."""
    _check_same_lattice(disorder, boundary)
    h_eff = disorder.h.copy()
    for k, (x, u) in enumerate(disorder.lattice.boundary_bonds):
        h_eff[x] += disorder.j_boundary[k] * boundary.b[u]
    return h_eff


def energy1(
    config: SpinConfig, disorder: DisorderRealization, boundary: BoundaryConfig
) -> float:
    """Single-system energy: minus J-weighted bond products, boundary terms, fields."""
    lat = _check_same_lattice(disorder, boundary)
    if config.n_sites != lat.n_sites:
        raise ValueError("mismatched lattice shapes")
    s = config.to_spins()
    bi, bj = lat.bond_arrays
    e = -float(np.dot(disorder.j_bonds, (s[bi] * s[bj]).astype(np.float64)))
    for k, (x, u) in enumerate(lat.boundary_bonds):
        e -= disorder.j_boundary[k] * s[x] * boundary.b[u]
    e -= float(np.dot(disorder.h, s.astype(np.float64)))
    return e


def energy2(
    c1: SpinConfig,
    c2: SpinConfig,
    coupling: ReplicaCoupling,
    disorder: DisorderRealization,
    boundary: BoundaryConfig,
) -> float:
    """Two-replica energy: both single energies minus lam * site overlap sum."""
    e = energy1(c1, disorder, boundary) + energy1(c2, disorder, boundary)
    dot = c1.n_sites - 2 * int.bit_count(c1.bits ^ c2.bits)
    return e - coupling.lam * dot


def energy3(
    c1: SpinConfig,
    c2: SpinConfig,
    c3: SpinConfig,
    coupling: ReplicaCoupling,
    disorder: DisorderRealization,
    boundary: BoundaryConfig,
) -> float:
    """Three-replica energy; replicas 2 and 3 couple only through replica 1.

    Groupings are chosen so the 2 <-> 3 transposition (with lam <-> lam')
    gives a bit-identical value.
    """
    e = energy1(c1, disorder, boundary) + (
        energy1(c2, disorder, boundary) + energy1(c3, disorder, boundary)
    )
    dot12 = c1.n_sites - 2 * int.bit_count(c1.bits ^ c2.bits)
    dot13 = c1.n_sites - 2 * int.bit_count(c1.bits ^ c3.bits)
    return e - (coupling.lam * dot12 + coupling.lam_prime * dot13)


def overlap(c1: SpinConfig, c2: SpinConfig) -> Fraction:
    """Site-averaged replica overlap as an exact rational with denominator L^d."""
    if c1.n_sites != c2.n_sites:
        raise ValueError("mismatched lattice shapes")
    n = c1.n_sites
    return Fraction(n - 2 * int.bit_count(c1.bits ^ c2.bits), n)


def gauge_transform(
    disorder: DisorderRealization,
    boundary: BoundaryConfig,
    config: SpinConfig,
    epsilon,
) -> tuple[DisorderRealization, BoundaryConfig, SpinConfig]:
    """Apply the local Z2 gauge map eps: sigma' = eps sigma, J' = eps eps J, h' = eps h.

    Boundary sites carry eps = +1, so boundary couplings transform with the
    interior factor only and b is unchanged. energy1 is invariant
    configuration by configuration (bit-exactly: every term is a product of
    the same floats).
    """
    lat = disorder.lattice
    eps = np.asarray(epsilon, dtype=np.int8)
    if len(eps) != lat.n_sites or not np.all(np.abs(eps) == 1):
        raise ValueError("epsilon must assign +/-1 to every site")
    j_bonds = disorder.j_bonds.copy()
    for k, (i, j) in enumerate(lat.bonds):
        j_bonds[k] *= eps[i] * eps[j]
    j_boundary = disorder.j_boundary.copy()
    for k, (x, _) in enumerate(lat.boundary_bonds):
        j_boundary[k] *= eps[x]
    h = disorder.h * eps
    spins = config.to_spins() * eps
    d2 = DisorderRealization(
        lattice=lat,
        j_bonds=j_bonds,
        j_boundary=j_boundary,
        h=h,
        dist_meta={**disorder.dist_meta, "gauge": "transformed"},
        seed=disorder.seed,
    )
    return d2, BoundaryConfig(lat, boundary.b.copy()), SpinConfig.from_spins(spins)
