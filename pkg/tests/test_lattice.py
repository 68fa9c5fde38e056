"""Lattice geometry, disorder sampling, Hamiltonians, overlap, gauge symmetry."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eaglass.lattice import (
    BoundaryConfig,
    DisorderRealization,
    Distribution,
    ReplicaCoupling,
    SpinConfig,
    build_lattice,
    constant,
    effective_field,
    energy1,
    energy2,
    energy3,
    gauge_transform,
    gaussian,
    open_boundary,
    overlap,
    plus_boundary,
    pm_j,
    sample_disorder,
    uniform,
)

from _oracles import direct_energy


class TestBuildLattice:
    def test_chain_counts(self):
        lat = build_lattice(1, 3)
        assert lat.n_sites == 3
        assert lat.n_bonds == 2
        assert len(lat.boundary_bonds) == 2

    def test_3x3_counts(self):
        # frozen from a direct count of nearest-neighbor pairs in a 3x3 grid
        # and its perimeter contacts
        lat = build_lattice(2, 3)
        assert lat.n_sites == 9
        assert lat.n_bonds == 12
        assert len(lat.boundary_bonds) == 12

    def test_2x2_counts(self):
        lat = build_lattice(2, 2)
        assert lat.n_sites == 4
        assert lat.n_bonds == 4
        assert len(lat.boundary_bonds) == 8

    @given(d=st.integers(1, 3), L=st.integers(2, 4))
    @settings(max_examples=12, deadline=None)
    def test_geometry_invariants(self, d, L):
        lat = build_lattice(d, L)
        assert lat.n_sites == L**d
        for i, j in lat.bonds:
            dist = sum(abs(a - b) for a, b in zip(lat.sites[i], lat.sites[j]))
            assert dist == 1
        assert len(lat.boundary_sites) == 2 * d * L ** (d - 1)
        for x, u in lat.boundary_bonds:
            dist = sum(abs(a - b) for a, b in zip(lat.sites[x], lat.boundary_sites[u]))
            assert dist == 1
        # documented bijection: row-major over coordinates
        for i, s in enumerate(lat.sites):
            assert lat.site_index(s) == i

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            build_lattice(0, 3)
        with pytest.raises(ValueError):
            build_lattice(4, 2)
        with pytest.raises(ValueError):
            build_lattice(2, 1)


class TestDisorder:
    def test_ferromagnetic_realization(self):
        lat = build_lattice(2, 2)
        dis = sample_disorder(lat, constant(1.0), constant(0.0), seed=1)
        assert np.all(dis.j_bonds == 1.0)
        assert np.all(dis.j_boundary == 1.0)
        assert np.all(dis.h == 0.0)

    def test_seed_determinism(self):
        lat = build_lattice(2, 3)
        d1 = sample_disorder(lat, pm_j(0.5), gaussian(0, 1), seed=42)
        d2 = sample_disorder(lat, pm_j(0.5), gaussian(0, 1), seed=42)
        assert np.array_equal(d1.j_bonds, d2.j_bonds)
        assert np.array_equal(d1.h, d2.h)
        d3 = sample_disorder(lat, pm_j(0.5), gaussian(0, 1), seed=43)
        assert not np.array_equal(d1.j_bonds, d3.j_bonds)

    def test_gaussian_clt(self):
        # sample mean of ~1e4 couplings within 5 sd/sqrt(n) of 0
        lat = build_lattice(1, 10001)
        dis = sample_disorder(lat, gaussian(0.0, 1.0), constant(0.0), seed=5)
        n = lat.n_bonds
        assert abs(dis.j_bonds[:n].mean()) < 5.0 / math.sqrt(n)

    def test_pm_j_values(self):
        lat = build_lattice(2, 3)
        dis = sample_disorder(lat, pm_j(0.3, j=2.0), constant(0.0), seed=9)
        assert set(np.unique(dis.j_bonds)) <= {-2.0, 2.0}

    def test_uniform_range(self):
        lat = build_lattice(2, 3)
        dis = sample_disorder(lat, uniform(-0.5, 1.5), constant(0.0), seed=9)
        assert dis.j_bonds.min() >= -0.5 and dis.j_bonds.max() <= 1.5

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            gaussian(0, -1).validate()
        with pytest.raises(ValueError):
            pm_j(1.5).validate()
        with pytest.raises(ValueError):
            uniform(2, 1).validate()
        with pytest.raises(ValueError):
            Distribution("lognormal", (0.0,)).validate()

    def test_json_round_trip(self):
        lat = build_lattice(2, 3)
        dis = sample_disorder(lat, gaussian(0, 1), uniform(-0.2, 0.2), seed=11)
        doc = dis.to_json()
        back = DisorderRealization.from_json(doc)
        assert np.array_equal(back.j_bonds, dis.j_bonds)
        assert np.array_equal(back.j_boundary, dis.j_boundary)
        assert np.array_equal(back.h, dis.h)
        assert back.seed == dis.seed
        assert json.loads(doc)["version"] == 1


class TestEnergies:
    def test_single_effective_spin(self):
        # 2-site chain with J=0 isolates one spin with field h=2
        lat = build_lattice(1, 2)
        dis = DisorderRealization(
            lattice=lat,
            j_bonds=np.zeros(lat.n_bonds),
            j_boundary=np.zeros(2),
            h=np.array([2.0, 0.0]),
        )
        cfg = SpinConfig.from_spins([1, 1])
        assert energy1(cfg, dis, open_boundary(lat)) == -2.0

    def test_two_site_chain(self):
        lat = build_lattice(1, 2)
        dis = DisorderRealization(
            lattice=lat,
            j_bonds=np.ones(1),
            j_boundary=np.zeros(2),
            h=np.zeros(2),
        )
        bc = open_boundary(lat)
        assert energy1(SpinConfig.from_spins([1, 1]), dis, bc) == -1.0
        assert energy1(SpinConfig.from_spins([1, -1]), dis, bc) == 1.0

    def test_2x2_plus_boundary(self):
        # 4 interior bonds + 8 boundary bonds, each contributing -1
        lat = build_lattice(2, 2)
        dis = sample_disorder(lat, constant(1.0), constant(0.0), seed=0)
        cfg = SpinConfig.from_spins([1, 1, 1, 1])
        assert energy1(cfg, dis, plus_boundary(lat)) == -12.0

    def test_energy1_matches_direct_oracle(self):
        lat = build_lattice(2, 3)
        dis = sample_disorder(lat, gaussian(0, 1), gaussian(0, 0.5), seed=3)
        rng = np.random.default_rng(1)
        bc = BoundaryConfig(lat, rng.uniform(-1, 1, lat.n_boundary))
        for _ in range(20):
            spins = rng.integers(0, 2, lat.n_sites) * 2 - 1
            cfg = SpinConfig.from_spins(spins)
            expected = direct_energy(spins, lat, dis.j_bonds, dis.j_boundary, dis.h, bc.b)
            assert energy1(cfg, dis, bc) == pytest.approx(expected, rel=1e-14)

    def test_global_flip_with_h_and_b_negated(self):
        lat = build_lattice(2, 3)
        dis = sample_disorder(lat, gaussian(0, 1), gaussian(0, 1), seed=8)
        rng = np.random.default_rng(2)
        b = rng.uniform(-1, 1, lat.n_boundary)
        dis_neg = DisorderRealization(
            lattice=lat, j_bonds=dis.j_bonds, j_boundary=dis.j_boundary, h=-dis.h
        )
        for _ in range(10):
            spins = rng.integers(0, 2, lat.n_sites) * 2 - 1
            e = energy1(SpinConfig.from_spins(spins), dis, BoundaryConfig(lat, b))
            e_flip = energy1(
                SpinConfig.from_spins(-spins), dis_neg, BoundaryConfig(lat, -b)
            )
            assert e_flip == e


class TestReplicaEnergies:
    def setup_method(self):
        self.lat = build_lattice(2, 2)
        self.dis = sample_disorder(self.lat, pm_j(0.5), constant(0.0), seed=4)
        self.bc = open_boundary(self.lat)

    def test_lambda_zero_decouples(self):
        c1 = SpinConfig.from_spins([1, -1, 1, 1])
        c2 = SpinConfig.from_spins([-1, -1, 1, -1])
        e = energy2(c1, c2, ReplicaCoupling(0.0), self.dis, self.bc)
        assert e == energy1(c1, self.dis, self.bc) + energy1(c2, self.dis, self.bc)

    def test_equal_replicas_overlap_term(self):
        c = SpinConfig.from_spins([1, -1, 1, 1])
        mu = 0.7
        e = energy2(c, c, ReplicaCoupling(mu), self.dis, self.bc)
        assert e == pytest.approx(2 * energy1(c, self.dis, self.bc) - mu * 4, abs=1e-14)

    def test_global_flip_overlap_term(self):
        c = SpinConfig.from_spins([1, -1, 1, 1])
        mu = 0.7
        e = energy2(c, c.global_flip(), ReplicaCoupling(mu), self.dis, self.bc)
        assert e == pytest.approx(2 * energy1(c, self.dis, self.bc) + mu * 4, abs=1e-14)

    def test_replica_exchange_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            c1 = SpinConfig.from_spins(rng.integers(0, 2, 4) * 2 - 1)
            c2 = SpinConfig.from_spins(rng.integers(0, 2, 4) * 2 - 1)
            lam = rng.uniform(-1, 1)
            assert energy2(c1, c2, ReplicaCoupling(lam), self.dis, self.bc) == energy2(
                c2, c1, ReplicaCoupling(lam), self.dis, self.bc
            )

    def test_three_replica_decoupled_and_equal(self):
        c = SpinConfig.from_spins([1, -1, 1, 1])
        e0 = energy3(c, c, c, ReplicaCoupling(0.0, 0.0), self.dis, self.bc)
        assert e0 == 3 * energy1(c, self.dis, self.bc)
        lam, lamp = 0.3, -0.2
        e = energy3(c, c, c, ReplicaCoupling(lam, lamp), self.dis, self.bc)
        assert e == pytest.approx(3 * energy1(c, self.dis, self.bc) - (lam + lamp) * 4, abs=1e-14)

    def test_transposition_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            c1, c2, c3 = (SpinConfig.from_spins(rng.integers(0, 2, 4) * 2 - 1) for _ in range(3))
            lam, lamp = rng.uniform(-1, 1, 2)
            assert energy3(c1, c2, c3, ReplicaCoupling(lam, lamp), self.dis, self.bc) == energy3(
                c1, c3, c2, ReplicaCoupling(lamp, lam), self.dis, self.bc
            )


class TestOverlap:
    def test_identical_and_flipped(self):
        c = SpinConfig.from_spins([1, -1, 1, 1])
        assert overlap(c, c) == 1
        assert overlap(c, c.global_flip()) == -1

    def test_three_quarters_agreement(self):
        c1 = SpinConfig.from_spins([1, 1, 1, 1])
        c2 = SpinConfig.from_spins([1, 1, 1, -1])
        assert overlap(c1, c2) == Fraction(1, 2)

    @given(bits=st.integers(0, 2**9 - 1), site=st.integers(0, 8))
    @settings(max_examples=50, deadline=None)
    def test_single_flip_moves_overlap_by_2_over_n(self, bits, site):
        c1 = SpinConfig(9, bits)
        c2 = SpinConfig(9, (bits * 7 + 3) % 2**9)
        before = overlap(c1, c2)
        after = overlap(c1, c2.flip(site))
        assert abs(after - before) == Fraction(2, 9)


class TestGauge:
    def test_identity_epsilon(self):
        lat = build_lattice(1, 3)
        dis = sample_disorder(lat, gaussian(0, 1), gaussian(0, 1), seed=6)
        bc = open_boundary(lat)
        cfg = SpinConfig.from_spins([1, -1, 1])
        d2, b2, c2 = gauge_transform(dis, bc, cfg, np.ones(3, dtype=int))
        assert np.array_equal(d2.j_bonds, dis.j_bonds)
        assert np.array_equal(d2.h, dis.h)
        assert c2.bits == cfg.bits

    def test_global_flip_h0(self):
        lat = build_lattice(1, 3)
        dis = sample_disorder(lat, gaussian(0, 1), constant(0.0), seed=6)
        bc = open_boundary(lat)
        cfg = SpinConfig.from_spins([1, -1, 1])
        d2, _, c2 = gauge_transform(dis, bc, cfg, -np.ones(3, dtype=int))
        assert np.array_equal(d2.j_bonds, dis.j_bonds)  # eps_x eps_y = +1 on bonds
        assert c2.bits == cfg.global_flip().bits
        assert energy1(c2, d2, bc) == energy1(cfg, dis, bc)

    def test_random_epsilon_2x2(self):
        lat = build_lattice(2, 2)
        dis = sample_disorder(lat, gaussian(0, 1), gaussian(0, 1), seed=7)
        rng = np.random.default_rng(11)
        bc = BoundaryConfig(lat, rng.uniform(-1, 1, lat.n_boundary))
        for _ in range(10):
            eps = rng.integers(0, 2, 4) * 2 - 1
            cfg = SpinConfig.from_spins(rng.integers(0, 2, 4) * 2 - 1)
            d2, b2, c2 = gauge_transform(dis, bc, cfg, eps)
            assert energy1(c2, d2, b2) == energy1(cfg, dis, bc)

    def test_exhaustive_bit_exact_invariance(self):
        # every configuration on a 16-site lattice, energy preserved bit-exactly
        lat = build_lattice(2, 4)
        dis = sample_disorder(lat, gaussian(0, 1), gaussian(0, 0.3), seed=12)
        rng = np.random.default_rng(13)
        bc = BoundaryConfig(lat, rng.uniform(-1, 1, lat.n_boundary))
        eps = rng.integers(0, 2, lat.n_sites) * 2 - 1
        probe = SpinConfig(lat.n_sites, 0)
        d2, b2, _ = gauge_transform(dis, bc, probe, eps)
        mask = sum(1 << i for i in range(lat.n_sites) if eps[i] < 0)
        from _oracles import direct_energy_table

        e_orig = direct_energy_table(lat, dis, bc)
        e_gauge = direct_energy_table(lat, d2, b2)
        idx = np.arange(1 << lat.n_sites) ^ mask
        assert np.array_equal(e_gauge[idx], e_orig)


class TestBoundaryConfig:
    def test_open_and_plus(self):
        lat = build_lattice(2, 2)
        assert np.all(open_boundary(lat).b == 0.0)
        assert np.all(plus_boundary(lat).b == 1.0)

    def test_rejects_out_of_range(self):
        lat = build_lattice(2, 2)
        with pytest.raises(ValueError):
            BoundaryConfig(lat, np.full(lat.n_boundary, 1.5))

    def test_effective_field_linear_in_b(self):
        lat = build_lattice(1, 3)
        dis = sample_disorder(lat, gaussian(0, 1), gaussian(0, 1), seed=14)
        rng = np.random.default_rng(15)
        b1 = rng.uniform(-1, 1, lat.n_boundary)
        b2 = rng.uniform(-1, 1, lat.n_boundary)
        h1 = effective_field(dis, BoundaryConfig(lat, b1))
        h2 = effective_field(dis, BoundaryConfig(lat, b2))
        hm = effective_field(dis, BoundaryConfig(lat, (b1 + b2) / 2))
        assert np.allclose(hm, (h1 + h2) / 2, rtol=0, atol=1e-15)


class TestSpinConfig:
    @given(bits=st.integers(0, 2**12 - 1))
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, bits):
        cfg = SpinConfig(12, bits)
        assert SpinConfig.from_spins(cfg.to_spins()).bits == bits

    def test_rejects_bad_bits(self):
        with pytest.raises(ValueError):
            SpinConfig(3, 8)
