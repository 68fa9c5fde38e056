"""Pure numpy/Python kernel backend.

Reference semantics for the hot loops; eaglass.kernels._core is the compiled
twin. Results agree with the compiled backend to float rounding for the
enumeration kernels and bit-exactly for mc_sweeps (same IEEE operations in
the same order).
"""

from __future__ import annotations

import math

import numpy as np

_BLOCK_ELEMENTS = 1 << 22  # pairwise work per chunk, keeps temporaries ~tens of MB


def all_energies(n_spins, bonds_i, bonds_j, bond_j, h_eff):
    """Energy of every configuration, indexed by packed bits (bit set = +1).

    Direct summation in bond order, chunked over configurations.
    """
    n_conf = 1 << n_spins
    bonds_i = np.asarray(bonds_i, dtype=np.int64)
    bonds_j = np.asarray(bonds_j, dtype=np.int64)
    bond_j = np.asarray(bond_j, dtype=np.float64)
    h_eff = np.asarray(h_eff, dtype=np.float64)
    out = np.empty(n_conf)
    chunk = max(1, _BLOCK_ELEMENTS // max(n_spins, 1))
    shifts = np.arange(n_spins, dtype=np.uint64)
    for lo in range(0, n_conf, chunk):
        hi = min(lo + chunk, n_conf)
        c = np.arange(lo, hi, dtype=np.uint64)
        s = ((c[:, None] >> shifts[None, :]) & 1).astype(np.int8) * 2 - 1
        e = -(s[:, bonds_i] * s[:, bonds_j]).astype(np.float64) @ bond_j
        e -= s.astype(np.float64) @ h_eff
        out[lo:hi] = e
    return out


def inner_sums(energies, beta, lam):
    """Conditional single-replica sums A(c1) = sum_c2 exp(-beta E(c2) + beta lam O).

    O = n - 2 popcount(c1 ^ c2) is the site overlap sum. Returns
    (log_a, r_mean, r2_mean) per c1, where r_mean/r2_mean are the first two
    moments of the overlap R = O/n under the inner (c2) weight.
    """
    energies = np.asarray(energies, dtype=np.float64)
    n_conf = len(energies)
    n = n_conf.bit_length() - 1
    t = beta * lam
    if abs(t) * n > 300.0:
        raise ValueError("beta*|lam|*n too large for the shifted inner sums")
    w2 = -beta * energies
    m2a = float(w2.max())
    ew = np.exp(w2 - m2a)
    shift = abs(t) * n
    ms = np.arange(n + 1)
    ctab = np.exp(t * (n - 2.0 * ms) - shift)
    rtab = (n - 2.0 * ms) / n
    r2tab = rtab * rtab

    log_a = np.empty(n_conf)
    r_mean = np.empty(n_conf)
    r2_mean = np.empty(n_conf)
    configs = np.arange(n_conf, dtype=np.uint64)
    block = max(1, _BLOCK_ELEMENTS // n_conf)
    for lo in range(0, n_conf, block):
        hi = min(lo + block, n_conf)
        m = np.bitwise_count(configs[lo:hi, None] ^ configs[None, :])
        w = ew[None, :] * ctab[m]
        s0 = w.sum(axis=1)
        s1 = (w * rtab[m]).sum(axis=1)
        s2 = (w * r2tab[m]).sum(axis=1)
        log_a[lo:hi] = m2a + shift + np.log(s0)
        r_mean[lo:hi] = s1 / s0
        r2_mean[lo:hi] = s2 / s0
    return log_a, r_mean, r2_mean


def pair_histogram(energies, beta, lam=0.0):
    """Unnormalized overlap histogram over k = number of agreeing sites.

    Weight of (c1, c2) is exp(-beta(E1 + E2) + beta lam (2k - n)) up to a
    common shift. c2 runs over a half space together with its complement so
    that, when the energies are flip-symmetric and lam = 0, the k <-> n-k
    symmetry is bit-exact.
    """
    energies = np.asarray(energies, dtype=np.float64)
    n_conf = len(energies)
    n = n_conf.bit_length() - 1
    t = beta * lam
    if abs(t) * n > 300.0:
        raise ValueError("beta*|lam|*n too large for the shifted pair sums")
    w = -beta * energies
    ew = np.exp(w - float(w.max()))
    ms = np.arange(n + 1)
    ctab = np.exp(t * (n - 2.0 * ms) - abs(t) * n)

    half = n_conf >> 1
    mask = np.uint64(n_conf - 1)
    chalf = np.arange(half, dtype=np.uint64)
    ew_half = ew[:half]
    ew_comp = ew[(chalf ^ mask).astype(np.int64)]
    hist = np.zeros(n + 1)
    configs = np.arange(n_conf, dtype=np.uint64)
    block = max(1, _BLOCK_ELEMENTS // max(half, 1))
    for lo in range(0, n_conf, block):
        hi = min(lo + block, n_conf)
        m = np.bitwise_count(configs[lo:hi, None] ^ chalf[None, :]).astype(np.int64)
        e1 = ew[lo:hi, None]
        t_direct = e1 * (ew_half[None, :] * ctab[m])
        t_comp = e1 * (ew_comp[None, :] * ctab[n - m])
        hist += np.bincount((n - m).ravel(), weights=t_direct.ravel(), minlength=n + 1)
        hist += np.bincount(m.ravel(), weights=t_comp.ravel(), minlength=n + 1)
    return hist


def mc_sweeps(s1, s2, nbr_off, nbr_site, nbr_j, h_eff, beta, lam, uniforms, out_r):
    """Metropolis sweeps on the coupled two-replica system, in place.

    One sweep visits every site once per replica (replica 1 then replica 2 at
    each site). One uniform is consumed per proposal, accepted or not. The
    per-sweep overlap R is written to out_r. Returns the accepted count.
    """
    n = len(s1)
    n_sweeps = len(out_r)
    if len(uniforms) != 2 * n * n_sweeps:
        raise ValueError("uniforms length must be 2 * n_sites * n_sweeps")
    ov = 0
    for i in range(n):
        ov += int(s1[i]) * int(s2[i])
    exp = math.exp
    n_accept = 0
    iu = 0
    for sw in range(n_sweeps):
        for i in range(n):
            si = int(s1[i])
            loc = float(h_eff[i])
            for p in range(nbr_off[i], nbr_off[i + 1]):
                loc += float(nbr_j[p]) * int(s1[nbr_site[p]])
            de = 2.0 * si * loc + 2.0 * lam * si * int(s2[i])
            u = float(uniforms[iu])
            iu += 1
            if de <= 0.0 or u < exp(-beta * de):
                s1[i] = -si
                ov += 2 * int(s1[i]) * int(s2[i])
                n_accept += 1

            si = int(s2[i])
            loc = float(h_eff[i])
            for p in range(nbr_off[i], nbr_off[i + 1]):
                loc += float(nbr_j[p]) * int(s2[nbr_site[p]])
            de = 2.0 * si * loc + 2.0 * lam * si * int(s1[i])
            u = float(uniforms[iu])
            iu += 1
            if de <= 0.0 or u < exp(-beta * de):
                s2[i] = -si
                ov += 2 * int(s1[i]) * int(s2[i])
                n_accept += 1
        out_r[sw] = ov / n
    return n_accept
