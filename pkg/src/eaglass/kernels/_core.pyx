# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend.

Same contracts as eaglass.kernels.pure: Gray-code energy tables, the O(4^N)
two-replica inner sums, pair-overlap histograms, and Metropolis sweeps.
"""

import numpy as np

from libc.math cimport exp, fabs, log

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #  define EAG_POPCNT(x) __builtin_popcountll(x)
    #  define EAG_CTZ(x) __builtin_ctzll(x)
    #else
    static int EAG_POPCNT(unsigned long long v) {
        int c = 0;
        while (v) { c += (int)(v & 1ULL); v >>= 1; }
        return c;
    }
    static int EAG_CTZ(unsigned long long v) {
        int c = 0;
        while (!(v & 1ULL)) { v >>= 1; ++c; }
        return c;
    }
    #endif
    """
    int EAG_POPCNT(unsigned long long x) nogil
    int EAG_CTZ(unsigned long long x) nogil

cdef long long RESYNC_MASK = 0xFFF  # recompute the running energy every 4096 configs


def all_energies(int n_spins, bonds_i, bonds_j, bond_j, h_eff):
    """Energy of every configuration via Gray-code single-flip updates.

    Iterates the half space (top bit clear), tracking the bond part B and the
    field part F separately, and writes E[c] = B - F and E[~c] = B + F. This
    halves the work and makes the global-flip relation exact: at zero field
    the table is bit-exactly flip-symmetric. Both running sums are
    resynchronized against a direct evaluation every 4096 configs to keep
    float drift negligible even at n_spins = 24.
    """
    cdef long long n_conf = 1LL << n_spins
    out_arr = np.empty(n_conf, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const int[::1] bi = np.ascontiguousarray(bonds_i, dtype=np.intc)
    cdef const int[::1] bj = np.ascontiguousarray(bonds_j, dtype=np.intc)
    cdef const double[::1] jv = np.ascontiguousarray(bond_j, dtype=np.float64)
    cdef const double[::1] h = np.ascontiguousarray(h_eff, dtype=np.float64)
    cdef int n_bonds = bi.shape[0]

    # CSR adjacency for O(degree) flip updates
    offs_arr = np.zeros(n_spins + 1, dtype=np.intc)
    cdef int[::1] offs = offs_arr
    cdef int k, i
    for k in range(n_bonds):
        offs[bi[k] + 1] += 1
        offs[bj[k] + 1] += 1
    for i in range(n_spins):
        offs[i + 1] += offs[i]
    nbr_arr = np.empty(2 * n_bonds, dtype=np.intc)
    jn_arr = np.empty(2 * n_bonds, dtype=np.float64)
    cdef int[::1] nbr = nbr_arr
    cdef double[::1] jn = jn_arr
    fill_arr = offs_arr.copy()
    cdef int[::1] fill = fill_arr
    for k in range(n_bonds):
        nbr[fill[bi[k]]] = bj[k]
        jn[fill[bi[k]]] = jv[k]
        fill[bi[k]] += 1
        nbr[fill[bj[k]]] = bi[k]
        jn[fill[bj[k]]] = jv[k]
        fill[bj[k]] += 1

    spins_arr = np.full(n_spins, -1, dtype=np.int8)
    cdef signed char[::1] s = spins_arr
    cdef double bsum = 0.0, fsum = 0.0
    cdef double e_loc
    cdef int p
    cdef long long kk, half = n_conf >> 1
    cdef unsigned long long mask = <unsigned long long> (n_conf - 1), c
    with nogil:
        for k in range(n_bonds):
            bsum -= jv[k] * s[bi[k]] * s[bj[k]]
        for i in range(n_spins):
            fsum += h[i] * s[i]
        out[0] = bsum - fsum
        out[mask] = bsum + fsum
        for kk in range(1, half):
            i = EAG_CTZ(<unsigned long long> kk)
            # flip site i: dB = 2 sigma_i sum_nb J sigma_nb, dF = -2 sigma_i h_i
            e_loc = 0.0
            for p in range(offs[i], offs[i + 1]):
                e_loc += jn[p] * s[nbr[p]]
            bsum += 2.0 * s[i] * e_loc
            fsum -= 2.0 * s[i] * h[i]
            s[i] = -s[i]
            if (kk & RESYNC_MASK) == 0:
                bsum = 0.0
                fsum = 0.0
                for p in range(n_bonds):
                    bsum -= jv[p] * s[bi[p]] * s[bj[p]]
                for p in range(n_spins):
                    fsum += h[p] * s[p]
            c = (<unsigned long long> kk) ^ ((<unsigned long long> kk) >> 1)
            out[c] = bsum - fsum
            out[c ^ mask] = bsum + fsum
    return out_arr


def inner_sums(energies, double beta, double lam):
    """Conditional single-replica sums; see the pure backend for the contract."""
    en_arr = np.ascontiguousarray(energies, dtype=np.float64)
    cdef const double[::1] en = en_arr
    cdef long long n_conf = en.shape[0]
    cdef int n = 0
    while (1LL << n) < n_conf:
        n += 1
    cdef double t = beta * lam
    if fabs(t) * n > 300.0:
        raise ValueError("beta*|lam|*n too large for the shifted inner sums")

    cdef double m2a = -1e308
    cdef long long c
    for c in range(n_conf):
        if -beta * en[c] > m2a:
            m2a = -beta * en[c]
    ew_arr = np.empty(n_conf, dtype=np.float64)
    cdef double[::1] ew = ew_arr
    cdef double shift = fabs(t) * n
    ctab_arr = np.empty(n + 1, dtype=np.float64)
    rtab_arr = np.empty(n + 1, dtype=np.float64)
    r2tab_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] ctab = ctab_arr
    cdef double[::1] rtab = rtab_arr
    cdef double[::1] r2tab = r2tab_arr
    cdef int m
    for m in range(n + 1):
        ctab[m] = exp(t * (n - 2.0 * m) - shift)
        rtab[m] = (n - 2.0 * m) / n
        r2tab[m] = rtab[m] * rtab[m]

    log_a_arr = np.empty(n_conf, dtype=np.float64)
    r1_arr = np.empty(n_conf, dtype=np.float64)
    r2_arr = np.empty(n_conf, dtype=np.float64)
    cdef double[::1] log_a = log_a_arr
    cdef double[::1] r1 = r1_arr
    cdef double[::1] r2 = r2_arr
    cdef long long c1, c2
    cdef double s0, s1, s2, w
    with nogil:
        for c in range(n_conf):
            ew[c] = exp(-beta * en[c] - m2a)
        for c1 in range(n_conf):
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            for c2 in range(n_conf):
                m = EAG_POPCNT((<unsigned long long> c1) ^ (<unsigned long long> c2))
                w = ew[c2] * ctab[m]
                s0 += w
                s1 += w * rtab[m]
                s2 += w * r2tab[m]
            log_a[c1] = m2a + shift + log(s0)
            r1[c1] = s1 / s0
            r2[c1] = s2 / s0
    return log_a_arr, r1_arr, r2_arr


def pair_histogram(energies, double beta, double lam=0.0):
    """Unnormalized overlap histogram over agreement count k; see pure backend."""
    en_arr = np.ascontiguousarray(energies, dtype=np.float64)
    cdef const double[::1] en = en_arr
    cdef long long n_conf = en.shape[0]
    cdef int n = 0
    while (1LL << n) < n_conf:
        n += 1
    cdef double t = beta * lam
    if fabs(t) * n > 300.0:
        raise ValueError("beta*|lam|*n too large for the shifted pair sums")

    cdef double mmax = -1e308
    cdef long long c
    for c in range(n_conf):
        if -beta * en[c] > mmax:
            mmax = -beta * en[c]
    ew_arr = np.empty(n_conf, dtype=np.float64)
    cdef double[::1] ew = ew_arr
    ctab_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] ctab = ctab_arr
    cdef int m
    for m in range(n + 1):
        ctab[m] = exp(t * (n - 2.0 * m) - fabs(t) * n)
    hist_arr = np.zeros(n + 1, dtype=np.float64)
    cdef double[::1] hist = hist_arr
    cdef long long half = n_conf >> 1
    cdef unsigned long long mask = <unsigned long long> (n_conf - 1)
    cdef long long c1, c2
    cdef double e1
    with nogil:
        for c in range(n_conf):
            ew[c] = exp(-beta * en[c] - mmax)
        for c1 in range(n_conf):
            e1 = ew[c1]
            for c2 in range(half):
                m = EAG_POPCNT((<unsigned long long> c1) ^ (<unsigned long long> c2))
                hist[n - m] += e1 * ew[c2] * ctab[m]
                hist[m] += e1 * ew[(<unsigned long long> c2) ^ mask] * ctab[n - m]
    return hist_arr


def mc_sweeps(s1, s2, nbr_off, nbr_site, nbr_j, h_eff, double beta, double lam,
              uniforms, out_r):
    """Metropolis sweeps on the coupled two-replica system; see pure backend."""
    cdef signed char[::1] a = s1
    cdef signed char[::1] b = s2
    cdef const int[::1] off = np.ascontiguousarray(nbr_off, dtype=np.intc)
    cdef const int[::1] site = np.ascontiguousarray(nbr_site, dtype=np.intc)
    cdef const double[::1] jn = np.ascontiguousarray(nbr_j, dtype=np.float64)
    cdef const double[::1] h = np.ascontiguousarray(h_eff, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef double[::1] r_out = out_r
    cdef int n = a.shape[0]
    cdef long long n_sweeps = r_out.shape[0]
    if u.shape[0] != 2 * n * n_sweeps:
        raise ValueError("uniforms length must be 2 * n_sites * n_sweeps")

    cdef long long ov = 0, sw, iu = 0
    cdef int i, p, si
    cdef long long n_accept = 0
    cdef double loc, de, uu
    with nogil:
        for i in range(n):
            ov += a[i] * b[i]
        for sw in range(n_sweeps):
            for i in range(n):
                si = a[i]
                loc = h[i]
                for p in range(off[i], off[i + 1]):
                    loc += jn[p] * a[site[p]]
                de = 2.0 * si * loc + 2.0 * lam * si * b[i]
                uu = u[iu]
                iu += 1
                if de <= 0.0 or uu < exp(-beta * de):
                    a[i] = -si
                    ov += 2 * a[i] * b[i]
                    n_accept += 1

                si = b[i]
                loc = h[i]
                for p in range(off[i], off[i + 1]):
                    loc += jn[p] * b[site[p]]
                de = 2.0 * si * loc + 2.0 * lam * si * a[i]
                uu = u[iu]
                iu += 1
                if de <= 0.0 or uu < exp(-beta * de):
                    b[i] = -si
                    ov += 2 * a[i] * b[i]
                    n_accept += 1
            r_out[sw] = (<double> ov) / n
    return n_accept
