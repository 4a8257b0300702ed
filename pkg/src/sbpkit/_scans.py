"""Kernel scan machinery for the radial potential integrals.

The field potential is a difference of two radial convolutions,

    φ(r) = ∫ K(r, s) m(s) 4πs² ds,     m = u²,

whose kernels factor across the diagonal (min/max structure), so each
evaluation reduces to prefix and suffix integrals in r.  This module turns
nodal samples of the integrand into those cumulative integrals with

* per interval, the quadratic interpolant through the three nodes of the
  surrounding interval pair (first one or two intervals: the linear
  interpolant), integrated in closed form, which keeps the composite rule
  fourth order;
* for the screened kernel, closed-form moments of e^{-μτ} against that
  interpolant, followed by a damped running sum

      S_{i+1} = e^{-μ h_i} S_i + local_i ,

  so no exponential of a positive argument is ever formed and the recursion
  is unconditionally stable for arbitrarily large μ.

Every map here is linear in the integrand samples, and each has its exact
transpose (the reversed scan), which the energy module uses to assemble
exact gradients of the discrete coupling functional.  The damped scans are
tiny sequential loops and run under numba.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from numba import njit
from numpy.typing import NDArray

FOUR_PI = 4.0 * np.pi
TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# exponential moments  E_j(y) = ∫_0^1 x^j e^{-y x} dx,  y >= 0


def _exp_moments(y: NDArray[np.float64]) -> tuple[NDArray[np.float64], ...]:
    y = np.asarray(y, dtype=np.float64)
    small = y < 1.0
    E = [np.empty_like(y) for _ in range(3)]
    if np.any(small):
        ys = y[small]
        for j in range(3):
            # series sum_k (-y)^k / (k! (k+j+1)), 26 terms is plenty below y=1
            acc = np.zeros_like(ys)
            term = np.ones_like(ys)
            for k in range(26):
                acc += term / (k + j + 1)
                term *= -ys / (k + 1)
            E[j][small] = acc
    big = ~small
    if np.any(big):
        yb = y[big]
        e = np.exp(-yb)
        E[0][big] = (1.0 - e) / yb
        E[1][big] = (1.0 - e * (1.0 + yb)) / yb ** 2
        E[2][big] = (2.0 - e * (2.0 + yb * (2.0 + yb))) / yb ** 3
    return E[0], E[1], E[2]


# ---------------------------------------------------------------------------
# interval -> interpolant coefficient tables


def _interval_triples(n: int) -> tuple[int, NDArray[np.intp]]:
    """Assign each interval its interpolation triple (left node index).

    Returns (k0, t0) where intervals below k0 use the linear rule and
    interval k >= k0 interpolates on nodes (t0[k], t0[k]+1, t0[k]+2).
    """
    m = n - 1
    k0 = 1 if m % 2 == 1 else 2
    t0 = np.zeros(m, dtype=np.intp)
    ks = np.arange(k0, m)
    t0[ks] = k0 + 2 * ((ks - k0) // 2)
    return k0, t0


def _newton_coeff_rows(r, i0, i1, i2, anchor):
    """Coefficient 3-vectors (over F[i0], F[i1], F[i2]) of the Newton form

        Q(s) = c0 + c1 (s - anchor) + c2 (s - anchor)^2

    of the quadratic through (r[i0],F0), (r[i1],F1), (r[i2],F2).
    Returns arrays C0, C1, C2 of shape (len(anchor), 3).
    """
    t0, t1, t2 = r[i0], r[i1], r[i2]
    h01 = t1 - t0
    h12 = t2 - t1
    span = t2 - t0
    z = np.zeros_like(t0)
    one = np.ones_like(t0)
    # divided difference d01 over (F0, F1)
    D01 = np.stack([-1.0 / h01, 1.0 / h01, z], axis=1)
    # second divided difference q2 over (F0, F1, F2)
    Q2 = np.stack([1.0 / (h01 * span), -(1.0 / h12 + 1.0 / h01) / span, 1.0 / (h12 * span)], axis=1)
    da = anchor - t0
    db = anchor - t1
    C2 = Q2
    C1 = D01 + (da + db)[:, None] * Q2
    C0 = np.stack([one, z, z], axis=1) + da[:, None] * D01 + (da * db)[:, None] * Q2
    return C0, C1, C2


def _linear_coeff_rows(r, i0, i1, anchor):
    """Same, for the linear interpolant on [r[i0], r[i1]] (c2 = 0)."""
    h = r[i1] - r[i0]
    D01 = np.stack([-1.0 / h, 1.0 / h], axis=1)
    C0 = np.stack([np.ones_like(h), np.zeros_like(h)], axis=1) + (anchor - r[i0])[:, None] * D01
    return C0, D01


def _assemble(rows, cols, data, shape) -> sp.csr_matrix:
    mat = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=shape)
    mat.sum_duplicates()
    return mat


def _local_matrices(grid, mu: float | None):
    """Sparse maps from nodal integrand samples to per-interval integrals.

    mu None  -> L with  (L F)_k = ∫_{r_k}^{r_{k+1}} Q(s) ds
    mu > 0   -> (L_in, L_out) with damping e^{-μ(r_{k+1}-s)} resp.
                e^{-μ(s-r_k)} under the integral.
    """
    r = grid.r
    n = r.size
    m = n - 1
    k0, t0 = _interval_triples(n)
    ell = np.diff(r)

    if mu is None:
        w0, w1, w2 = ell, ell ** 2 / 2.0, ell ** 3 / 3.0
        specs = [("plain", r[:-1], w0, w1, w2, +1.0)]
    else:
        y = mu * ell
        E0, E1, E2 = _exp_moments(y)
        w0, w1, w2 = ell * E0, ell ** 2 * E1, ell ** 3 * E2
        # anchored at the right end the integrand is Q(β-τ), flipping the
        # sign of the linear Newton term
        specs = [("in", r[1:], w0, w1, w2, -1.0), ("out", r[:-1], w0, w1, w2, +1.0)]

    out = []
    for _name, anchor, u0, u1, u2, sgn in specs:
        rows_l, cols_l, data_l = [], [], []
        # linear head intervals
        ks = np.arange(k0)
        C0, C1 = _linear_coeff_rows(r, ks, ks + 1, anchor[ks])
        vals = C0 * u0[ks, None] + sgn * C1 * u1[ks, None]
        for j, off in enumerate((0, 1)):
            rows_l.append(ks)
            cols_l.append(ks + off)
            data_l.append(vals[:, j])
        # quadratic body intervals
        ks = np.arange(k0, m)
        if ks.size:
            i0 = t0[ks]
            C0, C1, C2 = _newton_coeff_rows(r, i0, i0 + 1, i0 + 2, anchor[ks])
            vals = C0 * u0[ks, None] + sgn * C1 * u1[ks, None] + C2 * u2[ks, None]
            for j in range(3):
                rows_l.append(ks)
                cols_l.append(i0 + j)
                data_l.append(vals[:, j])
        out.append(_assemble(rows_l, cols_l, data_l, (m, n)))
    return out[0] if mu is None else (out[0], out[1])


def _plain_matrix(grid) -> sp.csr_matrix:
    mat = grid._kernel_cache.get("plain")
    if mat is None:
        mat = _local_matrices(grid, None)
        grid._kernel_cache["plain"] = mat
    return mat


def _yukawa_matrices(grid, mu: float):
    key = ("yukawa", float(mu))
    entry = grid._kernel_cache.get(key)
    if entry is None:
        lin, lout = _local_matrices(grid, mu)
        dec = np.exp(-mu * np.diff(grid.r))
        entry = (lin, lout, dec)
        grid._kernel_cache[key] = entry
    return entry


# ---------------------------------------------------------------------------
# damped scans (numba) and their exact transposes


@njit(cache=True)
def _scan_prefix(dec, loc):
    n = loc.size + 1
    out = np.zeros(n)
    for i in range(n - 1):
        out[i + 1] = dec[i] * out[i] + loc[i]
    return out


@njit(cache=True)
def _scan_prefix_t(dec, v):
    n = v.size
    adj = np.zeros(n - 1)
    b = v[n - 1]
    for k in range(n - 2, -1, -1):
        adj[k] = b
        b = v[k] + dec[k] * b
    return adj


@njit(cache=True)
def _scan_suffix(dec, loc):
    n = loc.size + 1
    out = np.zeros(n)
    for i in range(n - 2, -1, -1):
        out[i] = dec[i] * out[i + 1] + loc[i]
    return out


@njit(cache=True)
def _scan_suffix_t(dec, v):
    n = v.size
    adj = np.zeros(n - 1)
    a = v[0]
    adj[0] = a
    for k in range(1, n - 1):
        a = v[k] + dec[k - 1] * a
        adj[k] = a
    return adj


def _cumulative(grid, F: NDArray[np.float64]) -> NDArray[np.float64]:
    """C_i = ∫_0^{r_i} of the piecewise interpolant of F."""
    loc = _plain_matrix(grid) @ F
    out = np.zeros(grid.n)
    np.cumsum(loc, out=out[1:])
    return out

def _cumulative_t(grid, v: NDArray[np.float64]) -> NDArray[np.float64]:
    s = np.cumsum(v[::-1])[::-1]
    return _plain_matrix(grid).T @ s[1:]


# ---------------------------------------------------------------------------
# Coulomb kernel:  φ(r) = 4π [ (1/r) ∫_0^r s² m ds + ∫_r^∞ s m ds ]


def coulomb_apply(grid, m_vals: NDArray[np.float64]) -> NDArray[np.float64]:
    r = grid.r
    C2 = _cumulative(grid, r * r * m_vals)
    C1 = _cumulative(grid, r * m_vals)
    tot = C1[-1]
    phi = np.empty(grid.n)
    phi[0] = FOUR_PI * tot
    phi[1:] = FOUR_PI * (C2[1:] / r[1:] + (tot - C1[1:]))
    return phi


def coulomb_apply_t(grid, v: NDArray[np.float64]) -> NDArray[np.float64]:
    r = grid.r
    s2 = np.zeros(grid.n)
    s2[1:] = FOUR_PI * v[1:] / r[1:]
    s1 = np.zeros(grid.n)
    s1[1:] = -FOUR_PI * v[1:]
    s1[-1] += FOUR_PI * np.sum(v)  # every node sees the total  C1[-1]
    return r * r * _cumulative_t(grid, s2) + r * _cumulative_t(grid, s1)


# ---------------------------------------------------------------------------
# screened (Yukawa) kernel
#
#   φ(r) = (2π/μr) ∫_0^∞ s m(s) [ e^{-μ|r-s|} - e^{-μ(r+s)} ] ds
#
# split into the prefix scan (s < r), the suffix scan (s > r) and the image
# term e^{-μr} ∫ s m e^{-μs} ds, which is the suffix scan at r = 0.


def yukawa_apply(grid, mu: float, m_vals: NDArray[np.float64]) -> NDArray[np.float64]:
    r = grid.r
    lin, lout, dec = _yukawa_matrices(grid, mu)
    F = r * m_vals
    sin = _scan_prefix(dec, lin @ F)
    sout = _scan_suffix(dec, lout @ F)
    j0 = sout[0]
    phi = np.empty(grid.n)
    phi[0] = FOUR_PI * j0
    phi[1:] = TWO_PI / (mu * r[1:]) * (sin[1:] + sout[1:] - np.exp(-mu * r[1:]) * j0)
    return phi


def yukawa_apply_t(grid, mu: float, v: NDArray[np.float64]) -> NDArray[np.float64]:
    r = grid.r
    lin, lout, dec = _yukawa_matrices(grid, mu)
    c = np.zeros(grid.n)
    c[1:] = TWO_PI / (mu * r[1:]) * v[1:]
    vsin = c.copy()
    vsin[0] = 0.0
    vsout = c.copy()
    vsout[0] = FOUR_PI * v[0] - float(np.exp(-mu * r[1:]) @ c[1:])
    Fadj = lin.T @ _scan_prefix_t(dec, vsin) + lout.T @ _scan_suffix_t(dec, vsout)
    return r * Fadj
