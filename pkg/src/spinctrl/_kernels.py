"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The compiled path is used by default whenever numba imports cleanly.  Set
``SPINCTRL_PURE_NUMPY=1`` to force the numpy implementations (useful for
debugging and as a reference in benchmarks; see ``benchmarks/bench_kernels.py``).

All chain operators handled here are real symmetric in the computational
basis, so eigendecompositions run in real arithmetic and states are carried
as split real/imaginary pairs inside the compiled loops.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FORCE_NUMPY = os.environ.get("SPINCTRL_PURE_NUMPY", "").strip().lower() in {
    "1", "true", "yes", "on",
}

if not _FORCE_NUMPY:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USING_NUMBA = False
else:
    USING_NUMBA = False


# ---------------------------------------------------------------------------
# fixed-popcount enumeration (Gosper's hack); shared source for both paths
# ---------------------------------------------------------------------------

def _gosper_configs(dim, first):
    out = np.empty(dim, dtype=np.int64)
    v = first
    for i in range(dim):
        out[i] = v
        t = (v | (v - 1)) + 1
        v = t | ((((t & -t) // (v & -v)) >> 1) - 1)
    return out


# ---------------------------------------------------------------------------
# Heisenberg drift assembly on a fixed-excitation basis
# ---------------------------------------------------------------------------
# configs are sorted int64 bit patterns with spin 1 in the most significant
# of the n_spins bits.  bond_w[k] = 1 + eps_k for the bond (k+1, k+2).
# Aligned neighbours contribute +w to the diagonal, antiparallel ones -w plus
# an off-diagonal 2w to the configuration with the pair swapped.

def _h0_fill_loops(configs, n_spins, bond_w, h):
    dim = configs.shape[0]
    for i in range(dim):
        c = configs[i]
        diag = 0.0
        for k in range(n_spins - 1):
            hi = n_spins - 1 - k
            lo = n_spins - 2 - k
            b1 = (c >> hi) & 1
            b2 = (c >> lo) & 1
            if b1 == b2:
                diag += bond_w[k]
            else:
                diag -= bond_w[k]
                swapped = c ^ ((1 << hi) | (1 << lo))
                a = 0
                b = dim
                while a < b:  # binary search; sorted configs
                    mid = (a + b) >> 1
                    if configs[mid] < swapped:
                        a = mid + 1
                    else:
                        b = mid
                h[i, a] = 2.0 * bond_w[k]
        h[i, i] = diag


def _h0_fill_np(configs, n_spins, bond_w, h):
    dim = configs.shape[0]
    diag = np.zeros(dim)
    for k in range(n_spins - 1):
        hi = n_spins - 1 - k
        lo = n_spins - 2 - k
        b1 = (configs >> hi) & 1
        b2 = (configs >> lo) & 1
        aligned = b1 == b2
        diag += np.where(aligned, bond_w[k], -bond_w[k])
        idx = np.nonzero(~aligned)[0]
        swapped = configs[idx] ^ ((1 << hi) | (1 << lo))
        h[idx, np.searchsorted(configs, swapped)] = 2.0 * bond_w[k]
    h[np.arange(dim), np.arange(dim)] = diag


# ---------------------------------------------------------------------------
# piecewise-constant pulse propagation
# ---------------------------------------------------------------------------

def _pulse_states_loops(h0, h1, j_coupling, amps, dt, xr, xi):
    d = h0.shape[0]
    r = xr.shape[1]
    ham = np.empty((d, d))
    for m in range(amps.shape[0]):
        for a in range(d):
            for b in range(d):
                ham[a, b] = j_coupling * h0[a, b] + amps[m] * h1[a, b]
        lam, vec = np.linalg.eigh(ham)
        yr = vec.T @ xr
        yi = vec.T @ xi
        for jj in range(d):
            c = math.cos(lam[jj] * dt)
            s = math.sin(lam[jj] * dt)
            for k in range(r):
                ar = yr[jj, k]
                ai = yi[jj, k]
                yr[jj, k] = ar * c + ai * s
                yi[jj, k] = ai * c - ar * s
        xr = vec @ yr
        xi = vec @ yi
    return xr, xi


def _pulse_states_np(h0, h1, j_coupling, amps, dt, x):
    for b_amp in amps:
        lam, vec = np.linalg.eigh(j_coupling * h0 + b_amp * h1)
        x = vec @ (np.exp(-1j * dt * lam)[:, None] * (vec.T @ x))
    return x


def _pulse_traj_loops(h0, h1, j_coupling, amps, dt, xr, xi, outr, outi):
    d = h0.shape[0]
    r = xr.shape[1]
    outr[0] = xr
    outi[0] = xi
    ham = np.empty((d, d))
    for m in range(amps.shape[0]):
        for a in range(d):
            for b in range(d):
                ham[a, b] = j_coupling * h0[a, b] + amps[m] * h1[a, b]
        lam, vec = np.linalg.eigh(ham)
        yr = vec.T @ xr
        yi = vec.T @ xi
        for jj in range(d):
            c = math.cos(lam[jj] * dt)
            s = math.sin(lam[jj] * dt)
            for k in range(r):
                ar = yr[jj, k]
                ai = yi[jj, k]
                yr[jj, k] = ar * c + ai * s
                yi[jj, k] = ai * c - ar * s
        xr = vec @ yr
        xi = vec @ yi
        outr[m + 1] = xr
        outi[m + 1] = xi


# ---------------------------------------------------------------------------
# objective and exact gradient for K = sum_k w_k <psi_k|A|psi_k>
# ---------------------------------------------------------------------------
# Forward sweep stores the per-step spectral data; the backward sweep
# reconstructs earlier states unitarily, so memory stays O(p d^2).
# The derivative of each step exponential enters through the divided
# difference of exp(-i lam dt), written in the numerically stable form
#   Gamma_jk = -dt * sinc(de) * (sin(mu) + i cos(mu)),
# de = (lam_j - lam_k) dt/2, mu = (lam_j + lam_k) dt/2, which reduces to the
# exact degenerate limit -i dt e^{-i lam dt} as de -> 0.

def _sinc(x):
    if abs(x) < 1e-8:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


def _obj_grad_loops(h0, h1, a_op, j_coupling, amps, dt, xr, xi, w):
    p = amps.shape[0]
    d = h0.shape[0]
    r = xr.shape[1]
    lams = np.empty((p, d))
    vecs = np.empty((p, d, d))
    ham = np.empty((d, d))
    for m in range(p):
        for a in range(d):
            for b in range(d):
                ham[a, b] = j_coupling * h0[a, b] + amps[m] * h1[a, b]
        lam, vec = np.linalg.eigh(ham)
        lams[m] = lam
        vecs[m] = vec
        yr = vec.T @ xr
        yi = vec.T @ xi
        for jj in range(d):
            c = math.cos(lam[jj] * dt)
            s = math.sin(lam[jj] * dt)
            for k in range(r):
                ar = yr[jj, k]
                ai = yi[jj, k]
                yr[jj, k] = ar * c + ai * s
                yi[jj, k] = ai * c - ar * s
        xr = vec @ yr
        xi = vec @ yi

    ayr = a_op @ xr
    ayi = a_op @ xi
    objective = 0.0
    for k in range(r):
        acc = 0.0
        for jj in range(d):
            acc += xr[jj, k] * ayr[jj, k] + xi[jj, k] * ayi[jj, k]
        objective += w[k] * acc

    grad = np.zeros(p)
    yr = ayr
    yi = ayi
    gr = np.empty((d, d))
    gi = np.empty((d, d))
    for m in range(p - 1, -1, -1):
        vec = vecs[m]
        lam = lams[m]
        xer = vec.T @ xr
        xei = vec.T @ xi
        yer = vec.T @ yr
        yei = vec.T @ yi
        # rotate x to its value before step m (eigenbasis coordinates)
        for jj in range(d):
            c = math.cos(lam[jj] * dt)
            s = math.sin(lam[jj] * dt)
            for k in range(r):
                ar = xer[jj, k]
                ai = xei[jj, k]
                xer[jj, k] = ar * c - ai * s
                xei[jj, k] = ai * c + ar * s
        ctrl = vec.T @ (h1 @ vec)
        for jj in range(d):
            for kk in range(d):
                mu = 0.5 * (lam[jj] + lam[kk]) * dt
                de = 0.5 * (lam[jj] - lam[kk]) * dt
                pref = -dt * _sinc(de) * ctrl[jj, kk]
                gr[jj, kk] = pref * math.sin(mu)
                gi[jj, kk] = pref * math.cos(mu)
        tr = gr @ xer - gi @ xei
        ti = gr @ xei + gi @ xer
        g = 0.0
        for k in range(r):
            acc = 0.0
            for jj in range(d):
                acc += yer[jj, k] * tr[jj, k] + yei[jj, k] * ti[jj, k]
            g += w[k] * acc
        grad[m] = 2.0 * g
        xr = vec @ xer
        xi = vec @ xei
        for jj in range(d):
            c = math.cos(lam[jj] * dt)
            s = math.sin(lam[jj] * dt)
            for k in range(r):
                ar = yer[jj, k]
                ai = yei[jj, k]
                yer[jj, k] = ar * c - ai * s
                yei[jj, k] = ai * c + ar * s
        yr = vec @ yer
        yi = vec @ yei
    return objective, grad


def _obj_grad_np(h0, h1, a_op, j_coupling, amps, dt, x, w):
    p = len(amps)
    d = h0.shape[0]
    lams = np.empty((p, d))
    vecs = np.empty((p, d, d))
    for m in range(p):
        lam, vec = np.linalg.eigh(j_coupling * h0 + amps[m] * h1)
        lams[m] = lam
        vecs[m] = vec
        x = vec @ (np.exp(-1j * dt * lam)[:, None] * (vec.T @ x))

    ax = a_op @ x
    objective = float(np.sum(w * np.einsum("jk,jk->k", x.conj(), ax).real))

    grad = np.zeros(p)
    y = ax
    for m in range(p - 1, -1, -1):
        vec = vecs[m]
        lam = lams[m]
        back = np.exp(1j * dt * lam)[:, None]
        xe = back * (vec.T @ x)
        ye = vec.T @ y
        ctrl = vec.T @ (h1 @ vec)
        mu = 0.5 * dt * (lam[:, None] + lam[None, :])
        de = 0.5 * dt * (lam[:, None] - lam[None, :])
        small = np.abs(de) < 1e-8
        de_safe = np.where(small, 1.0, de)
        sc = np.where(small, 1.0 - de * de / 6.0, np.sin(de_safe) / de_safe)
        gam = (-dt * sc * ctrl) * (np.sin(mu) + 1j * np.cos(mu))
        t = gam @ xe
        grad[m] = 2.0 * float(np.sum(w * np.einsum("jk,jk->k", ye.conj(), t).real))
        x = vec @ xe
        y = vec @ (back * ye)
    return objective, grad


# ---------------------------------------------------------------------------
# RK4 stepping of dephasing dynamics within one constant-field segment
# ---------------------------------------------------------------------------
# Shared source: vectorized numpy is also valid numba.  ``decay`` is the real
# elementwise dephasing matrix gamma * (sum_i z_i(c) z_i(c') - |S|).

def _rk4_dephasing(ham, rho, decay, dt, nsub):
    for _ in range(nsub):
        k1 = -1j * (ham @ rho - rho @ ham) + decay * rho
        r2 = rho + (0.5 * dt) * k1
        k2 = -1j * (ham @ r2 - r2 @ ham) + decay * r2
        r3 = rho + (0.5 * dt) * k2
        k3 = -1j * (ham @ r3 - r3 @ ham) + decay * r3
        r4 = rho + dt * k3
        k4 = -1j * (ham @ r4 - r4 @ ham) + decay * r4
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


# ---------------------------------------------------------------------------
# path selection and public wrappers
# ---------------------------------------------------------------------------

if USING_NUMBA:
    _gosper_impl = njit(cache=True)(_gosper_configs)
    _h0_impl = njit(cache=True)(_h0_fill_loops)
    _pulse_impl = njit(cache=True, nogil=True)(_pulse_states_loops)
    _traj_impl = njit(cache=True, nogil=True)(_pulse_traj_loops)
    _sinc = njit(cache=True, inline="always")(_sinc)
    _obj_grad_impl = njit(cache=True, nogil=True)(_obj_grad_loops)
    _rk4_impl = njit(cache=True, nogil=True)(_rk4_dephasing)
else:
    _gosper_impl = _gosper_configs
    _h0_impl = _h0_fill_np
    _rk4_impl = _rk4_dephasing


def configs_fixed_popcount(n_spins: int, n_exc: int, dim: int) -> np.ndarray:
    """All n_spins-bit patterns with n_exc set bits, ascending as integers."""
    if n_exc == 0:
        return np.zeros(1, dtype=np.int64)
    return _gosper_impl(dim, (1 << n_exc) - 1)


def h0_dense(configs: np.ndarray, n_spins: int, bond_w: np.ndarray) -> np.ndarray:
    """Heisenberg drift matrix (J factored out) on the given basis."""
    configs = np.ascontiguousarray(configs, dtype=np.int64)
    bond_w = np.ascontiguousarray(bond_w, dtype=np.float64)
    h = np.zeros((len(configs), len(configs)))  # calloc: cheap even when large
    _h0_impl(configs, n_spins, bond_w, h)
    return h


def _as_real_pair(x):
    x = np.asarray(x, dtype=np.complex128)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    return (np.ascontiguousarray(x.real), np.ascontiguousarray(x.imag), squeeze)


def pulse_states(h0, h1, j_coupling, amps, dt, x):
    """Propagate state columns through every pulse step; returns the final x."""
    amps = np.ascontiguousarray(amps, dtype=np.float64)
    if USING_NUMBA:
        xr, xi, squeeze = _as_real_pair(x)
        xr, xi = _pulse_impl(h0, h1, j_coupling, amps, dt, xr, xi)
        out = xr + 1j * xi
        return out[:, 0] if squeeze else out
    x = np.asarray(x, dtype=np.complex128)
    squeeze = x.ndim == 1
    out = _pulse_states_np(h0, h1, j_coupling, amps, dt, x[:, None] if squeeze else x)
    return out[:, 0] if squeeze else out


def pulse_states_traj(h0, h1, j_coupling, amps, dt, x):
    """Like :func:`pulse_states` but returns the state after every step.

    Output shape is ``(p + 1, dim)`` for vector input (``(p + 1, dim, r)``
    otherwise), with the initial state in row 0.
    """
    amps = np.ascontiguousarray(amps, dtype=np.float64)
    x = np.asarray(x, dtype=np.complex128)
    squeeze = x.ndim == 1
    xm = x[:, None] if squeeze else x
    p = len(amps)
    if USING_NUMBA:
        xr = np.ascontiguousarray(xm.real)
        xi = np.ascontiguousarray(xm.imag)
        outr = np.empty((p + 1,) + xm.shape)
        outi = np.empty((p + 1,) + xm.shape)
        _traj_impl(h0, h1, j_coupling, amps, dt, xr, xi, outr, outi)
        out = outr + 1j * outi
    else:
        out = np.empty((p + 1,) + xm.shape, dtype=np.complex128)
        out[0] = xm
        for m in range(p):
            out[m + 1] = _pulse_states_np(h0, h1, j_coupling, amps[m:m + 1], dt, out[m])
    return out[:, :, 0] if squeeze else out


def objective_gradient(h0, h1, a_op, j_coupling, amps, dt, x0, w):
    """Weighted projector expectation after the pulse and its exact gradient.

    ``x0`` holds initial state columns, ``w`` their (non-negative) weights.
    Returns ``(K, dK/dB_m)`` with the gradient exact at machine precision for
    the piecewise-constant propagation (no first-order-in-dt approximation).
    """
    amps = np.ascontiguousarray(amps, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.complex128)
    if x0.ndim == 1:
        x0 = x0[:, None]
    w = np.ascontiguousarray(w, dtype=np.float64)
    if USING_NUMBA:
        xr = np.ascontiguousarray(x0.real)
        xi = np.ascontiguousarray(x0.imag)
        return _obj_grad_impl(h0, h1, a_op, j_coupling, amps, dt, xr, xi, w)
    return _obj_grad_np(h0, h1, a_op, j_coupling, amps, dt, x0.copy(), w)


def rk4_dephasing(ham, rho, decay, dt, nsub):
    """Fourth-order fixed-step integration of one constant-field segment."""
    ham = np.ascontiguousarray(ham, dtype=np.complex128)
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    decay = np.ascontiguousarray(decay, dtype=np.float64)
    return _rk4_impl(ham, rho, decay, dt, nsub)
