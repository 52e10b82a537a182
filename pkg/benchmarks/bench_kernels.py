#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs every hot kernel on representative problem sizes and prints one row
per (kernel, size) with both timings.  The numpy path is the same code the
package uses under SPINCTRL_PURE_NUMPY=1.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from spinctrl import _kernels
from spinctrl.basis import enumerate_basis
from spinctrl.hamiltonians import ChainSpec, build_h0, build_h1, build_target_observable


def _time(fn, repeat):
    fn()  # warm-up (and JIT compilation on the compiled path)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _row(name, size, fast, slow):
    ratio = slow / fast if fast > 0 else float("inf")
    print(f"{name:24s} {size:12s} {fast * 1e3:10.3f} {slow * 1e3:10.3f} {ratio:8.2f}x")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not _kernels.USING_NUMBA:
        print("numba path unavailable (SPINCTRL_PURE_NUMPY set or numba missing);")
        print("both columns below run the numpy implementations.\n")

    print(f"{'kernel':24s} {'size':12s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>9s}")

    rng = np.random.default_rng(0)
    for n_spins, n_exc in [(4, 2), (8, 4), (12, 6), (16, 8)]:
        basis = enumerate_basis(n_spins, n_exc)
        bond_w = np.ones(n_spins - 1)
        def _np_h0():
            out = np.zeros((basis.dim, basis.dim))
            _kernels._h0_fill_np(basis.configs, n_spins, bond_w, out)
            return out

        fast = _time(lambda: _kernels.h0_dense(basis.configs, n_spins, bond_w), args.repeat)
        slow = _time(_np_h0, args.repeat)
        _row("h0_dense", f"dim={basis.dim}", fast, slow)

    for n_spins in (4, 6, 8, 10):
        spec = ChainSpec(n_spins)
        n_exc = n_spins // 2
        h0 = build_h0(spec, n_exc).real_mat()
        h1 = build_h1(spec, n_exc).real_mat()
        a_op = build_target_observable(n_spins, n_exc).real_mat()
        dim = h0.shape[0]
        amps = rng.uniform(-1, 1, size=64)
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        x = psi[:, None]
        w = np.ones(1)

        fast = _time(lambda: _kernels.pulse_states(h0, h1, 1.0, amps, 0.1, psi), args.repeat)
        slow = _time(
            lambda: _kernels._pulse_states_np(h0, h1, 1.0, amps, 0.1, psi[:, None]), args.repeat
        )
        _row("pulse_states (p=64)", f"dim={dim}", fast, slow)

        fast = _time(
            lambda: _kernels.objective_gradient(h0, h1, a_op, 1.0, amps, 0.1, x, w), args.repeat
        )
        slow = _time(
            lambda: _kernels._obj_grad_np(h0, h1, a_op, 1.0, amps, 0.1, x.copy(), w), args.repeat
        )
        _row("objective_gradient", f"dim={dim}", fast, slow)

        rho = np.outer(psi, psi.conj())
        decay = -np.abs(rng.normal(size=(dim, dim)))
        np.fill_diagonal(decay, 0.0)
        decay = (decay + decay.T) / 2
        ham = (h0 + 0.3 * h1).astype(complex)
        fast = _time(lambda: _kernels.rk4_dephasing(ham, rho, decay, 0.01, 32), args.repeat)
        slow = _time(lambda: _kernels._rk4_dephasing(ham, rho, decay, 0.01, 32), args.repeat)
        _row("rk4_dephasing (32)", f"dim={dim}", fast, slow)


if __name__ == "__main__":
    main()
