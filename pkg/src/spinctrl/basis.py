"""Fixed-excitation computational bases for spin-1/2 chains.

A chain of ``n_spins`` sites decomposes into excitation sectors: the sector
with ``n_exc`` excitations is spanned by the computational states carrying
exactly ``n_exc`` spins in |1>.  Every operator in this package is expressed
on one such sector, using a single canonical ordering so matrices from
different modules always agree.

Conventions
-----------
A configuration is stored as an integer whose bits, read from most to least
significant of the ``n_spins`` used bits, give the states of spins
``1, 2, ..., n_spins``.  With spin 1 as the most significant position,
ascending integer order coincides with lexicographic order on the pattern
string, so ``|0011>`` is the first and ``|1100>`` the last configuration of
the (4, 2) sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import _kernels

MAX_SPINS = 24  # keeps every enumeration comfortably in memory

__all__ = [
    "SubspaceBasis",
    "EndPairPartition",
    "enumerate_basis",
    "end_pair_partition",
]


@dataclass(frozen=True)
class SubspaceBasis:
    """Ordered basis of one excitation sector.

    Attributes
    ----------
    n_spins : int
        Chain length.
    n_exc : int
        Number of excitations (set bits) in every configuration.
    configs : np.ndarray
        Sorted int64 bit patterns, spin 1 in the most significant position.
    """

    n_spins: int
    n_exc: int
    configs: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.configs)

    def spin_state(self, config: int, k: int) -> int:
        """State (0 or 1) of spin ``k`` (1-based) in ``config``."""
        return (int(config) >> (self.n_spins - k)) & 1

    def rank(self, config: int) -> int:
        """Index of ``config`` in this basis (combinatorial ranking, O(n_spins))."""
        config = int(config)
        if config < 0 or config >= (1 << self.n_spins):
            raise ValueError(f"configuration {config} outside {self.n_spins}-bit range")
        if config.bit_count() != self.n_exc:
            raise ValueError(
                f"configuration {config:0{self.n_spins}b} has "
                f"{config.bit_count()} excitations, expected {self.n_exc}"
            )
        # ascending integer order on fixed popcount is the combinatorial
        # number system: rank = sum_j C(p_j, j) over set bit positions
        # p_1 < p_2 < ... counted from the least significant bit.
        r = 0
        j = 0
        c = config
        while c:
            pos = (c & -c).bit_length() - 1
            j += 1
            r += comb(pos, j)
            c &= c - 1
        return r

    def unrank(self, index: int) -> int:
        """Configuration at position ``index``; inverse of :meth:`rank`."""
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside [0, {self.dim})")
        return int(self.configs[index])

    def label(self, index: int) -> str:
        """Pattern string of the configuration at ``index``, spin 1 first."""
        return format(int(self.configs[index]), f"0{self.n_spins}b")

    def from_label(self, pattern: str) -> int:
        """Configuration integer for a pattern string like ``"0011"``."""
        if len(pattern) != self.n_spins or set(pattern) - {"0", "1"}:
            raise ValueError(f"pattern {pattern!r} is not a {self.n_spins}-bit string")
        return int(pattern, 2)

    def z_values(self, k: int) -> np.ndarray:
        """Diagonal of Z on spin ``k``: +1 for |0>, -1 for |1>, per config."""
        bits = (self.configs >> (self.n_spins - k)) & 1
        return 1.0 - 2.0 * bits


def enumerate_basis(n_spins: int, n_exc: int) -> SubspaceBasis:
    """Enumerate the ``n_exc``-excitation sector of an ``n_spins`` chain."""
    if not 2 <= n_spins <= MAX_SPINS:
        raise ValueError(f"n_spins must be in [2, {MAX_SPINS}], got {n_spins}")
    if not 0 <= n_exc <= n_spins:
        raise ValueError(f"n_exc must be in [0, {n_spins}], got {n_exc}")
    dim = comb(n_spins, n_exc)
    configs = _kernels.configs_fixed_popcount(n_spins, n_exc, dim)
    return SubspaceBasis(n_spins=n_spins, n_exc=n_exc, configs=configs)


@dataclass(frozen=True)
class EndPairPartition:
    """Basis indices grouped by the joint state of the two end spins.

    For each value pair ``(s1, sN)`` the partition holds the indices of all
    configurations whose end spins take that value, together with the induced
    interior pattern (spins 2..N-1 as an integer, spin 2 most significant).
    Interior arrays are ascending, which lets consumers align groups by
    shared interiors with a single sorted merge.
    """

    basis: SubspaceBasis
    indices: dict[tuple[int, int], np.ndarray]
    interiors: dict[tuple[int, int], np.ndarray]


def end_pair_partition(basis: SubspaceBasis) -> EndPairPartition:
    """Partition ``basis`` by the (spin 1, spin N) values."""
    n = basis.n_spins
    configs = basis.configs
    s1 = (configs >> (n - 1)) & 1
    sn = configs & 1
    interior = (configs >> 1) & ((1 << (n - 2)) - 1) if n > 2 else np.zeros_like(configs)
    indices = {}
    interiors = {}
    for a in (0, 1):
        for b in (0, 1):
            sel = np.nonzero((s1 == a) & (sn == b))[0]
            indices[(a, b)] = sel
            interiors[(a, b)] = interior[sel]
    return EndPairPartition(basis=basis, indices=indices, interiors=interiors)
