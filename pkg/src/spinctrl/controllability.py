"""Subspace controllability tests for the driven chain.

Two independent routes are provided: the dimension of the dynamical Lie
algebra generated by the drift and control (full dimension on an M-level
sector means every unitary is reachable), and a spectral sufficient
criterion (all transition frequencies over nonzero control couplings
distinct and nonzero, control connected in the drift eigenbasis).  The
criterion is sufficient but not necessary, so a failing criterion says
nothing about the Lie dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import SubspaceOperator

__all__ = [
    "LieAlgebraReport",
    "RegularityReport",
    "dynamical_lie_dimension",
    "strongly_regular_connected_check",
]

INDEPENDENCE_RTOL = 1e-9
FREQUENCY_RTOL = 1e-8


@dataclass(frozen=True)
class LieAlgebraReport:
    subspace_dim: int
    lie_dimension: int
    full_dimension: int  # M^2 for the unitary algebra on an M-level sector
    closed: bool  # False when the element cap stopped the closure early
    growth: tuple[int, ...]  # basis size after the generators and each round

    @property
    def controllable(self) -> bool:
        # u(M) and its traceless quotient su(M) both act transitively
        return self.closed and self.lie_dimension >= self.full_dimension - 1


@dataclass(frozen=True)
class RegularityReport:
    eigenvalues: np.ndarray = field(repr=False)
    control_in_eigenbasis: np.ndarray = field(repr=False)
    effectively_strongly_regular: bool
    connected: bool
    witness: str = ""

    @property
    def controllable_by_criterion(self) -> bool:
        return self.effectively_strongly_regular and self.connected


def _vectorize(mat: np.ndarray) -> np.ndarray:
    # skew-Hermitian matrices form a real vector space; Re/Im concatenation
    # turns Re tr(A^dag B) into the ordinary dot product
    return np.concatenate([mat.real.ravel(), mat.imag.ravel()])


def dynamical_lie_dimension(
    h0: SubspaceOperator,
    h1: SubspaceOperator,
    tol: float = INDEPENDENCE_RTOL,
    cap: int | None = None,
) -> LieAlgebraReport:
    """Dimension of the real Lie algebra generated by -i h0 and -i h1.

    Closure by iterated commutators with incremental orthonormalization:
    a candidate enters the basis when its residual after projection exceeds
    ``tol`` times its norm.  ``cap`` bounds the basis size (default M^2,
    which is also the closure bound); hitting the cap without closing is
    reported via ``closed=False``.
    """
    if not h0.same_basis(h1):
        raise ValueError("operators must share a basis")
    m = h0.dim
    full = m * m
    cap = full if cap is None else min(cap, full)

    elems: list[np.ndarray] = []
    ortho = np.empty((cap, 2 * m * m))  # orthonormal rows, filled incrementally

    def try_add(mat: np.ndarray) -> bool:
        vec = _vectorize(mat)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            return False
        k = len(elems)
        for _ in range(2):  # second pass keeps the basis orthonormal
            if k:
                vec = vec - ortho[:k].T @ (ortho[:k] @ vec)
        resid = np.linalg.norm(vec)
        if resid <= tol * norm:
            return False
        ortho[k] = vec / resid
        elems.append(mat)
        return True

    for gen in (h0.mat, h1.mat):
        try_add(-1j * np.asarray(gen, dtype=np.complex128))
    growth = [len(elems)]

    # Round r commutates each element new in round r-1 against every earlier
    # element, which visits each unordered pair exactly once overall.
    closed = True
    start = 0
    capped = False
    while True:
        end = len(elems)
        if start == end:
            break  # a full round added nothing: algebra is closed
        for i in range(max(start, 1), end):
            a = elems[i]
            for j in range(i):
                b = elems[j]
                try_add(a @ b - b @ a)
                if len(elems) >= cap:
                    capped = True
                    break
            if capped:
                break
        growth.append(len(elems))
        if capped:
            # remaining pairs unprocessed; only the full algebra u(M) is
            # known to be closed by maximality
            closed = len(elems) >= full
            break
        start = end
    return LieAlgebraReport(
        subspace_dim=m,
        lie_dimension=len(elems),
        full_dimension=full,
        closed=closed,
        growth=tuple(growth),
    )


def strongly_regular_connected_check(
    h0: SubspaceOperator,
    h1: SubspaceOperator,
    tol: float = FREQUENCY_RTOL,
) -> RegularityReport:
    """Spectral sufficient test: regular transition frequencies + connectivity.

    The control is rewritten in the drift eigenbasis; indices j, k are joined
    by an edge when the coupling ``b_jk`` is nonzero (relative threshold
    ``tol``).  The drift passes when every edge frequency ``e_j - e_k`` is
    nonzero and no two distinct ordered edges share a frequency, both within
    ``tol`` times the spectral range; connectivity is one graph component.
    """
    if not h0.same_basis(h1):
        raise ValueError("operators must share a basis")
    evals, vecs = np.linalg.eigh(np.asarray(h0.mat, dtype=np.complex128))
    b = vecs.conj().T @ np.asarray(h1.mat, dtype=np.complex128) @ vecs
    m = len(evals)
    spread = float(evals[-1] - evals[0]) or 1.0
    b_scale = float(np.max(np.abs(b))) or 1.0
    edges = np.abs(b) > tol * b_scale
    np.fill_diagonal(edges, False)

    # connectivity by traversal over the edge graph
    seen = np.zeros(m, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        j = stack.pop()
        for k in np.nonzero(edges[j])[0]:
            if not seen[k]:
                seen[k] = True
                stack.append(int(k))
    connected = bool(seen.all())

    esr = True
    witness = ""
    freq = {}
    for j in range(m):
        for k in range(m):
            if not edges[j, k]:
                continue
            w = float(evals[j] - evals[k])
            if abs(w) <= tol * spread:
                esr = False
                witness = f"zero transition frequency on edge ({j}, {k})"
                break
            key = round(w / (tol * spread))
            clash = freq.get(key) or freq.get(key - 1) or freq.get(key + 1)
            if clash is not None:
                esr = False
                witness = (
                    f"transition frequency collision: edges {clash} and ({j}, {k}) "
                    f"share w={w:.6g}"
                )
                break
            freq[key] = (j, k)
        if not esr:
            break
    if esr and not connected:
        comp = np.nonzero(~seen)[0]
        witness = f"control graph disconnected; unreached indices {comp.tolist()}"

    return RegularityReport(
        eigenvalues=evals,
        control_in_eigenbasis=b,
        effectively_strongly_regular=esr,
        connected=connected,
        witness=witness,
    )
