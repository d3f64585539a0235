"""Unital *-algebras generated by matrices, commutants, and span queries.

An algebra is represented by an AlgebraBasis: a stack of matrices orthonormal
under the trace inner product <a, b> = tau(b* a). At finite dimension the
*-algebra generated by a set equals its double commutant, which the test suite
exercises as a cross-check of the two independent routes computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .matrix_core import DEFAULT_TOL, ToleranceConfig, as_matrix, identity, same_dim


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    """Orthonormal basis (trace inner product) of a unital *-subalgebra."""

    ambient_dim: int
    elements: np.ndarray  # (dim, n, n), tau-orthonormal

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def unit_rows(self) -> np.ndarray:
        """Basis as Frobenius-unit row vectors, shape (dim, n*n)."""
        n = self.ambient_dim
        return self.elements.reshape(self.dim, n * n) / math.sqrt(n)


class _SpanBuilder:
    """Growing orthonormal span with the relative-residual admission rule.

    A candidate joins the basis iff its residual after projection exceeds
    span_tol times the candidate's original Frobenius norm (modified
    Gram-Schmidt with re-orthogonalization).
    """

    def __init__(self, n: int, tol: float):
        self.n = n
        self.N = n * n
        self.tol = tol
        self._rows = np.zeros((64, self.N), dtype=np.complex128)
        self.dim = 0

    def _grow(self):
        if self.dim == self._rows.shape[0]:
            cap = min(max(2 * self.dim, 64), self.N)
            rows = np.zeros((cap, self.N), dtype=np.complex128)
            rows[: self.dim] = self._rows[: self.dim]
            self._rows = rows

    def q(self) -> np.ndarray:
        return self._rows[: self.dim]

    def absorb(self, cands: np.ndarray) -> int:
        """Absorb a stack of candidate vectors (m, N); returns count admitted."""
        C = np.ascontiguousarray(cands, dtype=np.complex128)
        norms0 = np.linalg.norm(C, axis=1)
        if self.dim:
            Q = self.q()
            R = C - (C @ Q.conj().T) @ Q
        else:
            R = C
        res = np.linalg.norm(R, axis=1)
        candidates = np.nonzero(res > self.tol * norms0)[0]
        added = 0
        for row in candidates:
            v = R[row]
            # re-orthogonalize against the full current span (twice)
            for _ in range(2):
                Q = self.q()
                if self.dim:
                    v = v - (np.conj(Q) @ v) @ Q
            r = float(np.linalg.norm(v))
            if r > self.tol * norms0[row]:
                self._grow()
                self._rows[self.dim] = v / r
                self.dim += 1
                added += 1
                if self.dim == self.N:
                    break
        return added

    def tau_orthonormal(self) -> np.ndarray:
        n = self.n
        return (self.q() * math.sqrt(n)).reshape(self.dim, n, n)


_PRODUCT_CHUNK = 1024


def generate(
    generators,
    cfg: ToleranceConfig = DEFAULT_TOL,
    ambient_dim: int | None = None,
) -> AlgebraBasis:
    """Smallest unital *-algebra containing the generators.

    Seeds the span with I, the generators, and their adjoints, then repeatedly
    multiplies all current basis pairs and absorbs new directions until the
    span is stable. An empty generator list yields the scalars (ambient_dim
    must then be given). Stops early once the span is all of M_n.
    """
    gens = [as_matrix(g) for g in generators]
    if gens:
        n = same_dim(*gens)
        if ambient_dim is not None and ambient_dim != n:
            raise DimensionMismatch(
                f"ambient_dim {ambient_dim} does not match generators of dim {n}"
            )
    else:
        if ambient_dim is None:
            raise DimensionMismatch("ambient_dim is required for an empty generator list")
        n = ambient_dim
    N = n * n

    builder = _SpanBuilder(n, cfg.span_tol)
    seed = [identity(n)] + gens + [g.conj().T for g in gens]
    builder.absorb(np.stack([m.reshape(N) for m in seed]))

    while builder.dim < N:
        start_dim = builder.dim
        basis = builder.q().reshape(start_dim, n, n)
        stop = False
        for i in range(start_dim):
            products = np.matmul(basis[i], basis).reshape(start_dim, N)
            for lo in range(0, start_dim, _PRODUCT_CHUNK):
                builder.absorb(products[lo : lo + _PRODUCT_CHUNK])
                if builder.dim == N:
                    stop = True
                    break
            if stop:
                break
        if stop or builder.dim == start_dim:
            break

    return AlgebraBasis(ambient_dim=n, elements=builder.tau_orthonormal())


def full_matrix_basis(n: int) -> AlgebraBasis:
    """Tau-orthonormal basis of all of M_n (scaled elementary matrices)."""
    elements = math.sqrt(n) * np.eye(n * n, dtype=np.complex128).reshape(n * n, n, n)
    return AlgebraBasis(ambient_dim=n, elements=elements)


def _generator_list(a, cfg: ToleranceConfig):
    if isinstance(a, AlgebraBasis):
        return a.ambient_dim, [a.elements[i] for i in range(a.dim)]
    gens = [as_matrix(g) for g in a]
    if not gens:
        raise DimensionMismatch("commutant of an empty list needs an AlgebraBasis or matrices")
    return same_dim(*gens), gens


def commutant(a, cfg: ToleranceConfig = DEFAULT_TOL) -> AlgebraBasis:
    """Algebra of all x commuting with every generator (and every adjoint).

    Computed as the joint null space of the linear maps x -> xg - gx on the
    n^2-dimensional matrix space. Adjoints are included so the result is
    *-closed for arbitrary input sets.
    """
    n, gens = _generator_list(a, cfg)
    N = n * n
    eye = np.eye(n)
    blocks = []
    seen = gens + [g.conj().T for g in gens]
    for g in seen:
        # row-major vec: vec(xg) = (I (x) g^T) v, vec(gx) = (g (x) I) v
        blocks.append(np.kron(eye, g.T) - np.kron(g, eye))
    stacked = np.vstack(blocks)
    _, svals, vh = np.linalg.svd(stacked, full_matrices=False)
    smax = float(svals[0]) if len(svals) else 0.0
    null_mask = svals <= cfg.span_tol * max(1.0, smax)
    null_rows = vh[null_mask].conj()
    elements = math.sqrt(n) * null_rows.reshape(-1, n, n)
    return AlgebraBasis(ambient_dim=n, elements=np.ascontiguousarray(elements))


def contains(
    a: AlgebraBasis,
    x: np.ndarray,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> tuple[bool, float]:
    """Projects x onto span(a); returns (membership, Frobenius residual)."""
    x = as_matrix(x)
    if x.shape[0] != a.ambient_dim:
        raise DimensionMismatch(
            f"element dim {x.shape[0]} vs algebra ambient dim {a.ambient_dim}"
        )
    U = a.unit_rows()
    v = x.reshape(-1)
    r = v - (np.conj(U) @ v) @ U
    r = r - (np.conj(U) @ r) @ U
    residual = float(np.linalg.norm(r))
    norm = float(np.linalg.norm(v))
    return residual < cfg.span_tol * max(1.0, norm), residual


def equal(a: AlgebraBasis, b: AlgebraBasis, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff dims match and each basis lies in the other's span."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(
            f"ambient dims differ: {a.ambient_dim} vs {b.ambient_dim}"
        )
    if a.dim != b.dim:
        return False
    n = a.ambient_dim
    bound = cfg.span_tol * max(1.0, math.sqrt(n))
    for x, y in ((a, b), (b, a)):
        U = x.unit_rows()
        V = y.elements.reshape(y.dim, n * n)
        R = V - (V @ U.conj().T) @ U
        R = R - (R @ U.conj().T) @ U
        if float(np.linalg.norm(R, axis=1).max()) >= bound:
            return False
    return True
