"""Dense eigensolution of complex-symmetric (generalized) problems.

Everything is built on the c-product (bilinear, no conjugation): vectors are
normalized to v^T S v = 1 and root tracking uses |v_prev^T S v_new|, which
stays smooth along paths in the complex eta plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import IllConditionedOverlapError, NumericError

BY_REAL_PART = "by_real_part"
BY_TRACKING = "by_tracking"

_RESIDUAL_TOL = 1e-9
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class EigenSet:
    values: np.ndarray
    vectors: np.ndarray
    ordering: str = BY_REAL_PART


def c_normalize(vectors: np.ndarray, S: np.ndarray | None = None) -> np.ndarray:
    """Scale columns to v^T S v = 1 (bilinear); near-defective columns kept as-is."""
    sv = vectors if S is None else S @ vectors
    norms = np.sqrt(np.sum(vectors * sv, axis=0))
    safe = np.where(np.abs(norms) < 1e-150, 1.0, norms)
    return vectors / safe


def _symmetric_cholesky(S: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = S for complex symmetric S (no conjugation)."""
    n = S.shape[0]
    L = np.zeros_like(S, dtype=complex)
    for k in range(n):
        diag = S[k, k] - L[k, :k] @ L[k, :k]
        root = np.sqrt(complex(diag))
        if abs(root) < 1e-150:
            raise IllConditionedOverlapError(
                f"overlap factorization broke down at row {k}; prune the basis"
            )
        L[k, k] = root
        if k + 1 < n:
            L[k + 1 :, k] = (S[k + 1 :, k] - L[k + 1 :, :k] @ L[k, :k]) / root
    return L


def eig(H: np.ndarray, S: np.ndarray | None = None) -> EigenSet:
    """Full spectrum of H v = E S v, ordered by real part, c-normalized.

    Real symmetric inputs take the real solver path, so theta = 0 spectra are
    exactly real.
    """
    H = np.asarray(H)
    real_input = not np.iscomplexobj(H) and (S is None or not np.iscomplexobj(S))
    if S is not None:
        cond = np.linalg.cond(S)
        if not np.isfinite(cond) or cond >= _COND_LIMIT:
            raise IllConditionedOverlapError(
                f"overlap condition estimate {cond:.3e} >= {_COND_LIMIT:.0e}; prune the basis"
            )
    if real_input:
        if S is None:
            values, vectors = sla.eigh(H)
        else:
            values, vectors = sla.eigh(H, S)
        values = values.astype(complex)
        vectors = vectors.astype(float)
    else:
        Hc = H.astype(complex)
        if S is None:
            values, vectors = sla.eig(Hc)
        else:
            L = _symmetric_cholesky(S.astype(complex))
            A = sla.solve_triangular(L, Hc, lower=True)
            A = sla.solve_triangular(L, A.T, lower=True).T
            values, inner = sla.eig(A)
            vectors = sla.solve_triangular(L.T, inner, lower=False)
        vectors = c_normalize(vectors, S)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    sv = vectors if S is None else S @ vectors
    residual = H @ vectors - sv * values[None, :]
    scale = np.linalg.norm(H)
    worst = float(np.max(np.linalg.norm(residual, axis=0))) / max(scale, 1e-300)
    if worst > _RESIDUAL_TOL:
        raise NumericError(f"eigensolver residual {worst:.3e} exceeds {_RESIDUAL_TOL:.0e}")
    return EigenSet(values=values, vectors=vectors, ordering=BY_REAL_PART)


def overlap_matrix(
    prev_vectors: np.ndarray, new_vectors: np.ndarray, S: np.ndarray | None = None
) -> np.ndarray:
    """|prev^T S new| for all column pairs (c-product magnitudes)."""
    sv = new_vectors if S is None else S @ new_vectors
    return np.abs(prev_vectors.T @ sv)


def match_order(
    prev_vectors: np.ndarray, new_vectors: np.ndarray, S: np.ndarray | None = None
) -> tuple[np.ndarray, float]:
    """Optimal column matching: perm[i] = column of new matching prev column i.

    Returns the permutation and the weakest matched overlap magnitude.
    """
    ov = overlap_matrix(prev_vectors, new_vectors, S)
    rows, cols = linear_sum_assignment(-ov)
    perm = cols[np.argsort(rows)]
    quality = float(ov[rows, cols].min())
    return perm, quality


def track_nearest(
    values: np.ndarray, vectors: np.ndarray, ref_vector: np.ndarray, S: np.ndarray | None = None
) -> tuple[complex, np.ndarray, float]:
    """Pick the eigenpair with the largest c-overlap against a reference vector."""
    sv = vectors if S is None else S @ vectors
    ov = np.abs(ref_vector @ sv)
    k = int(np.argmax(ov))
    return complex(values[k]), vectors[:, k], float(ov[k])
