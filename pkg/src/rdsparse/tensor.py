"""Dense complex tensor helpers.

Tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` stored in
C order, so the flat index of element ``(m_1, ..., m_R)`` has the last index
varying fastest. Dimensions are addressed with 0-based ``axis`` integers.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np


def as_tensor(data, sizes: Sequence[int] | None = None) -> np.ndarray:
    """Return ``data`` as a complex128 array, optionally reshaped to ``sizes``."""
    t = np.asarray(data, dtype=np.complex128)
    if sizes is not None:
        sizes = tuple(int(s) for s in sizes)
        if any(s < 1 for s in sizes):
            raise ValueError(f"sizes must be positive, got {sizes}")
        if t.size != int(np.prod(sizes)):
            raise ValueError(f"{t.size} values cannot fill a tensor of shape {sizes}")
        t = t.reshape(sizes)
    if t.ndim < 1:
        raise ValueError("a tensor needs at least one dimension")
    return t


def _check_axis(t: np.ndarray, axis: int) -> int:
    if not 0 <= axis < t.ndim:
        raise ValueError(f"axis {axis} out of range for a {t.ndim}-D tensor")
    return axis


def unfold(t: np.ndarray, axis: int) -> np.ndarray:
    """Matricize ``t`` along ``axis``.

    Returns the ``M_axis x prod(other sizes)`` matrix whose columns are the
    fibers of ``t`` along ``axis``. Among the remaining dimensions the one with
    the smallest index varies fastest in the column index, which makes

        unfold(Y, r) == A_r diag(c) (A_R kr ... kr A_{r+1} kr A_{r-1} kr ... kr A_1)^T

    hold for a CP tensor (``kr`` = :func:`khatri_rao`).
    """
    t = np.asarray(t)
    _check_axis(t, axis)
    return np.reshape(np.moveaxis(t, axis, 0), (t.shape[axis], -1), order="F")


def fold(mat: np.ndarray, axis: int, sizes: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold`."""
    sizes = tuple(sizes)
    moved = (sizes[axis],) + sizes[:axis] + sizes[axis + 1 :]
    return np.moveaxis(np.reshape(mat, moved, order="F"), 0, axis)


def contract_mode(t: np.ndarray, axis: int, u: np.ndarray) -> np.ndarray:
    """Contract index ``axis`` of ``t`` with the second index of ``u`` (K x M_axis).

    ``b(.., k, ..) = sum_m t(.., m, ..) u(k, m)``; the result has ``M_axis``
    replaced by ``K``.
    """
    t = np.asarray(t)
    _check_axis(t, axis)
    u = np.atleast_2d(np.asarray(u))
    if u.shape[1] != t.shape[axis]:
        raise ValueError(
            f"matrix with {u.shape[1]} columns cannot contract a dimension of size {t.shape[axis]}"
        )
    out = np.tensordot(u, t, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def rank1(c: complex, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Outer product ``c * v_1 o v_2 o ... o v_R``."""
    if len(vectors) == 0:
        raise ValueError("need at least one vector")
    vecs = [np.asarray(v, dtype=np.complex128).ravel() for v in vectors]
    if any(v.size == 0 for v in vecs):
        raise ValueError("vectors must be non-empty")
    out = reduce(np.multiply.outer, vecs)
    return c * np.asarray(out, dtype=np.complex128)


def kron(*vectors: np.ndarray) -> np.ndarray:
    """Kronecker product of vectors, the LAST factor's index varying fastest."""
    return reduce(np.kron, [np.asarray(v).ravel() for v in vectors])


def khatri_rao(*mats: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product ``a_1 kr a_2 kr ...``.

    Column ``j`` is ``kron(a_j, b_j, ...)`` with the last factor varying fastest.
    """
    if len(mats) == 0:
        raise ValueError("need at least one matrix")
    mats = [np.atleast_2d(np.asarray(m)) for m in mats]
    ncols = mats[0].shape[1]
    if any(m.shape[1] != ncols for m in mats):
        raise ValueError("all factors must have the same number of columns")

    def pair(a, b):
        return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], ncols)

    return reduce(pair, mats)


def frob_norm(t: np.ndarray) -> float:
    """Frobenius norm of a tensor of any order."""
    return float(np.linalg.norm(np.asarray(t).ravel()))


def cp_tensor(c: np.ndarray, factors: Sequence[np.ndarray]) -> np.ndarray:
    """Build ``sum_f c_f a_{f,1} o ... o a_{f,R}`` from factor matrices ``A_r`` (M_r x F)."""
    c = np.asarray(c, dtype=np.complex128).ravel()
    factors = [np.atleast_2d(np.asarray(a, dtype=np.complex128)) for a in factors]
    sizes = tuple(a.shape[0] for a in factors)
    out = np.zeros(sizes, dtype=np.complex128)
    for f in range(c.size):
        out += rank1(c[f], [a[:, f] for a in factors])
    return out
