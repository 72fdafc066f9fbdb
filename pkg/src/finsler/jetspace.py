"""Truncated multivariate Taylor algebra: coefficient layout and kernel tables.

A jet space fixes the number of variables ``nv`` and a truncation order; a jet
is then a dense coefficient vector over all monomials of total degree up to
that order.  Coefficients are Taylor-normalized: the entry for multi-index
``alpha`` is the partial derivative of the represented function divided by
``alpha!``, so jet multiplication is plain polynomial convolution.

The convolution is the package's hot kernel.  This module precomputes, per
space, a flat table of (input, input, output) coefficient triples sorted by
output degree, so a product truncated to a lower effective order only touches
a prefix of the table.  The table walk itself is delegated to a compiled
Cython kernel when available, with a NumPy fallback; the choice is made once
at import and can be forced with the ``FINSLER_JET_BACKEND`` environment
variable (``auto``, ``cython``, or ``numpy``).
"""

from __future__ import annotations

import os
import threading
from math import comb

import numpy as np

from .errors import OrderError


def _select_backend():
    choice = os.environ.get("FINSLER_JET_BACKEND", "auto").strip().lower()
    if choice not in {"auto", "cython", "numpy"}:
        raise ValueError(
            f"FINSLER_JET_BACKEND must be auto, cython, or numpy (got {choice!r})"
        )
    if choice in {"auto", "cython"}:
        try:
            from . import _jetcore  # type: ignore[attr-defined]

            return "cython", _jetcore
        except ImportError:
            if choice == "cython":
                raise
    from . import _kernels_py

    return "numpy", _kernels_py


BACKEND_NAME, _KERNELS = _select_backend()


def _monomials(nv: int, order: int) -> np.ndarray:
    """All exponent vectors with total degree <= order, sorted by (degree, lex)."""
    rows = []

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    for d in range(order + 1):
        block = sorted(compositions(d, nv))
        rows.extend(block)
    return np.array(rows, dtype=np.int16)


class JetSpace:
    """Coefficient layout plus multiplication/derivative tables for one (nv, order)."""

    def __init__(self, nv: int, order: int):
        if nv < 1:
            raise ValueError("jet space needs at least one variable")
        if order < 0:
            raise OrderError(f"jet order must be non-negative, got {order}")
        self.nv = nv
        self.order = order
        self.exponents = _monomials(nv, order)
        self.ncoef = len(self.exponents)
        assert self.ncoef == comb(nv + order, nv)
        self.degree = self.exponents.sum(axis=1).astype(np.int32)
        # block boundaries: coefficients of degree d occupy deg_start[d]:deg_start[d+1]
        self.deg_start = np.zeros(order + 2, dtype=np.int64)
        for d in range(order + 1):
            self.deg_start[d + 1] = self.deg_start[d] + comb(nv + d - 1, nv - 1)

        # integer key per exponent vector for vectorized index lookup
        base = order + 1
        weights = base ** np.arange(nv, dtype=np.int64)
        keys = self.exponents.astype(np.int64) @ weights
        self._key_sorted = np.argsort(keys)
        self._keys = keys[self._key_sorted]
        self._key_weights = weights

        self._build_mult_table()
        self._build_deriv_tables()

    def index_of(self, exponent) -> int:
        key = int(np.dot(np.asarray(exponent, dtype=np.int64), self._key_weights))
        pos = int(np.searchsorted(self._keys, key))
        if pos >= len(self._keys) or self._keys[pos] != key:
            raise KeyError(f"exponent {tuple(exponent)} not in space")
        return int(self._key_sorted[pos])

    def _lookup_many(self, exps: np.ndarray) -> np.ndarray:
        keys = exps.astype(np.int64) @ self._key_weights
        pos = np.searchsorted(self._keys, keys)
        return self._key_sorted[pos].astype(np.int32)

    def _build_mult_table(self) -> None:
        ia_parts, ib_parts, io_parts = [], [], []
        ds = self.deg_start
        for da in range(self.order + 1):
            for db in range(self.order + 1 - da):
                A = np.arange(ds[da], ds[da + 1], dtype=np.int32)
                B = np.arange(ds[db], ds[db + 1], dtype=np.int32)
                ia = np.repeat(A, len(B))
                ib = np.tile(B, len(A))
                eo = self.exponents[ia].astype(np.int64) + self.exponents[ib]
                io = self._lookup_many(eo)
                ia_parts.append(ia)
                ib_parts.append(ib)
                io_parts.append(io)
        ia = np.concatenate(ia_parts)
        ib = np.concatenate(ib_parts)
        io = np.concatenate(io_parts)
        deg_out = self.degree[io]
        perm = np.lexsort((io, deg_out))
        self.tab_ia = np.ascontiguousarray(ia[perm])
        self.tab_ib = np.ascontiguousarray(ib[perm])
        self.tab_io = np.ascontiguousarray(io[perm])
        deg_sorted = deg_out[perm]
        # rows with output degree <= d form the prefix [0, row_limit[d])
        self.row_limit = np.searchsorted(deg_sorted, np.arange(self.order + 1), "right")
        # contiguous runs of equal output index (for segmented reduction)
        change = np.empty(len(io), dtype=bool)
        change[0] = True
        change[1:] = self.tab_io[1:] != self.tab_io[:-1]
        self.seg_start = np.flatnonzero(change).astype(np.int64)
        self.seg_io = self.tab_io[self.seg_start].astype(np.int64)
        seg_deg = deg_sorted[self.seg_start]
        self.seg_limit = np.searchsorted(seg_deg, np.arange(self.order + 1), "right")

    def _build_deriv_tables(self) -> None:
        self.deriv_tables = []
        for v in range(self.nv):
            has = self.exponents[:, v] >= 1
            src = np.flatnonzero(has).astype(np.int64)
            shifted = self.exponents[src].astype(np.int64).copy()
            shifted[:, v] -= 1
            dst = self._lookup_many(shifted).astype(np.int64)
            fac = self.exponents[src, v].astype(np.float64)
            self.deriv_tables.append((src, dst, fac))

    # ------------------------------------------------------------------ kernels

    def convolve(self, adata: np.ndarray, bdata: np.ndarray, eff_order: int,
                 out: np.ndarray | None = None) -> np.ndarray:
        """Coefficient convolution of two same-shape jet data blocks.

        ``adata``/``bdata`` have shape (ncoef, *tail); entries of output degree
        above ``eff_order`` are left at zero.
        """
        eff = min(eff_order, self.order)
        if out is None:
            out = np.zeros_like(adata)
        if eff < 0:
            return out
        r = int(self.row_limit[eff])
        if adata.ndim == 1:
            _KERNELS.conv_scalar(adata, bdata, out, self.tab_ia, self.tab_ib,
                                 self.tab_io, r)
        else:
            _KERNELS.conv_batch(adata, bdata, out, self.tab_ia, self.tab_ib,
                                self.tab_io, r)
        return out

    def reduce_rows(self, prod: np.ndarray, eff_order: int,
                    shape: tuple) -> np.ndarray:
        """Scatter-accumulate per-row products (already gathered) into coefficients.

        ``prod`` has shape (row_limit[eff_order], *shape) and is assumed to be
        laid out in table order, so runs with equal output index are contiguous.
        """
        eff = min(eff_order, self.order)
        out = np.zeros((self.ncoef, *shape), dtype=np.float64)
        if eff < 0:
            return out
        s = int(self.seg_limit[eff])
        if s == 0:
            return out
        acc = np.add.reduceat(prod, self.seg_start[:s], axis=0)
        out[self.seg_io[:s]] = acc
        return out


_SPACE_CACHE: dict[tuple[int, int], JetSpace] = {}
_CACHE_LOCK = threading.Lock()


def get_space(nv: int, order: int) -> JetSpace:
    """Shared, thread-safe cache of jet spaces."""
    key = (nv, order)
    space = _SPACE_CACHE.get(key)
    if space is None:
        with _CACHE_LOCK:
            space = _SPACE_CACHE.get(key)
            if space is None:
                space = JetSpace(nv, order)
                _SPACE_CACHE[key] = space
    return space
