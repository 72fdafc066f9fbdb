"""Pure-NumPy jet convolution kernels (fallback for the compiled extension).

Both kernels accumulate ``a * b`` coefficient products into ``out`` following
the first ``nrows`` entries of the space's multiplication table.  Rows are
sorted by output degree and output index, so contiguous runs share an output
slot and a segmented reduction is exact.
"""

from __future__ import annotations

import numpy as np


def conv_scalar(a, b, out, tab_ia, tab_ib, tab_io, nrows):
    if nrows == 0:
        return
    prod = a[tab_ia[:nrows]] * b[tab_ib[:nrows]]
    acc = np.bincount(tab_io[:nrows], weights=prod, minlength=out.shape[0])
    out += acc


def conv_batch(a, b, out, tab_ia, tab_ib, tab_io, nrows):
    if nrows == 0:
        return
    prod = a[tab_ia[:nrows]] * b[tab_ib[:nrows]]
    np.add.at(out, tab_io[:nrows], prod)
