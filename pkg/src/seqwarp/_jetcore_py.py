"""Numpy fallback for the truncated-product kernel."""
import numpy as np


def mul_into(a, b, out, ii, jj, kk, starts):
    """Multiply batched coefficient arrays into ``out``.

    ``ii, jj, kk`` enumerate all index triples with alpha_ii + alpha_jj =
    alpha_kk, sorted by kk; ``starts`` gives the first triple of each kk so
    the contraction reduces to one reduceat per batch.
    """
    contrib = a[:, ii] * b[:, jj]
    out[:] = np.add.reduceat(contrib, starts, axis=1)
