"""Shared fixtures and the independent correlation oracle.

The oracle below is deliberately naive — nested Python loops over every
displacement, exact int arithmetic — so the fast scipy-backed engine in the
package is always checked against something with no shared code path.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

DATA = Path(__file__).parent / "data"


def oracle_correlate(a, b):
    """Full aperiodic cross-correlation by shift-and-sum: C(s) = sum a(r) b(r+s).

    Works in any dimension; returns a nested-list-backed object ndarray of
    Python ints (or floats if the inputs are real), indexed so that the
    zero-shift term sits at index (a.shape - 1) per axis.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    assert a.ndim == b.ndim
    out_shape = tuple(na + nb - 1 for na, nb in zip(a.shape, b.shape))
    def _py(v):
        return v.item() if isinstance(v, np.generic) else v

    out = np.zeros(out_shape, dtype=object)
    for s_out in itertools.product(*(range(n) for n in out_shape)):
        shift = tuple(s - (na - 1) for s, na in zip(s_out, a.shape))
        total = 0
        for r in itertools.product(*(range(n) for n in a.shape)):
            q = tuple(ri + si for ri, si in zip(r, shift))
            if all(0 <= qi < nb for qi, nb in zip(q, b.shape)):
                total += _py(a[r]) * _py(b[q])
        out[s_out] = total
    return out


def oracle_autocorrelate(a):
    return oracle_correlate(a, a)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def h9():
    from huffkit.construct import catalog

    return catalog("H9")


@pytest.fixture
def h9x9():
    from huffkit.construct import catalog, tensor_huffman

    h = catalog("H9")
    return tensor_huffman([h, h])


@pytest.fixture
def h15():
    from huffkit.construct import fibonacci_huffman

    return fibonacci_huffman(15, 2)
