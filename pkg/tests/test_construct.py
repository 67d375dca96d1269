"""Constructions: recurrence families, catalog entries, diamond solvers, specs."""

import csv
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from huffkit.construct import (
    ConstructError,
    HuffmanSpec,
    binet_value,
    build,
    build_diamond,
    catalog,
    catalog_keys,
    diamond5_solve,
    diamond7_closed_form,
    diamond7_solve,
    fibonacci_huffman,
    h5_family,
    phi_value,
    tensor_huffman,
)
from huffkit.lattice import correlate
from huffkit.metrics import classify

from conftest import DATA, oracle_autocorrelate

H15_SEQUENCE = [1, 2, 2, 4, 6, 10, 16, -3, -16, 10, -6, 4, -2, 2, -1]


def test_h15_exact_sequence(h15):
    assert h15.data.tolist() == H15_SEQUENCE


def test_h15_autocorrelation_is_delta(h15):
    want = [0] * 29
    want[0] = want[28] = -1
    want[14] = 843
    got = oracle_autocorrelate(h15.data)
    assert got.tolist() == want
    assert 843 == sum(v * v for v in H15_SEQUENCE)


def test_h7_both_bases():
    assert fibonacci_huffman(7, 2).data.tolist() == [1, 2, 2, 0, -2, 2, -1]
    assert fibonacci_huffman(7, 4).data.tolist() == [1, 4, 8, 6, -8, 4, -1]


@pytest.mark.parametrize("N", [7, 11, 15, 19, 23, 27])
@pytest.mark.parametrize("b", [2, 4, 6])
def test_family_grid_is_canonical(N, b):
    t = fibonacci_huffman(N, b)
    c = correlate(t, t)
    rep = classify(t)
    assert rep.classification == "canonical"
    assert c.peak == int((t.data.astype(object) ** 2).sum())
    ends = (c.values.data[0], c.values.data[-1])
    assert {abs(int(v)) for v in ends} == {1}


def test_length_validation():
    with pytest.raises(ConstructError):
        fibonacci_huffman(9)  # not 4n+3
    with pytest.raises(ConstructError):
        fibonacci_huffman(15, b=3)  # odd base


def test_phi_values_match_known_sequences():
    assert [phi_value(k, 2) for k in range(8)] == [0, 1, 1, 2, 3, 5, 8, 13]
    assert [phi_value(k, 4) for k in range(7)] == [0, 1, 2, 5, 12, 29, 70]
    assert phi_value(-3, 2) == 2 and phi_value(-4, 2) == -3


@given(st.integers(0, 40), st.integers(1, 40), st.sampled_from([2, 4, 6, 8]))
def test_phi_bilinear_identity(m, n, b):
    """phi(m+n) = phi(m) phi(n+1) + phi(m-1) phi(n) — index reduction."""
    lhs = phi_value(m + n, b)
    rhs = phi_value(m, b) * phi_value(n + 1, b) + phi_value(m - 1, b) * phi_value(n, b)
    assert lhs == rhs


@given(st.integers(0, 30), st.sampled_from([2, 4]))
def test_binet_matches_recurrence(k, b):
    exact = phi_value(k, b)
    approx = binet_value(k, b)
    assert abs(approx - exact) <= max(1e-9, 1e-12 * abs(exact))


def test_h5_families():
    assert h5_family(1).data.tolist() == [1, 2, 2, -2, 1]
    assert oracle_autocorrelate(h5_family(1).data).tolist() == [1, 0, 0, 0, 14, 0, 0, 0, 1]
    odd = h5_family(1, variant="odd")
    assert odd.data.tolist() == [1, 3, 4, -3, 1]
    c = oracle_autocorrelate(odd.data).tolist()
    assert c[0] == c[-1] == 1 and c[2] == c[-3] == -1
    with pytest.raises(ConstructError):
        h5_family(0)


def test_h5_even_peak_formula():
    for n in (1, 2, 5):
        c = correlate(h5_family(n), h5_family(n))
        assert c.peak == 4 * n**4 + 8 * n**2 + 2


def test_catalog():
    assert set(catalog_keys()) == {"H4", "H8", "H8x8", "H9"}
    assert catalog("H9").data.tolist() == [1, 3, 4, 2, -2, -2, 4, -3, 1]
    assert catalog("H8").shape == (8,)
    assert catalog("H8x8").shape == (8, 8)
    with pytest.raises(ConstructError):
        catalog("H99")


def test_h8x8_report():
    rep = classify(catalog("H8x8"))
    assert rep.C0 == 2468
    assert rep.R == pytest.approx(72.588, abs=5e-3)
    assert rep.M == pytest.approx(264.7, abs=0.05)
    assert rep.C_edge == 34


# -- Diophantine solvers ------------------------------------------------------


def test_diamond5_families_exact():
    """The complete (d, e) family list over the standard base, endpoints pinned."""
    t0 = time.monotonic()
    sols = diamond5_solve()
    assert time.monotonic() - t0 < 10.0
    by_d = {}
    for s in sols:
        assert s.values[:4] == (0, 1, 4, 8)
        by_d.setdefault(s.values[4], set()).add(s.values[5])
    assert by_d[24] == {74, 75}
    assert by_d[28] == {98, 99, 100}
    assert min(by_d) == 24 and max(by_d) == 28
    assert set(by_d) == {24, 25, 26, 27, 28}


def test_diamond7_e1_unique():
    t0 = time.monotonic()
    sols = diamond7_solve(1)
    assert time.monotonic() - t0 < 10.0
    assert [s.values for s in sols] == [(0, 0, 0, 1, 1, 1, 2, 3)]


def test_diamond7_e3_matches_table_triples():
    sols = diamond7_solve(3)
    got = sorted((s.values[5], s.values[6], s.values[7]) for s in sols
                 if 3 <= s.values[5] <= 20)
    with open(DATA / "table_7x7_e3.csv") as fh:
        want = sorted((int(r["f"]), int(r["g"]), int(r["h"])) for r in csv.DictReader(fh))
    assert got == want


def test_closed_form_lands_in_solution_set():
    sols = {(s.values[5], s.values[6], s.values[7]) for s in diamond7_solve(3)}
    for f in (2, 4, 6, 8, 10):
        g, h = diamond7_closed_form(f)
        assert (f, g, h) in sols
    assert diamond7_closed_form(6) == (19, 33)
    with pytest.raises(ConstructError):
        diamond7_closed_form(5)


def test_solutions_build_and_classify():
    for s in diamond7_solve(1):
        rep = classify(s.build())
        assert rep.classification in ("canonical", "quasi")
        assert rep.OP <= s.c_edge


def test_build_diamond_published_examples():
    a = build_diamond(7, (0, 0, 1, 2, 6, 7, 17, 20))
    b = build_diamond(7, (0, 0, 0, 1, 3, 6, 20, 36))
    assert a.shape == b.shape == (7, 7)
    assert classify(a).R == pytest.approx(221.7, abs=0.05)
    assert classify(b).R == pytest.approx(184.6, abs=0.05)


def test_build_diamond_rejects_violating_alphabet():
    with pytest.raises(ConstructError):
        build_diamond(5, (0, 1, 4, 8, 1, 14))


def test_diamond_is_symmetric():
    arr = build_diamond(5, (0, 1, 4, 8, 28, 99)).data
    assert np.array_equal(arr, arr.T)


# -- tensor products and the declarative spec ---------------------------------


def test_tensor_cube_peak():
    h7 = fibonacci_huffman(7, 2)
    cube = tensor_huffman([h7, h7, h7])
    assert cube.shape == (7, 7, 7)
    assert correlate(cube, cube).peak == 18**3  # = 5832


def test_outer_correlation_factorizes(h9):
    h7 = fibonacci_huffman(7, 2)
    sq = tensor_huffman([h9, h7])
    c2 = correlate(sq, sq).values.data
    c9 = correlate(h9, h9).values.data
    c7 = correlate(h7, h7).values.data
    assert np.array_equal(c2, np.outer(c9, c7))


SPEC_LINES = [
    "family=fibonacci_binet N=15 b=2",
    "family=h5_family n=3 variant=odd",
    "family=catalog key=H8x8",
    "family=even_length key=H8",
    "family=diamond5 alphabet=0,1,4,8,28,99",
    "family=diamond7 alphabet=0,0,0,1,3,6,20,36",
    "family=outer_product factors=catalog:H9,fibonacci_binet:15:2",
]


@pytest.mark.parametrize("line", SPEC_LINES)
def test_spec_roundtrip(line):
    spec = HuffmanSpec.from_text(line)
    assert spec.to_text() == line
    again = HuffmanSpec.from_text(spec.to_text())
    assert np.array_equal(build(spec).data, build(again).data)


def test_spec_build_dispatch_matches_direct(h15):
    t = build(HuffmanSpec.from_text("family=fibonacci_binet N=15 b=2"))
    assert np.array_equal(t.data, h15.data)


def test_spec_rejects_garbage():
    with pytest.raises(ConstructError):
        HuffmanSpec.from_text("family=unobtainium")
    with pytest.raises(ConstructError):
        HuffmanSpec.from_text("N=15 b=2")
    with pytest.raises(ConstructError):
        HuffmanSpec.from_text("family=fibonacci_binet N=9")
