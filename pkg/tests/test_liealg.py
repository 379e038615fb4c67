import json
from math import comb

import numpy as np
import pytest
import sympy

from g2sym.exterior import (DimensionError, FormParseError, KForm, basis_enumerate, blade,
                            evaluate, parse_form)
from g2sym.liealg import (BUILTINS, TABLE1, TABLE1_B2, BettiVector, JacobiError, LieAlgebra,
                          ad_traces, betti, bracket, builtin, ce_d, closed_forms_basis, d_matrix,
                          format_salamon, is_unimodular, load_algebras, parse_salamon)
from g2sym import rational

from conftest import random_exact_form

ROWS = tuple(TABLE1)
E = [tuple(int(i == j) for i in range(7)) for j in range(7)]


def e(*idx, dim=7):
    return KForm.basis(dim, idx)


# ---------------------------------------------------------------- parsing

def test_parse_row1():
    L = parse_salamon("(0,0,e^{12},e^{13},e^{23},e^{15}+e^{24},e^{16}+e^{34})")
    assert L.dim == 7
    assert L.dcoframe[2] == e(1, 2)
    assert L.dcoframe[0].is_zero() and L.dcoframe[0].degree == 2


def test_parse_abelian():
    L = parse_salamon("(0,0,0,0,0,0,0)")
    assert all(f.is_zero() for f in L.dcoframe)


def test_parse_rejects_repeated_index():
    with pytest.raises(FormParseError) as info:
        parse_salamon("(0, e^{11})")
    assert "repeated" in str(info.value)
    assert info.value.pos == 4


def test_parse_rejects_wrong_degree():
    with pytest.raises(DimensionError):
        parse_salamon("(0, 0, e^{1})")


def test_parse_rejects_missing_parentheses():
    with pytest.raises(FormParseError):
        parse_salamon("0, e^{12}")


def test_jacobi_failure_names_first_bad_entry():
    with pytest.raises(JacobiError) as info:
        parse_salamon("(0,0,e^{12},e^{13},e^{34})")
    assert info.value.k == 5
    assert info.value.residual == e(1, 2, 4, dim=5)


def test_unchecked_constructor_skips_jacobi():
    L = parse_salamon("(0,0,e^{12},e^{13},e^{34})", check=False)
    with pytest.raises(JacobiError):
        L.verify_jacobi()


def test_rational_coefficients_accepted():
    L = builtin("row4")
    assert L.dcoframe[6].coefficient(blade([2, 6])) == -3
    half = parse_salamon("(0, 0, 1/2 e^{12})")
    assert betti(half).b == (1, 2, 2, 1)


@pytest.mark.parametrize("name", ROWS)
def test_format_round_trip(name):
    L = builtin(name)
    assert parse_salamon(format_salamon(L)) == L


# ---------------------------------------------------------------- differential

def test_ce_d_examples():
    L = builtin("row1")
    assert ce_d(L, e(3)) == e(1, 2)
    assert ce_d(L, e(3, 4)) == e(1, 2, 4)
    A = builtin("abelian7")
    assert ce_d(A, parse_form("e^{123} - 2 e^{456}", 7)).is_zero()


def test_ce_d_of_constants_vanishes():
    assert ce_d(builtin("row2"), KForm.one(7) * 5).is_zero()


def test_ce_d_dimension_mismatch():
    with pytest.raises(DimensionError):
        ce_d(builtin("row1"), e(1, dim=6))


@pytest.mark.parametrize("name", list(BUILTINS))
def test_d_squared_zero_on_all_blades(name):
    L = builtin(name)
    for k in range(8):
        for m in basis_enumerate(7, k):
            assert ce_d(L, L.d_blade(m)).is_zero()


@pytest.mark.parametrize("name", ROWS)
def test_ce_d_leibniz(name, rng):
    L = builtin(name)
    for _ in range(30):
        p = int(rng.integers(0, 4))
        q = int(rng.integers(0, 7 - p))
        a = random_exact_form(rng, 7, p, density=0.3)
        b = random_exact_form(rng, 7, q, density=0.3)
        lhs = ce_d(L, a ^ b)
        rhs = (ce_d(L, a) ^ b) + (a ^ ce_d(L, b)) * (-1) ** p
        assert lhs == rhs


# ---------------------------------------------------------------- bracket

def test_bracket_examples():
    L = builtin("row1")
    assert bracket(L, E[0], E[1]) == (0, 0, -1, 0, 0, 0, 0)
    X = (1, -2, 0, 3, 0, 1, 0)
    assert all(c == 0 for c in bracket(L, X, X))
    A = builtin("abelian7")
    assert all(c == 0 for i in range(7) for j in range(7) for c in bracket(A, E[i], E[j]))


@pytest.mark.parametrize("name", ROWS)
def test_cartan_consistency(name):
    L = builtin(name)
    for k in range(7):
        for i in range(7):
            for j in range(7):
                lhs = evaluate(L.dcoframe[k], E[i], E[j])
                assert lhs == -bracket(L, E[i], E[j])[k]


@pytest.mark.parametrize("name", ROWS)
def test_bracket_jacobi_and_antisymmetry(name, rng):
    L = builtin(name)
    for _ in range(10):
        X, Y, Z = (tuple(int(v) for v in rng.integers(-2, 3, size=7)) for _ in range(3))
        assert bracket(L, X, Y) == tuple(-c for c in bracket(L, Y, X))
        cyc = [bracket(L, A, bracket(L, B, C)) for A, B, C in ((X, Y, Z), (Y, Z, X), (Z, X, Y))]
        assert all(sum(col) == 0 for col in zip(*cyc))


# ---------------------------------------------------------------- matrices, ranks

def test_d_matrix_examples():
    A = builtin("abelian7")
    assert all(x == 0 for row in d_matrix(A, 3) for x in row)
    M = d_matrix(builtin("row1"), 1)
    assert (len(M), len(M[0])) == (21, 7)
    assert rational.rank(M) == 5
    assert all(row[0] == 0 and row[1] == 0 for row in M)
    top = d_matrix(builtin("row1"), 7)
    assert top == []  # C(7, 8) = 0 rows


@pytest.mark.parametrize("name", ROWS)
@pytest.mark.parametrize("k", range(7))
def test_d_matrix_rank_matches_sympy(name, k):
    M = d_matrix(builtin(name), k)
    assert rational.rank(M) == sympy.Matrix(M).rank()


@pytest.mark.parametrize("name", ROWS)
def test_d_matrix_columns_are_images(name, rng):
    L = builtin(name)
    for k in (2, 3):
        M = np.array(d_matrix(L, k), dtype=object)
        a = random_exact_form(rng, 7, k)
        via_matrix = M.dot(np.array(a.to_list(), dtype=object))
        assert list(via_matrix) == ce_d(L, a).to_list()


def test_closed_forms_basis_is_closed():
    L = builtin("row3")
    Z = closed_forms_basis(L, 3)
    assert len(Z) == 20
    assert all(ce_d(L, z).is_zero() for z in Z)


# ---------------------------------------------------------------- Betti numbers

@pytest.mark.parametrize("name", ROWS)
def test_table1_b2(name):
    assert betti(builtin(name))[2] == TABLE1_B2[name]


def test_abelian_betti_is_binomial():
    assert betti(builtin("abelian7")).b == tuple(comb(7, k) for k in range(8))


def test_row1_b1_counts_zero_entries():
    assert betti(builtin("row1"))[1] == 2


@pytest.mark.parametrize("name", ROWS)
def test_poincare_duality_and_euler(name):
    b = betti(builtin(name))
    assert b[0] == 1
    assert b[1] < 7
    assert all(b[k] == b[7 - k] for k in range(8))
    assert b.euler_characteristic() == 0


def test_betti_invariant_under_relabeling():
    # relabel e^i -> e^{perm[i]} in row 1 and compare
    perm = {1: 3, 2: 6, 3: 1, 4: 7, 5: 2, 6: 4, 7: 5}
    L = builtin("row1")
    new = [None] * 7
    for k, f in enumerate(L.dcoframe, start=1):
        image = KForm.zero(7, 2)
        for mask, c in f.items():
            i, j = (perm[x] for x in range(1, 8) if mask >> x & 1)
            image = image + e(i, j) * c
        new[perm[k] - 1] = image
    assert betti(LieAlgebra(tuple(new))).b == betti(L).b


def test_betti_json():
    b = betti(builtin("row4"))
    assert json.loads(b.to_json()) == {"betti": [1, 3, 6, 8, 8, 6, 3, 1]}
    assert isinstance(b, BettiVector)


# ---------------------------------------------------------------- unimodularity

@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtins_unimodular(name):
    assert is_unimodular(builtin(name))


def test_two_dim_nonunimodular():
    L = parse_salamon("(0, e^{12})")
    assert not is_unimodular(L)
    # [e1, e2] = -e2, so ad_{e1} = diag(0, -1)
    assert ad_traces(L) == [-1, 0]


# ---------------------------------------------------------------- files

def test_load_algebras(tmp_path):
    path = tmp_path / "algs.txt"
    path.write_text("# two algebras\nrow1: " + TABLE1["row1"] + "\n\nheis: (0, 0, e^{12})\n",
                    encoding="utf-8")
    algs = load_algebras(path)
    assert [a.name for a in algs] == ["row1", "heis"]
    assert algs[0] == builtin("row1")


def test_load_algebras_reports_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("ok: (0, 0, e^{12})\nbad: (0,0,e^{12},e^{13},e^{34})\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":2:"):
        load_algebras(path)
