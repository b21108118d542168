import numpy as np
import pytest

from nbpas import ldpc
from nbpas.galois import make_field
from nbpas.ldpc import CodeError


def check_pairs(code):
    """The two check indices of each column."""
    owners = [[] for _ in range(code.n_c)]
    for j, row in enumerate(code.rows):
        for col, _ in row:
            owners[col].append(j)
    return owners


def test_regular_degrees(code_f64_r34):
    code = code_f64_r34
    assert code.m_c == 24
    assert code.k_c == 72
    assert code.design_rate == 0.75
    assert all(len(row) == 8 for row in code.rows)
    assert all(len(o) == 2 for o in check_pairs(code))


def test_girth_at_least_six(code_f64_r34, code_f64_r12):
    # girth >= 6 for d_v=2 iff no two columns share the same check pair
    for code in (code_f64_r34, code_f64_r12):
        pairs = [tuple(sorted(o)) for o in check_pairs(code)]
        assert all(a != b for a, b in pairs)
        assert len(set(pairs)) == code.n_c


def test_coefficients_nonzero(code_f64_r34):
    assert all(0 < coef < 64 for row in code_f64_r34.rows
               for _, coef in row)


def test_full_rank(gf64, code_f64_r34):
    _, _, rank = ldpc._gf_row_reduce(gf64, code_f64_r34.dense_h())
    assert rank == code_f64_r34.m_c


def test_construct_deterministic(gf64):
    a = ldpc.construct(gf64, 96, 8, seed=7)
    b = ldpc.construct(gf64, 96, 8, seed=7)
    assert a.rows == b.rows
    c = ldpc.construct(gf64, 96, 8, seed=8)
    assert c.rows != a.rows


def test_construct_validation(gf64):
    with pytest.raises(CodeError):
        ldpc.construct(gf64, 96, 2, seed=0)  # d_v=d_c=2 is a cycle code
    with pytest.raises(CodeError):
        ldpc.construct(gf64, 96, 5, seed=0)  # 192 % 5 != 0
    with pytest.raises(CodeError):
        ldpc.construct(gf64, 96, 48, seed=0)  # 4 checks can host 6 edges max


def test_encode_against_dense_oracle(code_f64_r34, rng):
    code = code_f64_r34
    f = code.field
    h = code.dense_h()
    for _ in range(10):
        info = rng.integers(0, 64, code.k_c)
        cw = ldpc.encode(code, info)
        assert np.array_equal(cw[code.systematic_cols], info)
        s = np.bitwise_xor.reduce(f.mul(h, cw[None, :]), axis=1)
        assert not s.any()
        assert not ldpc.syndrome(code, cw).any()


def test_noncodeword_has_nonzero_syndrome(code_f64_r34, rng):
    code = code_f64_r34
    cw = ldpc.encode(code, rng.integers(0, 64, code.k_c))
    bad = cw.copy()
    bad[5] ^= 3
    assert ldpc.syndrome(code, bad).any()


def test_encode_linear(code_f64_r34, rng):
    code = code_f64_r34
    u = rng.integers(0, 64, code.k_c)
    v = rng.integers(0, 64, code.k_c)
    assert np.array_equal(
        ldpc.encode(code, u ^ v),
        ldpc.encode(code, u) ^ ldpc.encode(code, v))


def test_encode_wrong_length(code_f64_r34):
    with pytest.raises(CodeError):
        ldpc.encode(code_f64_r34, np.zeros(10, dtype=int))


def test_from_matrix_hand_built(gf8):
    h = np.array([[1, 2, 0, 3],
                  [0, 1, 4, 5]])
    code = ldpc.from_matrix(gf8, h)
    assert code.n_c == 4 and code.m_c == 2
    assert np.array_equal(code.parity_cols, [0, 1])
    assert np.array_equal(code.systematic_cols, [2, 3])
    cw = ldpc.encode(code, np.array([6, 7]))
    assert not ldpc.syndrome(code, cw).any()


def test_from_matrix_rank_deficient(gf8):
    h = np.array([[1, 2], [2, 4]])  # row2 = 2 * row1 over GF(8)
    with pytest.raises(CodeError):
        ldpc.from_matrix(gf8, h)


def test_save_load_roundtrip(code_f64_r34, tmp_path):
    path = tmp_path / "code.txt"
    ldpc.save_code(code_f64_r34, path)
    loaded = ldpc.load_code(path)
    assert loaded.rows == code_f64_r34.rows
    assert loaded.field.q == 64
    assert loaded.field.prim_poly == code_f64_r34.field.prim_poly
    assert np.array_equal(loaded.systematic_cols,
                          code_f64_r34.systematic_cols)
    info = np.arange(code_f64_r34.k_c) % 64
    assert np.array_equal(ldpc.encode(loaded, info),
                          ldpc.encode(code_f64_r34, info))


def test_load_rejects_tampered_permutation(code_f64_r34, tmp_path):
    path = tmp_path / "code.txt"
    ldpc.save_code(code_f64_r34, path)
    lines = path.read_text().splitlines()
    sys_line = lines[-2].split()
    sys_line[0], sys_line[1] = sys_line[1], sys_line[0]
    lines[-2] = " ".join(sys_line)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CodeError):
        ldpc.load_code(path)


def test_gf256_code_constructs():
    f = make_field(8)
    code = ldpc.construct(f, 144, 8, seed=3)
    assert code.m_c == 36
    assert all(len(row) == 8 for row in code.rows)
