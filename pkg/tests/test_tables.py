import random
import struct

import numpy as np
import pytest

from goormaghtigh.arith import primes_in, repunit_mod
from goormaghtigh.tables import (
    BadMagicError,
    SieveTable,
    TableFormatError,
    TruncatedTableError,
    VersionMismatchError,
    build_table,
    build_tables,
    default_primes,
    exponent_class,
    load_tables,
    lookup_a,
    n_feasible,
    save_tables,
)

PRIMES_TO_50 = primes_in(3, 50)


@pytest.fixture(scope="module")
def small_tables():
    return {p: build_table(p) for p in primes_in(3, 100)}


def test_p5_row_for_base_2(small_tables):
    # f_1..f_4 at b = 2: 1, 3, 7, 15
    assert small_tables[5].values[0].tolist() == [1, 3, 7 % 5, 15 % 5]


def test_p5_feasible_3(small_tables):
    assert small_tables[5].feasible_set(3) == {7 % 5, 13 % 5, 21 % 5}


def test_p3_feasible_1(small_tables):
    assert small_tables[3].feasible_set(1) == {1}


@pytest.mark.parametrize("p", [2, 1, 9, 15, 65537])
def test_build_table_rejects(p):
    with pytest.raises(ValueError):
        build_table(p)


def test_exponent_class():
    for p in (3, 5, 11, 97):
        for k in range(1, 5 * p):
            r = exponent_class(k, p)
            assert 1 <= r <= p - 1 and (k - r) % (p - 1) == 0


def test_lookup_a_examples(small_tables):
    assert exponent_class(53, 11) == 3
    assert lookup_a(small_tables[11], 7, 53) == 57 % 11 == 2
    for t in small_tables.values():
        assert lookup_a(t, 0, 97) == 1
    assert lookup_a(small_tables[7], 1, 53) == 53 % 7 == 4


def test_n_feasible_examples(small_tables):
    t5 = small_tables[5]
    assert {repunit_mod(y, 3, 5) for y in range(5)} == {1, 2, 3}
    assert n_feasible(t5, 0, 3) is False
    assert n_feasible(t5, 2, 3) is True
    assert t5.feasible_set(exponent_class(13, 5)) == {1}
    assert n_feasible(t5, 3, 13) is True


def test_table_fidelity_exhaustive_to_100(small_tables):
    for p, t in small_tables.items():
        expected = np.array([[repunit_mod(b, q, p) for q in range(1, p)] for b in range(2, p)], dtype=np.uint16)
        assert np.array_equal(t.values, expected), p


def test_feasible_sets_derive_from_values(small_tables):
    for p, t in small_tables.items():
        for r in range(1, p):
            s = t.feasible_set(r)
            assert s == set(t.values[:, r - 1].tolist())
            assert len(s) <= p - 2


def test_n_feasible_equivalence_with_brute_force(small_tables):
    for p in PRIMES_TO_50:
        t = small_tables[p]
        for n in range(2, 2 * p + 1):
            reachable = {repunit_mod(y, n, p) for y in range(p)}
            for a in range(p):
                assert n_feasible(t, a, n) == (a in reachable), (p, a, n)
                assert bool(t.n_mask(n)[a]) == (a in reachable), (p, a, n)


def test_lookup_a_agrees_with_repunit_mod(small_tables):
    for p in PRIMES_TO_50:
        t = small_tables[p]
        for x in range(p):
            row = t.a_row
            for m in range(1, 3 * p + 1):
                a = lookup_a(t, x, m)
                assert a == repunit_mod(x, m, p)
                assert row(m)[x] == a


def test_default_prime_list():
    ps = default_primes()
    assert ps[0] == 3 and ps[-1] == 1021 and len(ps) == 171
    assert default_primes(12) == [3, 5, 7, 11]


def test_large_table_spot_checks():
    rng = random.Random(1)
    for p in (1009, 1013, 1019, 1021):
        t = build_table(p)
        for _ in range(500):
            b, q = rng.randrange(2, p), rng.randrange(1, p)
            assert int(t.values[b - 2, q - 1]) == repunit_mod(b, q, p)


def test_round_trip(tmp_path):
    ts = build_tables(8)
    path = tmp_path / "t.bin"
    save_tables(ts, path)
    back = load_tables(path)
    assert [t.p for t in back] == [3, 5, 7]
    assert back == ts
    for a, b in zip(ts, back):
        assert np.array_equal(a.feasible, b.feasible)


def test_file_layout_is_bit_exact(tmp_path):
    path = tmp_path / "t.bin"
    save_tables([build_table(3), build_table(5)], path)
    data = path.read_bytes()
    assert data[:4] == b"GMSV"
    assert data[4] == 1
    assert struct.unpack_from("<I", data, 5) == (2,)
    assert struct.unpack_from("<I", data, 9) == (3,)
    # p = 3: one row (b = 2), two lengths: f_1 = 1, f_2 = 3 = 0
    assert struct.unpack_from("<2H", data, 13) == (1, 0)
    assert struct.unpack_from("<I", data, 17) == (5,)
    assert struct.unpack_from("<12H", data, 21) == (1, 3, 2, 0, 1, 4, 3, 0, 1, 0, 1, 0)
    assert len(data) == 9 + 4 + 2 * 2 + 4 + 2 * 12


def test_bad_magic(tmp_path):
    path = tmp_path / "t.bin"
    save_tables(build_tables(8), path)
    data = bytearray(path.read_bytes())
    data[:4] = b"XXXX"
    path.write_bytes(bytes(data))
    with pytest.raises(BadMagicError):
        load_tables(path)


def test_version_mismatch(tmp_path):
    path = tmp_path / "t.bin"
    save_tables(build_tables(8), path)
    data = bytearray(path.read_bytes())
    data[4] = 2
    path.write_bytes(bytes(data))
    with pytest.raises(VersionMismatchError):
        load_tables(path)


@pytest.mark.parametrize("cut", [6, 11, 20, 60])
def test_truncated(tmp_path, cut):
    path = tmp_path / "t.bin"
    save_tables(build_tables(8), path)
    path.write_bytes(path.read_bytes()[:cut])
    with pytest.raises(TruncatedTableError):
        load_tables(path)


def test_errors_are_distinct():
    assert len({BadMagicError, VersionMismatchError, TruncatedTableError}) == 3
    for cls in (BadMagicError, VersionMismatchError, TruncatedTableError):
        assert issubclass(cls, TableFormatError)


def test_out_of_range_residue_rejected(tmp_path):
    path = tmp_path / "t.bin"
    save_tables([build_table(3)], path)
    data = bytearray(path.read_bytes())
    data[13] = 7
    path.write_bytes(bytes(data))
    with pytest.raises(TableFormatError):
        load_tables(path)


def test_shape_checked():
    with pytest.raises(ValueError):
        SieveTable(5, np.zeros((2, 2), dtype=np.uint16))
