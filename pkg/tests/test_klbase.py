"""Canonical basis, structure constants, dagger, cache."""

import random

import pytest

from coxcells.coxeter import build_group
from coxcells.errors import CacheInvalidError, RefusalError
from coxcells.klbase import (
    HTable,
    c_product,
    cache_load,
    cache_save,
    compute_h_table,
    compute_kl,
    dagger_T_basis,
    stream_h_blocks,
    vp,
)

from oracles import RPolyOracle, naive_c_product


def _store(symbol):
    return compute_kl(build_group(symbol))


# ---------------------------------------------------------------------------
# value polynomial helpers


def test_vp_arithmetic():
    a = (-1, (1, 0, 1))  # v^-1 + v
    assert vp.mul(a, a) == (-2, (1, 0, 2, 0, 1))
    assert vp.add(a, vp.neg(a)) == vp.ZERO
    assert vp.sub((0, (5,)), (0, (5,))) == vp.ZERO
    assert vp.shift(a, 3) == (2, (1, 0, 1))
    assert vp.coeff(a, -1) == 1 and vp.coeff(a, 0) == 0
    assert vp.at_one(a) == 2
    assert vp.bar_symmetric(a)
    assert not vp.bar_symmetric((0, (1, 1)))
    assert vp.norm(5, [0, 0, 0]) == vp.ZERO
    assert vp.from_q((1, 2), -2) == (-2, (1, 0, 2))
    assert vp.to_laurent((-1, (1, 0, 1))).render() == "v^-1 + v"


# ---------------------------------------------------------------------------
# the P polynomials


def test_dihedral_P_all_one():
    store = _store("I2(5)")
    g = store.group
    for w in range(g.size):
        for y, qc in store.P_by_w[w].items():
            assert qc == (1,), (y, w)
        # support of c_w is the full Bruhat interval below w
        assert len(store.P_by_w[w]) == sum(
            1 for y in range(g.size) if g.bruhat_leq(y, w)
        )


def test_dihedral_mu_is_covering():
    store = _store("I2(5)")
    g = store.group
    for w in range(g.size):
        expect = sorted(
            (z, 1)
            for z in range(g.size)
            if g.length[z] == g.length[w] - 1 and g.bruhat_leq(z, w)
        )
        assert list(store.mu_by_w[w]) == expect


def test_A3_known_nontrivial_P():
    store = _store("A3")
    g = store.group
    x = g.element_by_word((1,))
    y = g.element_by_word((1, 0, 2, 1))
    assert store.P(x, y) == (1, 1)  # 1 + q
    assert store.mu(x, y) == 1


def test_longest_element_row_is_all_ones():
    for symbol in ("A3", "B3", "H3"):
        store = _store(symbol)
        g = store.group
        row = store.P_by_w[g.w0]
        assert len(row) == g.size
        assert all(qc == (1,) for qc in row.values())


def test_P_against_R_inversion_oracle_small_groups():
    for symbol in ("A1", "I2(3)", "I2(4)", "I2(5)", "I2(6)", "I2(7)", "A3", "B3"):
        g = build_group(symbol)
        store = compute_kl(g)
        oracle = RPolyOracle(g)
        for y in range(g.size):
            for x in range(g.size):
                got = store.P(x, y)
                want = oracle.P(x, y)
                want_t = tuple(
                    want.coeff(e) for e in range(want.degree() + 1)
                ) if not want.is_zero() else ()
                assert got == want_t, (symbol, x, y)


def test_P_against_oracle_H3_random_pairs():
    g = build_group("H3")
    store = compute_kl(g)
    oracle = RPolyOracle(g)
    rng = random.Random(20260219)
    for _ in range(500):
        x = rng.randrange(g.size)
        y = rng.randrange(g.size)
        got = store.P(x, y)
        want = oracle.P(x, y)
        if want.is_zero():
            assert got == ()
        else:
            assert got == tuple(
                want.coeff(e) for e in range(want.degree() + 1)
            ), (x, y)


# ---------------------------------------------------------------------------
# products


def test_c_s_squared():
    store = _store("I2(3)")
    g = store.group
    s = g.element_by_word((0,))
    assert c_product(store, s, s) == ((s, vp.GATE),)


def test_dihedral_product_with_mu_correction():
    store = _store("I2(3)")
    g = store.group
    s1 = g.element_by_word((0,))
    s2s1 = g.element_by_word((1, 0))
    s1s2s1 = g.element_by_word((0, 1, 0))
    row = c_product(store, s1, s2s1)
    assert row == ((s1, vp.ONE), (s1s2s1, vp.ONE))


def test_c_product_against_naive_oracle():
    cases = [("I2(3)", None), ("I2(5)", None), ("A3", 40), ("B3", 12)]
    rng = random.Random(77)
    for symbol, n_samples in cases:
        g = build_group(symbol)
        store = compute_kl(g)
        oracle = RPolyOracle(g)
        if n_samples is None:
            pairs = [(x, y) for x in range(g.size) for y in range(g.size)]
        else:
            pairs = [
                (rng.randrange(g.size), rng.randrange(g.size))
                for _ in range(n_samples)
            ]
        for x, y in pairs:
            fast = c_product(store, x, y)
            slow = naive_c_product(g, oracle, x, y)
            assert len(fast) == len(slow), (symbol, x, y)
            for (z1, p1), (z2, p2) in zip(fast, slow):
                assert z1 == z2
                assert vp.to_laurent(p1) == p2, (symbol, x, y, z1)


def test_c_product_against_naive_oracle_H3_sample():
    g = build_group("H3")
    store = compute_kl(g)
    oracle = RPolyOracle(g)
    rng = random.Random(55)
    for _ in range(5):
        x = rng.randrange(g.size)
        y = rng.randrange(g.size)
        fast = c_product(store, x, y)
        slow = naive_c_product(g, oracle, x, y)
        assert [(z, vp.to_laurent(p)) for z, p in fast] == slow


# ---------------------------------------------------------------------------
# h tables


def test_generator_table_row_count():
    store = _store("I2(3)")
    tab = compute_h_table(store, scope="generators")
    assert tab.scope == "generators"
    assert len(tab.rows) == 12
    full = compute_h_table(store, scope="all")
    assert len(full.rows) == 36
    # generator rows agree between the two routes
    for key, row in tab.rows.items():
        assert full.rows[key] == row


def test_h_table_rows_match_c_product():
    for symbol, n_samples in (("I2(5)", None), ("A3", 60)):
        store = _store(symbol)
        g = store.group
        tab = compute_h_table(store, scope="all")
        rng = random.Random(4242)
        if n_samples is None:
            pairs = list(tab.rows)
        else:
            pairs = [
                (rng.randrange(g.size), rng.randrange(g.size))
                for _ in range(n_samples)
            ]
        for x, y in pairs:
            assert tab.rows[(x, y)] == c_product(store, x, y), (symbol, x, y)


def test_h_polynomials_bar_symmetric():
    for symbol in ("I2(5)", "A3"):
        tab = compute_h_table(_store(symbol), scope="all")
        for row in tab.rows.values():
            for _, p in row:
                assert vp.bar_symmetric(p)


def test_h_top_degree_of_longest_element():
    store = _store("I2(3)")
    g = store.group
    tab = compute_h_table(store, scope="all")
    p = tab.h(g.w0, g.w0, g.w0)
    assert vp.deg(p) == 3  # the a-value of the longest dihedral element


def test_h_associativity_random_triples():
    store = _store("A3")
    g = store.group
    tab = compute_h_table(store, scope="all")
    rng = random.Random(987)
    for _ in range(200):
        x = rng.randrange(g.size)
        y = rng.randrange(g.size)
        z = rng.randrange(g.size)
        lhs = {}
        for w, p in tab.rows[(x, y)]:
            for t, q in tab.rows[(w, z)]:
                lhs[t] = vp.add(lhs.get(t, vp.ZERO), vp.mul(p, q))
        rhs = {}
        for w, p in tab.rows[(y, z)]:
            for t, q in tab.rows[(x, w)]:
                rhs[t] = vp.add(rhs.get(t, vp.ZERO), vp.mul(p, q))
        lhs = {t: p for t, p in lhs.items() if p[1]}
        rhs = {t: p for t, p in rhs.items() if p[1]}
        assert lhs == rhs, (x, y, z)


def test_all_pairs_budget_refusal():
    store = _store("A3")
    with pytest.raises(RefusalError) as err:
        compute_h_table(store, scope="all", row_budget=100)
    assert "576" in str(err.value)
    assert "A3" in str(err.value)


def test_streaming_matches_materialized():
    store = _store("I2(5)")
    tab = compute_h_table(store, scope="all")
    seen = {}

    def consumer(x, y, row):
        seen[(x, y)] = tuple(sorted(row.items()))

    stream_h_blocks(store, consumer)
    assert seen == tab.rows


def test_streaming_parallel_matches_serial():
    store = _store("A3")
    serial = []
    stream_h_blocks(store, lambda x, y, row: serial.append((x, y, tuple(sorted(row.items())))))
    parallel = []
    stream_h_blocks(
        store,
        lambda x, y, row: parallel.append((x, y, tuple(sorted(row.items())))),
        jobs=2,
    )
    assert serial == parallel


# ---------------------------------------------------------------------------
# the dagger automorphism


def test_dagger_on_generator():
    store = _store("I2(3)")
    g = store.group
    s = g.element_by_word((0,))
    vec = dagger_T_basis(store, s)
    # v^-1 (T_e - T_s^-1) = v^-1 ((2 - v^-2) T_e - v^-2 T_s)
    assert vec[0] == vp.add(vp.scale((-1, (1,)), 2), (-3, (-1,)))
    assert vec[s] == (-3, (-1,))


def test_dagger_leading_term_and_support():
    store = _store("A3")
    g = store.group
    for x in range(g.size):
        vec = dagger_T_basis(store, x)
        lx = g.length[x]
        sign = -1 if lx % 2 else 1
        # (T_{y^-1})^(-1) lives on {u <= y}, top term v^(-2 l(y)) T_y
        assert vec[x] == (-3 * lx, (sign,))
        for u in vec:
            assert g.bruhat_leq(u, x), (x, u)


def test_dagger_specializes_to_signed_P_at_one():
    for symbol in ("I2(3)", "I2(5)", "A3"):
        store = _store(symbol)
        g = store.group
        for x in range(g.size):
            vec = dagger_T_basis(store, x)
            for u in range(g.size):
                got = vp.at_one(vec.get(u, vp.ZERO))
                sign = -1 if g.length[u] % 2 else 1
                # each (T_{y^-1})^(-1) collapses to plain y at v = 1
                want = sign * store.P_at_one(u, x) if g.bruhat_leq(u, x) else 0
                assert got == want, (symbol, x, u)


# ---------------------------------------------------------------------------
# cache


def test_cache_round_trip(tmp_path):
    g = build_group("I2(5)")
    store = compute_kl(g)
    tab = compute_h_table(store, scope="all")
    d = str(tmp_path / "I2(5)")
    cache_save(store, tab, d)
    store2, tab2 = cache_load(d, g)
    assert store2.P_by_w == store.P_by_w
    assert store2.mu_by_w == store.mu_by_w
    assert isinstance(tab2, HTable)
    assert tab2.scope == "all"
    assert tab2.rows == tab.rows


def test_cache_without_h_table(tmp_path):
    g = build_group("I2(3)")
    store = compute_kl(g)
    d = str(tmp_path / "c")
    cache_save(store, None, d)
    store2, tab2 = cache_load(d, g)
    assert tab2 is None
    assert store2.P_by_w == store.P_by_w


def test_cache_rejects_wrong_group(tmp_path):
    g5 = build_group("I2(5)")
    g3 = build_group("I2(3)")
    d = str(tmp_path / "c")
    cache_save(compute_kl(g5), None, d)
    with pytest.raises(CacheInvalidError):
        cache_load(d, g3)


def test_cache_rejects_version_bump(tmp_path):
    import json
    import os

    g = build_group("I2(3)")
    d = str(tmp_path / "c")
    cache_save(compute_kl(g), None, d)
    mpath = os.path.join(d, "manifest.json")
    with open(mpath) as f:
        manifest = json.load(f)
    manifest["format_version"] += 1
    with open(mpath, "w") as f:
        json.dump(manifest, f)
    with pytest.raises(CacheInvalidError):
        cache_load(d, g)


def test_cache_rejects_corrupt_payload(tmp_path):
    import os

    g = build_group("I2(3)")
    d = str(tmp_path / "c")
    cache_save(compute_kl(g), None, d)
    kpath = os.path.join(d, "kl.bin")
    with open(kpath, "r+b") as f:
        f.seek(0)
        f.write(b"XXXX")
    with pytest.raises(CacheInvalidError):
        cache_load(d, g)
