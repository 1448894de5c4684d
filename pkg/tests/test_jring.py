"""Cells, a-function, leading constants, asymptotic ring."""

import random

import pytest

from coxcells.coxeter import build_group
from coxcells.jring import (
    compute_a,
    compute_cells,
    compute_gamma,
    distinguished_involutions,
)
from coxcells.klbase import compute_h_table, compute_kl

from oracles import tableaux_count


def _setup(symbol, materialize=True):
    g = build_group(symbol)
    store = compute_kl(g)
    gens = compute_h_table(store, scope="generators")
    cells = compute_cells(gens)
    source = compute_h_table(store, scope="all") if materialize else store
    gamma = compute_gamma(source, cells)
    dlist = distinguished_involutions(gamma, cells, store)
    return g, store, cells, gamma, dlist


# ---------------------------------------------------------------------------
# cells


def test_dihedral3_cells_frozen():
    g, store, cells, gamma, dlist = _setup("I2(3)")
    assert cells.left_cells == ((0,), (1, 4), (2, 3), (5,))
    assert cells.right_cells == ((0,), (1, 3), (2, 4), (5,))
    assert cells.two_sided_cells == ((0,), (1, 2, 3, 4), (5,))
    assert [cells.left_cell_of[w] for w in range(6)] == [0, 1, 2, 2, 1, 3]


def test_dihedral5_cells_frozen():
    g, store, cells, gamma, dlist = _setup("I2(5)")
    assert cells.left_cells == ((0,), (1, 4, 5, 8), (2, 3, 6, 7), (9,))
    assert len(cells.two_sided_cells) == 3


def test_right_cells_are_inverted_left_cells():
    for symbol in ("I2(5)", "A3", "B3"):
        g = build_group(symbol)
        store = compute_kl(g)
        cells = compute_cells(compute_h_table(store, scope="generators"))
        left_sets = {frozenset(c) for c in cells.left_cells}
        inverted = {
            frozenset(g.inverse[m] for m in c) for c in cells.right_cells
        }
        assert left_sets == inverted


def test_left_cells_refine_two_sided():
    g, store, cells, gamma, dlist = _setup("A3")
    for members in cells.left_cells:
        assert len({cells.two_sided_of[m] for m in members}) == 1


def test_A3_cell_counts_against_tableaux_oracle():
    g, store, cells, gamma, dlist = _setup("A3")
    assert len(cells.left_cells) == tableaux_count(4) == 10
    assert len(cells.two_sided_cells) == 5  # partitions of 4
    assert sorted(len(c) for c in cells.two_sided_cells) == [1, 1, 4, 9, 9]
    assert sorted(len(c) for c in cells.left_cells) == [
        1, 1, 2, 2, 3, 3, 3, 3, 3, 3,
    ]


def test_dihedral_left_order():
    g, store, cells, gamma, dlist = _setup("I2(5)")
    c_e = cells.left_cell_of[0]
    c_w0 = cells.left_cell_of[g.w0]
    mid1 = cells.left_cell_of[1]
    mid2 = cells.left_cell_of[2]
    assert cells.left_leq(c_w0, mid1) and not cells.left_leq(mid1, c_w0)
    assert cells.left_leq(mid1, c_e) and not cells.left_leq(c_e, mid1)
    assert not cells.left_leq(mid1, mid2)
    assert not cells.left_leq(mid2, mid1)
    assert cells.left_leq(mid1, mid1)


# ---------------------------------------------------------------------------
# a-function


def test_dihedral_a_values():
    g, store, cells, gamma, dlist = _setup("I2(3)")
    assert gamma.a == (0, 1, 1, 1, 1, 3)
    g5, _, cells5, gamma5, _ = _setup("I2(5)")
    assert gamma5.a[0] == 0
    assert gamma5.a[g5.w0] == 5
    assert all(gamma5.a[w] == 1 for w in range(1, 9))


def test_A3_a_values_per_two_sided_cell():
    g, store, cells, gamma, dlist = _setup("A3")
    per_cell = {}
    for members in cells.two_sided_cells:
        per_cell[len(members)] = gamma.a[members[0]]
    # sizes 1 (identity), 9, 4, 9, 1 (longest); a = 0, 1, 2, 3, 6
    assert gamma.a[0] == 0
    assert gamma.a[g.w0] == 6
    assert sorted(gamma.a[c[0]] for c in cells.two_sided_cells) == [
        0, 1, 2, 3, 6,
    ]


def test_compute_a_matches_gamma_field():
    g = build_group("I2(5)")
    store = compute_kl(g)
    cells = compute_cells(compute_h_table(store, scope="generators"))
    tab = compute_h_table(store, scope="all")
    assert compute_a(tab, cells) == compute_gamma(tab, cells).a


def test_streaming_gamma_matches_materialized():
    g = build_group("A3")
    store = compute_kl(g)
    cells = compute_cells(compute_h_table(store, scope="generators"))
    via_table = compute_gamma(compute_h_table(store, scope="all"), cells)
    via_stream = compute_gamma(store, cells)
    assert via_table.a == via_stream.a
    assert via_table.lead == via_stream.lead
    via_jobs = compute_gamma(store, cells, jobs=2)
    assert via_jobs.lead == via_stream.lead


# ---------------------------------------------------------------------------
# gamma and the ring structure


def test_gamma_support_stays_in_two_sided_cell():
    for symbol in ("I2(5)", "A3"):
        g, store, cells, gamma, dlist = _setup(symbol)
        for (x, y, z) in gamma.lead:
            cx = cells.two_sided_of[x]
            assert cells.two_sided_of[y] == cx, (symbol, x, y, z)
            assert cells.two_sided_of[z] == cx, (symbol, x, y, z)


def test_gamma_cyclic_and_inverse_symmetry():
    for symbol in ("I2(5)", "A3"):
        g, store, cells, gamma, dlist = _setup(symbol)
        inv = g.inverse
        for (x, y, zz), c in gamma.lead.items():
            z = inv[zz]  # abstract slot: gamma(x, y, z) = c
            assert gamma.gamma(x, y, z) == c
            assert gamma.gamma(y, z, x) == c, (symbol, x, y, z)
            assert gamma.gamma(z, x, y) == c, (symbol, x, y, z)
            assert gamma.gamma(inv[y], inv[x], inv[z]) == c, (symbol, x, y, z)


def test_j_ring_associativity_random_triples():
    g, store, cells, gamma, dlist = _setup("A3")
    rng = random.Random(60902)
    for _ in range(500):
        x = rng.randrange(g.size)
        y = rng.randrange(g.size)
        z = rng.randrange(g.size)
        lhs = {}
        for w, c in gamma.product(x, y):
            for t, c2 in gamma.product(w, z):
                lhs[t] = lhs.get(t, 0) + c * c2
        rhs = {}
        for w, c in gamma.product(y, z):
            for t, c2 in gamma.product(x, w):
                rhs[t] = rhs.get(t, 0) + c * c2
        assert {t: c for t, c in lhs.items() if c} == {
            t: c for t, c in rhs.items() if c
        }, (x, y, z)


def test_by_zx_cross_index():
    g, store, cells, gamma, dlist = _setup("I2(5)")
    inv = g.inverse
    n = 0
    for (x, y, zz), c in gamma.lead.items():
        assert (y, c) in gamma.by_zx[(inv[zz], x)]
        n += 1
    assert n == sum(len(v) for v in gamma.by_zx.values())


# ---------------------------------------------------------------------------
# distinguished involutions


def test_dihedral_distinguished():
    g, store, cells, gamma, dlist = _setup("I2(3)")
    assert dlist == (0, 1, 2, 5)
    assert cells.distinguished == dlist
    g5, _, cells5, gamma5, d5 = _setup("I2(5)")
    assert d5 == (0, 1, 2, 9)
    # the longer palindromic reflections are involutions but not distinguished
    pal = g5.element_by_word((0, 1, 0))
    assert g5.inverse[pal] == pal
    assert pal not in d5


def test_A3_distinguished_are_all_involutions():
    g, store, cells, gamma, dlist = _setup("A3")
    involutions = sorted(
        w for w in range(g.size) if g.inverse[w] == w
    )
    # special to this type: one involution per left cell
    assert list(dlist) == involutions
    assert len(dlist) == len(cells.left_cells) == 10


def test_B3_distinguished_one_per_left_cell():
    g, store, cells, gamma, dlist = _setup("B3")
    assert len(dlist) == len(cells.left_cells)
    for d in dlist:
        assert g.inverse[d] == d
    cells_hit = {cells.left_cell_of[d] for d in dlist}
    assert len(cells_hit) == len(cells.left_cells)


def test_nondistinguished_involutions_can_carry_gamma():
    # the defect test is what cuts out the distinguished set; the support
    # of t_x t_{x^-1} is strictly bigger in general
    g, store, cells, gamma, dlist = _setup("B3")
    dset = set(dlist)
    slot = set()
    for x in range(g.size):
        for z, _ in gamma.product(x, g.inverse[x]):
            slot.add(g.inverse[z])
    assert dset < slot
    assert len(slot) == 20  # all involutions of this group
    extra = sorted(slot - dset)
    assert all(g.inverse[u] == u for u in extra)


def test_B3_cell_profile_frozen():
    g, store, cells, gamma, dlist = _setup("B3")
    assert len(cells.left_cells) == 14
    assert sorted(len(c) for c in cells.two_sided_cells) == [1, 1, 9, 9, 14, 14]
    assert sorted(gamma.a[c[0]] for c in cells.two_sided_cells) == [
        0, 1, 2, 3, 4, 9,
    ]
    assert gamma.a[g.w0] == 9


def test_H3_cell_profile_frozen():
    g, store, cells, gamma, dlist = _setup("H3")
    assert len(cells.left_cells) == 22
    assert len(dlist) == 22
    assert sorted(len(c) for c in cells.two_sided_cells) == [
        1, 1, 18, 18, 25, 25, 32,
    ]
    assert sorted(gamma.a[c[0]] for c in cells.two_sided_cells) == [
        0, 1, 2, 3, 5, 6, 15,
    ]
    # the size-32 two-sided cell: four left cells of size 8, each meeting
    # its own inverse in exactly two elements
    big = next(c for c in cells.two_sided_cells if len(c) == 32)
    inside = [
        members
        for members in cells.left_cells
        if cells.two_sided_of[members[0]] == cells.two_sided_of[big[0]]
    ]
    assert [len(m) for m in inside] == [8, 8, 8, 8]
    for members in inside:
        mem = set(members)
        assert sum(1 for m in members if g.inverse[m] in mem) == 2
