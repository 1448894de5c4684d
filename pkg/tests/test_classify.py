"""Transport, generic traces, fake degrees and the parity classification.

The worked small-group values here (dihedral asymptotic traces, generic
trace tables, graded coinvariant multiplicities) were checked by hand and
against the brute-force oracles; the bigger groups are pinned to frozen
runs of the same code path plus structural invariants that do not depend
on element numbering.
"""

from fractions import Fraction
from types import SimpleNamespace

import pytest

from oracles import dihedral3_coinvariant_graded_characters

from coxcells.classify import (
    balanced_dagger_rows,
    check_b_not_below_a,
    check_cell_modules_contain_special,
    check_longest_twist,
    check_parity_bridge,
    check_phi_multiplicative,
    classify_group_streamed,
    expected_exceptional_profile,
    hecke_character,
    left_cell_module,
    verify_claim,
    word_name,
)
from coxcells.errors import RefusalError, UsageError
from coxcells.exactnum import LaurentPoly

DEFAULT_SYMBOLS = ("I2(3)", "I2(5)", "I2(7)", "A3", "B3", "H3")


def _row_of(table, label):
    return table.names.index(label)


def _as_fraction(value):
    if isinstance(value, int):
        return Fraction(value)
    return value.as_fraction()


# ---------------------------------------------------------------------------
# the transport isomorphism


def test_phi_identity_row_is_distinguished_sum(rig):
    for symbol in ("I2(3)", "A3"):
        r = rig(symbol)
        phi = r.result.phi
        assert phi.matrix[0] == {d: 1 for d in r.dset}


def test_phi_inverse_is_exact(rig):
    r = rig("I2(5)")
    phi = r.result.phi
    size = r.group.size
    for x in range(size):
        for z in range(size):
            acc = sum(
                Fraction(phi.matrix[x].get(w, 0)) * phi.inverse[w][z]
                for w in range(size)
            )
            assert acc == (1 if x == z else 0)


def test_phi_multiplicative_small_groups(rig):
    # raises InternalInconsistencyError on any failing pair
    for symbol in ("I2(3)", "A3"):
        r = rig(symbol)
        check_phi_multiplicative(r.result.phi, r.gamma, pairs=300)


# ---------------------------------------------------------------------------
# asymptotic traces


def test_two_dim_asymptotic_traces_dihedral3(rig):
    r = rig("I2(3)")
    two = _row_of(r.table, "phi2_0")
    jt = next(x.j_traces for x in r.result.irreps if x.label == "phi2_0")
    by_word = {word_name(r.group, w): jt[w] for w in range(r.group.size)}
    assert by_word["e"] == 0
    assert by_word["s1"] == 1
    assert by_word["s2"] == 1
    assert by_word["s1s2"] == 0
    assert by_word["s2s1"] == 0
    assert by_word["s1s2s1"] == 0
    assert r.table.dims[two] == 2


def test_unit_asymptotic_trace_equals_dimension(rig):
    for symbol in ("I2(7)", "B3"):
        r = rig(symbol)
        for rec in r.result.irreps:
            vals = [rec.j_traces[d] for d in r.dset]
            total = vals[0]
            for v in vals[1:]:
                total = total + v
            assert total == rec.dim


def test_asymptotic_support_fills_every_cell(rig):
    for symbol in ("A3", "B3"):
        r = rig(symbol)
        seen = {}
        for rec in r.result.irreps:
            support = {
                r.cells.two_sided_of[z]
                for z, v in enumerate(rec.j_traces)
                if v
            }
            assert support == {rec.cell}
            seen.setdefault(rec.cell, []).append(rec.label)
        assert sorted(seen) == list(range(len(r.cells.two_sided_cells)))


# ---------------------------------------------------------------------------
# generic traces


def test_dagger_rows_diagonal_signs(rig):
    r = rig("A3")
    rows = balanced_dagger_rows(r.store)
    for x, row in enumerate(rows):
        val, coeffs = row[x]
        assert val == 0
        assert coeffs == ((1,) if r.group.length[x] % 2 == 0 else (-1,))


def test_trivial_and_sign_generic_traces(rig):
    for symbol in ("I2(3)", "A3"):
        r = rig(symbol)
        triv = hecke_character(
            r.store, r.htable, r.cells, r.dset, r.table,
            r.table.trivial_index,
            jt=next(
                x.j_traces for x in r.result.irreps
                if x.label == r.table.names[r.table.trivial_index]
            ),
        )
        sign = hecke_character(
            r.store, r.htable, r.cells, r.dset, r.table,
            r.table.sign_index,
            jt=next(
                x.j_traces for x in r.result.irreps
                if x.label == r.table.names[r.table.sign_index]
            ),
        )
        for w in range(r.group.size):
            l = r.group.length[w]
            assert triv[w] == LaurentPoly.monomial(2 * l, 1, "v")
            assert sign[w] == LaurentPoly.constant((-1) ** l, "v")


def test_dihedral5_generator_trace(rig):
    r = rig("I2(5)")
    expected = LaurentPoly({0: -1, 2: 1}, var="v")
    for rec in r.result.irreps:
        if rec.dim != 2:
            continue
        row = _row_of(r.table, rec.label)
        hc = hecke_character(
            r.store, r.htable, r.cells, r.dset, r.table, row,
            jt=rec.j_traces,
        )
        for w in range(r.group.size):
            if r.group.length[w] == 1:
                assert hc[w] == expected


def test_generic_traces_specialize_to_characters(rig):
    r = rig("A3")
    cof = r.table.classes.class_of
    for rec in r.result.irreps:
        row = _row_of(r.table, rec.label)
        hc = hecke_character(
            r.store, r.htable, r.cells, r.dset, r.table, row,
            jt=rec.j_traces,
        )
        for w in range(r.group.size):
            assert hc[w].at_one() == r.table.rows[row][cof[w]]


# ---------------------------------------------------------------------------
# fake degrees


def test_fake_degree_examples_dihedral3(rig):
    r = rig("I2(3)")
    by_label = {rec.label: rec.fake_degree for rec in r.result.irreps}
    triv = r.table.names[r.table.trivial_index]
    sgn = r.table.names[r.table.sign_index]
    assert by_label[triv] == LaurentPoly.constant(1, "X")
    assert by_label[sgn] == LaurentPoly.monomial(3, 1, "X")
    assert by_label["phi2_0"] == LaurentPoly({1: 1, 2: 1}, var="X")


def test_fake_degrees_match_coinvariant_oracle(rig):
    r = rig("I2(3)")
    oracle_group, graded = dihedral3_coinvariant_graded_characters()
    assert oracle_group.fingerprint() == r.group.fingerprint()
    cof = r.table.classes.class_of
    order = r.group.size
    for rec in r.result.irreps:
        row = _row_of(r.table, rec.label)
        chi = [
            _as_fraction(r.table.rows[row][cof[w]]) for w in range(order)
        ]
        for degree in range(len(graded)):
            mult = (
                sum(chi[w] * graded[degree][w] for w in range(order)) / order
            )
            assert mult == rec.fake_degree.coeff(degree)
        assert rec.fake_degree.degree() < len(graded)


def test_fake_degree_sum_is_poincare(rig):
    for symbol in ("I2(7)", "A3", "B3"):
        r = rig(symbol)
        total = LaurentPoly.zero("X")
        for rec in r.result.irreps:
            total = total + rec.fake_degree * rec.dim
        assert total == r.group.poincare_polynomial()


def test_b_value_is_fake_degree_valuation(rig):
    r = rig("B3")
    for rec in r.result.irreps:
        assert rec.b_value == rec.fake_degree.valuation()
        assert rec.a_value <= rec.b_value
        assert rec.special == (rec.a_value == rec.b_value)


def test_dihedral5_special_is_reflection_row(rig):
    r = rig("I2(5)")
    two_dim = [rec for rec in r.result.irreps if rec.dim == 2]
    assert sorted(rec.b_value for rec in two_dim) == [1, 2]
    for rec in two_dim:
        assert rec.special == (rec.b_value == 1)
        assert rec.a_value == 1


# ---------------------------------------------------------------------------
# left cell modules


def test_left_cell_modules_dihedral3(rig):
    r = rig("I2(3)")
    two = _row_of(r.table, "phi2_0")
    modules = [
        left_cell_module(r.htable, r.cells, r.table, cid,
                         r.result.orientation)
        for cid in range(len(r.cells.left_cells))
    ]
    for cid, cell in enumerate(r.cells.left_cells):
        if cell == (0,):
            assert modules[cid] == {r.table.trivial_index: 1}
        elif len(cell) == 1:
            assert modules[cid] == {r.table.sign_index: 1}
        else:
            assert modules[cid] == {two: 1}


def test_exceptional_cell_modules_h3(rig):
    r = rig("H3")
    four = [i for i, d in enumerate(r.table.dims) if d == 4]
    exc_cells = {rec.cell for rec in r.result.irreps if rec.exceptional}
    assert len(exc_cells) == 1
    cell = exc_cells.pop()
    left_ids = sorted({
        r.cells.left_cell_of[z]
        for z, c in enumerate(r.cells.two_sided_of)
        if c == cell
    })
    assert len(left_ids) == 4
    for cid in left_ids:
        module = left_cell_module(
            r.htable, r.cells, r.table, cid, r.result.orientation
        )
        assert module == {four[0]: 1, four[1]: 1}


def test_orientation_detected_standard(rig):
    for symbol in DEFAULT_SYMBOLS:
        assert rig(symbol).result.orientation == "standard"


# ---------------------------------------------------------------------------
# the classification


def test_h3_frozen_classification(rig):
    r = rig("H3")
    got = {
        rec.label: (rec.dim, rec.a_value, rec.b_value, rec.ordinary,
                    rec.special)
        for rec in r.result.irreps
    }
    assert got == {
        "phi1_0": (1, 0, 0, True, True),
        "phi1_1": (1, 15, 15, True, True),
        "phi3_0": (3, 1, 3, True, False),
        "phi3_1": (3, 1, 1, True, True),
        "phi3_2": (3, 6, 8, True, False),
        "phi3_3": (3, 6, 6, True, True),
        "phi4_0": (4, 3, 3, False, True),
        "phi4_1": (4, 3, 4, False, False),
        "phi5_0": (5, 2, 2, True, True),
        "phi5_1": (5, 5, 5, True, True),
    }


def test_everything_ordinary_outside_h3(rig):
    for symbol in ("I2(3)", "I2(5)", "I2(7)", "A3", "B3"):
        r = rig(symbol)
        assert all(rec.ordinary for rec in r.result.irreps)
        assert all(rec.ordinary for rec in r.result.involutions)
        assert all(r.result.cell_ordinary.values())


def test_one_special_per_cell(rig):
    for symbol in DEFAULT_SYMBOLS:
        r = rig(symbol)
        specials = {}
        for rec in r.result.irreps:
            if rec.special:
                specials.setdefault(rec.cell, []).append(rec.label)
        assert all(len(v) == 1 for v in specials.values())
        assert sorted(specials) == list(
            range(len(r.cells.two_sided_cells))
        )


def test_distinguished_involutions_are_ordinary(rig):
    for symbol in DEFAULT_SYMBOLS:
        r = rig(symbol)
        by_element = {rec.element: rec for rec in r.result.involutions}
        for d in r.dset:
            assert by_element[d].ordinary


def test_h3_exceptional_involutions(rig):
    r = rig("H3")
    exc_cell = {rec.cell for rec in r.result.irreps if rec.exceptional}.pop()
    strange = [rec for rec in r.result.involutions if not rec.ordinary]
    assert len(strange) == 4
    assert all(rec.cell == exc_cell for rec in strange)
    assert all((rec.length - rec.a_value) % 2 == 1 for rec in strange)


def test_expected_profiles(rig):
    # the function only reads the type symbol and the order, so the types
    # over the build cap get a stand-in datum
    def datum(sym, order):
        return SimpleNamespace(type_symbol=sym, order=order)

    assert expected_exceptional_profile(rig("H3").group.datum) == (2, 4)
    assert expected_exceptional_profile(datum("H4", 14400)) == (4, 16)
    assert expected_exceptional_profile(datum("E7", 2903040)) == (2, 512)
    assert expected_exceptional_profile(datum("E8", 696729600)) == (4, 4096)
    assert expected_exceptional_profile(rig("B3").group.datum) is None
    assert rig("H3").result.profile_consistent
    assert rig("B3").result.profile_consistent


# ---------------------------------------------------------------------------
# claims and cross-checks


def test_all_claims_pass_on_default_groups(rig):
    for symbol in DEFAULT_SYMBOLS:
        r = rig(symbol)
        for report in r.claims:
            assert report.status == "pass", (symbol, report.claim_id)


def test_claim_witnesses_h3(rig):
    r = rig("H3")
    by_id = {report.claim_id: report for report in r.claims}
    assert by_id["1.2b"].witness["elements_checked"] == 32
    assert by_id["1.3a"].witness["elements_checked"] == 24
    assert sorted(by_id["1.5a"].witness["non_palindromic"]) == [
        "phi4_0", "phi4_1",
    ]


def test_unknown_claim_rejected(rig):
    with pytest.raises(UsageError):
        verify_claim("9.9z", rig("I2(3)").result)


def test_property_checks(rig):
    for symbol in DEFAULT_SYMBOLS:
        r = rig(symbol)
        check_parity_bridge(r.result)
        check_b_not_below_a(r.result)
        check_cell_modules_contain_special(r.result, r.htable)
    assert check_longest_twist(rig("H3").result) is True
    assert check_longest_twist(rig("B3").result) is False


# ---------------------------------------------------------------------------
# the streamed lane


def test_streamed_lane_matches_direct(rig):
    for symbol in ("A3", "B3"):
        r = rig(symbol)
        streamed = classify_group_streamed(
            r.store, r.cells, r.gamma, r.dset, r.table
        )
        assert streamed.irreps == r.result.irreps
        assert streamed.involutions == r.result.involutions
        assert streamed.cell_ordinary == r.result.cell_ordinary
        assert streamed.orientation == r.result.orientation


def test_streamed_lane_refuses_irrational_characters(rig):
    r = rig("H3")
    with pytest.raises(RefusalError):
        classify_group_streamed(r.store, r.cells, r.gamma, r.dset, r.table)
