"""Transport of group representations into the asymptotic ring, parity
classification of irreducibles and involutions, fake degrees, special
representations, and the claim checks built on top of them.

The bridge is the linear map sending each group element to a combination
of the asymptotic basis {t_z}: the signed canonical-basis element c_x
with bar-dual coefficients, specialized at v = 1, goes to the sum of
h_{x,d,z} t_z over distinguished d and z in the same left cell as d.
That map is invertible, so every character of the group pulls back to
trace data tr(t_z) on the asymptotic ring, and pushes forward through
the structure constants to a trace on the generic algebra.  Parity of
the exponents appearing in those generic traces splits the irreducibles
into ordinary and exceptional; the same parity language applies to
involutions through l(x) - a(x) mod 2.

Two lanes compute the same records.  The direct lane holds the full
structure-constant table and the inverse transport matrix exactly over
the rationals.  The streamed lane, for groups whose full table would
not fit the row budget, reads only the columns at distinguished
involutions, solves for the asymptotic traces modulo several word-sized
primes, reconstructs the rational values, and verifies the solution
exactly; it requires all character values to be rational integers.
"""

import hashlib
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .chartab import CharacterTable, _is_prime
from .errors import InternalInconsistencyError, RefusalError, UsageError
from .exactnum import (
    LaurentPoly,
    cyclo_context,
    cyclo_rational,
    embed_cyclo,
    even_parity,
    exact_divide,
    is_palindromic,
)
from .jring import CellPartition, GammaTable
from .klbase import HTable, KLStore, generator_rows, stream_h_blocks, vp

CLAIM_IDS = ("1.2b", "1.3a", "1.3c", "1.5a", "1.6b")


def word_name(group, w: int) -> str:
    """Readable word for an element, 'e' for the identity."""
    if w == 0:
        return "e"
    return "".join(f"s{s + 1}" for s in group.words[w])


# ---------------------------------------------------------------------------
# the transport isomorphism

class PhiIso:
    """Invertible change of basis from group elements to the asymptotic
    basis, with its exact rational inverse.

    matrix[x] is a sparse integer row {z: coefficient of t_z}; inverse[z]
    is a dense tuple of Fractions over group elements.  The image of the
    identity is checked to be the sum of t_d over distinguished d.
    """

    __slots__ = ("group", "dset", "matrix", "inverse")

    def __init__(self, group, dset, matrix, inverse):
        self.group = group
        self.dset = dset
        self.matrix = matrix
        self.inverse = inverse
        unit = matrix[0]
        want = set(dset)
        if set(unit) != want or any(unit[d] != 1 for d in want):
            raise InternalInconsistencyError(
                "image of the identity is not the sum over distinguished "
                "involutions"
            )


def _signed_row(store, x):
    """{u: (-1)^l(u) P_{u,x}(1)}: the v=1 coordinates of the dual basis
    element attached to x."""
    lengths = store.group.length
    return {
        u: (-s if lengths[u] % 2 else s)
        for u, qc in store.P_by_w[x].items()
        for s in (sum(qc),)
        if s
    }


def _d_by_left_cell(cells, dset):
    out = {}
    for d in dset:
        c = cells.left_cell_of[d]
        if c in out:
            raise InternalInconsistencyError("two distinguished in one cell")
        out[c] = d
    if len(out) != len(cells.left_cells):
        raise InternalInconsistencyError("left cell without a distinguished")
    return out


def _transport_rows(htable, cells, dset):
    """Sparse integer rows x -> {z: h_{x,d(z),z}(1)} over z ~L d."""
    group = htable.group
    lc = cells.left_cell_of
    rows = []
    for x in range(group.size):
        acc = {}
        for d in dset:
            target = lc[d]
            for z, p in htable.rows[(x, d)]:
                if lc[z] == target:
                    val = vp.at_one(p)
                    if val:
                        acc[z] = val
        rows.append(acc)
    return rows


def build_phi(store, htable, cells, dset) -> PhiIso:
    """The transport matrix on group-element rows and its exact inverse."""
    group = store.group
    if htable.scope != "all":
        raise UsageError("transport needs the all-pairs table")
    size = group.size
    lengths = group.length
    cols = _transport_rows(htable, cells, dset)
    # peel the unitriangular signed layer: rows of the dual basis are
    # supported on the Bruhat ideal with diagonal (-1)^l(x)
    matrix = [None] * size
    for x in range(size):
        acc = dict(cols[x])
        for u, b in _signed_row(store, x).items():
            if u == x:
                continue
            for z, c in matrix[u].items():
                t = acc.get(z, 0) - b * c
                if t:
                    acc[z] = t
                else:
                    acc.pop(z, None)
        if lengths[x] % 2:
            acc = {z: -c for z, c in acc.items()}
        matrix[x] = acc

    inverse = _invert_rational(matrix, size)
    return PhiIso(group, dset, tuple(matrix), inverse)


def _invert_rational(rows, size):
    """Exact inverse of a sparse integer row matrix, dense Fraction rows."""
    aug = []
    for x in range(size):
        line = [Fraction(0)] * (2 * size)
        for z, c in rows[x].items():
            line[z] = Fraction(c)
        line[size + x] = Fraction(1)
        aug.append(line)
    for col in range(size):
        piv = next((r for r in range(col, size) if aug[r][col]), None)
        if piv is None:
            raise InternalInconsistencyError(
                "transport matrix is singular; the sign convention broke"
            )
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [a * inv for a in aug[col]]
        base = aug[col]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], base)]
    # inverse row z gives the group-element coordinates of t_z
    return tuple(
        tuple(aug[x][size + z] for z in range(size)) for x in range(size)
    )


def check_phi_multiplicative(phi, gamma, pairs=200, seed=None):
    """phi(x) phi(y) = phi(xy) on a seeded random sample, exactly."""
    group = phi.group
    if seed is None:
        seed = int(
            hashlib.sha256(f"{group.fingerprint()}:phi".encode()).hexdigest(), 16
        )
    rng = random.Random(seed)
    for _ in range(pairs):
        x = rng.randrange(group.size)
        y = rng.randrange(group.size)
        lhs = {}
        for z, a in phi.matrix[x].items():
            for w, b in phi.matrix[y].items():
                ab = a * b
                for u, c in gamma.by_xy.get((z, w), ()):
                    t = lhs.get(u, 0) + ab * c
                    if t:
                        lhs[u] = t
                    else:
                        lhs.pop(u, None)
        if lhs != phi.matrix[group.multiply(x, y)]:
            raise InternalInconsistencyError(
                f"transport not multiplicative at ({x}, {y})"
            )


# ---------------------------------------------------------------------------
# traces on the asymptotic ring and the generic algebra

def j_traces(phi, table, row_index):
    """tr(t_z) on the module transported from a character row, per z."""
    group = phi.group
    M = table.conductor
    cof = table.classes.class_of
    chi = [table.rows[row_index][cof[w]] for w in range(group.size)]
    out = []
    for z in range(group.size):
        acc = cyclo_rational(M, 0)
        for w, c in enumerate(phi.inverse[z]):
            if c:
                acc = acc + c * chi[w]
        out.append(acc)
    dim = table.dims[row_index]
    unit = sum((out[d] for d in phi.dset), cyclo_rational(M, 0))
    if unit != dim:
        raise InternalInconsistencyError(
            f"unit trace {unit.render()} differs from the degree {dim}"
        )
    return tuple(out)


def support_cell(jt, cells) -> int:
    """The unique two-sided cell carrying nonzero asymptotic traces."""
    hit = {cells.two_sided_of[z] for z, v in enumerate(jt) if v}
    if len(hit) != 1:
        raise InternalInconsistencyError(
            f"asymptotic traces meet {len(hit)} two-sided cells"
        )
    return hit.pop()


def _dual_traces(htable, cells, dset, jt, conductor):
    """Per x, the generic trace of the dual basis element at x as a
    sparse {exponent: value} dict."""
    group = htable.group
    lc = cells.left_cell_of
    zero = cyclo_rational(conductor, 0)
    out = []
    for x in range(group.size):
        acc = {}
        for d in dset:
            target = lc[d]
            for z, p in htable.rows[(x, d)]:
                if lc[z] != target:
                    continue
                t = jt[z]
                if not t:
                    continue
                val, coeffs = p
                for i, c in enumerate(coeffs):
                    if c:
                        e = val + i
                        acc[e] = acc.get(e, zero) + c * t
        out.append({e: c for e, c in acc.items() if c})
    return out


# v^-1 - v: the correction term when a generator inverse acts in the
# normalization whose quadratic is (T_s - v)(T_s + v^-1) = 0.  Only in
# that normalization is T_s -> -T_s^-1 an algebra automorphism, so the
# dual-basis expansion used for the trace solve is built here rather
# than on top of the table module's T-basis, which absorbs an extra
# v^l(w) into each basis vector.
_INV_STEP = (-1, (1, 0, -1))


def balanced_dagger_rows(store):
    """Per element x, the expansion {w: coefficient} of the image of the
    canonical basis element under the automorphism T_s -> -T_s^-1, in
    the balanced T-basis.

    The diagonal coefficient is exactly (-1)^l(x) and specializing v = 1
    gives the signed Bruhat-ideal rows of the v=1 transport.
    """
    group = store.group
    size = group.size
    lengths = group.length
    left = group.left
    words = group.words
    # inv[y] expands the inverse of the balanced basis vector at y^-1;
    # built by left-composing generator inverses along first letters
    inv = [None] * size
    inv[0] = {0: vp.ONE}
    for y in range(1, size):
        s = words[y][0]
        lrow = left[s]
        out = {}
        for w, p in inv[lrow[y]].items():
            sw = lrow[w]
            if lengths[sw] > lengths[w]:
                cur = out.get(sw)
                out[sw] = p if cur is None else vp.add(cur, p)
                q = vp.mul(p, _INV_STEP)
                cur = out.get(w)
                out[w] = q if cur is None else vp.add(cur, q)
            else:
                cur = out.get(sw)
                out[sw] = p if cur is None else vp.add(cur, p)
        inv[y] = {w: p for w, p in out.items() if p[1]}
    rows = []
    for x in range(size):
        acc = {}
        for u, qc in store.P_by_w[x].items():
            m = vp.from_q(qc, lengths[u] - lengths[x])
            if lengths[u] % 2:
                m = vp.neg(m)
            for w, p in inv[u].items():
                t = vp.mul(m, p)
                cur = acc.get(w)
                acc[w] = t if cur is None else vp.add(cur, t)
        row = {w: p for w, p in acc.items() if p[1]}
        want = vp.neg(vp.ONE) if lengths[x] % 2 else vp.ONE
        if row.get(x) != want:
            raise InternalInconsistencyError(
                "dual-basis diagonal is not the expected sign"
            )
        rows.append(row)
    return rows


def hecke_character(store, htable, cells, dset, table, row_index, jt=None,
                    dag_rows=None):
    """Generic-algebra traces tr(T_w) for one irreducible, all w.

    Solved from the dual-basis traces through the triangular balanced
    expansion, then shifted by v^l(w) into the normalization whose
    generator quadratic is (T_s - v^2)(T_s + 1) = 0; specializing v = 1
    must recover the ordinary character values, which is asserted.
    dag_rows, when given, caches the expansions across calls.
    """
    group = store.group
    M = table.conductor
    if jt is None:
        raise UsageError("hecke_character needs the asymptotic traces")
    if dag_rows is None:
        dag_rows = balanced_dagger_rows(store)
    trc = _dual_traces(htable, cells, dset, jt, M)
    zero = cyclo_rational(M, 0)
    lengths = group.length
    out = [None] * group.size
    for x in range(group.size):
        acc = dict(trc[x])
        for u, g in dag_rows[x].items():
            if u == x:
                continue
            gv, gc = g
            for e2, c2 in out[u].items():
                for i, c in enumerate(gc):
                    if c:
                        e = gv + i + e2
                        t = acc.get(e, zero) + (-c) * c2
                        if t:
                            acc[e] = t
                        else:
                            acc.pop(e, None)
        if lengths[x] % 2:
            out[x] = {e: -c for e, c in acc.items()}
        else:
            out[x] = acc
    cof = table.classes.class_of
    polys = []
    for w, row in enumerate(out):
        total = sum(row.values(), zero)
        if total != table.rows[row_index][cof[w]]:
            raise InternalInconsistencyError(
                f"generic trace at v=1 disagrees with the character at w={w}"
            )
        shift = lengths[w]
        polys.append(
            LaurentPoly({e + shift: c for e, c in row.items()}, var="v")
        )
    return tuple(polys)


def is_ordinary(hecke_traces) -> bool:
    """Ordinary means every generic trace lives in even powers of v."""
    return all(even_parity(p) for p in hecke_traces)


def _parity_from_dual(trc_by_x, lengths) -> bool:
    """Equivalent parity test on dual-basis traces: every exponent at x
    must match l(x) mod 2."""
    for x, row in enumerate(trc_by_x):
        par = lengths[x] % 2
        if any(e % 2 != par for e in row):
            return False
    return True


# ---------------------------------------------------------------------------
# fake degrees

def _reflection_charpolys(group, table):
    """det(1 - X rho(z)) per conjugacy class, coefficients in the ambient
    conductor; elementary symmetric functions via Newton's identities."""
    rank = group.datum.rank
    ctx = cyclo_context(group.datum.refl_conductor)
    M = table.conductor
    polys = []
    for rep in table.classes.representatives:
        mat = group.matrix_of(rep)
        traces = []
        cur = mat
        for k in range(1, rank + 1):
            traces.append(
                sum((cur[i][i] for i in range(rank)), ctx.zero)
            )
            if k < rank:
                cur = tuple(
                    tuple(
                        sum(
                            (cur[i][t] * mat[t][j] for t in range(rank)),
                            ctx.zero,
                        )
                        for j in range(rank)
                    )
                    for i in range(rank)
                )
        elem = [ctx.one]
        for k in range(1, rank + 1):
            acc = ctx.zero
            sign = 1
            for i in range(1, k + 1):
                acc = acc + sign * elem[k - i] * traces[i - 1]
                sign = -sign
            elem.append(acc * Fraction(1, k))
        coeffs = {}
        for k, e in enumerate(elem):
            if e:
                coeffs[k] = embed_cyclo(-e if k % 2 else e, M)
        polys.append(LaurentPoly(coeffs, var="X"))
    return polys


def fake_degrees(group, table):
    """Graded multiplicities of every irreducible in the coinvariant
    algebra, as polynomials in X with nonnegative integer coefficients.

    Accumulated per conjugacy class over a common denominator and closed
    by exact division; the degree-sum identity against the length
    generating function is asserted before returning.
    """
    polys = _reflection_charpolys(group, table)
    k = len(polys)
    one = LaurentPoly.constant(1, var="X")
    prefix = [one]
    for d in polys:
        prefix.append(prefix[-1] * d)
    suffix = [one] * (k + 1)
    for j in range(k - 1, -1, -1):
        suffix[j] = polys[j] * suffix[j + 1]
    den = prefix[k] * group.size
    co = one
    for d in group.datum.degrees:
        co = co * (one - LaurentPoly.monomial(d, var="X"))
    out = []
    for idx in range(len(table)):
        row = table.rows[idx]
        num = LaurentPoly.zero("X")
        for j in range(k):
            scale = row[j] * table.classes.sizes[j]
            if scale:
                num = num + prefix[j] * suffix[j + 1] * scale
        quo = exact_divide(num * co, den)
        coeffs = {}
        for e, c in quo.coeffs.items():
            if not (c.is_rational() and c.is_integer()):
                raise InternalInconsistencyError(
                    f"graded multiplicity {c.render()} is not an integer"
                )
            iv = int(c.as_fraction())
            if iv < 0 or e < 0:
                raise InternalInconsistencyError(
                    "negative term in a graded multiplicity series"
                )
            coeffs[e] = iv
        p = LaurentPoly(coeffs, var="X")
        if p.at_one() != table.dims[idx]:
            raise InternalInconsistencyError(
                "graded multiplicities do not sum to the degree"
            )
        out.append(p)
    total = LaurentPoly.zero("X")
    for d, p in zip(table.dims, out):
        total = total + p * d
    if total != group.poincare_polynomial():
        raise InternalInconsistencyError(
            "degree-weighted sum of graded series misses the length "
            "generating function"
        )
    return tuple(out)


# ---------------------------------------------------------------------------
# cell modules

def left_cell_module(htable, cells, table, cell_id, orientation="standard"):
    """Multiset of irreducibles carried by one left cell, as a dict
    {row index: multiplicity}.

    Generator action read at v = 1 from the one-letter rows, keeping
    only targets inside the cell; the standard orientation takes
    1 - (c-action) for each generator, which sends the identity's cell
    to the trivial character.
    """
    group = htable.group
    members = cells.left_cells[cell_id]
    idx = {m: i for i, m in enumerate(members)}
    n = len(members)
    mats = []
    for s in range(group.datum.rank):
        s_elt = group.element_by_word((s,))
        act = [[0] * n for _ in range(n)]
        for col, y in enumerate(members):
            for z, p in htable.rows[(s_elt, y)]:
                r = idx.get(z)
                if r is not None:
                    act[r][col] = vp.at_one(p)
        if orientation == "standard":
            rho = [
                [(1 if i == j else 0) - act[i][j] for j in range(n)]
                for i in range(n)
            ]
        else:
            rho = [
                [act[i][j] - (1 if i == j else 0) for j in range(n)]
                for i in range(n)
            ]
        mats.append(rho)
    vals = []
    for rep in table.classes.representatives:
        acc = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        for s in group.words[rep]:
            rho = mats[s]
            acc = [
                [
                    sum(acc[i][t] * rho[t][j] for t in range(n))
                    for j in range(n)
                ]
                for i in range(n)
            ]
        vals.append(sum(acc[i][i] for i in range(n)))
    M = table.conductor
    fvals = tuple(cyclo_rational(M, t) for t in vals)
    mults = {}
    for i in range(len(table)):
        m = table.multiplicity(fvals, i)
        if m:
            mults[i] = m
    if sum(m * table.dims[i] for i, m in mults.items()) != n:
        raise InternalInconsistencyError(
            "cell module decomposition misses the cell size"
        )
    return mults


def _detect_orientation(htable, cells, table):
    """Pin the v=1 sign convention: the identity's left cell must carry
    the trivial character."""
    cid = cells.left_cell_of[0]
    for orientation in ("standard", "flipped"):
        mults = left_cell_module(htable, cells, table, cid, orientation)
        if mults == {table.trivial_index: 1}:
            return orientation
    raise InternalInconsistencyError(
        "identity cell carries neither candidate orientation"
    )


# ---------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class IrrepRecord:
    """One irreducible with its transport and classification data."""

    label: str
    dim: int
    cell: int
    j_traces: tuple
    a_value: int
    fake_degree: LaurentPoly
    b_value: int
    ordinary: bool
    special: bool

    @property
    def exceptional(self) -> bool:
        return not self.ordinary


@dataclass(frozen=True)
class InvolutionRecord:
    """A self-inverse element with its length/a-value parity class."""

    element: int
    length: int
    a_value: int
    ordinary: bool
    cell: int
    left_cell: int


@dataclass
class ClaimReport:
    claim_id: str
    status: str
    witness: dict
    timing: float


class ClassifyResult:
    """Everything the classification pipeline produces for one group."""

    __slots__ = (
        "group", "table", "cells", "gamma", "dset", "phi", "irreps",
        "involutions", "orientation", "cell_ordinary", "expected_profile",
        "profile_consistent",
    )

    def __init__(self, group, table, cells, gamma, dset, phi, irreps,
                 involutions, orientation, cell_ordinary, expected_profile,
                 profile_consistent):
        self.group = group
        self.table = table
        self.cells = cells
        self.gamma = gamma
        self.dset = dset
        self.phi = phi
        self.irreps = irreps
        self.involutions = involutions
        self.orientation = orientation
        self.cell_ordinary = cell_ordinary
        self.expected_profile = expected_profile
        self.profile_consistent = profile_consistent


def expected_exceptional_profile(datum):
    """(count, dimension) of the expected exceptional irreducibles, or
    None for types that have none."""
    profile = {
        "H3": (2, 4),
        "H4": (4, 16),
        "E7": (2, 512),
        "E8": (4, 4096),
    }.get(datum.type_symbol)
    if profile is None:
        return None
    count, dim = profile
    part = count * dim
    if datum.order % part or (datum.order // part) % 2 == 0:
        raise InternalInconsistencyError(
            "exceptional profile does not match the 2-part of the order"
        )
    return profile


def classify_involutions(group, cells, a):
    out = []
    for x in range(group.size):
        if group.multiply(x, x) != 0:
            continue
        out.append(
            InvolutionRecord(
                element=x,
                length=group.length[x],
                a_value=a[x],
                ordinary=(group.length[x] - a[x]) % 2 == 0,
                cell=cells.two_sided_of[x],
                left_cell=cells.left_cell_of[x],
            )
        )
    return tuple(out)


def _finish_records(group, table, cells, gamma, dset, jts, ordinary_flags):
    fakes = fake_degrees(group, table)
    records = []
    for i in range(len(table)):
        cell = support_cell(jts[i], cells)
        p = fakes[i]
        b = p.valuation()
        a_val = gamma.a[cells.two_sided_cells[cell][0]]
        records.append(
            IrrepRecord(
                label=table.names[i],
                dim=table.dims[i],
                cell=cell,
                j_traces=jts[i],
                a_value=a_val,
                fake_degree=p,
                b_value=b,
                ordinary=ordinary_flags[i],
                special=(a_val == b),
            )
        )
    by_cell = {}
    for r in records:
        by_cell.setdefault(r.cell, []).append(r)
    if len(by_cell) != len(cells.two_sided_cells):
        raise InternalInconsistencyError(
            "some two-sided cell carries no irreducible"
        )
    cell_ordinary = {}
    for cid, rs in by_cell.items():
        specials = [r for r in rs if r.special]
        if len(specials) != 1:
            raise InternalInconsistencyError(
                f"cell {cid} holds {len(specials)} special irreducibles"
            )
        flags = {r.ordinary for r in rs}
        if len(flags) != 1:
            raise InternalInconsistencyError(
                f"ordinary flag not constant on the fibre of cell {cid}"
            )
        cell_ordinary[cid] = flags.pop()
    profile = expected_exceptional_profile(group.datum)
    exc = [r for r in records if not r.ordinary]
    if profile is None:
        consistent = not exc
    else:
        count, dim = profile
        consistent = len(exc) == count and all(r.dim == dim for r in exc)
    return tuple(records), cell_ordinary, profile, consistent


def classify_group(store, htable, cells, gamma, dset, table,
                   sample_pairs=200) -> ClassifyResult:
    """Direct-lane classification from a fully materialized table."""
    group = store.group
    orientation = _detect_orientation(htable, cells, table)
    phi = build_phi(store, htable, cells, dset)
    check_phi_multiplicative(phi, gamma, pairs=sample_pairs)
    dag_rows = balanced_dagger_rows(store)
    jts = []
    flags = []
    for i in range(len(table)):
        jt = j_traces(phi, table, i)
        hc = hecke_character(
            store, htable, cells, dset, table, i, jt=jt, dag_rows=dag_rows
        )
        jts.append(jt)
        flags.append(is_ordinary(hc))
    records, cell_ordinary, profile, consistent = _finish_records(
        group, table, cells, gamma, dset, jts, flags
    )
    involutions = classify_involutions(group, cells, gamma.a)
    return ClassifyResult(
        group, table, cells, gamma, dset, phi, records, involutions,
        orientation, cell_ordinary, profile, consistent,
    )


# ---------------------------------------------------------------------------
# streamed lane

def _word_primes():
    p = (1 << 31) - 1
    while p > (1 << 30):
        if _is_prime(p):
            yield p
        p -= 2


def _rational_reconstruct(r, m):
    """The unique fraction with small numerator and denominator congruent
    to r mod m, or None."""
    bound = isqrt(m // 2)
    a0, a1 = m, r % m
    s0, s1 = 0, 1
    while a1 > bound:
        q = a0 // a1
        a0, a1 = a1, a0 - q * a1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0:
        return None
    num, den = a1, s1
    if den < 0:
        num, den = -num, -den
    if den > bound or gcd(num, den) != 1:
        return None
    return Fraction(num, den)


def _crt(residues, moduli):
    acc, mod = 0, 1
    for r, m in zip(residues, moduli):
        inv = pow(mod % m, m - 2, m)
        acc = acc + mod * ((r - acc) % m * inv % m)
        mod *= m
    return acc % mod, mod


def _solve_many_modp(rows, rhs_cols, size, p):
    """Solve the sparse integer system for several right-hand sides mod p;
    returns the solution columns or None when the matrix degenerates."""
    try:
        import numpy as np
    except ImportError:
        np = None
    w = len(rhs_cols)
    if np is not None:
        aug = np.zeros((size, size + w), dtype=np.int64)
        for x in range(size):
            for z, c in rows[x].items():
                aug[x, z] = c % p
        for j, col in enumerate(rhs_cols):
            for x in range(size):
                aug[x, size + j] = col[x] % p
        for col in range(size):
            block = aug[col:, col]
            nz = np.nonzero(block)[0]
            if len(nz) == 0:
                return None
            piv = col + int(nz[0])
            if piv != col:
                aug[[col, piv]] = aug[[piv, col]]
            inv = pow(int(aug[col, col]), p - 2, p)
            aug[col] = aug[col] * inv % p
            factors = aug[:, col].copy()
            factors[col] = 0
            mask = factors != 0
            if mask.any():
                aug[mask] = (aug[mask] - factors[mask, None] * aug[col]) % p
        return [
            [int(aug[z, size + j]) for z in range(size)] for j in range(w)
        ]
    aug = []
    for x in range(size):
        line = [0] * (size + w)
        for z, c in rows[x].items():
            line[z] = c % p
        for j, col in enumerate(rhs_cols):
            line[size + j] = col[x] % p
        aug.append(line)
    for col in range(size):
        piv = next((r for r in range(col, size) if aug[r][col]), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], p - 2, p)
        aug[col] = [a * inv % p for a in aug[col]]
        base = aug[col]
        for r in range(size):
            f = aug[r][col]
            if r != col and f:
                aug[r] = [(a - f * b) % p for a, b in zip(aug[r], base)]
    return [[aug[z][size + j] for z in range(size)] for j in range(w)]


def classify_group_streamed(store, cells, gamma, dset, table,
                            jobs=1) -> ClassifyResult:
    """Streamed-lane classification: only the table columns at
    distinguished involutions are generated, twice.

    Asymptotic traces come from a modular solve with exact verification;
    ordinariness from the dual-trace parity test, which is equivalent to
    even parity of the generic traces through the triangular T-basis
    expansion.
    """
    group = store.group
    size = group.size
    for row in table.rows:
        for v in row:
            if not (v.is_rational() and v.is_integer()):
                raise RefusalError(
                    f"streamed classification of {group.datum.type_symbol} "
                    "needs integer character values; the direct lane "
                    "cannot hold this group's full table either"
                )
    gen = generator_rows(store)
    orientation = _detect_orientation(gen, cells, table)
    _d_by_left_cell(cells, dset)
    lc = cells.left_cell_of
    ys = sorted(dset)

    trans = [dict() for _ in range(size)]

    def eat_ones(x, d, row):
        target = lc[d]
        acc = trans[x]
        for z, p in row.items():
            if lc[z] == target:
                val = vp.at_one(p)
                if val:
                    acc[z] = val

    stream_h_blocks(store, eat_ones, jobs=jobs, ys=ys)

    cof = table.classes.class_of
    chis = [
        [int(table.rows[i][cof[w]].as_fraction()) for w in range(size)]
        for i in range(len(table))
    ]
    lengths = group.length
    rhs_cols = []
    for chi in chis:
        col = [0] * size
        for x in range(size):
            acc = 0
            for u, qc in store.P_by_w[x].items():
                s = sum(qc)
                acc += (-s if lengths[u] % 2 else s) * chi[u]
            col[x] = acc
        rhs_cols.append(col)

    jts_frac = _streamed_traces(trans, rhs_cols, size)
    M = table.conductor
    jts = [
        tuple(cyclo_rational(M, q) for q in col) for col in jts_frac
    ]
    for i, jt in enumerate(jts):
        unit = sum(jts_frac[i][d] for d in dset)
        if unit != table.dims[i]:
            raise InternalInconsistencyError(
                "unit trace differs from the degree in the streamed lane"
            )

    # second pass: dual-basis traces per irreducible, exponent dicts;
    # single-cell support keeps the per-z hit list short
    trc = [[{} for _ in range(size)] for _ in range(len(table))]
    hits = [[] for _ in range(size)]
    for i, col in enumerate(jts_frac):
        for z, q in enumerate(col):
            if q:
                hits[z].append((i, q))

    def eat_polys(x, d, row):
        target = lc[d]
        for z, p in row.items():
            if lc[z] != target or not hits[z]:
                continue
            val, coeffs = p
            for i, q in hits[z]:
                acc = trc[i][x]
                for t, c in enumerate(coeffs):
                    if c:
                        e = val + t
                        nv = acc.get(e, 0) + c * q
                        if nv:
                            acc[e] = nv
                        else:
                            acc.pop(e, None)

    stream_h_blocks(store, eat_polys, jobs=jobs, ys=ys)

    flags = []
    for i in range(len(table)):
        for x in range(size):
            if sum(trc[i][x].values()) != rhs_cols[i][x]:
                raise InternalInconsistencyError(
                    "streamed dual trace at v=1 disagrees with the character"
                )
        flags.append(_parity_from_dual(trc[i], lengths))

    records, cell_ordinary, profile, consistent = _finish_records(
        group, table, cells, gamma, dset, jts, flags
    )
    involutions = classify_involutions(group, cells, gamma.a)
    return ClassifyResult(
        group, table, cells, gamma, dset, None, records, involutions,
        orientation, cell_ordinary, profile, consistent,
    )


def _streamed_traces(trans, rhs_cols, size):
    """Rational solution columns of the transport system, via modular
    solves, CRT, rational reconstruction, and an exact final check."""
    primes = _word_primes()
    used = []
    residues = None
    for _ in range(6):
        p = next(primes)
        sol = _solve_many_modp(trans, rhs_cols, size, p)
        if sol is None:
            continue
        used.append(p)
        if residues is None:
            residues = [[[r] for r in col] for col in sol]
        else:
            for col, new in zip(residues, sol):
                for cell, r in zip(col, new):
                    cell.append(r)
        if len(used) < 2:
            continue
        out = []
        ok = True
        for col in residues:
            vals = []
            for cell in col:
                r, m = _crt(cell, used)
                q = _rational_reconstruct(r, m)
                if q is None:
                    ok = False
                    break
                vals.append(q)
            if not ok:
                break
            out.append(vals)
        if not ok:
            continue
        if _verify_traces(trans, rhs_cols, out):
            return out
    raise InternalInconsistencyError(
        "modular transport solve failed to stabilize over 6 primes"
    )


def _verify_traces(trans, rhs_cols, sols):
    for col, rhs in zip(sols, rhs_cols):
        for x, row in enumerate(trans):
            acc = sum(c * col[z] for z, c in row.items())
            if acc != rhs[x]:
                return False
    return True


# ---------------------------------------------------------------------------
# claims

def _claim_12b(result):
    group = result.group
    cells = result.cells
    inv = group.inverse
    checked = 0
    for x in range(group.size):
        if cells.left_cell_of[x] != cells.left_cell_of[inv[x]]:
            continue
        checked += 1
        if not any(r.j_traces[x] for r in result.irreps):
            return "fail", {
                "element": word_name(group, x),
                "reason": "all asymptotic traces vanish",
            }
    return "pass", {"elements_checked": checked}


def _claim_13a(result):
    group = result.group
    cells = result.cells
    inv = group.inverse
    a = result.gamma.a
    checked = 0
    for cid, ordinary in sorted(result.cell_ordinary.items()):
        if not ordinary:
            continue
        for x in cells.two_sided_cells[cid]:
            if cells.left_cell_of[x] != cells.left_cell_of[inv[x]]:
                continue
            checked += 1
            if (group.length[x] - a[x]) % 2:
                return "fail", {
                    "cell": cid,
                    "element": word_name(group, x),
                    "length": group.length[x],
                    "a": a[x],
                }
    return "pass", {"elements_checked": checked}


def _claim_13c(result):
    group = result.group
    cells = result.cells
    exc_cells = sorted(
        cid for cid, ordinary in result.cell_ordinary.items() if not ordinary
    )
    if not exc_cells:
        return "pass", {"exceptional_cells": 0}
    inv_by_elt = {r.element: r for r in result.involutions}
    details = []
    for cid in exc_cells:
        fibre = [r for r in result.irreps if r.cell == cid]
        left_ids = sorted(
            {cells.left_cell_of[x] for x in cells.two_sided_cells[cid]}
        )
        dims = sorted(r.dim for r in fibre)
        if len(fibre) != 2 or dims[0] != dims[1]:
            return "fail", {"cell": cid, "fibre_dims": dims}
        if dims[0] != len(left_ids):
            return "fail", {
                "cell": cid,
                "dimension": dims[0],
                "left_cells": len(left_ids),
            }
        pairs = []
        for lid in left_ids:
            invs = [
                inv_by_elt[x]
                for x in cells.left_cells[lid]
                if x in inv_by_elt
            ]
            ordinary = [r for r in invs if r.ordinary]
            strange = [r for r in invs if not r.ordinary]
            if len(ordinary) != 1 or len(strange) != 1:
                return "fail", {
                    "cell": cid,
                    "left_cell": lid,
                    "ordinary_involutions": len(ordinary),
                    "exceptional_involutions": len(strange),
                }
            pairs.append(
                [
                    word_name(group, ordinary[0].element),
                    word_name(group, strange[0].element),
                ]
            )
        details.append(
            {
                "cell": cid,
                "left_cells": len(left_ids),
                "fibre": [r.label for r in fibre],
                "dimension": dims[0],
                "involution_pairs": pairs,
            }
        )
    return "pass", {"exceptional_cells": len(exc_cells), "cells": details}


def _claim_15a(result):
    bad = []
    for r in result.irreps:
        pal = is_palindromic(r.fake_degree) is not None
        if pal != r.ordinary:
            return "fail", {
                "irrep": r.label,
                "ordinary": r.ordinary,
                "palindromic": pal,
            }
        if not pal:
            bad.append(r.label)
    return "pass", {
        "irreps": len(result.irreps),
        "non_palindromic": bad,
    }


def _claim_16b(result):
    table = result.table
    by_row = {
        table.names.index(r.label): r for r in result.irreps
    }
    checked = []
    for cid, ordinary in sorted(result.cell_ordinary.items()):
        special = next(
            r for r in result.irreps if r.cell == cid and r.special
        )
        idx = table.names.index(special.label)
        twisted = by_row[table.tensor_sign_index(idx)]
        if twisted.special != ordinary:
            return "fail", {
                "cell": cid,
                "special": special.label,
                "twisted": twisted.label,
                "twisted_special": twisted.special,
                "cell_ordinary": ordinary,
            }
        checked.append(
            {
                "cell": cid,
                "special": special.label,
                "twisted": twisted.label,
            }
        )
    return "pass", {"cells": checked}


_CLAIMS = {
    "1.2b": _claim_12b,
    "1.3a": _claim_13a,
    "1.3c": _claim_13c,
    "1.5a": _claim_15a,
    "1.6b": _claim_16b,
}


def verify_claim(claim_id, result) -> ClaimReport:
    """Run one claim check over a finished classification."""
    fn = _CLAIMS.get(claim_id)
    if fn is None:
        raise UsageError(
            f"unknown claim {claim_id!r}; expected one of {', '.join(CLAIM_IDS)}"
        )
    t0 = time.perf_counter()
    status, witness = fn(result)
    return ClaimReport(claim_id, status, witness, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# cross-cutting property checks

def check_parity_bridge(result):
    """Ordinary irreducibles only see even l(x) + a(x) where their
    asymptotic trace survives on x ~L x^-1."""
    group = result.group
    cells = result.cells
    inv = group.inverse
    a = result.gamma.a
    for r in result.irreps:
        if not r.ordinary:
            continue
        for x in range(group.size):
            if cells.left_cell_of[x] != cells.left_cell_of[inv[x]]:
                continue
            if r.j_traces[x] and (group.length[x] + a[x]) % 2:
                raise InternalInconsistencyError(
                    f"parity bridge breaks at {word_name(group, x)} "
                    f"for {r.label}"
                )


def check_b_not_below_a(result):
    for r in result.irreps:
        if r.b_value < r.a_value:
            raise InternalInconsistencyError(
                f"{r.label} has fake-degree valuation {r.b_value} below "
                f"its cell invariant {r.a_value}"
            )


def check_cell_modules_contain_special(result, htable):
    """Every left cell of an ordinary two-sided cell contains its
    special irreducible at least once."""
    table = result.table
    cells = result.cells
    specials = {r.cell: table.names.index(r.label)
                for r in result.irreps if r.special}
    for lid in range(len(cells.left_cells)):
        member = cells.left_cells[lid][0]
        cid = cells.two_sided_of[member]
        if not result.cell_ordinary[cid]:
            continue
        mults = left_cell_module(
            htable, cells, table, lid, result.orientation
        )
        if mults.get(specials[cid], 0) < 1:
            raise InternalInconsistencyError(
                f"left cell {lid} misses the special irreducible of its "
                f"two-sided cell {cid}"
            )


def check_longest_twist(result):
    """When w0 is central of odd length, every exceptional two-sided
    cell must be fixed by multiplication with w0, which then pairs each
    involution with one of the opposite parity class.

    Returns True when something was actually checked, False when the
    hypotheses fail or no exceptional cell exists.
    """
    group = result.group
    w0 = group.w0
    if group.length[w0] % 2 == 0:
        return False
    if any(
        group.multiply(w0, s) != group.multiply(s, w0)
        for s in (group.element_by_word((t,)) for t in range(group.datum.rank))
    ):
        return False
    cells = result.cells
    flags = {r.element: r.ordinary for r in result.involutions}
    exc = [cid for cid, o in result.cell_ordinary.items() if not o]
    for cid in exc:
        members = set(cells.two_sided_cells[cid])
        for x in members:
            if group.multiply(w0, x) not in members:
                raise InternalInconsistencyError(
                    f"longest element moves cell {cid} off itself"
                )
        for x in members:
            if x not in flags:
                continue
            mate = group.multiply(w0, x)
            if mate not in flags or flags[mate] == flags[x]:
                raise InternalInconsistencyError(
                    f"longest-element twist keeps the parity class at "
                    f"{word_name(group, x)}"
                )
    return bool(exc)
