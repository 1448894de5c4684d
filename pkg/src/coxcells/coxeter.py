"""Finite Coxeter groups: construction, enumeration, and basic order theory.

A group is specified by a type symbol ("A3", "B4", "D5", "I2(7)", "H3", "H4",
"F4", "E6", "E7", "E8") and realized through its standard geometric reflection
representation: generator s sends alpha_s to -alpha_s and alpha_t to
alpha_t + 2cos(pi/m_st) * alpha_s.  Elements are enumerated by breadth-first
closure over generator multiplication, with element identity decided by the
exact matrix of the representation (never by word rewriting), so the
enumeration is collision-free by construction.

Generator numbering per type (0-based internally, reported as s1..sn):

* A_n: path s1 - s2 - ... - sn.
* B_n: path with the 4-bond at the far end, m(s_{n-1}, s_n) = 4.
* D_n: path s1 .. s_{n-2} with both s_{n-1} and s_n attached to s_{n-2}.
* I2(m): two generators, m(s1, s2) = m.
* H3, H4: the 5-bond first, m(s1, s2) = 5, then a path.
* F4: path with m(s2, s3) = 4.
* E6/E7/E8: path s1, s3, s4, s5, ... with s2 attached to s4.

Words are ShortLex-minimal reduced words under that numbering; element index
order is discovery order, which equals ShortLex order on canonical words, so
index 0 is always the identity.
"""

from __future__ import annotations

import hashlib
import re
from fractions import Fraction
from functools import lru_cache
from math import lcm

from .errors import InternalInconsistencyError, RefusalError, UsageError
from .exactnum import (
    CycloNumber,
    LaurentPoly,
    cyclo_context,
    cyclotomic_polynomial,
    poly_divmod,
    two_cos_pi_over,
)

__all__ = [
    "ConjugacyClasses",
    "CoxeterDatum",
    "CoxeterGroup",
    "build_group",
    "degrees_from_poincare",
    "group_datum",
]

DEFAULT_MAX_ORDER = 20000

_EXCEPTIONAL_DEGREES = {
    "H3": (2, 6, 10),
    "H4": (2, 12, 20, 30),
    "F4": (2, 6, 8, 12),
    "E6": (2, 5, 6, 8, 9, 12),
    "E7": (2, 6, 8, 10, 12, 14, 18),
    "E8": (2, 8, 12, 14, 18, 20, 24, 30),
}

_SYMBOL_RE = re.compile(r"^([ABDEFH])(\d+)$")
_DIHEDRAL_RE = re.compile(r"^I2\((\d+)\)$")


def _parse_symbol(symbol: str):
    """Normalize a type symbol to (family, rank, bond); bond only for I2."""
    s = symbol.strip()
    if s == "G2":
        raise UsageError("type G2 is not a recognized symbol here; use I2(6)")
    m = _DIHEDRAL_RE.match(s)
    if m:
        bond = int(m.group(1))
        if bond < 3:
            raise UsageError(f"I2(m) needs m >= 3, got m = {bond}")
        return "I", 2, bond
    m = _SYMBOL_RE.match(s)
    if not m:
        raise UsageError(f"unrecognized type symbol {symbol!r}")
    family, rank = m.group(1), int(m.group(2))
    minimum = {"A": 1, "B": 2, "D": 4, "E": 6, "F": 4, "H": 3}[family]
    maximum = {"A": None, "B": None, "D": None, "E": 8, "F": 4, "H": 4}[family]
    if rank < minimum or (maximum is not None and rank > maximum):
        raise UsageError(f"rank {rank} is out of range for family {family}")
    return family, rank, None


def _coxeter_matrix(family: str, rank: int, bond) -> tuple:
    m = [[2] * rank for _ in range(rank)]
    for i in range(rank):
        m[i][i] = 1

    def link(i, j, order=3):
        m[i][j] = m[j][i] = order

    if family == "A":
        for i in range(rank - 1):
            link(i, i + 1)
    elif family == "B":
        for i in range(rank - 1):
            link(i, i + 1)
        m[rank - 2][rank - 1] = m[rank - 1][rank - 2] = 4
    elif family == "D":
        for i in range(rank - 3):
            link(i, i + 1)
        link(rank - 3, rank - 2)
        link(rank - 3, rank - 1)
    elif family == "I":
        m[0][1] = m[1][0] = bond
    elif family == "H":
        m[0][1] = m[1][0] = 5
        for i in range(1, rank - 1):
            link(i, i + 1)
    elif family == "F":
        link(0, 1)
        m[1][2] = m[2][1] = 4
        link(2, 3)
    elif family == "E":
        # nodes 0,2,3,4,... form the long path; node 1 hangs off node 3
        chain = [0] + list(range(2, rank))
        for a, b in zip(chain, chain[1:]):
            link(a, b)
        link(1, 3)
    else:
        raise InternalInconsistencyError(f"unhandled family {family}")
    return tuple(tuple(row) for row in m)


def _closed_form_degrees(family: str, rank: int, bond) -> tuple:
    if family == "A":
        return tuple(range(2, rank + 2))
    if family == "B":
        return tuple(range(2, 2 * rank + 1, 2))
    if family == "D":
        return tuple(sorted(list(range(2, 2 * rank - 1, 2)) + [rank]))
    if family == "I":
        return tuple(sorted((2, bond)))
    return _EXCEPTIONAL_DEGREES[f"{family}{rank}"]


def _cosine_conductor(m: int) -> int:
    """Smallest M with 2cos(pi/m) in Q(zeta_M)."""
    if m <= 2:
        return 1
    if m == 3:
        return 1
    return m if m % 2 else 2 * m


class CoxeterDatum:
    """Type-level data: diagram, degrees, field conductors, generator matrices.

    Everything here is available without enumerating the group, including for
    E6/E7/E8.  ``conductor`` is the working field for character-level work,
    lcm of the group exponent and 2*m_st over all Coxeter matrix entries;
    ``refl_conductor`` is the smaller field that already holds every entry of
    the reflection matrices.
    """

    __slots__ = (
        "type_symbol", "family", "rank", "bond", "coxeter_matrix", "degrees",
        "order", "num_positive_roots", "exponent", "conductor",
        "refl_conductor", "_refl_int",
    )

    def __init__(self, family: str, rank: int, bond):
        self.family = family
        self.rank = rank
        self.bond = bond
        self.type_symbol = f"I2({bond})" if family == "I" else f"{family}{rank}"
        self.coxeter_matrix = _coxeter_matrix(family, rank, bond)
        self.degrees = _closed_form_degrees(family, rank, bond)
        order = 1
        for d in self.degrees:
            order *= d
        self.order = order
        self.num_positive_roots = sum(d - 1 for d in self.degrees)
        self.exponent = lcm(*self.degrees)
        twos = [2 * e for row in self.coxeter_matrix for e in row]
        self.conductor = lcm(self.exponent, *twos)
        self.refl_conductor = lcm(
            1, *(_cosine_conductor(e) for row in self.coxeter_matrix for e in row)
        )
        self._refl_int = None

    def __repr__(self) -> str:
        return f"CoxeterDatum({self.type_symbol})"

    def generator_names(self) -> tuple:
        return tuple(f"s{i + 1}" for i in range(self.rank))

    def _int_matrices(self) -> tuple:
        """Generator matrices as flat tuples of integer coefficient vectors.

        Entry (i, j) of generator s sits at flat index i*rank + j; each entry
        is the length-phi integer vector of a cyclotomic number in the
        refl_conductor basis.  All entries stay integral under products
        because the reduction rows are integral.
        """
        if self._refl_int is not None:
            return self._refl_int
        ctx = cyclo_context(self.refl_conductor)
        phi = ctx.degree
        zero = (0,) * phi
        one = (1,) + (0,) * (phi - 1)

        def ivec(x: CycloNumber) -> tuple:
            out = []
            for c in x.coeffs:
                if c.denominator != 1:
                    raise InternalInconsistencyError(
                        "reflection matrix entry is not an algebraic integer vector"
                    )
                out.append(c.numerator)
            return tuple(out)

        mats = []
        n = self.rank
        for s in range(n):
            flat = []
            for i in range(n):
                for j in range(n):
                    if i != s:
                        flat.append(one if i == j else zero)
                    elif j == s:
                        flat.append(tuple(-c for c in one))
                    else:
                        m = self.coxeter_matrix[s][j]
                        if m == 2:
                            flat.append(zero)
                        elif m == 3:
                            flat.append(one)
                        else:
                            flat.append(ivec(two_cos_pi_over(self.refl_conductor, m)))
            mats.append(tuple(flat))
        self._refl_int = tuple(mats)
        return self._refl_int

    @property
    def reflection_matrices(self) -> tuple:
        """Generator matrices as rank x rank tuples of CycloNumbers."""
        ctx = cyclo_context(self.refl_conductor)
        out = []
        for flat in self._int_matrices():
            rows = []
            for i in range(self.rank):
                rows.append(
                    tuple(
                        CycloNumber(ctx, tuple(Fraction(c) for c in
                                               flat[i * self.rank + j]))
                        for j in range(self.rank)
                    )
                )
            out.append(tuple(rows))
        return tuple(out)


@lru_cache(maxsize=None)
def group_datum(symbol: str) -> CoxeterDatum:
    """Parse and validate a type symbol."""
    family, rank, bond = _parse_symbol(symbol)
    return CoxeterDatum(family, rank, bond)


def _ivec_mul(a: tuple, b: tuple, red: tuple, phi: int) -> tuple:
    """Product of two integer coefficient vectors mod Phi_M."""
    acc = [0] * (2 * phi - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    acc[i + j] += x * y
    for k in range(2 * phi - 2, phi - 1, -1):
        c = acc[k]
        if c:
            row = red[k - phi]
            for j in range(phi):
                r = row[j]
                if r:
                    acc[j] += c * r
    return tuple(acc[:phi])


class ConjugacyClasses:
    """Conjugation-orbit decomposition with deterministic numbering.

    Classes are ordered by their smallest member index, which under ShortLex
    enumeration means by (minimal length, then lexicographically least word).
    """

    __slots__ = ("class_of", "members", "representatives", "sizes")

    def __init__(self, class_of, members):
        self.class_of = class_of
        self.members = members
        self.representatives = [c[0] for c in members]
        self.sizes = [len(c) for c in members]

    def __len__(self) -> int:
        return len(self.members)


class CoxeterGroup:
    """A fully enumerated finite Coxeter group with its Cayley structure.

    Immutable after construction; every query method is read-only.  Built
    through :func:`build_group`, not directly.
    """

    __slots__ = (
        "datum", "size", "words", "length", "right", "left", "inverse",
        "w0", "element_digests", "right_descent_mask", "left_descent_mask",
        "_classes", "_fingerprint",
    )

    # -- construction ------------------------------------------------------

    def __init__(self, datum: CoxeterDatum, words, length, right, inverse,
                 element_digests):
        self.datum = datum
        self.size = len(words)
        self.words = words
        self.length = length
        self.right = right
        self.inverse = inverse
        self.element_digests = element_digests
        n = datum.rank
        left = [[0] * self.size for _ in range(n)]
        for s in range(n):
            row = right[s]
            inv = inverse
            ls = left[s]
            for w in range(self.size):
                ls[w] = inv[row[inv[w]]]
        self.left = left
        lengths = length
        maxlen = max(lengths)
        longest = [w for w in range(self.size) if lengths[w] == maxlen]
        if len(longest) != 1:
            raise InternalInconsistencyError("longest element is not unique")
        self.w0 = longest[0]
        if maxlen != datum.num_positive_roots:
            raise InternalInconsistencyError(
                f"longest length {maxlen} does not match the root count"
            )
        rmask = [0] * self.size
        lmask = [0] * self.size
        for s in range(n):
            rrow, lrow = right[s], left[s]
            bit = 1 << s
            for w in range(self.size):
                if lengths[rrow[w]] < lengths[w]:
                    rmask[w] |= bit
                if lengths[lrow[w]] < lengths[w]:
                    lmask[w] |= bit
        self.right_descent_mask = rmask
        self.left_descent_mask = lmask
        self._classes = None
        self._fingerprint = None

    def __repr__(self) -> str:
        return f"CoxeterGroup({self.datum.type_symbol}, order={self.size})"

    # -- elementary queries ------------------------------------------------

    def element_by_word(self, word) -> int:
        """Index of the product s_{i1} ... s_{ik} for a 0-based index word."""
        w = 0
        for s in word:
            if not 0 <= s < self.datum.rank:
                raise UsageError(f"generator index {s} out of range")
            w = self.right[s][w]
        return w

    def multiply(self, x: int, y: int) -> int:
        for s in self.words[y]:
            x = self.right[s][x]
        return x

    def order_of(self, x: int) -> int:
        k, cur = 1, x
        while cur != 0:
            cur = self.multiply(cur, x)
            k += 1
        return k

    def right_descents(self, w: int) -> tuple:
        mask = self.right_descent_mask[w]
        return tuple(s for s in range(self.datum.rank) if mask >> s & 1)

    def left_descents(self, w: int) -> tuple:
        mask = self.left_descent_mask[w]
        return tuple(s for s in range(self.datum.rank) if mask >> s & 1)

    def matrix_of(self, w: int) -> tuple:
        """Reflection-representation matrix of element w, CycloNumber entries."""
        gens = self.datum.reflection_matrices
        n = self.datum.rank
        ctx = cyclo_context(self.datum.refl_conductor)
        rows = [
            tuple(ctx.one if i == j else ctx.zero for j in range(n))
            for i in range(n)
        ]
        for s in self.words[w]:
            g = gens[s]
            rows = [
                tuple(
                    sum((rows[i][k] * g[k][j] for k in range(n)), ctx.zero)
                    for j in range(n)
                )
                for i in range(n)
            ]
        return tuple(rows)

    # -- order theory ------------------------------------------------------

    def bruhat_leq(self, x: int, y: int) -> bool:
        """Bruhat order test by descending through y's canonical word."""
        if not 0 <= x < self.size or not 0 <= y < self.size:
            raise UsageError("element index out of range")
        lengths = self.length
        word = self.words[y]
        # peel the last letter of y repeatedly; drop the same letter from x
        # exactly when it is a right descent there
        for pos in range(len(word) - 1, -1, -1):
            if lengths[x] > pos + 1:
                return False
            if x == 0:
                return True
            s = word[pos]
            if self.right_descent_mask[x] >> s & 1:
                x = self.right[s][x]
        return x == 0

    def poincare_polynomial(self) -> LaurentPoly:
        counts = {}
        for l in self.length:
            counts[l] = counts.get(l, 0) + 1
        return LaurentPoly(counts, var="X")

    # -- conjugacy ---------------------------------------------------------

    def conjugacy_classes(self) -> ConjugacyClasses:
        if self._classes is not None:
            return self._classes
        n = self.datum.rank
        class_of = [-1] * self.size
        members = []
        for start in range(self.size):
            if class_of[start] >= 0:
                continue
            cid = len(members)
            orbit = [start]
            class_of[start] = cid
            frontier = [start]
            while frontier:
                nxt = []
                for x in frontier:
                    for s in range(n):
                        y = self.left[s][self.right[s][x]]
                        if class_of[y] < 0:
                            class_of[y] = cid
                            orbit.append(y)
                            nxt.append(y)
                frontier = nxt
            orbit.sort()
            members.append(orbit)
        self._classes = ConjugacyClasses(class_of, members)
        return self._classes

    # -- degrees -----------------------------------------------------------

    def compute_degrees(self) -> tuple:
        """Derive the fundamental degrees from the length generating function.

        Factors the Poincare polynomial into cyclotomics and solves the cover
        by rank-many factors 1 + X + ... + X^(d-1); the result is checked
        against the closed-form degrees carried by the datum.
        """
        degs = degrees_from_poincare(
            self.poincare_polynomial(), self.datum.rank, self.size
        )
        if degs != self.datum.degrees:
            raise InternalInconsistencyError(
                f"derived degrees {degs} disagree with closed form"
            )
        return degs

    # -- identity ----------------------------------------------------------

    def fingerprint(self) -> str:
        """Digest of the full group structure; cache files key on this."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            h.update(self.datum.type_symbol.encode())
            h.update(repr(self.datum.coxeter_matrix).encode())
            h.update(str(self.datum.refl_conductor).encode())
            for w in self.words:
                h.update(bytes(w))
                h.update(b"\xff")
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    def metadata(self) -> dict:
        """JSON-ready summary of the group."""
        classes = self.conjugacy_classes()
        return {
            "type": self.datum.type_symbol,
            "rank": self.datum.rank,
            "order": self.size,
            "degrees": list(self.datum.degrees),
            "exponent": self.datum.exponent,
            "conductor": self.datum.conductor,
            "num_positive_roots": self.datum.num_positive_roots,
            "num_conjugacy_classes": len(classes),
            "class_sizes": list(classes.sizes),
            "longest_element_word": [s + 1 for s in self.words[self.w0]],
            "fingerprint": self.fingerprint(),
        }


def build_group(source, max_order: int = DEFAULT_MAX_ORDER) -> CoxeterGroup:
    """Enumerate the group by BFS over exact reflection matrices.

    Refuses types whose known order exceeds max_order, reporting that order,
    so E6/E7/E8 need an explicit override to build.
    """
    datum = source if isinstance(source, CoxeterDatum) else group_datum(source)
    if datum.order > max_order:
        raise RefusalError(
            f"{datum.type_symbol} has order {datum.order}, above the cap "
            f"{max_order}; raise max_order to build it anyway"
        )
    n = datum.rank
    ctx = cyclo_context(datum.refl_conductor)
    phi = ctx.degree
    red = ctx.reduction_rows
    gens = datum._int_matrices()
    zero = (0,) * phi

    # neighbor coefficient lists for the rank-one right-multiplication update:
    # column s flips sign, column j gains c_sj * column s for bonded j
    neighbors = []
    for s in range(n):
        cols = []
        for j in range(n):
            if j != s:
                c = gens[s][s * n + j]
                if c != zero:
                    cols.append((j, c))
        neighbors.append(tuple(cols))

    ident = tuple(
        ((1,) + (0,) * (phi - 1)) if i == j else zero
        for i in range(n) for j in range(n)
    )

    def right_mul(mat: tuple, s: int) -> tuple:
        out = list(mat)
        for i in range(n):
            base = i * n
            col_s = mat[base + s]
            out[base + s] = tuple(-c for c in col_s)
            if col_s != zero:
                for j, c in neighbors[s]:
                    cur = out[base + j]
                    prod = _ivec_mul(col_s, c, red, phi)
                    out[base + j] = tuple(a + b for a, b in zip(cur, prod))
        return tuple(out)

    index = {ident: 0}
    mats = [ident]
    words = [()]
    length = [0]
    right = [[-1] for _ in range(n)]
    digests = [hashlib.sha256(repr(ident).encode()).hexdigest()]
    head = 0
    while head < len(mats):
        w = head
        head += 1
        mw = mats[w]
        for s in range(n):
            child = right_mul(mw, s)
            idx = index.get(child)
            if idx is None:
                idx = len(mats)
                if idx >= datum.order:
                    raise InternalInconsistencyError(
                        f"enumeration of {datum.type_symbol} overshot the "
                        f"known order {datum.order}"
                    )
                index[child] = idx
                mats.append(child)
                words.append(words[w] + (s,))
                length.append(length[w] + 1)
                digests.append(hashlib.sha256(repr(child).encode()).hexdigest())
                for row in right:
                    row.append(-1)
            # the edge is its own inverse: idx = w*s means idx*s = w
            right[s][w] = idx
            right[s][idx] = w
    size = len(mats)
    if size != datum.order:
        raise InternalInconsistencyError(
            f"enumeration closed at {size} elements, expected {datum.order}"
        )
    del index, mats

    # inverse by walking the reversed canonical word from the identity
    inverse = [0] * size
    for w in range(size):
        x = 0
        for s in reversed(words[w]):
            x = right[s][x]
        inverse[w] = x
    for w in range(size):
        if inverse[inverse[w]] != w or length[inverse[w]] != length[w]:
            raise InternalInconsistencyError("inverse table is not an involution")

    group = CoxeterGroup(datum, words, length, right, inverse, digests)
    group.compute_degrees()
    return group


def degrees_from_poincare(poincare: LaurentPoly, rank: int, order: int) -> tuple:
    """Solve W(X) = prod_i (1 + X + ... + X^(d_i - 1)) for the degrees d_i.

    Factors W into cyclotomic polynomials, then peels the largest index as
    the largest degree repeatedly; each factor 1 + ... + X^(d-1) contributes
    exactly the cyclotomics Phi_e with e | d, e > 1.
    """
    if poincare.at_one() != order:
        raise InternalInconsistencyError("Poincare polynomial mass mismatch")
    mult = {}
    rem = poincare
    e = 2
    while rem.degree() > 0:
        phi_e = cyclotomic_polynomial(e, poincare.var)
        while True:
            q, r = poly_divmod(rem, phi_e)
            if r.is_zero():
                mult[e] = mult.get(e, 0) + 1
                rem = q
            else:
                break
        e += 1
    if rem != LaurentPoly.constant(1, poincare.var):
        raise InternalInconsistencyError("Poincare polynomial is not cyclotomic")
    degrees = []
    for _ in range(rank):
        live = [e for e, k in mult.items() if k > 0]
        if not live:
            raise InternalInconsistencyError("cyclotomic cover ran dry early")
        d = max(live)
        for f in range(2, d + 1):
            if d % f == 0:
                mult[f] = mult.get(f, 0) - 1
                if mult[f] < 0:
                    raise InternalInconsistencyError(
                        f"cyclotomic cover infeasible at Phi_{f}"
                    )
        degrees.append(d)
    if any(k > 0 for k in mult.values()):
        raise InternalInconsistencyError("cyclotomic cover left residue")
    degrees.sort()
    prod = 1
    for d in degrees:
        prod *= d
    if prod != order:
        raise InternalInconsistencyError("degree product does not match order")
    return tuple(degrees)
