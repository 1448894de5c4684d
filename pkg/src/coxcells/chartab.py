"""Exact complex character tables via the class-matrix method.

The table is computed over a prime field first: class multiplication
matrices commute and share a basis of simultaneous eigenvectors, one per
irreducible character, with the vector of raw character values chi(z_j)
as the eigenvector and the central character |C_i| chi(g_i)/chi(1) as the
eigenvalue.  Splitting the common eigenspaces down to lines mod p, the
degrees are recovered from the orthogonality relation and the exact
cyclotomic values by a discrete Fourier transform over each cyclic group
<z_j>, reading eigenvalue multiplicities off the mod-p data.

The prime p is chosen with p = 1 mod exponent(W) so that F_p contains
the needed roots of unity, and large enough that degrees and
multiplicities lift uniquely from their residues.  A failed split or an
inconsistent lift moves to the next admissible prime; persistent failure
is reported as an internal error, never silently absorbed.

All returned values are exact cyclotomic numbers in the group's ambient
conductor, and the finished table is checked against full row and column
orthogonality before being handed back.
"""

import hashlib
import random
from fractions import Fraction
from math import gcd, isqrt

from .errors import InternalInconsistencyError, UsageError
from .exactnum import (
    CycloNumber,
    cyclo_context,
    cyclo_rational,
    embed_cyclo,
    root_of_unity,
)


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


# ---------------------------------------------------------------------------
# primes

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if m % q == 0:
            return m == q
    d, r = m - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(r - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def _admissible_primes(exponent: int, order: int, max_class: int):
    """Primes p = 1 mod exponent with p^2 > 4 |W| max_class^2, ascending."""
    floor = 4 * order * max_class * max_class
    p = exponent + 1
    while True:
        if p * p > floor and _is_prime(p):
            yield p
        p += exponent


def _primitive_root(p: int) -> int:
    fac = []
    m = p - 1
    q = 2
    while q * q <= m:
        if m % q == 0:
            fac.append(q)
            while m % q == 0:
                m //= q
        q += 1
    if m > 1:
        fac.append(m)
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in fac):
            return g
        g += 1


# ---------------------------------------------------------------------------
# linear algebra mod p

class _Retry(Exception):
    """Current prime rejected; the caller moves on to the next one."""


def _rref(rows, p):
    """Row-reduce in place; returns (reduced nonzero rows, pivot columns)."""
    rows = [list(r) for r in rows]
    cols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        sel = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        rows[r] = [a * inv % p for a in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _coords_in(basis, pivots, vec, p):
    """Coordinates of vec in an RREF basis; vec must lie in the span."""
    coords = [vec[c] % p for c in pivots]
    resid = [a % p for a in vec]
    for co, brow in zip(coords, basis):
        if co:
            resid = [(a - co * b) % p for a, b in zip(resid, brow)]
    if any(resid):
        raise _Retry("vector left the subspace during restriction")
    return coords


def _nullspace(mat, p):
    """Basis of {v : mat.v = 0} over F_p, deterministic free-column order."""
    d = len(mat)
    red, pivots = _rref(mat, p)
    free = [c for c in range(d) if c not in pivots]
    out = []
    for fc in free:
        v = [0] * d
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-red[r][fc]) % p
        out.append(v)
    return out


def _charpoly(mat, p):
    """Characteristic polynomial mod p from power traces, little-endian."""
    d = len(mat)
    traces = []
    cur = [row[:] for row in mat]
    for m in range(1, d + 1):
        traces.append(sum(cur[i][i] for i in range(d)) % p)
        if m < d:
            cur = [
                [sum(cur[i][t] * mat[t][j] for t in range(d)) % p for j in range(d)]
                for i in range(d)
            ]
    e = [1] + [0] * d
    for i in range(1, d + 1):
        acc = 0
        sign = 1
        for j in range(1, i + 1):
            acc += sign * e[i - j] * traces[j - 1]
            sign = -sign
        e[i] = acc % p * pow(i, p - 2, p) % p
    out = [0] * (d + 1)
    out[d] = 1
    for m in range(1, d + 1):
        out[d - m] = (e[m] if m % 2 == 0 else -e[m]) % p
    return out


def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _ptrim(out)


def _pmod(a, f, p):
    # f monic
    a = a[:]
    df = len(f) - 1
    while len(a) - 1 >= df and a:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - df
            for i, c in enumerate(f):
                a[shift + i] = (a[shift + i] - lead * c) % p
        a.pop()
    return _ptrim(a)


def _pmonic(a, p):
    a = _ptrim(a[:])
    if not a:
        return a
    inv = pow(a[-1], p - 2, p)
    return [c * inv % p for c in a]


def _pgcd(a, b, p):
    a, b = _ptrim(a[:]), _ptrim(b[:])
    while b:
        a, b = b, _pmod(a, _pmonic(b, p), p)
    return _pmonic(a, p)


def _ppowmod(base, e, f, p):
    f = _pmonic(f, p)
    result = [1]
    base = _pmod(base, f, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), f, p)
        base = _pmod(_pmul(base, base, p), f, p)
        e >>= 1
    return result


def _psub(a, b, p):
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c % p
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    return _ptrim(out)


def _distinct_roots(f, p, rng):
    """Roots of f lying in F_p, each once, ascending."""
    f = _pmonic(f, p)
    xp = _ppowmod([0, 1], p, f, p)
    g = _pgcd(_psub(xp, [0, 1], p), f, p)
    roots = []
    stack = [g]
    guard = 0
    while stack:
        h = stack.pop()
        d = len(h) - 1
        if d <= 0:
            continue
        if d == 1:
            roots.append((-h[0]) % p)
            continue
        while True:
            guard += 1
            if guard > 64 * len(f):
                raise _Retry("equal-degree splitting stalled")
            a = rng.randrange(p)
            w = _ppowmod([a, 1], (p - 1) // 2, h, p)
            cand = _pgcd(_psub(w, [1], p), h, p)
            if 0 < len(cand) - 1 < d:
                q, r = _pdiv(h, cand, p)
                if r:
                    raise _Retry("split factor does not divide")
                stack.append(cand)
                stack.append(q)
                break
    return sorted(roots)


def _pdiv(a, b, p):
    b = _pmonic(b, p)
    a = [c % p for c in a]
    db = len(b) - 1
    q = [0] * max(len(a) - db, 0)
    while len(a) - 1 >= db and _ptrim(a):
        lead = a[-1]
        shift = len(a) - 1 - db
        if lead:
            q[shift] = lead
            for i, c in enumerate(b):
                a[shift + i] = (a[shift + i] - lead * c) % p
        a.pop()
    return _ptrim(q), _ptrim(a)


# ---------------------------------------------------------------------------
# eigenvector splitting

def _common_eigenvectors(k, get_matrix, p, rng):
    """One vector per irreducible: simultaneous eigenvectors of the class
    matrices, normalized to value 1 at the identity class."""
    ident = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    spaces = [(ident, list(range(k)))]
    for i in range(1, k):
        if all(len(b) == 1 for b, _ in spaces):
            break
        mat = get_matrix(i)
        nxt = []
        for basis, pivots in spaces:
            d = len(basis)
            if d == 1:
                nxt.append((basis, pivots))
                continue
            images = [
                [sum(mat[j][m] * b[m] for m in range(k)) % p for j in range(k)]
                for b in basis
            ]
            cols = [_coords_in(basis, pivots, w, p) for w in images]
            # column r of the restricted matrix holds the image of basis row r
            rmat = [[cols[r][s] for r in range(d)] for s in range(d)]
            pieces = []
            total = 0
            for lam in _distinct_roots(_charpoly(rmat, p), p, rng):
                shifted = [
                    [(rmat[s][r] - (lam if s == r else 0)) % p for r in range(d)]
                    for s in range(d)
                ]
                kern = _nullspace(shifted, p)
                if not kern:
                    raise _Retry("eigenvalue without eigenvector")
                lifted = [
                    [sum(v[r] * basis[r][c] for r in range(d)) % p for c in range(k)]
                    for v in kern
                ]
                nb, np_ = _rref(lifted, p)
                if len(nb) != len(kern):
                    raise _Retry("eigenspace lift lost rank")
                total += len(nb)
                pieces.append((nb, np_))
            if total != d:
                raise _Retry("eigenspaces do not fill the subspace")
            nxt.extend(pieces)
        spaces = nxt
    vecs = []
    for basis, _ in spaces:
        if len(basis) != 1:
            raise _Retry("splitting stalled above dimension one")
        v = basis[0]
        if v[0] == 0:
            raise _Retry("eigenvector vanishes at the identity class")
        inv = pow(v[0], p - 2, p)
        vecs.append([a * inv % p for a in v])
    return vecs


# ---------------------------------------------------------------------------
# the table

class CharacterTable:
    """Complete exact character table of a finite Coxeter group.

    Rows hold cyclotomic values in the group's ambient conductor, ordered
    by (dimension, canonical value order) with the trivial character
    first; columns follow the group's conjugacy-class numbering.
    """

    __slots__ = (
        "group", "classes", "rows", "dims", "names", "conductor",
        "trivial_index", "sign_index", "reflection_index", "_by_values",
    )

    def __init__(self, group, classes, rows, dims, names, conductor):
        self.group = group
        self.classes = classes
        self.rows = rows
        self.dims = dims
        self.names = names
        self.conductor = conductor
        self._by_values = {r: i for i, r in enumerate(rows)}
        self.trivial_index = 0
        self.sign_index = self.find_row(
            tuple(
                cyclo_rational(conductor, -1 if group.length[z] % 2 else 1)
                for z in classes.representatives
            )
        )
        self.reflection_index = self._locate_reflection()

    def __len__(self) -> int:
        return len(self.rows)

    def find_row(self, values) -> int:
        """Index of the row with exactly these values; error if absent."""
        idx = self._by_values.get(tuple(values))
        if idx is None:
            raise InternalInconsistencyError(
                "class function is not a row of the character table"
            )
        return idx

    def _locate_reflection(self) -> int:
        g = self.group
        traces = []
        for z in self.classes.representatives:
            mat = g.matrix_of(z)
            tr = sum(
                (mat[i][i] for i in range(g.datum.rank)),
                cyclo_context(g.datum.refl_conductor).zero,
            )
            traces.append(embed_cyclo(tr, self.conductor))
        idx = self.find_row(tuple(traces))
        if self.dims[idx] != g.datum.rank:
            raise InternalInconsistencyError("reflection row has wrong degree")
        return idx

    def inner_product(self, f, g) -> CycloNumber:
        """Hermitian pairing |W|^-1 sum over classes of size * f * conj(g)."""
        acc = cyclo_rational(self.conductor, 0)
        for size, a, b in zip(self.classes.sizes, f, g):
            acc = acc + a * b.conjugate() * size
        return acc * Fraction(1, self.group.size)

    def multiplicity(self, f, row_index: int) -> int:
        """Exact multiplicity of an irreducible inside a character f."""
        m = self.inner_product(f, self.rows[row_index])
        if not m.is_rational():
            raise InternalInconsistencyError("irrational multiplicity")
        q = m.as_fraction()
        if q.denominator != 1 or q < 0:
            raise InternalInconsistencyError(f"multiplicity {q} not in N")
        return int(q)

    def tensor_sign(self, row_index: int) -> tuple:
        """Pointwise product of a row with the sign character."""
        g = self.group
        out = tuple(
            val * (-1 if g.length[z] % 2 else 1)
            for val, z in zip(self.rows[row_index], self.classes.representatives)
        )
        self.find_row(out)  # closure under the sign twist is asserted
        return out

    def tensor_sign_index(self, row_index: int) -> int:
        return self.find_row(self.tensor_sign(row_index))


def _class_matrix(group, classes, i):
    """Entry [j][m] counts elements x of class i with x z_j in class m."""
    k = len(classes)
    out = [[0] * k for _ in range(k)]
    mult = group.multiply
    cof = classes.class_of
    for j, z in enumerate(classes.representatives):
        row = out[j]
        for x in classes.members[i]:
            row[cof[mult(x, z)]] += 1
    return out


def _modular_rows(group, classes, jstar, p, rng):
    """Mod-p character rows and degrees, one per irreducible."""
    k = len(classes)
    cache = [None] * k

    def get_matrix(i):
        if cache[i] is None:
            cache[i] = _class_matrix(group, classes, i)
        return cache[i]

    vecs = _common_eigenvectors(k, get_matrix, p, rng)
    rows = []
    dims = []
    bound = isqrt(group.size)
    for u in vecs:
        s = sum(n * u[j] * u[jstar[j]] for j, n in enumerate(classes.sizes)) % p
        if s == 0:
            raise _Retry("norm of eigenvector vanished mod p")
        d2 = group.size * pow(s, p - 2, p) % p
        cands = [d for d in range(1, bound + 1) if d * d % p == d2]
        if len(cands) != 1:
            raise _Retry(f"degree lift ambiguous: {cands}")
        d = cands[0]
        dims.append(d)
        rows.append([d * a % p for a in u])
    if sum(d * d for d in dims) != group.size:
        raise _Retry("degrees do not sum to the group order")
    if len({tuple(r) for r in rows}) != k:
        raise _Retry("modular rows collide")
    return rows, dims


def _lift_row(row_p, dim, powmaps, orders, eta, n, conductor, p):
    """Exact cyclotomic values from a mod-p row, class by class.

    For z of order o the value is sum m_s zeta_o^s with m_s the
    multiplicity of the eigenvalue; the inverse DFT over <z> recovers
    each m_s as a residue, which must lift into [0, dim].
    """
    out = []
    for j, o in enumerate(orders):
        eta_o = pow(eta, n // o, p)
        pows = [1] * o
        for t in range(1, o):
            pows[t] = pows[t - 1] * eta_o % p
        inv_o = pow(o, p - 2, p)
        vals = [row_p[c] for c in powmaps[j]]
        acc = cyclo_rational(conductor, 0)
        total = 0
        for s in range(o):
            m = sum(vals[t] * pows[(-t * s) % o] for t in range(o)) * inv_o % p
            if m > dim:
                raise _Retry(f"multiplicity {m} exceeds degree {dim}")
            total += m
            if m:
                acc = acc + m * root_of_unity(conductor, s * (conductor // o))
        if total != dim:
            raise _Retry("eigenvalue multiplicities do not sum to the degree")
        out.append(acc)
    return tuple(out)


def _validate(group, classes, rows, dims, conductor):
    k = len(classes)
    zero = cyclo_rational(conductor, 0)
    crystallographic = group.datum.family in ("A", "B", "D", "F", "E") or (
        group.datum.family == "I" and group.datum.bond in (3, 4, 6)
    )
    for row in rows:
        for v in row:
            if any(c.denominator != 1 for c in v.coeffs):
                raise _Retry("non-integral character value")
            if crystallographic and not (v.is_rational() and v.is_integer()):
                raise _Retry("irrational value in a crystallographic type")
    for i in range(k):
        for j in range(i, k):
            acc = zero
            for n, a, b in zip(classes.sizes, rows[i], rows[j]):
                acc = acc + a * b.conjugate() * n
            want = group.size if i == j else 0
            if acc != want:
                raise _Retry(f"row orthogonality fails at ({i}, {j})")
    for a in range(k):
        for b in range(a, k):
            acc = zero
            for row in rows:
                acc = acc + row[a] * row[b].conjugate()
            want = group.size // classes.sizes[a] if a == b else 0
            if acc != want:
                raise _Retry(f"column orthogonality fails at ({a}, {b})")
    if sum(d * d for d in dims) != group.size:
        raise _Retry("degree squares do not sum to the group order")


def character_table(group) -> CharacterTable:
    """Exact character table by modular splitting and cyclotomic lifting."""
    classes = group.conjugacy_classes()
    k = len(classes)
    reps = classes.representatives
    orders = [group.order_of(z) for z in reps]
    n = 1
    for o in orders:
        n = _lcm(n, o)
    conductor = group.datum.conductor
    if conductor % n:
        raise InternalInconsistencyError(
            f"exponent {n} outside the ambient conductor {conductor}"
        )
    jstar = [classes.class_of[group.inverse[z]] for z in reps]
    powmaps = []
    for j, z in enumerate(reps):
        chain = [0] * orders[j]
        cur = 0
        for t in range(orders[j]):
            chain[t] = classes.class_of[cur]
            cur = group.multiply(cur, z)
        powmaps.append(chain)

    failures = []
    primes = _admissible_primes(n, group.size, max(classes.sizes))
    for _ in range(6):
        p = next(primes)
        seed = hashlib.sha256(
            f"{group.fingerprint()}:{p}:chartab".encode()
        ).hexdigest()
        rng = random.Random(int(seed, 16))
        try:
            rows_p, dims_p = _modular_rows(group, classes, jstar, p, rng)
            eta = pow(_primitive_root(p), (p - 1) // n, p)
            lifted = [
                _lift_row(r, d, powmaps, orders, eta, n, conductor, p)
                for r, d in zip(rows_p, dims_p)
            ]
            _validate(group, classes, lifted, dims_p, conductor)
        except _Retry as exc:
            failures.append(f"p={p}: {exc}")
            continue
        order = sorted(
            range(k),
            key=lambda i: (
                dims_p[i],
                tuple(tuple(-c for c in v.coeffs) for v in lifted[i]),
            ),
        )
        rows = tuple(lifted[i] for i in order)
        dims = tuple(dims_p[i] for i in order)
        if any(v != 1 for v in rows[0]):
            raise InternalInconsistencyError("trivial character not first")
        names = []
        seen = {}
        for d in dims:
            idx = seen.get(d, 0)
            seen[d] = idx + 1
            names.append(f"phi{d}_{idx}")
        return CharacterTable(group, classes, rows, dims, tuple(names), conductor)
    raise InternalInconsistencyError(
        "character table construction failed for 6 primes: "
        + "; ".join(failures)
    )
