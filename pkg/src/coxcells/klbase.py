"""Canonical basis of the Hecke algebra and its structure constants.

The Hecke algebra here is taken over Z[v, v^-1] with quadratic relation
(T_s + 1)(T_s - v^2) = 0.  The canonical basis element attached to w is

    c_w = v^(-l(w)) * sum over y <= w of P_{y,w}(v^2) T_y

with P the classical polynomials in q = v^2 (integer coefficients, constant
term 1, q-degree at most (l(w) - l(y) - 1)/2 for y < w).  mu(y, w) is the
coefficient at that top degree bound.

Everything on the hot paths uses a tiny value representation instead of the
general LaurentPoly class: a pair (val, coeffs) of an int and a tuple of ints
meaning sum coeffs[i] * v^(val + i).  The zero polynomial is (0, ()).
Conversion to LaurentPoly happens only at module boundaries.

Products c_x c_y = sum over z of h_{x,y,z} c_z are provided two ways:

* row by row through the T-basis (`c_product`): expand, multiply, convert
  back by unitriangular elimination;
* in bulk through the left-multiplication recursion on blocks of fixed y
  (`compute_h_table` and `stream_h_blocks`), which never touches the T-basis
  and is what makes the big groups affordable.

The two routes are checked against each other in the test suite.
"""

from __future__ import annotations

import io
import json
import os
import struct

from .coxeter import CoxeterGroup
from .errors import (
    CacheInvalidError,
    InternalInconsistencyError,
    RefusalError,
    UsageError,
)
from .exactnum import LaurentPoly

__all__ = [
    "HTable",
    "KLStore",
    "c_product",
    "cache_load",
    "cache_save",
    "compute_h_table",
    "compute_kl",
    "dagger_T_basis",
    "stream_h_blocks",
    "vp",
]

CACHE_FORMAT_VERSION = 1

# default cap on materialized all-pairs rows; H3 (14,400) fits, F4 does not
DEFAULT_ROW_BUDGET = 120_000


# ---------------------------------------------------------------------------
# value polynomials: (val, coeffs) with coeffs a tuple of ints


class vp:
    """Namespace of free functions on (val, coeffs) value polynomials."""

    ZERO = (0, ())
    ONE = (0, (1,))
    # v + v^-1, the eigenvalue sum of c_s acting on its own line
    GATE = (-1, (1, 0, 1))

    @staticmethod
    def norm(val: int, coeffs: list) -> tuple:
        lo = 0
        hi = len(coeffs)
        while hi > lo and not coeffs[hi - 1]:
            hi -= 1
        while lo < hi and not coeffs[lo]:
            lo += 1
        if lo == hi:
            return vp.ZERO
        return (val + lo, tuple(coeffs[lo:hi]))

    @staticmethod
    def add(a: tuple, b: tuple) -> tuple:
        if not a[1]:
            return b
        if not b[1]:
            return a
        lo = min(a[0], b[0])
        hi = max(a[0] + len(a[1]), b[0] + len(b[1]))
        out = [0] * (hi - lo)
        for i, c in enumerate(a[1]):
            out[a[0] - lo + i] += c
        for i, c in enumerate(b[1]):
            out[b[0] - lo + i] += c
        return vp.norm(lo, out)

    @staticmethod
    def sub(a: tuple, b: tuple) -> tuple:
        return vp.add(a, vp.neg(b))

    @staticmethod
    def neg(a: tuple) -> tuple:
        return (a[0], tuple(-c for c in a[1]))

    @staticmethod
    def shift(a: tuple, k: int) -> tuple:
        if not a[1]:
            return vp.ZERO
        return (a[0] + k, a[1])

    @staticmethod
    def scale(a: tuple, k: int) -> tuple:
        if not k or not a[1]:
            return vp.ZERO
        if k == 1:
            return a
        return (a[0], tuple(c * k for c in a[1]))

    @staticmethod
    def mul(a: tuple, b: tuple) -> tuple:
        if not a[1] or not b[1]:
            return vp.ZERO
        out = [0] * (len(a[1]) + len(b[1]) - 1)
        for i, x in enumerate(a[1]):
            if x:
                for j, y in enumerate(b[1]):
                    if y:
                        out[i + j] += x * y
        return vp.norm(a[0] + b[0], out)

    @staticmethod
    def coeff(a: tuple, e: int) -> int:
        i = e - a[0]
        if 0 <= i < len(a[1]):
            return a[1][i]
        return 0

    @staticmethod
    def deg(a: tuple) -> int:
        if not a[1]:
            raise UsageError("degree of zero")
        return a[0] + len(a[1]) - 1

    @staticmethod
    def val(a: tuple) -> int:
        if not a[1]:
            raise UsageError("valuation of zero")
        return a[0]

    @staticmethod
    def at_one(a: tuple) -> int:
        return sum(a[1])

    @staticmethod
    def bar_symmetric(a: tuple) -> bool:
        """Invariance under v -> v^-1."""
        if not a[1]:
            return True
        return a[0] == -(a[0] + len(a[1]) - 1) and a[1] == a[1][::-1]

    @staticmethod
    def to_laurent(a: tuple, var: str = "v") -> LaurentPoly:
        return LaurentPoly(
            {a[0] + i: c for i, c in enumerate(a[1]) if c}, var
        )

    @staticmethod
    def from_q(qcoeffs: tuple, shift: int = 0) -> tuple:
        """Polynomial in q = v^2 as a v-polynomial, then shifted by v^shift."""
        if not qcoeffs:
            return vp.ZERO
        out = [0] * (2 * len(qcoeffs) - 1)
        for i, c in enumerate(qcoeffs):
            out[2 * i] = c
        return vp.norm(shift, out)


# ---------------------------------------------------------------------------
# KL store


class KLStore:
    """Polynomials P, coefficients mu, and the data for c-basis products.

    P is kept per target: P_by_w[w] maps y -> tuple of ascending q-coefficients
    (so P_by_w[w][y][k] is the coefficient of q^k).  mu_by_w[w] lists the
    pairs (z, mu(z, w)) with nonzero mu, sorted by z.
    """

    __slots__ = ("group", "P_by_w", "mu_by_w", "fingerprint")

    def __init__(self, group: CoxeterGroup, P_by_w, mu_by_w):
        self.group = group
        self.P_by_w = P_by_w
        self.mu_by_w = mu_by_w
        self.fingerprint = group.fingerprint()

    def P(self, x: int, y: int) -> tuple:
        """Ascending q-coefficients of P_{x,y}; () when x is not <= y."""
        return self.P_by_w[y].get(x, ())

    def P_at_one(self, x: int, y: int) -> int:
        return sum(self.P_by_w[y].get(x, ()))

    def mu(self, x: int, y: int) -> int:
        """mu(x, y) for x < y (0 when absent)."""
        for z, m in self.mu_by_w[y]:
            if z == x:
                return m
        return 0

    def c_vector(self, w: int) -> dict:
        """T-basis coordinates of c_w as a dict y -> value polynomial."""
        lw = self.group.length[w]
        return {
            y: vp.from_q(qc, -lw) for y, qc in self.P_by_w[w].items()
        }


def compute_kl(group: CoxeterGroup) -> KLStore:
    """All P_{x,y} and mu by the length-increasing canonical-basis recursion.

    For w = s u with l(w) = l(u) + 1 the product rule
    c_s c_u = c_w + sum over z with sz < z of mu(z, u) c_z
    is solved for c_w in T-coordinates; mu values fall out of the result as
    the coefficients at v^(-l(y) - 1).
    """
    size = group.size
    length = group.length
    left = group.left
    lmask = group.left_descent_mask
    words = group.words

    cvec = [None] * size
    cvec[0] = {0: vp.ONE}
    P_by_w = [None] * size
    P_by_w[0] = {0: (1,)}
    mu_by_w = [None] * size
    mu_by_w[0] = ()
    interned = {(1,): (1,)}  # most P rows repeat a handful of tuples

    for w in range(1, size):
        s = words[w][0]                       # smallest left descent
        u = left[s][w]
        lrow = left[s]
        # multiply c_u by c_s on the left: each coordinate p at y sends
        # v^(+-1) p to both y and sy, sign + exactly when sy < y
        acc = {}
        for y, p in cvec[u].items():
            sy = lrow[y]
            q = vp.shift(p, 1) if length[sy] < length[y] else vp.shift(p, -1)
            for tgt in (y, sy):
                cur = acc.get(tgt)
                acc[tgt] = q if cur is None else vp.add(cur, q)
        # subtract mu(z, u) c_z over z with sz < z
        for z, m in mu_by_w[u]:
            if lmask[z] >> s & 1:
                for y, p in cvec[z].items():
                    q = vp.scale(p, -m)
                    cur = acc.get(y)
                    acc[y] = q if cur is None else vp.add(cur, q)
        acc = {y: p for y, p in acc.items() if p[1]}

        lw = length[w]
        if acc.get(w) != (-lw, (1,)):
            raise InternalInconsistencyError(
                f"canonical basis recursion lost the top term at {w}"
            )
        Prow = {}
        mus = []
        for y, p in acc.items():
            if vp.deg(p) > -length[y] - 1 and y != w:
                raise InternalInconsistencyError(
                    f"degree bound violated at ({y}, {w})"
                )
            # q-coefficients: exponents run -lw, -lw+2, ..., upward
            qc = [0] * ((vp.deg(p) + lw) // 2 + 1)
            for i, c in enumerate(p[1]):
                e = p[0] + i
                if c:
                    if (e + lw) % 2:
                        raise InternalInconsistencyError(
                            f"odd exponent in P at ({y}, {w})"
                        )
                    qc[(e + lw) // 2] = c
            if qc[0] != 1:
                raise InternalInconsistencyError(
                    f"constant term of P({y},{w}) is {qc[0]}, not 1"
                )
            qct = tuple(qc)
            Prow[y] = interned.setdefault(qct, qct)
            m = vp.coeff(p, -length[y] - 1)
            if m:
                mus.append((y, m))
        mus.sort()
        cvec[w] = acc
        P_by_w[w] = Prow
        mu_by_w[w] = tuple(mus)

    return KLStore(group, P_by_w, mu_by_w)


# ---------------------------------------------------------------------------
# products through the T-basis


def _t_mul_left_gen(group: CoxeterGroup, s: int, vec: dict) -> dict:
    """T_s times a T-basis vector: T_s T_y = T_{sy} or v^2 T_{sy}+(v^2-1)T_y."""
    lrow = group.left[s]
    length = group.length
    out = {}
    for y, p in vec.items():
        sy = lrow[y]
        if length[sy] > length[y]:
            cur = out.get(sy)
            out[sy] = p if cur is None else vp.add(cur, p)
        else:
            q = vp.shift(p, 2)
            cur = out.get(sy)
            out[sy] = q if cur is None else vp.add(cur, q)
            r = vp.add(vp.shift(p, 2), vp.neg(p))
            cur = out.get(y)
            out[y] = r if cur is None else vp.add(cur, r)
    return {y: p for y, p in out.items() if p[1]}


def c_product(store: KLStore, x: int, y: int) -> tuple:
    """The h-row of c_x c_y as a tuple of (z, value polynomial), sorted by z.

    Expands both factors over the T-basis, multiplies through the quadratic
    relation, and converts back by unitriangular elimination against the
    c-basis.  Fine for single rows and oracle comparisons; use
    compute_h_table for bulk work.
    """
    group = store.group
    xvec = store.c_vector(x)
    yvec = store.c_vector(y)

    # T_u * yvec for every u in the support of c_x, sharing prefixes:
    # T_u = T_s T_u' with s the first letter of u's canonical word
    words = group.words
    need = sorted(xvec)
    memo = {0: yvec}
    for u in need:
        if u in memo:
            continue
        stack = []
        cur = u
        while cur not in memo:
            stack.append(cur)
            cur = group.left[words[cur][0]][cur]
        while stack:
            cur = stack.pop()
            memo[cur] = _t_mul_left_gen(group, words[cur][0], memo[group.left[words[cur][0]][cur]])

    prod = {}
    for u, f in xvec.items():
        for z, p in memo[u].items():
            q = vp.mul(f, p)
            cur = prod.get(z)
            prod[z] = q if cur is None else vp.add(cur, q)
    prod = {z: p for z, p in prod.items() if p[1]}

    # unitriangular conversion: repeatedly strip the highest-index term
    length = group.length
    out = []
    while prod:
        w = max(prod)
        h = vp.shift(prod[w], length[w])
        out.append((w, h))
        for yy, qc in store.P_by_w[w].items():
            contrib = vp.mul(h, vp.from_q(qc, -length[w]))
            cur = prod.get(yy)
            r = vp.sub(cur, contrib) if cur is not None else vp.neg(contrib)
            if r[1]:
                prod[yy] = r
            else:
                prod.pop(yy, None)
    out.sort()
    return tuple(out)


def dagger_T_basis(store: KLStore, x: int) -> dict:
    """T-basis expansion of the image of c_x under the automorphism
    sending T_s to -T_s^(-1).

    On T_w the map acts by T_w -> (-1)^l(w) (T_{w^-1})^(-1); inverse basis
    vectors are built by the right-multiplication rule
    X T_s^(-1) = v^(-2) (X T_s) - (1 - v^(-2)) X.
    """
    group = store.group
    length = group.length

    # (T_{y^-1})^(-1) accumulated by chaining along the canonical word of y
    inv_memo = {0: {0: vp.ONE}}

    def inv_of(y: int) -> dict:
        # returns the expansion of (T_{y^-1})^(-1)
        got = inv_memo.get(y)
        if got is not None:
            return got
        # chain: word(y) = word(parent) + (s) with parent = y s
        word = group.words[y]
        s = word[-1]
        parent = group.right[s][y]
        base = inv_of(parent)
        out = {}
        rrow = group.right[s]
        for u, p in base.items():
            us = rrow[u]
            if length[us] > length[u]:
                # X T_s at T_u flows to T_{us}; then scale v^-2
                q = vp.shift(p, -2)
                cur = out.get(us)
                out[us] = q if cur is None else vp.add(cur, q)
            else:
                q = p  # v^-2 * v^2 T_{us}
                cur = out.get(us)
                out[us] = q if cur is None else vp.add(cur, q)
                r = vp.sub(p, vp.shift(p, -2))  # v^-2 (v^2-1) p = (1 - v^-2) p
                cur = out.get(u)
                out[u] = r if cur is None else vp.add(cur, r)
            # subtract (1 - v^-2) X
            r2 = vp.sub(vp.shift(p, -2), p)
            cur = out.get(u)
            out[u] = r2 if cur is None else vp.add(cur, r2)
        out = {u: p for u, p in out.items() if p[1]}
        inv_memo[y] = out
        return out

    lw = length[x]
    total = {}
    for y, qc in store.P_by_w[x].items():
        f = vp.from_q(qc, -lw)
        if length[y] % 2:
            f = vp.neg(f)
        for u, p in inv_of(y).items():
            q = vp.mul(f, p)
            cur = total.get(u)
            total[u] = q if cur is None else vp.add(cur, q)
    return {u: p for u, p in total.items() if p[1]}


# ---------------------------------------------------------------------------
# bulk h-table work


class HTable:
    """Structure-constant rows h_{x,y,.} keyed by (x, y).

    scope is "generators" (rows for x of length 1 only) or "all".  Rows are
    tuples of (z, value polynomial) sorted by z.
    """

    __slots__ = ("group", "scope", "rows", "fingerprint")

    def __init__(self, group: CoxeterGroup, scope: str, rows: dict):
        self.group = group
        self.scope = scope
        self.rows = rows
        self.fingerprint = group.fingerprint()

    def row(self, x: int, y: int) -> tuple:
        return self.rows[(x, y)]

    def h(self, x: int, y: int, z: int) -> tuple:
        for zz, p in self.rows[(x, y)]:
            if zz == z:
                return p
        return vp.ZERO


def _generator_row(store: KLStore, s_elt: int, s: int, y: int) -> tuple:
    """c_s c_y read off descents and mu, no polynomial arithmetic."""
    group = store.group
    if group.left_descent_mask[y] >> s & 1:
        return ((y, vp.GATE),)
    out = [(group.left[s][y], vp.ONE)]
    for z, m in store.mu_by_w[y]:
        if group.left_descent_mask[z] >> s & 1:
            out.append((z, (0, (m,))))
    out.sort()
    return tuple(out)


def generator_rows(store: KLStore) -> HTable:
    """The generators-only h-table, enough for the cell preorders."""
    group = store.group
    rows = {}
    gens = [(group.element_by_word((s,)), s) for s in range(group.datum.rank)]
    for y in range(group.size):
        for s_elt, s in gens:
            rows[(s_elt, y)] = _generator_row(store, s_elt, s, y)
    return HTable(group, "generators", rows)


class _BlockKit:
    """Just enough immutable data to run one y-block of the h recursion."""

    __slots__ = ("size", "length", "left", "lmask", "first_letter", "mu_by_w")

    def __init__(self, store: KLStore):
        g = store.group
        self.size = g.size
        self.length = g.length
        self.left = g.left
        self.lmask = g.left_descent_mask
        self.first_letter = [w[0] if w else -1 for w in g.words]
        self.mu_by_w = store.mu_by_w


def _h_block(kit: _BlockKit, y: int) -> list:
    """All rows h_{x,y,.} for fixed y, x in index order.

    Row x is built from row x' (x = s x', first-letter descent) through
    c_x c_y = c_s (c_x' c_y) - sum mu(z, x') c_z c_y over z with s z < z.
    Left multiplication by c_s in the c-basis needs only descents and mu.
    """
    length = kit.length
    lmask = kit.lmask
    mu_by_w = kit.mu_by_w
    rows = [None] * kit.size
    rows[0] = {y: vp.ONE}
    for x in range(1, kit.size):
        s = kit.first_letter[x]
        lrow = kit.left[s]
        parent = lrow[x]
        bit = s
        src = rows[parent]
        acc = {}
        for z, p in src.items():
            if lmask[z] >> bit & 1:
                q = vp.mul(p, vp.GATE)
                cur = acc.get(z)
                acc[z] = q if cur is None else vp.add(cur, q)
            else:
                sz = lrow[z]
                cur = acc.get(sz)
                acc[sz] = p if cur is None else vp.add(cur, p)
                for t, m in mu_by_w[z]:
                    if lmask[t] >> bit & 1:
                        q = vp.scale(p, m)
                        cur = acc.get(t)
                        acc[t] = q if cur is None else vp.add(cur, q)
        for z, m in mu_by_w[parent]:
            if lmask[z] >> bit & 1:
                for t, p in rows[z].items():
                    q = vp.scale(p, -m)
                    cur = acc.get(t)
                    acc[t] = q if cur is None else vp.add(cur, q)
        rows[x] = {z: p for z, p in acc.items() if p[1]}
    return rows


def compute_h_table(
    store: KLStore, scope: str = "all", row_budget: int = DEFAULT_ROW_BUDGET
) -> HTable:
    """Materialize h rows; generators-only or all pairs.

    All-pairs materialization refuses groups whose row count would blow the
    budget; use stream_h_blocks for those instead.
    """
    if scope == "generators":
        return generator_rows(store)
    if scope != "all":
        raise UsageError(f"unknown h-table scope {scope!r}")
    group = store.group
    n_rows = group.size * group.size
    if n_rows > row_budget:
        raise RefusalError(
            f"all-pairs h-table for {group.datum.type_symbol} has {n_rows} "
            f"rows, over the materialization budget {row_budget}; "
            "use the streaming interface"
        )
    kit = _BlockKit(store)
    rows = {}
    for y in range(group.size):
        block = _h_block(kit, y)
        for x in range(group.size):
            rows[(x, y)] = tuple(sorted(block[x].items()))
    return HTable(group, "all", rows)


def stream_h_blocks(store: KLStore, consumer, jobs: int = 1, ys=None):
    """Run `consumer(x, y, row_dict)` over h rows, block by block.

    ys selects which y-blocks to visit (all of them by default).  Rows
    arrive grouped by y in the order given; the consumer always runs in the
    calling process.  With jobs > 1 the blocks are computed in worker
    processes but consumed in the same deterministic order.
    """
    group = store.group
    kit = _BlockKit(store)
    targets = list(range(group.size)) if ys is None else list(ys)
    if jobs <= 1:
        for y in targets:
            block = _h_block(kit, y)
            for x in range(group.size):
                consumer(x, y, block[x])
        return
    import concurrent.futures as cf

    with cf.ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_worker, initargs=(kit,)
    ) as pool:
        pending = {}
        feed = iter(targets)
        inflight = set()

        def submit_some():
            while len(inflight) < 2 * jobs:
                y = next(feed, None)
                if y is None:
                    return
                pending[y] = pool.submit(_stream_worker, y)
                inflight.add(y)

        submit_some()
        for y in targets:
            block = pending.pop(y).result()
            inflight.discard(y)
            submit_some()
            for x in range(group.size):
                consumer(x, y, block[x])


_WORKER_KIT = None


def _init_worker(kit: _BlockKit):
    global _WORKER_KIT
    _WORKER_KIT = kit


def _stream_worker(y: int):
    return _h_block(_WORKER_KIT, y)


# ---------------------------------------------------------------------------
# cache


def _pack_vp(p: tuple) -> bytes:
    return struct.pack("<hH", p[0], len(p[1])) + struct.pack(
        f"<{len(p[1])}q", *p[1]
    )


def _unpack_vp(buf: io.BytesIO) -> tuple:
    val, n = struct.unpack("<hH", buf.read(4))
    coeffs = struct.unpack(f"<{n}q", buf.read(8 * n)) if n else ()
    return (val, tuple(coeffs))


def _write_record(f, payload: bytes):
    f.write(struct.pack("<I", len(payload)))
    f.write(payload)


def _read_record(f) -> bytes:
    head = f.read(4)
    if len(head) != 4:
        raise CacheInvalidError("truncated cache record")
    (n,) = struct.unpack("<I", head)
    payload = f.read(n)
    if len(payload) != n:
        raise CacheInvalidError("truncated cache record")
    return payload


def cache_save(store: KLStore, htable, directory: str):
    """Write kl.bin, h.bin (if a table is given) and manifest.json."""
    os.makedirs(directory, exist_ok=True)
    group = store.group
    kl_path = os.path.join(directory, "kl.bin")
    with open(kl_path, "wb") as f:
        f.write(b"CXKL")
        f.write(struct.pack("<I", CACHE_FORMAT_VERSION))
        _write_record(f, store.fingerprint.encode())
        f.write(struct.pack("<I", group.size))
        for w in range(group.size):
            row = store.P_by_w[w]
            parts = [struct.pack("<I", len(row))]
            for y in sorted(row):
                qc = row[y]
                parts.append(struct.pack(f"<IH{len(qc)}q", y, len(qc), *qc))
            mus = store.mu_by_w[w]
            parts.append(struct.pack("<I", len(mus)))
            for z, m in mus:
                parts.append(struct.pack("<Iq", z, m))
            _write_record(f, b"".join(parts))
    files = {"kl.bin": True, "h.bin": False}
    if htable is not None:
        files["h.bin"] = True
        with open(os.path.join(directory, "h.bin"), "wb") as f:
            f.write(b"CXHT")
            f.write(struct.pack("<I", CACHE_FORMAT_VERSION))
            _write_record(f, store.fingerprint.encode())
            scope_code = 1 if htable.scope == "generators" else 2
            f.write(struct.pack("<BI", scope_code, len(htable.rows)))
            for (x, y) in sorted(htable.rows):
                row = htable.rows[(x, y)]
                parts = [struct.pack("<III", x, y, len(row))]
                for z, p in row:
                    parts.append(struct.pack("<I", z))
                    parts.append(_pack_vp(p))
                _write_record(f, b"".join(parts))
    manifest = {
        "format_version": CACHE_FORMAT_VERSION,
        "type": group.datum.type_symbol,
        "order": group.size,
        "rank": group.datum.rank,
        "fingerprint": store.fingerprint,
        "files": files,
    }
    with open(os.path.join(directory, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")


def cache_load(directory: str, group: CoxeterGroup):
    """Load (KLStore, HTable-or-None) for this group; validate everything."""
    manifest_path = os.path.join(directory, "manifest.json")
    if not os.path.exists(manifest_path):
        raise CacheInvalidError(f"no manifest at {manifest_path}")
    with open(manifest_path) as f:
        manifest = json.load(f)
    if manifest.get("format_version") != CACHE_FORMAT_VERSION:
        raise CacheInvalidError(
            f"cache format {manifest.get('format_version')} != "
            f"{CACHE_FORMAT_VERSION}"
        )
    fp = group.fingerprint()
    if manifest.get("fingerprint") != fp or manifest.get("type") != group.datum.type_symbol:
        raise CacheInvalidError("cache belongs to a different group")

    with open(os.path.join(directory, "kl.bin"), "rb") as f:
        if f.read(4) != b"CXKL":
            raise CacheInvalidError("bad kl.bin magic")
        (ver,) = struct.unpack("<I", f.read(4))
        if ver != CACHE_FORMAT_VERSION:
            raise CacheInvalidError("kl.bin version mismatch")
        if _read_record(f).decode() != fp:
            raise CacheInvalidError("kl.bin fingerprint mismatch")
        (size,) = struct.unpack("<I", f.read(4))
        if size != group.size:
            raise CacheInvalidError("kl.bin element count mismatch")
        P_by_w = [None] * size
        mu_by_w = [None] * size
        for w in range(size):
            buf = io.BytesIO(_read_record(f))
            (nrow,) = struct.unpack("<I", buf.read(4))
            row = {}
            for _ in range(nrow):
                y, nq = struct.unpack("<IH", buf.read(6))
                row[y] = struct.unpack(f"<{nq}q", buf.read(8 * nq))
            (nmu,) = struct.unpack("<I", buf.read(4))
            mus = []
            for _ in range(nmu):
                z, m = struct.unpack("<Iq", buf.read(12))
                mus.append((z, m))
            P_by_w[w] = row
            mu_by_w[w] = tuple(mus)
    store = KLStore(group, P_by_w, mu_by_w)

    htable = None
    h_path = os.path.join(directory, "h.bin")
    if manifest.get("files", {}).get("h.bin") and os.path.exists(h_path):
        with open(h_path, "rb") as f:
            if f.read(4) != b"CXHT":
                raise CacheInvalidError("bad h.bin magic")
            (ver,) = struct.unpack("<I", f.read(4))
            if ver != CACHE_FORMAT_VERSION:
                raise CacheInvalidError("h.bin version mismatch")
            if _read_record(f).decode() != fp:
                raise CacheInvalidError("h.bin fingerprint mismatch")
            scope_code, nrows = struct.unpack("<BI", f.read(5))
            rows = {}
            for _ in range(nrows):
                buf = io.BytesIO(_read_record(f))
                x, y, nz = struct.unpack("<III", buf.read(12))
                row = []
                for _ in range(nz):
                    (z,) = struct.unpack("<I", buf.read(4))
                    row.append((z, _unpack_vp(buf)))
                rows[(x, y)] = tuple(row)
        htable = HTable(
            group, "generators" if scope_code == 1 else "all", rows
        )
    return store, htable
