"""Cells, the a-function, and the asymptotic ring.

Left cells are the strongly connected components of the digraph with an
edge y -> z whenever some generator row h_{s,y,.} touches z; right cells
come from the same graph on inverses, two-sided cells from the union.

a(z) is the top v-degree over all x, y of h_{x,y,z}; gamma_{x,y,z^-1} is
the coefficient of v^(a(z)) there.  The products

    t_x t_y = sum over z of gamma_{x,y,z^-1} t_z

make the span of the t_w a ring; its identity is the sum of t_d over the
distinguished involutions d, one per left cell.  Distinguished elements
are cut out by a(z) equalling l(z) minus twice the q-degree of the
polynomial P at (identity, z), then every defining property is checked.

The single scan that produces a and the leading coefficients runs either
over a materialized all-pairs table or through the streaming block
interface, so the big groups never hold the full table in memory.
"""

from __future__ import annotations

from .coxeter import CoxeterGroup
from .errors import InternalInconsistencyError, UsageError
from .klbase import HTable, KLStore, stream_h_blocks

__all__ = [
    "CellPartition",
    "GammaTable",
    "compute_a",
    "compute_cells",
    "compute_gamma",
    "distinguished_involutions",
]


def _sccs(size: int, adj) -> list:
    """Strongly connected components, iterative Tarjan.

    Emitted in reverse topological order: every component is emitted
    before any component with an edge into it ... i.e. after all the
    components it can reach.  Members come out sorted.
    """
    idx = [-1] * size
    low = [0] * size
    on_stack = bytearray(size)
    stack = []
    comps = []
    counter = 0
    for root in range(size):
        if idx[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                idx[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = 1
            nbrs = adj[v]
            descended = False
            while pi < len(nbrs):
                w = nbrs[pi]
                pi += 1
                if idx[w] == -1:
                    work.append((v, pi))
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w] and idx[w] < low[v]:
                    low[v] = idx[w]
            if descended:
                continue
            if low[v] == idx[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = 0
                    comp.append(w)
                    if w == v:
                        break
                comp.sort()
                comps.append(comp)
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
    return comps


def _partition_from_comps(comps: list):
    """Final cell ids ordered by smallest member; reachability as bitmasks.

    comps must be in reverse topological emission order.  Returns
    (cell_of, cells, reach) with reach[i] an int whose bit j is set when
    cell j is reachable from cell i (weakly: bit i itself is set).
    """
    order = sorted(range(len(comps)), key=lambda i: comps[i][0])
    final_of_temp = [0] * len(comps)
    for fid, tid in enumerate(order):
        final_of_temp[tid] = fid
    cells = tuple(tuple(comps[tid]) for tid in order)
    cell_of = {}
    for fid, members in enumerate(cells):
        for m in members:
            cell_of[m] = fid
    return cell_of, cells, final_of_temp


class CellPartition:
    """Left, right and two-sided cells with their weak order closures."""

    __slots__ = (
        "group",
        "left_cell_of",
        "left_cells",
        "left_reach",
        "right_cell_of",
        "right_cells",
        "two_sided_of",
        "two_sided_cells",
        "two_sided_reach",
        "distinguished",
    )

    def __init__(self, group, left, right, two):
        self.group = group
        self.left_cell_of, self.left_cells, self.left_reach = left
        self.right_cell_of, self.right_cells = right
        self.two_sided_of, self.two_sided_cells, self.two_sided_reach = two
        self.distinguished = None  # filled by distinguished_involutions

    def left_leq(self, cell_a: int, cell_b: int) -> bool:
        """Is cell_a weakly below cell_b in the left order?"""
        return bool(self.left_reach[cell_b] >> cell_a & 1)

    def two_sided_leq(self, cell_a: int, cell_b: int) -> bool:
        return bool(self.two_sided_reach[cell_b] >> cell_a & 1)

    def summary(self) -> dict:
        return {
            "left_cells": len(self.left_cells),
            "right_cells": len(self.right_cells),
            "two_sided_cells": len(self.two_sided_cells),
        }


def _close(size: int, adj):
    """SCCs of adj with final ids by smallest member and reachability
    bitmasks over final ids (weak: a cell reaches itself)."""
    comps = _sccs(size, adj)
    temp_of = [0] * size
    for tid, members in enumerate(comps):
        for y in members:
            temp_of[y] = tid
    cell_of_map, cells, final_of_temp = _partition_from_comps(comps)
    cell_of = [cell_of_map[w] for w in range(size)]
    # condensation DP; emission order guarantees targets are done first
    temp_reach = [0] * len(comps)
    for tid, members in enumerate(comps):
        mask = 1 << tid
        for y in members:
            for z in adj[y]:
                tz = temp_of[z]
                mask |= temp_reach[tz] | (1 << tz)
        temp_reach[tid] = mask
    reach = [0] * len(comps)
    for tid in range(len(comps)):
        fmask = 0
        m = temp_reach[tid]
        while m:
            low_bit = (m & -m).bit_length() - 1
            fmask |= 1 << final_of_temp[low_bit]
            m &= m - 1
        reach[final_of_temp[tid]] = fmask
    return cell_of, cells, reach


def compute_cells(gen_table: HTable) -> CellPartition:
    """Cell partition from a generators-only (or all-pairs) h-table."""
    group = gen_table.group
    size = group.size
    gens = [w for w in range(size) if group.length[w] == 1]

    adj_left = []
    for y in range(size):
        targets = set()
        for s in gens:
            for z, _ in gen_table.rows[(s, y)]:
                targets.add(z)
        targets.discard(y)
        adj_left.append(tuple(sorted(targets)))

    inv = group.inverse
    adj_right = [
        tuple(sorted(inv[z] for z in adj_left[inv[y]])) for y in range(size)
    ]
    adj_two = [
        tuple(sorted(set(adj_left[y]) | set(adj_right[y])))
        for y in range(size)
    ]

    left_cell_of, left_cells, left_reach = _close(size, adj_left)
    two_sided_of, two_cells, two_reach = _close(size, adj_two)

    # right cells: inverted left cells, renumbered by smallest member
    right_sets = sorted(
        sorted(inv[m] for m in members) for members in left_cells
    )
    right_cells = tuple(tuple(mem) for mem in right_sets)
    right_cell_of = [0] * size
    for fid, members in enumerate(right_cells):
        for m in members:
            right_cell_of[m] = fid

    # every left cell must sit inside a single two-sided cell
    for members in left_cells:
        if len({two_sided_of[m] for m in members}) != 1:
            raise InternalInconsistencyError(
                "left cell splits across two-sided cells"
            )

    return CellPartition(
        group,
        (left_cell_of, left_cells, left_reach),
        (right_cell_of, right_cells),
        (two_sided_of, two_cells, two_reach),
    )


class GammaTable:
    """a-function plus the leading structure constants of the h-table.

    lead[(x, y, z)] is the coefficient of v^(a(z)) in h_{x,y,z}; in terms
    of the abstract constants that number is gamma_{x, y, z^-1}.
    by_xy[(x, y)] lists (z, lead) pairs: the expansion of t_x t_y.
    by_zx[(z, x)] lists (y, gamma_{x,y,z}) pairs over the nonzero slots.
    """

    __slots__ = ("group", "a", "lead", "by_xy", "by_zx")

    def __init__(self, group: CoxeterGroup, a: tuple, lead: dict):
        self.group = group
        self.a = a
        self.lead = lead
        by_xy = {}
        by_zx = {}
        inv = group.inverse
        for (x, y, z), c in lead.items():
            by_xy.setdefault((x, y), []).append((z, c))
            by_zx.setdefault((inv[z], x), []).append((y, c))
        self.by_xy = {k: tuple(sorted(v)) for k, v in by_xy.items()}
        self.by_zx = {k: tuple(sorted(v)) for k, v in by_zx.items()}

    def gamma(self, x: int, y: int, z: int) -> int:
        return self.lead.get((x, y, self.group.inverse[z]), 0)

    def product(self, x: int, y: int) -> tuple:
        """t_x t_y as a sorted tuple of (z, coefficient)."""
        return self.by_xy.get((x, y), ())


def _leading_scan(source, cells: CellPartition, jobs: int = 1):
    """One pass over all h rows: per z the max degree and the leading
    coefficients with their (x, y).  Returns (a, lead)."""
    if isinstance(source, HTable):
        if source.scope != "all":
            raise UsageError("leading scan needs the all-pairs scope")
        group = source.group
    elif isinstance(source, KLStore):
        group = source.group
    else:
        raise UsageError("expected an HTable or KLStore")
    size = group.size
    best = [None] * size
    cands = [None] * size

    def eat(x, y, z, p):
        d = p[0] + len(p[1]) - 1
        b = best[z]
        if b is None or d > b:
            best[z] = d
            cands[z] = {(x, y): p[1][-1]}
        elif d == b:
            cands[z][(x, y)] = p[1][-1]

    if isinstance(source, HTable):
        for (x, y), row in source.rows.items():
            for z, p in row:
                eat(x, y, z, p)
    else:
        def consumer(x, y, row):
            for z, p in row.items():
                eat(x, y, z, p)

        stream_h_blocks(source, consumer, jobs=jobs)

    a = tuple(best)
    if a[0] != 0:
        raise InternalInconsistencyError(f"a(identity) = {a[0]}, not 0")
    for members in cells.two_sided_cells:
        vals = {a[m] for m in members}
        if len(vals) != 1:
            raise InternalInconsistencyError(
                f"a not constant on a two-sided cell: {sorted(vals)}"
            )
    lead = {}
    for z in range(size):
        for (x, y), c in cands[z].items():
            if c <= 0:
                raise InternalInconsistencyError(
                    f"nonpositive leading coefficient {c} at "
                    f"h({x},{y},{z})"
                )
            lead[(x, y, z)] = c
    return a, lead


def compute_a(source, cells: CellPartition, jobs: int = 1) -> tuple:
    """a(z) for every z: the top v-degree over the whole h-table."""
    a, _ = _leading_scan(source, cells, jobs=jobs)
    return a


def compute_gamma(source, cells: CellPartition, jobs: int = 1) -> GammaTable:
    """The full leading-coefficient table (contains the a-function)."""
    group = source.group
    a, lead = _leading_scan(source, cells, jobs=jobs)
    return GammaTable(group, a, lead)


def distinguished_involutions(
    gamma: GammaTable, cells: CellPartition, store: KLStore
) -> tuple:
    """The distinguished involutions, one per left cell, via the defect
    a(z) = l(z) - 2 deg P_{identity,z}; validates the ring axioms they
    must satisfy and records them on the cell partition.
    """
    group = gamma.group
    inv = group.inverse
    size = group.size

    dlist = []
    for z in range(size):
        qc = store.P(0, z)
        if not qc:
            raise InternalInconsistencyError("missing P(identity, z)")
        if gamma.a[z] == group.length[z] - 2 * (len(qc) - 1):
            dlist.append(z)

    dset = set(dlist)
    for d in dlist:
        if inv[d] != d:
            raise InternalInconsistencyError(
                f"distinguished candidate {d} is not an involution"
            )

    # one per left cell, bijectively
    seen_cells = {}
    for d in dlist:
        c = cells.left_cell_of[d]
        if c in seen_cells:
            raise InternalInconsistencyError(
                f"left cell {c} holds two distinguished involutions"
            )
        seen_cells[c] = d
    if len(seen_cells) != len(cells.left_cells):
        raise InternalInconsistencyError(
            f"{len(dlist)} distinguished involutions for "
            f"{len(cells.left_cells)} left cells"
        )

    # every t_x t_{x^-1} meets exactly one of them, with coefficient 1,
    # namely the one in the left cell of x^-1
    for x in range(size):
        hits = [
            (z, c)
            for z, c in gamma.product(x, inv[x])
            if inv[z] in dset
        ]
        if len(hits) != 1:
            raise InternalInconsistencyError(
                f"t_{x} t_inv meets {len(hits)} distinguished involutions"
            )
        z, c = hits[0]
        d = inv[z]
        if c != 1:
            raise InternalInconsistencyError(
                f"gamma(x, x^-1, d) = {c} != 1 at x={x}"
            )
        if cells.left_cell_of[d] != cells.left_cell_of[inv[x]]:
            raise InternalInconsistencyError(
                f"distinguished involution of x={x} outside the left "
                "cell of its inverse"
            )

    # sum of t_d is a two-sided identity: acting on the right the working
    # summand is the involution of the left cell of x, on the left that of
    # the left cell of x^-1
    for x in range(size):
        dx = seen_cells[cells.left_cell_of[x]]
        prod = gamma.product(x, dx)
        if prod != ((x, 1),):
            raise InternalInconsistencyError(
                f"t_x t_d != t_x at x={x}, d={dx}"
            )
        for c_id, d in seen_cells.items():
            if d != dx and gamma.product(x, d):
                raise InternalInconsistencyError(
                    f"t_x t_d nonzero off the diagonal at x={x}, d={d}"
                )
        dleft = seen_cells[cells.left_cell_of[inv[x]]]
        if gamma.product(dleft, x) != ((x, 1),):
            raise InternalInconsistencyError(
                f"t_d t_x != t_x at x={x}, d={dleft}"
            )
        for c_id, d in seen_cells.items():
            if d != dleft and gamma.product(d, x):
                raise InternalInconsistencyError(
                    f"t_d t_x nonzero off the diagonal at x={x}, d={d}"
                )

    out = tuple(sorted(dlist))
    cells.distinguished = out
    return out
