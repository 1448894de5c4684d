"""Stage orchestration: cache-aware loading of the polynomial stores,
lane selection for large groups, and deterministic report assembly.

Reports are plain dicts of ints, strings and booleans, rendered by the
exact canonical renderers only, so serializing one twice gives the same
bytes; diagnostics go to the error stream, never into a report.
"""

import csv
import io
import os
import sys

from .chartab import character_table
from .classify import (
    CLAIM_IDS,
    classify_group,
    classify_group_streamed,
    verify_claim,
    word_name,
)
from .errors import CacheInvalidError
from .jring import compute_cells, compute_gamma, distinguished_involutions
from .klbase import (
    DEFAULT_ROW_BUDGET,
    cache_load,
    cache_save,
    compute_h_table,
    compute_kl,
    generator_rows,
)


def notice(message: str):
    """Diagnostic line on the error stream; stdout stays report-only."""
    print(f"coxcells: {message}", file=sys.stderr)


def needs_streaming(group) -> bool:
    """True when the all-pairs table would blow the row budget."""
    return group.size * group.size > DEFAULT_ROW_BUDGET


def load_stores(group, cache_dir=None, want_table=True, jobs=1):
    """(KLStore, HTable or None) for the group, using the cache when a
    directory is given; an invalid cache is recomputed with a notice."""
    directory = None
    store = None
    htable = None
    if cache_dir:
        directory = os.path.join(cache_dir, group.datum.type_symbol)
        try:
            store, htable = cache_load(directory, group)
        except CacheInvalidError as exc:
            if "no manifest" not in str(exc):
                notice(f"cache invalid ({exc}); recomputing")
    dirty = False
    if store is None:
        store = compute_kl(group)
        dirty = True
    if want_table and htable is None and not needs_streaming(group):
        htable = compute_h_table(store)
        dirty = True
    if directory is not None and dirty:
        cache_save(store, htable, directory)
    return store, htable


def analysis(group, cache_dir=None, jobs=1):
    """Everything through cells, leading coefficients and distinguished
    involutions; big groups run off the streaming scanner."""
    store, htable = load_stores(
        group, cache_dir, want_table=not needs_streaming(group), jobs=jobs
    )
    cells = compute_cells(generator_rows(store))
    source = htable if htable is not None else store
    gamma = compute_gamma(source, cells, jobs=jobs)
    dset = distinguished_involutions(gamma, cells, store)
    return store, htable, cells, gamma, dset


def classification(group, cache_dir=None, jobs=1, sample_pairs=200):
    """Full classification result, choosing the direct or streamed lane
    by the table budget."""
    store, htable, cells, gamma, dset = analysis(group, cache_dir, jobs)
    table = character_table(group)
    if htable is not None:
        return classify_group(
            store, htable, cells, gamma, dset, table, sample_pairs=sample_pairs
        )
    return classify_group_streamed(store, cells, gamma, dset, table, jobs=jobs)


def run_claims(result, claim_ids=None):
    ids = CLAIM_IDS if claim_ids is None else tuple(claim_ids)
    return [verify_claim(cid, result) for cid in ids]


# ---------------------------------------------------------------------------
# reports

def group_report(group) -> dict:
    return group.metadata()


def _cell_family(group, cell_lists, a):
    return [
        {
            "id": i,
            "a": a[members[0]],
            "size": len(members),
            "members": [word_name(group, m) for m in members],
        }
        for i, members in enumerate(cell_lists)
    ]


def cells_report(group, cells, gamma, dset) -> dict:
    known = set(dset)
    elements = [
        {
            "word": word_name(group, x),
            "length": group.length[x],
            "left": cells.left_cell_of[x],
            "right": cells.right_cell_of[x],
            "two_sided": cells.two_sided_of[x],
            "a": gamma.a[x],
            "distinguished": x in known,
        }
        for x in range(group.size)
    ]
    return {
        "type": group.datum.type_symbol,
        "order": group.size,
        "elements": elements,
        "left_cells": _cell_family(group, cells.left_cells, gamma.a),
        "right_cells": _cell_family(group, cells.right_cells, gamma.a),
        "two_sided_cells": _cell_family(group, cells.two_sided_cells, gamma.a),
        "distinguished": [word_name(group, d) for d in dset],
    }


def chartable_report(group, table) -> dict:
    classes = table.classes
    return {
        "type": group.datum.type_symbol,
        "order": group.size,
        "conductor": table.conductor,
        "classes": [
            {
                "representative": word_name(group, rep),
                "size": classes.sizes[j],
            }
            for j, rep in enumerate(classes.representatives)
        ],
        "irreps": [
            {
                "name": table.names[i],
                "dim": table.dims[i],
                "values": [v.render() for v in table.rows[i]],
            }
            for i in range(len(table))
        ],
    }


def _fake_coeffs(poly) -> list:
    return [int(poly.coeff(e)) for e in range(poly.degree() + 1)]


def classify_report(result, claims) -> dict:
    group = result.group
    profile = result.expected_profile
    return {
        "type": group.datum.type_symbol,
        "order": group.size,
        "orientation": result.orientation,
        "expected_exceptional": (
            None if profile is None
            else {"count": profile[0], "dim": profile[1]}
        ),
        "profile_consistent": result.profile_consistent,
        "irreps": [
            {
                "label": r.label,
                "dim": r.dim,
                "cell": r.cell,
                "a": r.a_value,
                "b": r.b_value,
                "fake_degree": _fake_coeffs(r.fake_degree),
                "ordinary": r.ordinary,
                "special": r.special,
                "exceptional": r.exceptional,
            }
            for r in result.irreps
        ],
        "cell_ordinary": {
            str(cid): flag
            for cid, flag in sorted(result.cell_ordinary.items())
        },
        "involutions": [
            {
                "word": word_name(group, r.element),
                "length": r.length,
                "a": r.a_value,
                "ordinary": r.ordinary,
            }
            for r in result.involutions
        ],
        "claims": [
            {"id": c.claim_id, "status": c.status, "witness": c.witness}
            for c in claims
        ],
        "all_claims_pass": all(c.status == "pass" for c in claims),
    }


def verify_report(result, claims) -> dict:
    return {
        "type": result.group.datum.type_symbol,
        "order": result.group.size,
        "claims": [
            {"id": c.claim_id, "status": c.status, "witness": c.witness}
            for c in claims
        ],
        "all_pass": all(c.status == "pass" for c in claims),
    }


# ---------------------------------------------------------------------------
# text and csv renderings

def _csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def group_text(report) -> str:
    lines = [f"{k}: {v}" for k, v in report.items() if k != "fingerprint"]
    return "\n".join(lines) + "\n"


def group_csv(report) -> str:
    return _csv([["field", "value"]] + [[k, v] for k, v in report.items()])


def cells_text(report) -> str:
    lines = [
        f"type {report['type']}  order {report['order']}",
        f"left cells {len(report['left_cells'])}  "
        f"right cells {len(report['right_cells'])}  "
        f"two-sided cells {len(report['two_sided_cells'])}",
        f"distinguished involutions: {' '.join(report['distinguished'])}",
        "",
    ]
    for cell in report["two_sided_cells"]:
        lefts = sum(
            1
            for lc in report["left_cells"]
            if lc["a"] == cell["a"]
            and set(lc["members"]) <= set(cell["members"])
        )
        lines.append(
            f"two-sided cell {cell['id']}: a={cell['a']} "
            f"size={cell['size']} left_cells={lefts}"
        )
    return "\n".join(lines) + "\n"


def cells_csv(report) -> str:
    rows = [["word", "length", "left", "right", "two_sided", "a",
             "distinguished"]]
    for e in report["elements"]:
        rows.append([
            e["word"], e["length"], e["left"], e["right"], e["two_sided"],
            e["a"], e["distinguished"],
        ])
    return _csv(rows)


def chartable_text(report) -> str:
    heads = ["irrep"] + [c["representative"] for c in report["classes"]]
    rows = [heads, ["size"] + [str(c["size"]) for c in report["classes"]]]
    for irr in report["irreps"]:
        rows.append([irr["name"]] + irr["values"])
    widths = [
        max(len(str(r[i])) for r in rows) for i in range(len(heads))
    ]
    lines = [
        "  ".join(str(cell).rjust(w) for cell, w in zip(row, widths))
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def chartable_csv(report) -> str:
    heads = ["irrep", "dim"] + [c["representative"] for c in report["classes"]]
    rows = [heads]
    for irr in report["irreps"]:
        rows.append([irr["name"], irr["dim"]] + irr["values"])
    return _csv(rows)


def classify_text(report) -> str:
    lines = [
        f"type {report['type']}  order {report['order']}  "
        f"orientation {report['orientation']}",
    ]
    for irr in report["irreps"]:
        flags = []
        if irr["special"]:
            flags.append("special")
        flags.append("exceptional" if irr["exceptional"] else "ordinary")
        lines.append(
            f"  {irr['label']}: dim={irr['dim']} cell={irr['cell']} "
            f"a={irr['a']} b={irr['b']} {' '.join(flags)}"
        )
    exc = [i["label"] for i in report["irreps"] if i["exceptional"]]
    lines.append(
        f"exceptional irreps: {' '.join(exc) if exc else 'none'}"
    )
    bad = [i for i in report["involutions"] if not i["ordinary"]]
    lines.append(
        f"involutions: {len(report['involutions'])} total, "
        f"{len(bad)} exceptional"
    )
    for c in report["claims"]:
        lines.append(f"claim {c['id']}: {c['status']}")
    return "\n".join(lines) + "\n"


def classify_csv(report) -> str:
    rows = [["label", "dim", "cell", "a", "b", "fake_degree", "ordinary",
             "special", "exceptional"]]
    for irr in report["irreps"]:
        rows.append([
            irr["label"], irr["dim"], irr["cell"], irr["a"], irr["b"],
            " ".join(str(c) for c in irr["fake_degree"]),
            irr["ordinary"], irr["special"], irr["exceptional"],
        ])
    return _csv(rows)


def verify_text(report) -> str:
    lines = [f"type {report['type']}  order {report['order']}"]
    for c in report["claims"]:
        lines.append(f"claim {c['id']}: {c['status']}")
        if c["status"] != "pass":
            lines.append(f"  witness: {c['witness']}")
    lines.append("all pass" if report["all_pass"] else "FAILURES PRESENT")
    return "\n".join(lines) + "\n"


def verify_csv(report) -> str:
    rows = [["claim", "status"]]
    for c in report["claims"]:
        rows.append([c["id"], c["status"]])
    return _csv(rows)
