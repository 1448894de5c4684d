"""Session-scoped pipeline artifacts shared across test modules.

Classification of the bigger groups costs seconds to minutes, so each
symbol is built exactly once per run and reused everywhere.
"""

import pytest

from coxcells.chartab import character_table
from coxcells.classify import classify_group
from coxcells.coxeter import build_group
from coxcells.jring import (
    compute_cells,
    compute_gamma,
    distinguished_involutions,
)
from coxcells.klbase import compute_h_table, compute_kl, generator_rows
from coxcells.pipeline import run_claims


class Rig:
    __slots__ = (
        "group", "store", "htable", "cells", "gamma", "dset", "table",
        "result", "claims",
    )

    def __init__(self, symbol):
        self.group = build_group(symbol)
        self.store = compute_kl(self.group)
        self.htable = compute_h_table(self.store)
        self.cells = compute_cells(generator_rows(self.store))
        self.gamma = compute_gamma(self.htable, self.cells)
        self.dset = distinguished_involutions(
            self.gamma, self.cells, self.store
        )
        self.table = character_table(self.group)
        self.result = classify_group(
            self.store, self.htable, self.cells, self.gamma, self.dset,
            self.table,
        )
        self.claims = run_claims(self.result)


@pytest.fixture(scope="session")
def rig():
    built = {}

    def get(symbol) -> Rig:
        if symbol not in built:
            built[symbol] = Rig(symbol)
        return built[symbol]

    return get
