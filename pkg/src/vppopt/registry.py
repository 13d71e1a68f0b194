"""Bidirectional map between model variables and their domain meaning.

Every variable a formulation creates is registered under a
``(role, entity, period)`` key: role is the variable family (``"dres_p"``,
``"angle"``, ...), entity the asset, bus or line id, and period the
1-based delivery period (``None`` for non-temporal variables such as
profile selectors). The map is bijective over declared entries, which is
what lets reports and intraday ledgers read solutions back by meaning
rather than by raw column index.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from vppopt.milp import MilpModel

Key = tuple[str, str, "int | None"]


class VariableRegistry:
    def __init__(self) -> None:
        self._by_key: dict[Key, int] = {}
        self._by_id: dict[int, Key] = {}

    def new(self, model: MilpModel, role: str, entity: str, t: int | None,
            kind: str = "continuous", lb: float = 0.0, ub: float = math.inf) -> int:
        """Create a model variable and register it in one step."""
        name = f"{role}.{entity}" + (f".t{t}" if t is not None else "")
        if kind == "binary":
            var = model.add_binary(name)
        else:
            var = model.add_continuous(name, lb, ub)
        self.register(role, entity, t, var)
        return var

    def register(self, role: str, entity: str, t: int | None, var_id: int) -> None:
        key = (role, entity, t)
        if key in self._by_key:
            raise KeyError(f"variable key {key} already registered")
        if var_id in self._by_id:
            raise KeyError(f"variable id {var_id} already registered as {self._by_id[var_id]}")
        self._by_key[key] = var_id
        self._by_id[var_id] = key

    def id(self, role: str, entity: str, t: int | None = None) -> int:
        return self._by_key[(role, entity, t)]

    def has(self, role: str, entity: str, t: int | None = None) -> bool:
        return (role, entity, t) in self._by_key

    def key(self, var_id: int) -> Key:
        return self._by_id[var_id]

    def series(self, role: str, entity: str, periods: Iterable[int]) -> list[int]:
        return [self._by_key[(role, entity, t)] for t in periods]

    def values(self, x: np.ndarray, role: str, entity: str,
               periods: Iterable[int]) -> np.ndarray:
        """Read a per-period series out of a solution assignment."""
        return np.array([x[self._by_key[(role, entity, t)]] for t in periods], dtype=float)

    def __len__(self) -> int:
        return len(self._by_key)

    def keys(self) -> list[Key]:
        return list(self._by_key)
