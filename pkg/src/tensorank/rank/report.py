"""All rank bounds for one model, with their witnesses, in one record."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..loglinear import LogLinearModel, tensor_from_loglinear
from ..tensors import Parafac
from .bounds import (
    CoverBound,
    OrderingBound,
    TightBound,
    theorem1_bound,
    theorem2_bound,
    theorem2_tight_bound,
    tucker_rank_bound,
)
from .partition import build_partition, merge_partition, parafac_from_partition


@dataclass(frozen=True)
class RankBoundReport:
    ordering: OrderingBound
    product: CoverBound
    tight: TightBound
    tucker: CoverBound

    def rows(self) -> list[tuple[str, int, str]]:
        """``(bound_name, value, witness)`` rows, indices 1-based for display."""
        return [
            ("thm1", self.ordering.value, "sigma=" + ",".join(str(v + 1) for v in self.ordering.order)),
            ("eq11", self.product.value, "H=" + format_H(self.product.H)),
            ("eq13", self.tight.value, f"H={format_H(self.tight.H)} l={self.tight.l + 1}"),
            ("tucker", self.tucker.value, "H=" + format_H(self.tucker.H)),
        ]


def format_H(H) -> str:
    return "|".join("{" + ",".join(str(c + 1) for c in sorted(h)) + "}" for h in H)


def rank_bound_report(model: LogLinearModel, ignore_main_effects: bool = False, **kw) -> RankBoundReport:
    return RankBoundReport(
        theorem1_bound(model, ignore_main_effects=ignore_main_effects, **kw),
        theorem2_bound(model, ignore_main_effects=ignore_main_effects),
        theorem2_tight_bound(model, ignore_main_effects=ignore_main_effects),
        tucker_rank_bound(model, ignore_main_effects=ignore_main_effects),
    )


def witness_expansion(model: LogLinearModel, tight: TightBound | None = None, pi: np.ndarray | None = None) -> Parafac:
    """Exact PARAFAC of the model's tensor from the merged partition of its tight bound."""
    tight = tight or theorem2_tight_bound(model)
    pi = tensor_from_loglinear(model) if pi is None else pi
    part = build_partition(tight.H, model.scheme)
    if tight.V_star:
        free = set(range(model.p)) - set(tight.V_star)
        part = merge_partition(part, tight.l, free)
    return parafac_from_partition(pi, part)
