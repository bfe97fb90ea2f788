"""Fidelity thresholds above which a graph state cannot come from bipartite sources.

ub2 is the threshold of the standard-form index argument; ub1 is the earlier
bound it is compared against.
"""

from __future__ import annotations

import typing
from dataclasses import dataclass

import numpy as np
import pandas as pd
import sympy

from ..utils.logger import logger
from .Multigraph import Multigraph, check_prime
from .StandardForm import StandardFormResult, standardize
from .Utilities import DomainError


def _check_beta(beta: int) -> int:
    if int(beta) != beta or beta < 1 or beta % 2 == 0:
        raise DomainError(f"Index beta must be an odd integer >= 1, got {beta}")
    return int(beta)


def ub2(d: int, beta: int) -> float:
    d = check_prime(d)
    beta = _check_beta(beta)
    root = 2.0 * np.sqrt(2.0 * beta * d)
    return (1.0 + root + (beta + 1) * d) / ((beta + 2) * d + root)


def ub1(d: int, beta: int) -> float:
    d = check_prime(d)
    beta = _check_beta(beta)
    gamma = np.sqrt(d) / (np.sqrt(d) + 1.0)
    # (√(β²+4γ) - β)/4 = γ/(√(β²+4γ) + β) avoids the cancellation at large β
    return 1.0 - (gamma / (np.sqrt(beta * beta + 4.0 * gamma) + beta)) ** 2


def detects(fidelity: float, d: int, beta: int) -> bool:
    """Fidelity strictly above ub2 certifies the state is not preparable from bipartite sources."""
    return bool(fidelity > ub2(d, beta))


@dataclass(frozen=True)
class BoundReport:
    d: int
    beta: int
    ub2: float
    ub1: float
    improvement: float
    """1 - ub2/ub1"""

    gap_ratio: float
    """(1 - ub2)/(1 - ub1)"""

    standard_form: typing.Optional[StandardFormResult] = None

    def to_dict(self) -> dict:
        desc = {
            "d": self.d,
            "beta": self.beta,
            "ub2": self.ub2,
            "ub1": self.ub1,
            "improvement": self.improvement,
            "gap_ratio": self.gap_ratio,
        }
        if self.standard_form is not None:
            desc["standard_form"] = self.standard_form.to_dict()
        return desc


def compare(d: int, beta: int) -> BoundReport:
    u2, u1 = ub2(d, beta), ub1(d, beta)
    return BoundReport(int(d), int(beta), u2, u1, 1.0 - u2 / u1, (1.0 - u2) / (1.0 - u1))


def bound_for_graph(graph: Multigraph, exhaustive: bool = False) -> BoundReport:
    form = standardize(graph, exhaustive=exhaustive)
    report = compare(graph.d, form.beta)
    logger.info(f"Graph with n={graph.n}, d={graph.d}: beta={form.beta}, ub2={report.ub2:.6f}")
    return BoundReport(**{**vars(report), "standard_form": form})


def default_primes(count: int = 25) -> typing.List[int]:
    return [int(p) for p in sympy.primerange(2, sympy.prime(count) + 1)]


def sweep(primes: typing.Sequence[int] = None, betas: typing.Sequence[int] = (1, 5)) -> pd.DataFrame:
    """Both bounds on a (d, beta) grid, one row per pair."""
    primes = default_primes() if primes is None else primes
    rows = [vars(compare(d, beta)) for beta in betas for d in primes]
    frame = pd.DataFrame(rows)
    return frame[["d", "beta", "ub1", "ub2", "improvement", "gap_ratio"]]
