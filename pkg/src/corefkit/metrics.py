"""Coreference evaluation metrics over gold-mention partitions.

Implements the four standard partition metrics (MUC, B-cubed, entity
CEAF, BLANC) plus the usual aggregates: CoNLL F1 (mean of the first
three F1s) and AVG-F (mean of all four).  Key and response must cover
the same mention universe; singletons are first-class.

Conventions for degenerate inputs, stated once here:

* any 0/0 ratio is 0 (e.g. MUC on all-singleton keys);
* a BLANC link class empty in both key and response scores (1, 1, 1).
"""

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .partition import Partition, check_universes


class PRF(NamedTuple):
    recall: float
    precision: float
    f1: float


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _f1(recall: float, precision: float) -> float:
    if recall + precision == 0:
        return 0.0
    return 2 * recall * precision / (recall + precision)


def _prf(r_num, r_den, p_num, p_den) -> PRF:
    r, p = _ratio(r_num, r_den), _ratio(p_num, p_den)
    return PRF(r, p, _f1(r, p))


def muc(key: Partition, response: Partition) -> PRF:
    """Link-based metric of Vilain et al. (1995).

    Recall counts, per key cluster, the links recovered: cluster size
    minus the number of response clusters it intersects.
    """
    check_universes(key, response)

    def halves(a: Partition, b: Partition) -> tuple[int, int]:
        b_of = b.cluster_of()
        num = den = 0
        for cluster in a.clusters:
            parts = {b_of[m] for m in cluster}
            num += len(cluster) - len(parts)
            den += len(cluster) - 1
        return num, den

    return _prf(*halves(key, response), *halves(response, key))


def b3(key: Partition, response: Partition) -> PRF:
    """Mention-based B-cubed metric (Bagga and Baldwin, 1998)."""
    check_universes(key, response)
    key_of = key.cluster_of()
    resp_of = response.cluster_of()

    def side(denominator_of) -> float:
        total = 0.0
        for m in key_of:
            overlap = len(key_of[m] & resp_of[m])
            total += overlap / len(denominator_of[m])
        return total

    n = len(key_of)
    return _prf(side(key_of), n, side(resp_of), n)


def _phi4(a: frozenset, b: frozenset) -> float:
    return 2.0 * len(a & b) / (len(a) + len(b))


def ceaf_e(key: Partition, response: Partition) -> PRF:
    """Entity-based CEAF (Luo, 2005, phi-4) via optimal cluster alignment."""
    check_universes(key, response)
    if not key.clusters or not response.clusters:
        return _prf(0.0, len(key.clusters), 0.0, len(response.clusters))
    sim = np.array([[_phi4(k, r) for r in response.clusters]
                    for k in key.clusters])
    rows, cols = linear_sum_assignment(sim, maximize=True)
    total = float(sim[rows, cols].sum())
    return _prf(total, len(key.clusters), total, len(response.clusters))


def _links(partition: Partition) -> frozenset[tuple[str, str]]:
    return frozenset(
        pair for cluster in partition.clusters
        for pair in itertools.combinations(sorted(cluster), 2))


def blanc(key: Partition, response: Partition) -> PRF:
    """Rand-style BLANC: mean of the coreference-link and
    non-coreference-link R/P/F.

    A link class empty on both sides contributes (1, 1, 1); empty on one
    side only, its ratios fall back to 0.
    """
    check_universes(key, response)
    universe = sorted(key.universe)
    all_pairs = frozenset(itertools.combinations(universe, 2))
    key_coref = _links(key)
    resp_coref = _links(response)

    def class_prf(key_links, resp_links) -> PRF:
        if not key_links and not resp_links:
            return PRF(1.0, 1.0, 1.0)
        hits = len(key_links & resp_links)
        return _prf(hits, len(key_links), hits, len(resp_links))

    c = class_prf(key_coref, resp_coref)
    n = class_prf(all_pairs - key_coref, all_pairs - resp_coref)
    return PRF((c.recall + n.recall) / 2, (c.precision + n.precision) / 2,
               (c.f1 + n.f1) / 2)


@dataclass(frozen=True)
class MetricReport:
    muc: PRF
    b3: PRF
    ceaf_e: PRF
    blanc: PRF
    conll_f1: float
    avg_f: float

    def as_dict(self) -> dict:
        out = {}
        for name in ("muc", "b3", "ceaf_e", "blanc"):
            prf: PRF = getattr(self, name)
            out[name] = {"recall": prf.recall, "precision": prf.precision,
                         "f1": prf.f1}
        out["conll_f1"] = self.conll_f1
        out["avg_f"] = self.avg_f
        return out

    def table(self) -> str:
        lines = [f"{'metric':8s} {'R':>8s} {'P':>8s} {'F1':>8s}"]
        for name in ("muc", "b3", "ceaf_e", "blanc"):
            prf: PRF = getattr(self, name)
            lines.append(f"{name:8s} {prf.recall:8.4f} {prf.precision:8.4f} "
                         f"{prf.f1:8.4f}")
        lines.append(f"{'conll_f1':8s} {'':8s} {'':8s} {self.conll_f1:8.4f}")
        lines.append(f"{'avg_f':8s} {'':8s} {'':8s} {self.avg_f:8.4f}")
        return "\n".join(lines)


def report(key: Partition, response: Partition) -> MetricReport:
    """All four metrics plus CoNLL F1 and AVG-F."""
    m, b, c, bl = (muc(key, response), b3(key, response),
                   ceaf_e(key, response), blanc(key, response))
    return MetricReport(
        muc=m, b3=b, ceaf_e=c, blanc=bl,
        conll_f1=(m.f1 + b.f1 + c.f1) / 3,
        avg_f=(m.f1 + b.f1 + c.f1 + bl.f1) / 4)


OBJECTIVES = ("conll_f1", "avg_f", "muc", "b3", "ceaf_e", "blanc")


def objective_value(rep: MetricReport, objective: str) -> float:
    """Look up a tuning objective: an aggregate or a single metric's F1."""
    if objective in ("conll_f1", "avg_f"):
        return getattr(rep, objective)
    if objective in ("muc", "b3", "ceaf_e", "blanc"):
        return getattr(rep, objective).f1
    raise ValueError(f"unknown objective {objective!r}; "
                     f"expected one of {OBJECTIVES}")
