"""
Link prediction: rank every vertex as the missing head or tail of a test
triple by translation cost, and report MeanRank, Hits@10 and MRR.
"""

from collections.abc import Iterable

import numpy as np
import structlog

from kgqc.exceptions import DatasetError, UnknownObjectError
from kgqc.models import LinkPredictionReport, ObjectKind
from kgqc.storage.embeddings import EmbeddingStore

logger = structlog.get_logger()

HITS_AT = 10


def _rank(costs: np.ndarray, true_index: int, excluded: Iterable[int] = ()) -> int:
    """1 + number of candidates strictly cheaper than the true one."""
    better = costs < costs[true_index]
    for index in excluded:
        if index != true_index:
            better[index] = False
    return 1 + int(better.sum())


def evaluate_link_prediction(
    store: EmbeddingStore,
    test_triples: list[tuple[str, str, str]],
    filtered: bool = False,
    known: Iterable[tuple[str, str, str]] = (),
) -> LinkPredictionReport:
    """
    Raw setting by default. With ``filtered``, other true triples (from
    ``known`` and the test set) do not count as better-ranked candidates.
    """
    V, E = store.vertex_vecs, store.edge_vecs
    resolved: list[tuple[int, int, int]] = []
    skipped = 0
    for h, e, t in test_triples:
        try:
            resolved.append((
                store.ref(ObjectKind.VERTEX, h).id,
                store.ref(ObjectKind.EDGE, e).id,
                store.ref(ObjectKind.VERTEX, t).id,
            ))
        except UnknownObjectError:
            skipped += 1
    if skipped:
        logger.warning("Test triples skipped", skipped=skipped, reason="unknown label")
    if not resolved:
        raise DatasetError("no test triple could be resolved against the embeddings")

    tails_of: dict[tuple[int, int], set[int]] = {}
    heads_of: dict[tuple[int, int], set[int]] = {}
    if filtered:
        truth = set(resolved)
        for h, e, t in known:
            try:
                truth.add((
                    store.ref(ObjectKind.VERTEX, h).id,
                    store.ref(ObjectKind.EDGE, e).id,
                    store.ref(ObjectKind.VERTEX, t).id,
                ))
            except UnknownObjectError:
                continue
        for h, e, t in truth:
            tails_of.setdefault((h, e), set()).add(t)
            heads_of.setdefault((e, t), set()).add(h)

    ranks: list[int] = []
    for h, e, t in resolved:
        tail_costs = np.sum((V[h] + E[e] - V) ** 2, axis=1)
        ranks.append(_rank(tail_costs, t, tails_of.get((h, e), ())))
        head_costs = np.sum((V + E[e] - V[t]) ** 2, axis=1)
        ranks.append(_rank(head_costs, h, heads_of.get((e, t), ())))

    arr = np.array(ranks, dtype=np.float64)
    report = LinkPredictionReport(
        mean_rank=float(arr.mean()),
        hits_at_10=float(np.mean(arr <= HITS_AT)),
        mrr=float(np.mean(1.0 / arr)),
        evaluated=len(ranks),
        skipped=skipped,
        filtered=filtered,
    )
    logger.info(
        "Link prediction complete",
        mean_rank=round(report.mean_rank, 2),
        hits_at_10=round(report.hits_at_10, 4),
        evaluated=report.evaluated,
    )
    return report


def format_lp_report(report: LinkPredictionReport) -> str:
    setting = "filtered" if report.filtered else "raw"
    return (
        f"setting\t{setting}\n"
        f"mean_rank\t{report.mean_rank:.2f}\n"
        f"hits@10\t{report.hits_at_10:.4f}\n"
        f"mrr\t{report.mrr:.4f}\n"
        f"evaluated\t{report.evaluated}\n"
        f"skipped\t{report.skipped}\n"
    )
