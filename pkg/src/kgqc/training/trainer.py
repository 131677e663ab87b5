"""
Stochastic gradient ascent on the joint generalized-graph objective.

Each step takes one owner (vertex or edge with a non-empty generalized
graph), draws negatives, and moves every participating vector along the
gradient of its weighted log-likelihood. Vertex rows are renormalised to
unit length after every step.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import structlog
from tqdm import tqdm

from kgqc.exceptions import NegativeSamplingError, TrainingDivergedError
from kgqc.models import ObjectKind, TrainConfig
from kgqc.storage.embeddings import EmbeddingStore, normalize_rows
from kgqc.storage.graph import KnowledgeGraph, ObjectRef
from kgqc.training.objective import Context, compile_context, log_prob_and_grad
from kgqc.training.sampler import NegativeSampler

logger = structlog.get_logger()


class Trainer:
    """
    Trains an EmbeddingStore for one knowledge graph.

    Single-worker runs are deterministic for a given seed. With
    ``workers > 1`` each epoch is split into shards updated concurrently
    without locking, so results vary between runs.
    """

    def __init__(
        self,
        kg: KnowledgeGraph,
        config: TrainConfig,
        store: EmbeddingStore | None = None,
    ):
        self.kg = kg
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        if store is None:
            self.store = EmbeddingStore.random(kg, config.dim, self.rng)
        else:
            self.store = store.aligned_to(kg).copy()
        self.sampler = NegativeSampler(kg, self.rng, config.context_mode)
        self.losses: list[float] = []
        self._starved: set[ObjectRef] = set()
        self._owners = self._compile_owners()

    def _compile_owners(self) -> list[tuple[ObjectRef, Context, float]]:
        owners: list[tuple[ObjectRef, Context, float]] = []
        for kind, weight in (
            (ObjectKind.VERTEX, self.config.lambda_v),
            (ObjectKind.EDGE, self.config.lambda_e),
        ):
            if weight == 0.0:
                continue
            for i in self.sampler.trainable(kind):
                ref = ObjectRef(kind, i)
                glkg = self.kg.generalize(ref, self.config.context_mode)
                owners.append((ref, compile_context(self.kg, glkg), weight))
        logger.info(
            "Training owners compiled",
            owners=len(owners),
            vertices=self.kg.num_vertices,
            edges=self.kg.num_edges,
        )
        return owners

    @property
    def num_owners(self) -> int:
        return len(self._owners)

    def _negatives(self, ref: ObjectRef, sampler: NegativeSampler) -> list[int]:
        if ref in self._starved:
            return []
        try:
            return sampler.sample(ref, self.config.negatives)
        except NegativeSamplingError:
            if self.config.strict_negatives:
                raise
            self._starved.add(ref)
            logger.warning(
                "Owner trained without negatives",
                kind=ref.kind.value,
                owner=self.kg.label(ref),
            )
            return []

    def _step(
        self,
        epoch: int,
        ref: ObjectRef,
        ctx: Context,
        weight: float,
        sampler: NegativeSampler,
    ) -> float:
        negatives = self._negatives(ref, sampler)
        value, grad = log_prob_and_grad(self.store, ctx, negatives)
        if not np.isfinite(value):
            raise TrainingDivergedError(
                f"epoch {epoch}: non-finite objective at {ref.kind.value} '{self.kg.label(ref)}'"
            )
        grad.apply(self.store, self.config.learning_rate * weight)
        normalize_rows(self.store.vertex_vecs, grad.touched_vertices())
        return weight * value

    def _run_shard(self, epoch: int, shard: np.ndarray, sampler: NegativeSampler) -> float:
        objective = 0.0
        for index in shard:
            ref, ctx, weight = self._owners[index]
            objective += self._step(epoch, ref, ctx, weight, sampler)
        return objective

    def run_epoch(self, epoch: int) -> float:
        """One pass over all owners in shuffled order; returns the epoch loss."""
        order = self.rng.permutation(len(self._owners))
        if self.config.workers == 1:
            objective = self._run_shard(epoch, order, self.sampler)
        else:
            shards = np.array_split(order, self.config.workers)
            samplers = [
                self.sampler.with_rng(np.random.default_rng([self.config.seed, epoch, w]))
                for w in range(len(shards))
            ]
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                objective = sum(
                    pool.map(lambda args: self._run_shard(epoch, *args), zip(shards, samplers))
                )
        loss = -objective
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"epoch {epoch}: non-finite loss")
        self.losses.append(loss)
        return loss

    def run(self) -> EmbeddingStore:
        if not self._owners:
            logger.warning("Nothing to train; every owner has an empty generalized graph")
            return self.store

        epochs = tqdm(
            range(1, self.config.epochs + 1),
            desc="Training",
            unit="epoch",
            disable=not self.config.show_progress,
        )
        for epoch in epochs:
            loss = self.run_epoch(epoch)
            logger.debug("Epoch complete", epoch=epoch, loss=loss)

        logger.info(
            "Training complete",
            epochs=self.config.epochs,
            initial_loss=self.losses[0],
            final_loss=self.losses[-1],
            starved=len(self._starved),
        )
        return self.store


def train(
    kg: KnowledgeGraph,
    config: TrainConfig,
    store: EmbeddingStore | None = None,
) -> EmbeddingStore:
    """Train embeddings for ``kg``; see ``Trainer``."""
    return Trainer(kg, config, store).run()
