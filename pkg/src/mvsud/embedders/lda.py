"""Latent topic model fitted by collapsed Gibbs sampling.

Documents are sequences of vocabulary indices.  One sweep resamples every
token's topic from the usual collapsed conditional; the per-sweep uniform
variates are drawn from a seeded numpy Generator outside the compiled
kernel, so a fixed seed gives bit-identical models.
"""

from __future__ import annotations

import warnings

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..base import EmbeddingMatrix, check_random_seed


@njit(cache=True, nogil=True)
def _gibbs_sweep(z, doc_of, word_of, doc_topic, topic_word, topic_total,
                 alpha, beta, uniforms, probs):
    n_topics = doc_topic.shape[1]
    n_vocab = topic_word.shape[1]
    beta_total = beta * n_vocab
    for i in range(z.shape[0]):
        d = doc_of[i]
        w = word_of[i]
        t = z[i]
        doc_topic[d, t] -= 1
        topic_word[t, w] -= 1
        topic_total[t] -= 1
        acc = 0.0
        for k in range(n_topics):
            nw = topic_word[k, w]
            nt = topic_total[k]
            nd = doc_topic[d, k]
            if nw < 0:
                nw = 0
            if nt < 0:
                nt = 0
            if nd < 0:
                nd = 0
            acc += (nw + beta) / (nt + beta_total) * (nd + alpha)
            probs[k] = acc
        u = uniforms[i] * acc
        t_new = 0
        while probs[t_new] < u:
            t_new += 1
        z[i] = t_new
        doc_topic[d, t_new] += 1
        topic_word[t_new, w] += 1
        topic_total[t_new] += 1


class GibbsLda(BaseEstimator):
    """Collapsed-Gibbs LDA over token-index documents.

    alpha defaults to 50/n_topics when not given.  With workers > 1, each
    sweep partitions documents into shards sampled in threads against
    shared count arrays; counts are rebuilt exactly from the final
    assignments, so the fitted model stays consistent, but only
    workers=1 is bit-reproducible.
    """

    def __init__(self, n_topics: int = 10, alpha: float | None = None,
                 beta: float = 0.01, iterations: int = 200, seed: int = 0,
                 workers: int = 1):
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.iterations = iterations
        self.seed = seed
        self.workers = workers

    def fit(self, docs, y=None):
        if self.n_topics < 1:
            raise ValueError("n_topics must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        docs = [np.asarray(d, dtype=np.int64) for d in docs]
        if not docs:
            raise ValueError("empty corpus")
        for i, d in enumerate(docs):
            if d.size == 0:
                raise ValueError(f"document {i} is empty")
        n_docs = len(docs)
        n_vocab = int(max(int(d.max()) for d in docs)) + 1
        alpha = (50.0 / self.n_topics) if self.alpha is None else float(self.alpha)
        if alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")

        doc_of = np.concatenate([np.full(d.size, i, dtype=np.int64)
                                 for i, d in enumerate(docs)])
        word_of = np.concatenate(docs)
        n_tokens = word_of.size

        rng = check_random_seed(self.seed)
        z = rng.integers(0, self.n_topics, size=n_tokens).astype(np.int64)

        doc_topic = np.zeros((n_docs, self.n_topics), dtype=np.int64)
        topic_word = np.zeros((self.n_topics, n_vocab), dtype=np.int64)
        np.add.at(doc_topic, (doc_of, z), 1)
        np.add.at(topic_word, (z, word_of), 1)
        topic_total = topic_word.sum(axis=1)

        if self.workers > 1:
            self._sweeps_threaded(z, doc_of, word_of, doc_topic, topic_word,
                                  topic_total, alpha, rng, n_docs)
            # racing updates can drift the shared counts; rebuild from z
            doc_topic[:] = 0
            topic_word[:] = 0
            np.add.at(doc_topic, (doc_of, z), 1)
            np.add.at(topic_word, (z, word_of), 1)
            topic_total = topic_word.sum(axis=1)
        else:
            probs = np.empty(self.n_topics)
            for _ in range(self.iterations):
                uniforms = rng.random(n_tokens)
                _gibbs_sweep(z, doc_of, word_of, doc_topic, topic_word,
                             topic_total, alpha, self.beta, uniforms, probs)

        doc_len = doc_topic.sum(axis=1, keepdims=True)
        self.theta_ = (doc_topic + alpha) / (doc_len + self.n_topics * alpha)
        self.phi_ = (topic_word + self.beta) / (
            topic_total[:, None] + n_vocab * self.beta)
        self.topic_prior_ = topic_total / n_tokens
        self.alpha_ = alpha
        self.n_vocab_ = n_vocab
        return self

    def _sweeps_threaded(self, z, doc_of, word_of, doc_topic, topic_word,
                         topic_total, alpha, rng, n_docs):
        import threading

        shard_of_doc = np.arange(n_docs) % self.workers
        shard_of_token = shard_of_doc[doc_of]
        shard_idx = [np.flatnonzero(shard_of_token == s) for s in range(self.workers)]
        for _ in range(self.iterations):
            uniforms = rng.random(z.shape[0])
            threads = []
            for s in range(self.workers):
                idx = shard_idx[s]
                probs = np.empty(self.n_topics)
                args = (z[idx], doc_of[idx], word_of[idx], doc_topic,
                        topic_word, topic_total, alpha, self.beta,
                        uniforms[idx], probs)

                def run(idx=idx, args=args):
                    zs = args[0]
                    _gibbs_sweep(*args)
                    z[idx] = zs

                threads.append(threading.Thread(target=run))
            for t in threads:
                t.start()
            for t in threads:
                t.join()

    def infer(self, doc, iterations: int = 100, seed: int = 0) -> np.ndarray:
        """Fold-in topic distribution for one document, phi held fixed.

        Out-of-vocabulary indices are dropped; a document with nothing
        left gets the uniform distribution and a warning.
        """
        self._check_fitted()
        doc = np.asarray(doc, dtype=np.int64)
        doc = doc[(doc >= 0) & (doc < self.n_vocab_)]
        k = self.n_topics
        if doc.size == 0:
            warnings.warn("document has no in-vocabulary tokens; returning uniform")
            return np.full(k, 1.0 / k)
        rng = check_random_seed(seed)
        z = rng.integers(0, k, size=doc.size)
        counts = np.zeros(k)
        np.add.at(counts, z, 1)
        accum = np.zeros(k)
        burn_in = iterations // 2
        n_kept = 0
        for it in range(iterations):
            for i in range(doc.size):
                counts[z[i]] -= 1
                p = self.phi_[:, doc[i]] * (counts + self.alpha_)
                p /= p.sum()
                z[i] = rng.choice(k, p=p)
                counts[z[i]] += 1
            if it >= burn_in:
                accum += counts
                n_kept += 1
        mean_counts = accum / n_kept
        return (mean_counts + self.alpha_) / (doc.size + k * self.alpha_)

    def top_terms(self, topic: int, top_n: int = 10) -> np.ndarray:
        """Indices of the top_n highest-probability terms of a topic."""
        self._check_fitted()
        return np.argsort(-self.phi_[topic], kind="stable")[:top_n]

    def embedding(self, user_ids) -> EmbeddingMatrix:
        """Doc-topic rows as the embedding (one training doc per user)."""
        self._check_fitted()
        return EmbeddingMatrix(
            tuple(user_ids),
            self.theta_,
            {"learner": "lda",
             "hyperparameters": {"n_topics": self.n_topics, "alpha": self.alpha_,
                                 "beta": self.beta, "iterations": self.iterations},
             "seed": self.seed},
        )

    def _check_fitted(self):
        if not hasattr(self, "phi_"):
            raise NotFittedError("GibbsLda is not fitted")


def lda_fit(docs, n_topics, alpha=None, beta=0.01, iterations=200, seed=0) -> GibbsLda:
    return GibbsLda(n_topics=n_topics, alpha=alpha, beta=beta,
                    iterations=iterations, seed=seed).fit(docs)


def lda_infer(model: GibbsLda, doc, iterations: int = 100, seed: int = 0) -> np.ndarray:
    return model.infer(doc, iterations=iterations, seed=seed)
