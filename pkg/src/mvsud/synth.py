"""Synthetic corpora with planted class structure.

Each user gets a latent class; the class parameterizes both the word
distribution of their posts and the preference distribution of their
likes, blended with a shared background according to a signal strength
in [0, 1].  Labels are the class id, so pipelines can be checked against
a known ground truth: zero signal must score at chance, full signal with
disjoint vocabularies must be trivially separable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import LikeTable, PostRecord, PostTable, SudLabels, SUBSTANCES, CorpusError


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters.

    word_probs and like_probs are (classes x items) row-stochastic
    matrices.  signal_strength blends each class's distribution with the
    across-class average: 0 makes every user draw from the same marginal,
    1 uses the pure class distribution.
    """

    n_users: int
    word_probs: np.ndarray
    like_probs: np.ndarray
    signal_strength: float
    posts_per_user: int = 10
    words_per_post: int = 10
    likes_per_user: int = 20
    n_classes: int = 3

    def __post_init__(self):
        if not 1 <= self.n_classes <= 3:
            raise CorpusError("n_classes must be 1..3 (labels are ordinal in {1,2,3})")
        if self.n_users < self.n_classes:
            raise CorpusError("need at least one user per class")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise CorpusError("signal_strength must lie in [0, 1]")
        for name in ("posts_per_user", "words_per_post", "likes_per_user"):
            if getattr(self, name) < 1:
                raise CorpusError(f"{name} must be >= 1")
        for name, probs in (("word_probs", self.word_probs), ("like_probs", self.like_probs)):
            arr = np.asarray(probs, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[0] != self.n_classes:
                raise CorpusError(f"{name} must be (n_classes x items)")
            if np.any(arr < 0) or not np.allclose(arr.sum(axis=1), 1.0, atol=1e-9):
                raise CorpusError(f"{name} rows must be probability vectors")
        if self.like_probs.shape[1] < self.likes_per_user:
            raise CorpusError("likes_per_user exceeds the number of like entities")


def block_spec(
    n_users: int,
    signal_strength: float,
    n_classes: int = 3,
    words_per_class: int = 40,
    les_per_class: int = 40,
    posts_per_user: int = 10,
    words_per_post: int = 10,
    likes_per_user: int = 20,
) -> SynthSpec:
    """Spec with disjoint per-class word and like-entity blocks.

    With signal 1 the classes use disjoint vocabularies; lower signal
    mixes in the shared background, overlapping the blocks.
    """
    word_probs = _block_probs(n_classes, words_per_class)
    like_probs = _block_probs(n_classes, les_per_class)
    return SynthSpec(
        n_users=n_users,
        word_probs=word_probs,
        like_probs=like_probs,
        signal_strength=signal_strength,
        posts_per_user=posts_per_user,
        words_per_post=words_per_post,
        likes_per_user=likes_per_user,
        n_classes=n_classes,
    )


def _block_probs(n_classes: int, per_class: int) -> np.ndarray:
    total = n_classes * per_class
    probs = np.zeros((n_classes, total))
    for c in range(n_classes):
        probs[c, c * per_class:(c + 1) * per_class] = 1.0 / per_class
    return probs


def synth_generate(spec: SynthSpec, seed: int) -> tuple[PostTable, LikeTable, SudLabels]:
    """Deterministically generate aligned posts, likes and labels.

    Classes are assigned in near-equal proportions and shuffled; every
    substance column carries the same ordinal class label (class c maps
    to label c+1, matching the 3-way grouping when n_classes is 3).
    """
    rng = np.random.default_rng(seed)
    n_words = spec.word_probs.shape[1]
    n_les = spec.like_probs.shape[1]
    word_names = [f"w{j:05d}" for j in range(n_words)]
    le_names = [f"le{j:05d}" for j in range(n_les)]
    user_names = [f"u{j:05d}" for j in range(spec.n_users)]

    classes = np.arange(spec.n_users) % spec.n_classes
    rng.shuffle(classes)

    s = spec.signal_strength
    word_bg = spec.word_probs.mean(axis=0)
    like_bg = spec.like_probs.mean(axis=0)
    word_mix = s * spec.word_probs + (1.0 - s) * word_bg
    like_mix = s * spec.like_probs + (1.0 - s) * like_bg
    # guard against drift from the blend arithmetic
    word_mix /= word_mix.sum(axis=1, keepdims=True)
    like_mix /= like_mix.sum(axis=1, keepdims=True)

    records = []
    pairs = []
    by_user: dict[str, dict[str, int]] = {}
    for i, user in enumerate(user_names):
        c = int(classes[i])
        wp = word_mix[c]
        draws = rng.choice(n_words, size=spec.posts_per_user * spec.words_per_post, p=wp)
        for p in range(spec.posts_per_user):
            tokens = tuple(
                word_names[j]
                for j in draws[p * spec.words_per_post:(p + 1) * spec.words_per_post]
            )
            records.append(PostRecord(user, f"{user}-p{p}", tokens))
        liked = rng.choice(n_les, size=spec.likes_per_user, replace=False, p=like_mix[c])
        for j in sorted(liked):
            pairs.append((user, le_names[int(j)]))
        by_user[user] = {substance: c + 1 for substance in SUBSTANCES}

    return PostTable(tuple(records)), LikeTable(tuple(pairs)), SudLabels(by_user)
