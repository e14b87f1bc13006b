"""Corpus ingestion, frequency filtering, and sparse matrix construction.

Inputs are newline-delimited JSON for posts and likes plus a CSV of
per-user substance-use labels.  All tables are immutable after
construction and every matrix row order is tied to an explicit, sorted
user index so that downstream embeddings stay aligned.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

SUBSTANCES = ("tobacco", "alcohol", "drug")

MAX_TOKEN_LEN = 50

# Runs of Unicode alphanumerics; underscore is excluded on purpose so that
# snake_case mushes split into their parts.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class CorpusError(ValueError):
    """Malformed input data or a filter that leaves nothing behind."""


class EmptyCorpusError(CorpusError):
    """All users (or all items) were removed by filtering."""


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs.

    Tokens longer than MAX_TOKEN_LEN characters are dropped (they are
    almost always URLs or keyboard mashing).
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) <= MAX_TOKEN_LEN]


@dataclass(frozen=True)
class PostRecord:
    user: str
    post_id: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class PostTable:
    """Tokenized posts; `user_ids` is the sorted user index."""

    records: tuple[PostRecord, ...]

    @property
    def user_ids(self) -> tuple[str, ...]:
        return tuple(sorted({r.user for r in self.records}))

    def posts_by_user(self) -> dict[str, list[PostRecord]]:
        grouped: dict[str, list[PostRecord]] = defaultdict(list)
        for rec in self.records:
            grouped[rec.user].append(rec)
        return dict(grouped)

    def token_counts(self) -> Counter:
        counts: Counter = Counter()
        for rec in self.records:
            counts.update(rec.tokens)
        return counts

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class LikeTable:
    """Unique (user, like-entity) pairs; both indices sorted."""

    pairs: tuple[tuple[str, str], ...]

    @property
    def user_ids(self) -> tuple[str, ...]:
        return tuple(sorted({u for u, _ in self.pairs}))

    @property
    def entity_ids(self) -> tuple[str, ...]:
        return tuple(sorted({e for _, e in self.pairs}))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class SudLabels:
    """Per-user ordinal label in {1, 2, 3} for each substance (optional)."""

    by_user: dict[str, dict[str, int]]

    def users_with(self, substance: str) -> tuple[str, ...]:
        if substance not in SUBSTANCES:
            raise CorpusError(f"unknown substance {substance!r}")
        return tuple(sorted(u for u, labels in self.by_user.items() if substance in labels))

    def values_for(self, users, substance: str) -> np.ndarray:
        return np.array([self.by_user[u][substance] for u in users], dtype=np.int64)


@dataclass(frozen=True)
class Vocabulary:
    """Dense token -> index mapping plus per-token corpus counts."""

    index: dict[str, int]
    counts: dict[str, int]

    @property
    def tokens(self) -> tuple[str, ...]:
        ordered = sorted(self.index, key=self.index.__getitem__)
        return tuple(ordered)

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index


@dataclass(frozen=True)
class FilterConfig:
    min_words_per_user: int = 0
    min_word_count: int = 0
    min_likes_per_user: int = 0
    min_likes_per_le: int = 0
    fixed_point: bool = False

    def __post_init__(self):
        for name in ("min_words_per_user", "min_word_count",
                     "min_likes_per_user", "min_likes_per_le"):
            if getattr(self, name) < 0:
                raise CorpusError(f"{name} must be >= 0")


def ingest_posts(path) -> PostTable:
    """Read a posts.jsonl file: one {user_id, post_id, text} object per line."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            try:
                user, post_id, text = obj["user_id"], obj["post_id"], obj["text"]
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{path}: line {lineno}: missing field {exc}") from exc
            if not isinstance(user, str) or not user:
                raise CorpusError(f"{path}: line {lineno}: user_id must be a non-empty string")
            records.append(PostRecord(user, str(post_id), tuple(tokenize(str(text)))))
    return PostTable(tuple(records))


def ingest_likes(path) -> LikeTable:
    """Read a likes.jsonl file: one {user_id, like_id} object per line.

    Duplicate (user, like) pairs collapse to one.
    """
    pairs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            try:
                user, like = obj["user_id"], obj["like_id"]
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{path}: line {lineno}: missing field {exc}") from exc
            if not isinstance(user, str) or not user:
                raise CorpusError(f"{path}: line {lineno}: user_id must be a non-empty string")
            key = (user, str(like))
            if key not in seen:
                seen.add(key)
                pairs.append(key)
    return LikeTable(tuple(pairs))


def ingest_labels(path) -> SudLabels:
    """Read labels.csv with header user_id,tobacco,alcohol,drug.

    Empty cells mean "not assessed"; present cells must be 1, 2 or 3,
    and every row needs at least one substance filled in.
    """
    by_user: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["user_id", *SUBSTANCES]
        if reader.fieldnames != expected:
            raise CorpusError(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            user = row["user_id"]
            if not user:
                raise CorpusError(f"{path}: line {lineno}: empty user_id")
            labels = {}
            for substance in SUBSTANCES:
                cell = (row[substance] or "").strip()
                if not cell:
                    continue
                try:
                    value = int(cell)
                except ValueError:
                    raise CorpusError(f"{path}: line {lineno}: {substance} must be 1, 2, 3 or empty")
                if value not in (1, 2, 3):
                    raise CorpusError(f"{path}: line {lineno}: {substance} must be 1, 2, 3 or empty")
                labels[substance] = value
            if not labels:
                raise CorpusError(f"{path}: line {lineno}: no substance label present")
            by_user[user] = labels
    return SudLabels(by_user)


def filter_posts(table: PostTable, cfg: FilterConfig) -> tuple[PostTable, Vocabulary]:
    """Drop low-volume users, then low-frequency tokens.

    Users are dropped on their token totals in the incoming table.  Token
    counts for the frequency cut (and the counts stored in the returned
    Vocabulary) are computed after user removal, so removing a prolific
    user can take rare tokens down with it.  Single pass unless
    cfg.fixed_point is set, in which case the two cuts repeat until
    nothing changes.
    """
    records = table.records
    while True:
        totals: Counter = Counter()
        for rec in records:
            totals[rec.user] += len(rec.tokens)
        kept_users = {u for u, n in totals.items() if n >= cfg.min_words_per_user}
        records = tuple(r for r in records if r.user in kept_users)
        if not kept_users:
            raise EmptyCorpusError("post filtering removed every user")

        counts: Counter = Counter()
        for rec in records:
            counts.update(rec.tokens)
        kept_tokens = {t for t, n in counts.items() if n >= cfg.min_word_count}
        new_records = tuple(
            PostRecord(r.user, r.post_id, tuple(t for t in r.tokens if t in kept_tokens))
            for r in records
        )
        changed = new_records != records
        records = new_records
        if not cfg.fixed_point or not changed:
            break

    vocab_tokens = sorted({t for r in records for t in r.tokens})
    final_counts: Counter = Counter()
    for rec in records:
        final_counts.update(rec.tokens)
    vocab = Vocabulary(
        index={t: i for i, t in enumerate(vocab_tokens)},
        counts={t: final_counts[t] for t in vocab_tokens},
    )
    return PostTable(records), vocab


def filter_likes(table: LikeTable, cfg: FilterConfig) -> LikeTable:
    """Drop unpopular like entities, then low-activity users.

    The entity cut runs before the user cut, one pass each; with
    cfg.fixed_point the pair of cuts repeats until stable.
    """
    pairs = table.pairs
    while True:
        le_counts: Counter = Counter(e for _, e in pairs)
        kept_les = {e for e, n in le_counts.items() if n >= cfg.min_likes_per_le}
        pruned = tuple(p for p in pairs if p[1] in kept_les)

        user_counts: Counter = Counter(u for u, _ in pruned)
        kept_users = {u for u, n in user_counts.items() if n >= cfg.min_likes_per_user}
        new_pairs = tuple(p for p in pruned if p[0] in kept_users)
        if not new_pairs:
            raise EmptyCorpusError("like filtering removed every (user, entity) pair")
        changed = new_pairs != pairs
        pairs = new_pairs
        if not cfg.fixed_point or not changed:
            break
    return LikeTable(pairs)


def build_count_matrix(posts: PostTable, vocab: Vocabulary) -> sp.csr_matrix:
    """Users x vocabulary occurrence counts; rows follow posts.user_ids.

    Tokens missing from the vocabulary are skipped (they were filtered
    upstream).
    """
    users = posts.user_ids
    row_of = {u: i for i, u in enumerate(users)}
    rows, cols, vals = [], [], []
    cell: Counter = Counter()
    for rec in posts.records:
        r = row_of[rec.user]
        for tok in rec.tokens:
            j = vocab.index.get(tok)
            if j is not None:
                cell[(r, j)] += 1
    for (r, j), v in cell.items():
        rows.append(r)
        cols.append(j)
        vals.append(v)
    mat = sp.csr_matrix(
        (np.array(vals, dtype=np.int64), (rows, cols)),
        shape=(len(users), len(vocab)),
    )
    return mat


def build_like_matrix(likes: LikeTable) -> sp.csr_matrix:
    """Binary users x like-entities matrix; rows/cols follow the sorted indices."""
    users = likes.user_ids
    entities = likes.entity_ids
    row_of = {u: i for i, u in enumerate(users)}
    col_of = {e: i for i, e in enumerate(entities)}
    rows = [row_of[u] for u, _ in likes.pairs]
    cols = [col_of[e] for _, e in likes.pairs]
    mat = sp.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)),
        shape=(len(users), len(entities)),
    )
    mat.data[:] = 1  # duplicates were deduplicated at ingest, but stay safe
    return mat


def intersect(user_indices) -> tuple[tuple[str, ...], list[np.ndarray]]:
    """Common users of two or more indices, plus per-input row selectors.

    Returns the sorted shared users and, for each input, the integer
    positions that pull exactly those users (in the shared order) out of
    that input.
    """
    indices = [tuple(ix) for ix in user_indices]
    if len(indices) < 2:
        raise CorpusError("intersect needs at least two user indices")
    common = set(indices[0])
    for ix in indices[1:]:
        common &= set(ix)
    if not common:
        raise EmptyCorpusError("user indices have an empty intersection")
    shared = tuple(sorted(common))
    selectors = []
    for ix in indices:
        pos = {u: i for i, u in enumerate(ix)}
        selectors.append(np.array([pos[u] for u in shared], dtype=np.int64))
    return shared, selectors
