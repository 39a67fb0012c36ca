"""Blog dump ingest, the comment graph, TF-IDF vectors, and m3 influence.

Comments induce the interaction graph (commenter -> post author). Document
vectors use raw term frequency times ln(N/df); a term present in every
document weighs zero and is dropped, so no smoothing is needed. The m3
measure (in-degree squared over out-degree) flags authorities: bloggers
drawing many comments while writing few.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graph import EntityId, IngestReport, Interaction, Kind


@dataclass(frozen=True)
class Post:
    post_id: str
    author: EntityId
    timestamp: int
    title: str = ""
    body: str = ""
    tags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Comment:
    comment_id: str
    post_id: str
    author: EntityId
    timestamp: int
    body: str = ""


def _split_tags(raw: str) -> frozenset[str]:
    return frozenset(t.strip() for t in re.split(r"[;|]", raw) if t.strip())


def parse_blog_dump(
    posts_path: str, comments_path: str
) -> tuple[list[Post], list[Comment], IngestReport]:
    """Load post and comment dumps (CSV or JSON-lines, by extension).

    Posts: ``post_id,author,timestamp,title,body,tags``; comments:
    ``comment_id,post_id,author,timestamp,body``. Malformed rows are
    skipped with diagnostics; comments referencing unknown posts load but
    are counted as dangling (the graph derivation ignores them).
    """
    report = IngestReport()
    posts: list[Post] = []
    seen_posts: set[str] = set()
    for lineno, row in _rows(posts_path):
        try:
            tags = row.get("tags") or ""
            post = Post(
                post_id=str(row["post_id"]).strip(),
                author=str(row["author"]).strip(),
                timestamp=int(row["timestamp"]),
                title=str(row.get("title") or ""),
                body=str(row.get("body") or ""),
                tags=_split_tags(tags) if isinstance(tags, str) else frozenset(tags),
            )
            if not post.post_id or not post.author:
                raise ValueError("post_id and author are required")
            if post.post_id in seen_posts:
                raise ValueError(f"duplicate post_id {post.post_id!r}")
        except (KeyError, ValueError) as exc:
            report.rejected += 1
            report.problems.append(f"{posts_path}:{lineno}: {exc}")
            continue
        seen_posts.add(post.post_id)
        posts.append(post)
        report.accepted += 1

    comments: list[Comment] = []
    dangling = 0
    for lineno, row in _rows(comments_path):
        try:
            comment = Comment(
                comment_id=str(row["comment_id"]).strip(),
                post_id=str(row["post_id"]).strip(),
                author=str(row["author"]).strip(),
                timestamp=int(row["timestamp"]),
                body=str(row.get("body") or ""),
            )
            if not comment.comment_id or not comment.author:
                raise ValueError("comment_id and author are required")
        except (KeyError, ValueError) as exc:
            report.rejected += 1
            report.problems.append(f"{comments_path}:{lineno}: {exc}")
            continue
        if comment.post_id not in seen_posts:
            dangling += 1
            report.problems.append(
                f"{comments_path}:{lineno}: dangling post_id {comment.post_id!r}"
            )
        comments.append(comment)
        report.accepted += 1
    report.problems.append(f"dangling comments: {dangling}")
    return posts, comments, report


def _rows(path: str):
    if path.endswith((".jsonl", ".json")):
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if line:
                    yield lineno, json.loads(line)
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.DictReader(fh), 2):
                yield lineno, row


def derive_interactions(
    posts: Sequence[Post], comments: Sequence[Comment]
) -> list[Interaction]:
    """Comment graph: one interaction commenter -> post author per comment.

    Dangling comments are skipped. Self-comments are emitted; the snapshot
    layer drops them from edges later.
    """
    authors = {p.post_id: p.author for p in posts}
    out = []
    for c in comments:
        author = authors.get(c.post_id)
        if author is None:
            continue
        out.append(
            Interaction(
                src=c.author,
                dst=author,
                timestamp=c.timestamp,
                kind=Kind.COMMENT,
                duration=0.0,
                meta={"post_id": c.post_id},
            )
        )
    return out


def m3(degree_in: float, degree_out: float) -> float:
    """Influence measure: in-degree squared over out-degree.

    Nodes with no outgoing links keep a finite score via the max(m2, 1)
    guard, so pure authorities land at m1 squared.
    """
    if degree_in < 0 or degree_out < 0:
        raise ValueError("degrees must be non-negative")
    return degree_in**2 / max(degree_out, 1)


# --- TF-IDF --------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def tokenize(text: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop short and stopped tokens."""
    return [
        tok
        for tok in _TOKEN_RE.split(text.lower())
        if len(tok) >= 2 and tok not in stopwords
    ]


@dataclass
class DocVector:
    doc_id: str
    weights: dict[str, float] = field(default_factory=dict)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))


@dataclass
class TfidfIndex:
    doc_ids: list[str]
    vectors: dict[str, DocVector]
    doc_freq: dict[str, int]
    n_docs: int


def tfidf_index(
    documents: Sequence[tuple[str, str]],
    stopwords: Iterable[str] = (),
) -> TfidfIndex:
    """Build TF-IDF vectors: weight(t, d) = tf(t, d) * ln(N / df(t)).

    Terms appearing in every document weigh zero and are not stored.
    Raises on an empty document sequence or when no document yields a
    single token.
    """
    if not documents:
        raise ValueError("tfidf needs at least one document")
    stop = frozenset(stopwords)
    term_counts: list[tuple[str, dict[str, int]]] = []
    doc_freq: dict[str, int] = {}
    doc_ids: list[str] = []
    any_tokens = False
    for doc_id, text in documents:
        counts: dict[str, int] = {}
        for tok in tokenize(text, stop):
            counts[tok] = counts.get(tok, 0) + 1
        if counts:
            any_tokens = True
        for term in counts:
            doc_freq[term] = doc_freq.get(term, 0) + 1
        term_counts.append((doc_id, counts))
        doc_ids.append(doc_id)
    if len(set(doc_ids)) != len(doc_ids):
        raise ValueError("duplicate doc ids")
    if not any_tokens:
        raise ValueError("corpus has no tokens")
    n = len(documents)
    vectors: dict[str, DocVector] = {}
    for doc_id, counts in term_counts:
        weights = {}
        for term, tf in counts.items():
            df = doc_freq[term]
            if df == n:
                continue
            weights[term] = tf * math.log(n / df)
        vectors[doc_id] = DocVector(doc_id, weights)
    return TfidfIndex(doc_ids=doc_ids, vectors=vectors, doc_freq=doc_freq, n_docs=n)


def cosine_similarity(a: DocVector, b: DocVector) -> float:
    """Dot product over norms; zero vectors compare as 0."""
    if len(b.weights) < len(a.weights):
        a, b = b, a
    dot = sum(w * b.weights.get(t, 0.0) for t, w in a.weights.items())
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def similar_documents(
    index: TfidfIndex, query_doc_id: str, k: int
) -> list[tuple[str, float]]:
    """Top-k most cosine-similar documents to the query, query excluded.

    Ties break by doc id.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query = index.vectors.get(query_doc_id)
    if query is None:
        raise KeyError(f"unknown document {query_doc_id!r}")
    scored = [
        (doc_id, cosine_similarity(query, vec))
        for doc_id, vec in index.vectors.items()
        if doc_id != query_doc_id
    ]
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return scored[:k]


def aggregate_author_documents(
    posts: Sequence[Post], comments: Sequence[Comment]
) -> dict[EntityId, str]:
    """One concatenated document per author (posts, titles, and comments)."""
    per_author: dict[EntityId, list[str]] = {}
    for post in posts:
        per_author.setdefault(post.author, []).extend([post.title, post.body])
        per_author[post.author].extend(sorted(post.tags))
    for comment in comments:
        per_author.setdefault(comment.author, []).append(comment.body)
    return {author: " ".join(parts) for author, parts in sorted(per_author.items())}
