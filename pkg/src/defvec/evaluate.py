"""Benchmark evaluation: word similarity (cosine + Spearman), outlier
detection (compactness argmin accuracy) and concept categorization
(k-means++ clustering scored by v-measure).

Out-of-vocabulary items are skipped and surfaced through a coverage figure,
never zero-filled; zero-filling would silently corrupt rank statistics.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np


class EvalError(ValueError):
    pass


@dataclass
class SimilarityPair:
    w1: str
    w2: str
    human_score: float


@dataclass
class OutlierInstance:
    cluster: list
    outliers: list


@dataclass
class CategorizationDataset:
    items: list  # (word, gold_category) pairs
    k: int


@dataclass
class EvalReport:
    task: str
    metric: float
    coverage: float
    skipped: int
    seed: int | None = None
    degenerate: int = 0

    def to_kv(self) -> str:
        lines = [
            f"task={self.task}",
            f"metric={self.metric:.9g}",
            f"coverage={self.coverage:.9g}",
            f"skipped={self.skipped}",
        ]
        if self.seed is not None:
            lines.append(f"seed={self.seed}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        out = (
            f"task:     {self.task}\n"
            f"metric:   {self.metric:.6f}\n"
            f"coverage: {self.coverage:.4f}\n"
            f"skipped:  {self.skipped}\n"
        )
        if self.seed is not None:
            out += f"seed:     {self.seed}\n"
        return out


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|); a zero vector yields 0.0 (degenerate embedding)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise EvalError(f"dimension mismatch {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _average_ranks(xs) -> np.ndarray:
    """Fractional ranking: ties get the mean of the ranks they span (1-based)."""
    xs = np.asarray(xs, dtype=np.float64)
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs), dtype=np.float64)
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Pearson correlation of average-ranked data."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) != len(ys):
        raise EvalError(f"length mismatch {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise EvalError("undefined correlation: fewer than 2 points")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise EvalError("undefined correlation: constant input")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def eval_similarity(table, pairs) -> EvalReport:
    """Spearman between human scores and cosine similarities; OOV pairs skipped."""
    vectors = table.as_dict()
    human = []
    predicted = []
    skipped = 0
    for pair in pairs:
        if pair.w1 not in vectors or pair.w2 not in vectors:
            skipped += 1
            continue
        human.append(pair.human_score)
        predicted.append(cosine_similarity(vectors[pair.w1], vectors[pair.w2]))
    if len(human) < 2:
        raise EvalError(f"only {len(human)} resolvable pairs, need at least 2")
    coverage = len(human) / len(pairs)
    return EvalReport(
        task="similarity",
        metric=spearman(human, predicted),
        coverage=coverage,
        skipped=skipped,
    )


def outlier_score(words, table) -> list:
    """Compactness per word: mean cosine similarity to every other word in the
    set. The predicted outlier minimizes compactness (first occurrence wins
    ties via argmin)."""
    vectors = table.as_dict()
    missing = [w for w in words if w not in vectors]
    if missing:
        raise EvalError(f"unresolvable words: {missing}")
    if len(words) < 3:
        raise EvalError("outlier instance needs at least 3 words")
    vecs = [vectors[w] for w in words]
    scores = []
    for i in range(len(words)):
        sims = [cosine_similarity(vecs[i], vecs[j]) for j in range(len(words)) if j != i]
        scores.append(sum(sims) / len(sims))
    return scores


def eval_outliers(table, instances) -> EvalReport:
    """Accuracy over (cluster, outlier) combinations; a hit iff the true
    outlier has the minimum compactness."""
    vectors = table.as_dict()
    hits = 0
    attempted = 0
    skipped = 0
    degenerate = 0
    total = sum(len(inst.outliers) for inst in instances)
    for inst in instances:
        for outlier in inst.outliers:
            words = list(inst.cluster) + [outlier]
            if any(w not in vectors for w in words):
                skipped += 1
                continue
            scores = outlier_score(words, table)
            if len(set(scores)) == 1:
                degenerate += 1
            if int(np.argmin(scores)) == len(words) - 1:
                hits += 1
            attempted += 1
    if attempted == 0:
        raise EvalError("no resolvable outlier instances")
    return EvalReport(
        task="outlier",
        metric=100.0 * hits / attempted,
        coverage=attempted / total,
        skipped=skipped,
        degenerate=degenerate,
    )


def _kmeans_pp_init(vectors, k, rng):
    n = vectors.shape[0]
    centers = np.empty((k, vectors.shape[1]), dtype=np.float64)
    idx = int(rng.integers(n))
    centers[0] = vectors[idx]
    d2 = np.sum((vectors - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total == 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = vectors[idx]
        d2 = np.minimum(d2, np.sum((vectors - centers[c]) ** 2, axis=1))
    return centers


def kmeans(vectors, k, seed, restarts: int = 10, max_iter: int = 300):
    """k-means++ seeding + Lloyd iterations; keeps the lowest-WCSS run out of
    `restarts` independent starts. Deterministic given the seed."""
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if k < 1:
        raise EvalError(f"k must be >= 1, got {k}")
    if k > n:
        raise EvalError(f"k={k} exceeds number of points {n}")
    rng = np.random.default_rng(seed)
    best_labels = None
    best_wcss = math.inf
    for _ in range(restarts):
        centers = _kmeans_pp_init(vectors, k, rng)
        labels = None
        for _ in range(max_iter):
            d2 = ((vectors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            new_labels = d2.argmin(axis=1)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for c in range(k):
                members = vectors[labels == c]
                if len(members) == 0:
                    # Re-seed an empty cluster on the point farthest from its center.
                    worst = int(d2[np.arange(n), labels].argmax())
                    centers[c] = vectors[worst]
                else:
                    centers[c] = members.mean(axis=0)
        d2 = ((vectors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        wcss = float(d2[np.arange(n), labels].sum())
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels.copy()
    return best_labels


def _entropy(counts) -> float:
    total = sum(counts)
    ent = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            ent -= p * math.log(p)
    return ent


def v_measure(gold, predicted) -> float:
    """Harmonic mean of homogeneity and completeness; entropies in nats from
    empirical joint counts, invariant under relabeling of either side."""
    if len(gold) != len(predicted):
        raise EvalError(f"length mismatch {len(gold)} vs {len(predicted)}")
    n = len(gold)
    if n == 0:
        raise EvalError("empty labeling")
    joint = Counter(zip(gold, predicted))
    gold_counts = Counter(gold)
    pred_counts = Counter(predicted)
    h_gold = _entropy(gold_counts.values())
    h_pred = _entropy(pred_counts.values())
    # H(gold | pred) = sum over predicted clusters of weighted within-cluster entropy.
    h_gold_given_pred = 0.0
    h_pred_given_gold = 0.0
    for (g, p), c in joint.items():
        h_gold_given_pred -= (c / n) * math.log(c / pred_counts[p])
        h_pred_given_gold -= (c / n) * math.log(c / gold_counts[g])
    homogeneity = 1.0 if h_gold == 0.0 else 1.0 - h_gold_given_pred / h_gold
    completeness = 1.0 if h_pred == 0.0 else 1.0 - h_pred_given_gold / h_pred
    if homogeneity + completeness == 0.0:
        return 0.0
    return 2.0 * homogeneity * completeness / (homogeneity + completeness)


def eval_categorization(table, ds: CategorizationDataset, seed,
                        restarts: int = 10) -> EvalReport:
    """Cluster resolvable words with k = gold category count; report v-measure."""
    vectors = table.as_dict()
    resolved = [(w, cat) for w, cat in ds.items if w in vectors]
    skipped = len(ds.items) - len(resolved)
    if len(resolved) < ds.k:
        raise EvalError(
            f"only {len(resolved)} resolvable words for k={ds.k} categories"
        )
    data = np.stack([vectors[w] for w, _ in resolved]).astype(np.float64)
    gold = [cat for _, cat in resolved]
    degenerate = 1 if len({tuple(row) for row in data}) < ds.k else 0
    predicted = kmeans(data, ds.k, seed=seed, restarts=restarts)
    return EvalReport(
        task="categorize",
        metric=v_measure(gold, list(predicted)),
        coverage=len(resolved) / len(ds.items),
        skipped=skipped,
        seed=seed,
        degenerate=degenerate,
    )


# --- benchmark file parsers -------------------------------------------------

def load_similarity_pairs(path) -> list:
    """``word1<TAB>word2<TAB>score`` per line; ``#`` comments."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise EvalError(f"{path}: expected 3 tab-separated fields at line {lineno}")
            try:
                score = float(parts[2])
            except ValueError:
                raise EvalError(f"{path}: bad score at line {lineno}") from None
            pairs.append(SimilarityPair(parts[0].lower(), parts[1].lower(), score))
    return pairs


def load_outlier_instances(path) -> list:
    """Blank-line-separated blocks of ``C<TAB>word`` / ``O<TAB>word`` lines."""
    instances = []
    cluster: list = []
    outliers: list = []

    def flush(lineno):
        if not cluster and not outliers:
            return
        if len(cluster) < 2 or not outliers:
            raise EvalError(
                f"{path}: block before line {lineno} needs >= 2 cluster words "
                f"and >= 1 outlier"
            )
        if set(cluster) & set(outliers):
            raise EvalError(f"{path}: cluster/outlier overlap before line {lineno}")
        instances.append(OutlierInstance(cluster=list(cluster), outliers=list(outliers)))
        cluster.clear()
        outliers.clear()

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                flush(lineno)
                continue
            if line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[0] not in ("C", "O"):
                raise EvalError(f"{path}: malformed line {lineno}")
            if parts[0] == "C":
                cluster.append(parts[1].lower())
            else:
                outliers.append(parts[1].lower())
        flush(lineno + 1)
    return instances


def load_categorization(path) -> CategorizationDataset:
    """``word<TAB>category`` per line; k is the number of distinct categories."""
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise EvalError(f"{path}: expected 2 tab-separated fields at line {lineno}")
            items.append((parts[0].lower(), parts[1]))
    k = len({cat for _, cat in items})
    if k < 2:
        raise EvalError(f"{path}: need at least 2 categories, found {k}")
    return CategorizationDataset(items=items, k=k)
