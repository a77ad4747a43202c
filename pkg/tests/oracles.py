"""Independent reference implementations used to compute expected test
values. Everything here is deliberately naive (literal window enumeration,
scalar loops, textbook formulas) and shares no code with the package.
"""

import math
from itertools import combinations


def brute_force_window_counts(documents, word_to_id, window_size):
    """Enumerate every window literally; boolean presence per window.

    documents: iterable of token lists (strings). Returns
    (total_windows, occur dict, cooccur dict keyed by (min_id, max_id)).
    """
    total = 0
    occur = {}
    cooccur = {}
    for doc in documents:
        n = len(doc)
        if n >= window_size:
            starts = range(n - window_size + 1)
        else:
            starts = [0]
        for t in starts:
            window = doc[t:t + window_size] if n >= window_size else doc
            present = sorted({word_to_id[w] for w in window if w in word_to_id})
            total += 1
            for a in present:
                occur[a] = occur.get(a, 0) + 1
            for a, b in combinations(present, 2):
                cooccur[(a, b)] = cooccur.get((a, b), 0) + 1
    return total, occur, cooccur


def npmi_direct(total_windows, occ_a, occ_b, co_ab, epsilon):
    p_ab = co_ab / total_windows + epsilon
    if p_ab >= 1.0:
        return 1.0
    if p_ab == 0.0:
        return -1.0
    p_a = occ_a / total_windows
    p_b = occ_b / total_windows
    return math.log(p_ab / (p_a * p_b)) / -math.log(p_ab)


def cosine_scalar(u, v):
    dot = math.fsum(a * b for a, b in zip(u, v))
    nu = math.sqrt(math.fsum(a * a for a in u))
    nv = math.sqrt(math.fsum(b * b for b in v))
    return dot / (nu * nv)


def cv_direct(documents, window_size, topic_words, epsilon, include_self=True):
    """Coherence of one topic straight from the definitions: brute-force
    counts, NPMI context vectors (self term on the diagonal), cosine of
    each vector against the vector sum, averaged."""
    word_to_id = {w: i for i, w in enumerate(topic_words)}
    total, occur, cooccur = brute_force_window_counts(
        documents, word_to_id, window_size)
    usable = [w for w in topic_words if occur.get(word_to_id[w], 0) > 0]
    assert len(usable) >= 2, "oracle needs >= 2 usable words"
    n = len(usable)
    vectors = []
    for wi in usable:
        a = word_to_id[wi]
        row = []
        for wj in usable:
            b = word_to_id[wj]
            if a == b:
                if include_self:
                    row.append(npmi_direct(total, occur[a], occur[a],
                                           occur[a], epsilon))
                else:
                    row.append(0.0)
            else:
                lo, hi = min(a, b), max(a, b)
                row.append(npmi_direct(total, occur[a], occur[b],
                                       cooccur.get((lo, hi), 0), epsilon))
        vectors.append(row)
    topic_vec = [math.fsum(vectors[i][j] for i in range(n)) for j in range(n)]
    cosines = [cosine_scalar(vectors[i], topic_vec) for i in range(n)]
    return math.fsum(cosines) / n


def diversity_direct(topics, top_n):
    unique = set()
    for topic in topics:
        unique.update(topic[:top_n])
    return len(unique) / (len(topics) * top_n)


def fleiss_direct(table):
    """table[i][j]: votes of item i for category j; equal row sums."""
    n_items = len(table)
    n = sum(table[0])
    p_i = [(sum(v * v for v in row) - n) / (n * (n - 1)) for row in table]
    p_bar = math.fsum(p_i) / n_items
    p_j = [sum(row[j] for row in table) / (n_items * n)
           for j in range(len(table[0]))]
    p_e = math.fsum(p * p for p in p_j)
    return (p_bar - p_e) / (1 - p_e)


def ols_direct(xs, ys):
    """Closed-form normal equations for slope/intercept plus Pearson r."""
    n = len(xs)
    sx = math.fsum(xs)
    sy = math.fsum(ys)
    sxx = math.fsum(x * x for x in xs)
    syy = math.fsum(y * y for y in ys)
    sxy = math.fsum(x * y for x, y in zip(xs, ys))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    intercept = (sy - slope * sx) / n
    denom = math.sqrt((n * sxx - sx * sx) * (n * syy - sy * sy))
    r = (n * sxy - sx * sy) / denom if denom > 0 else 0.0
    return slope, intercept, r


def macro_f1_direct(gold, pred):
    f1s = []
    for c in (1, 2):
        tp = fp = fn = 0
        for g, p in zip(gold, pred):
            if p == c and g == c:
                tp += 1
            elif p == c:
                fp += 1
            elif g == c:
                fn += 1
        denom = 2 * tp + fp + fn
        f1s.append(0.0 if denom == 0 else 2 * tp / denom)
    return sum(f1s) / 2


def percent_agreement_direct(task_responses):
    """task_responses: list per task of the annotators' responses."""
    fractions = []
    for responses in task_responses:
        n = len(responses)
        if n < 2:
            continue
        agree = sum(1 for i in range(n) for j in range(i + 1, n)
                    if responses[i] == responses[j])
        fractions.append(agree / (n * (n - 1) / 2))
    return math.fsum(fractions) / len(fractions)


def exhaustive_pair_table(topic_vectors):
    """All unordered pairs (i, j, cosine) sorted by similarity desc."""
    K = len(topic_vectors)
    pairs = [(i, j, cosine_scalar(topic_vectors[i], topic_vectors[j]))
             for i in range(K) for j in range(i + 1, K)]
    pairs.sort(key=lambda p: (-p[2], p[0], p[1]))
    return pairs


def most_similar_pairs_direct(topic_vectors):
    """Per-topic argmax partner (ties to the lowest index), deduplicated."""
    K = len(topic_vectors)
    chosen = set()
    for i in range(K):
        best_j, best_s = None, -math.inf
        for j in range(K):
            if j == i:
                continue
            s = cosine_scalar(topic_vectors[i], topic_vectors[j])
            if s > best_s:
                best_j, best_s = j, s
        chosen.add((min(i, best_j), max(i, best_j)))
    return chosen


def check_intruder_constraints(model_topics, topic_index, intruder,
                               corpus_freq, rho):
    """Independent verifier for the three intruder rules. model_topics:
    list of rankings (lists of words). Returns (ok, failures)."""
    failures = []
    ranking = model_topics[topic_index]
    length = len(ranking)
    if intruder in ranking:
        percentile = (ranking.index(intruder) + 1) / length
        if not percentile > 0.5:
            failures.append(f"percentile {percentile} not in lower half")
    else:
        failures.append("intruder not in evaluated topic's ranking")
    in_top10 = False
    for j, other in enumerate(model_topics):
        if j == topic_index or intruder not in other:
            continue
        if (other.index(intruder) + 1) / len(other) <= 0.10:
            in_top10 = True
            break
    if not in_top10:
        failures.append("not in the top 10% of any other topic")
    head = ranking[:4]
    logs = [math.log(corpus_freq[w]) for w in head if w in corpus_freq]
    gmean = math.exp(math.fsum(logs) / len(logs))
    freq = corpus_freq.get(intruder)
    if freq is None or not (gmean / rho <= freq <= gmean * rho):
        failures.append(f"frequency {freq} outside [{gmean / rho}, {gmean * rho}]")
    return not failures, failures
