"""Slow, obviously-correct reference implementations used by the tests."""

from collections import deque
from itertools import combinations

import numpy as np


def dbscan_bruteforce(points, eps, min_pts):
    """Density-reachability clustering from the textbook definitions.

    Core points have >= min_pts points (self included) within eps. Clusters
    grow by breadth-first search through core points. Each border point goes
    to the cluster of its nearest core point, the lowest index winning exact
    ties. Returns a list of frozensets (the partition) and the noise set.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    neighbours = [[j for j in range(n) if dist[i, j] <= eps] for i in range(n)]
    core = [len(neighbours[i]) >= min_pts for i in range(n)]
    cluster_of = [None] * n
    clusters = []
    for seed in range(n):
        if not core[seed] or cluster_of[seed] is not None:
            continue
        cid = len(clusters)
        members = {seed}
        cluster_of[seed] = cid
        queue = deque([seed])
        while queue:
            p = queue.popleft()
            for q in neighbours[p]:
                if core[q] and cluster_of[q] is None:
                    cluster_of[q] = cid
                    members.add(q)
                    queue.append(q)
        clusters.append(members)
    for i in range(n):
        if core[i]:
            continue
        cands = [(dist[i, j], j) for j in neighbours[i] if core[j]]
        if cands:
            _, j = min(cands)
            clusters[cluster_of[j]].add(i)
            cluster_of[i] = cluster_of[j]
    noise = frozenset(i for i in range(n) if cluster_of[i] is None)
    return {frozenset(c) for c in clusters}, noise


def partition(labels, noise_label=-1):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), set()).add(i)
    noise = frozenset(groups.pop(noise_label, set()))
    return {frozenset(g) for g in groups.values()}, noise


def best_pair_consensus(points, tol):
    """Exhaustive two-point line hypotheses; returns (max inlier count, inlier mask)."""
    pts = np.asarray(points, dtype=float)
    best_count, best_mask = -1, None
    for i, j in combinations(range(len(pts)), 2):
        d = pts[j] - pts[i]
        length = np.hypot(*d)
        if length == 0:
            continue
        nrm = np.array([-d[1], d[0]]) / length
        mask = np.abs((pts - pts[i]) @ nrm) <= tol
        if mask.sum() > best_count:
            best_count, best_mask = int(mask.sum()), mask
    return best_count, best_mask


def softmax_weights(costs, lam):
    """Direct evaluation with Python floats and math.exp."""
    import math

    smin = min(costs)
    e = [math.exp(-(c - smin) / lam) for c in costs]
    total = sum(e)
    return [x / total for x in e]
