"""Density clustering (DBSCAN) and Gaussian-mixture wall segmentation."""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

NOISE = -1


class PerceptionError(RuntimeError):
    """A perception stage could not produce a usable result."""


def dbscan(points: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Label each point with a cluster id, or ``NOISE``.

    A point is core when at least ``min_pts`` points (itself included) lie
    within ``eps``. Clusters are the connected components of the core points
    under the eps-neighbourhood relation. A border point joins the cluster of
    its nearest core neighbour (lowest index on exact ties), so the partition
    does not depend on the order points are visited. Cluster ids are numbered
    by each cluster's lowest point index.
    """
    if eps <= 0 or min_pts < 1:
        raise ValueError("eps must be positive and min_pts at least 1")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    labels = np.full(n, NOISE, dtype=int)
    if n == 0:
        return labels

    pairs = cKDTree(pts).query_pairs(eps, output_type="ndarray")
    i, j = pairs[:, 0], pairs[:, 1]
    counts = 1 + np.bincount(i, minlength=n) + np.bincount(j, minlength=n)
    core = counts >= min_pts
    if not core.any():
        return labels

    both = core[i] & core[j]
    graph = coo_matrix((np.ones(both.sum()), (i[both], j[both])), shape=(n, n))
    _, comp = connected_components(graph, directed=False)
    core_idx = np.flatnonzero(core)
    labels[core_idx] = comp[core_idx]

    # border points: nearest core neighbour within eps
    a = np.concatenate([i, j])
    b = np.concatenate([j, i])
    sel = ~core[a] & core[b]
    if sel.any():
        nb, cb = a[sel], b[sel]
        dist = np.linalg.norm(pts[nb] - pts[cb], axis=1)
        idx = np.lexsort((cb, dist, nb))
        nb, cb = nb[idx], cb[idx]
        keep = np.r_[True, nb[1:] != nb[:-1]]
        labels[nb[keep]] = labels[cb[keep]]

    # cluster ids by lowest member index (border points can precede cores)
    members = np.flatnonzero(labels != NOISE)
    _, first, inv = np.unique(labels[members], return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=int)
    rank[np.argsort(members[first])] = np.arange(len(first))
    labels[members] = rank[inv]
    return labels


def extract_dock_cluster(
    points: np.ndarray, eps: float, min_pts: int, merge_radius: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Largest non-noise cluster and its centroid.

    With ``merge_radius > 0`` every other cluster having a point within that
    distance of the largest one is merged in; walls seen through an opening
    are often disconnected from the nearest wall by occlusion gaps.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    labels = dbscan(pts, eps, min_pts)
    valid = labels[labels != NOISE]
    if len(valid) == 0:
        raise PerceptionError("no dense cluster in point cloud")
    sizes = np.bincount(valid)
    best = int(np.argmax(sizes))  # lowest id wins ties
    keep = labels == best
    if merge_radius > 0 and len(sizes) > 1:
        tree = cKDTree(pts[keep])
        for k in range(len(sizes)):
            if k == best:
                continue
            d, _ = tree.query(pts[labels == k], k=1)
            if d.min() <= merge_radius:
                keep |= labels == k
    dock = pts[keep]
    return dock, dock.mean(axis=0)


# --- Gaussian mixture -------------------------------------------------------


def _kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [points[rng.integers(len(points))]]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(len(points))
        else:
            idx = rng.choice(len(points), p=d2 / total)
        centers.append(points[idx])
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return np.array(centers)


def _m_step(points, resp, reg_covar):
    nk = resp.sum(axis=0) + 1e-12
    weights = nk / len(points)
    means = (resp.T @ points) / nk[:, None]
    covs = np.empty((len(nk), 2, 2))
    for k in range(len(nk)):
        d = points - means[k]
        covs[k] = (resp[:, k, None] * d).T @ d / nk[k]
        covs[k] += reg_covar * np.eye(2)
    return weights, means, covs


def _log_prob(points, weights, means, covs):
    """Per-point, per-component log(weight * density), shape (n, k)."""
    out = np.empty((len(points), len(weights)))
    for k in range(len(weights)):
        a, b, c = covs[k, 0, 0], covs[k, 0, 1], covs[k, 1, 1]
        det = a * c - b * b
        d = points - means[k]
        maha = (c * d[:, 0] ** 2 - 2 * b * d[:, 0] * d[:, 1] + a * d[:, 1] ** 2) / det
        out[:, k] = np.log(weights[k]) - np.log(2 * np.pi) - 0.5 * np.log(det) - 0.5 * maha
    return out


def fit_gmm(
    points: np.ndarray,
    n_components: int,
    rng: np.random.Generator,
    max_iter: int = 100,
    tol: float = 1e-6,
    reg_covar: float = 1e-4,
):
    """EM for a full-covariance 2D Gaussian mixture.

    Returns ``(weights, means, covs, resp, mean_loglik)``. Initial
    responsibilities are the hard assignment to k-means++ seeds.
    """
    pts = np.asarray(points, dtype=float)
    centers = _kmeanspp(pts, n_components, rng)
    d2 = ((pts[:, None, :] - centers[None]) ** 2).sum(axis=2)
    resp = np.zeros((len(pts), n_components))
    resp[np.arange(len(pts)), d2.argmin(axis=1)] = 1.0
    params = _m_step(pts, resp, reg_covar)
    prev = -np.inf
    ll = prev
    for _ in range(max_iter):
        lp = _log_prob(pts, *params)
        mx = lp.max(axis=1, keepdims=True)
        norm = mx + np.log(np.exp(lp - mx).sum(axis=1, keepdims=True))
        resp = np.exp(lp - norm)
        ll = float(norm.mean())
        params = _m_step(pts, resp, reg_covar)
        if ll - prev < tol:
            break
        prev = ll
    return (*params, resp, ll)


def segment_walls(
    dock_points: np.ndarray,
    n_components: int,
    rng: np.random.Generator,
    max_iter: int = 100,
    tol: float = 1e-6,
    restarts: int = 5,
) -> list[np.ndarray]:
    """Split dock points into ``n_components`` subsets by maximum responsibility."""
    pts = np.asarray(dock_points, dtype=float).reshape(-1, 2)
    if n_components < 1 or len(pts) < n_components:
        raise ValueError(f"need at least {n_components} points, got {len(pts)}")
    if n_components == 1:
        return [pts.copy()]
    for _ in range(restarts + 1):
        *_, resp, _ll = fit_gmm(pts, n_components, rng, max_iter, tol)
        assign = resp.argmax(axis=1)
        subsets = [pts[assign == k] for k in range(n_components)]
        if all(len(s) for s in subsets):
            return subsets
    raise PerceptionError("Gaussian mixture kept producing empty components")
