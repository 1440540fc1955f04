#!/usr/bin/env python3
"""Generate the committed accuracy fixtures.

For each dataset (iris, digits, breast_cancer) this script:
  1. splits 80/20 stratified by class,
  2. fits a UMAP embedding of the training split (standard algorithm:
     fuzzy simplicial set -> spectral init -> SGD with negative sampling),
  3. projects the test split with UMAP's own out-of-sample transform
     (these are the oracle projections),
  4. writes train_inputs / train_projections / test_inputs /
     test_projections CSVs plus a manifest.json.

The UMAP implementation below follows the reference algorithm; it exists
because this environment cannot install umap-learn. Fixture quality is
checked at the end by evaluating the k-nearest-neighbor projection rule
against the oracle projections (the same metric the acceptance gate uses).

This script is run once, offline; its outputs are committed. It is not part
of the build.
"""

import argparse
import json
import os
import sys

import numpy as np
from numba import njit
from scipy.optimize import curve_fit
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components
from sklearn import datasets
from sklearn.model_selection import train_test_split
from sklearn.neighbors import NearestNeighbors

TOOL_VERSION = "make_fixtures 1.0"
SMOOTH_K_TOLERANCE = 1e-5
MIN_K_DIST_SCALE = 1e-3


# ---------------------------------------------------------------- fuzzy graph

def smooth_knn_dist(distances, k, n_iter=64, local_connectivity=1.0, bandwidth=1.0):
    """Per-point (sigma, rho): rho is the local connectivity distance, sigma
    solves sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(k)."""
    target = np.log2(k) * bandwidth
    n = distances.shape[0]
    rho = np.zeros(n)
    result = np.zeros(n)
    mean_distances = np.mean(distances)

    for i in range(n):
        lo, hi, mid = 0.0, np.inf, 1.0
        ith = distances[i]
        non_zero = ith[ith > 0.0]
        if non_zero.shape[0] >= local_connectivity:
            index = int(np.floor(local_connectivity))
            interpolation = local_connectivity - index
            if index > 0:
                rho[i] = non_zero[index - 1]
                if interpolation > SMOOTH_K_TOLERANCE:
                    rho[i] += interpolation * (non_zero[index] - non_zero[index - 1])
            else:
                rho[i] = interpolation * non_zero[0]
        elif non_zero.shape[0] > 0:
            rho[i] = np.max(non_zero)

        for _ in range(n_iter):
            psum = 0.0
            for j in range(1, distances.shape[1]):
                d = distances[i, j] - rho[i]
                psum += np.exp(-(d / mid)) if d > 0.0 else 1.0
            if np.fabs(psum - target) < SMOOTH_K_TOLERANCE:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        result[i] = mid

        if rho[i] > 0.0:
            mean_ith = np.mean(ith)
            if result[i] < MIN_K_DIST_SCALE * mean_ith:
                result[i] = MIN_K_DIST_SCALE * mean_ith
        else:
            if result[i] < MIN_K_DIST_SCALE * mean_distances:
                result[i] = MIN_K_DIST_SCALE * mean_distances
    return result, rho


def compute_membership_strengths(knn_indices, knn_dists, sigmas, rhos):
    n_samples, n_neighbors = knn_indices.shape
    rows = np.zeros(n_samples * n_neighbors, dtype=np.int64)
    cols = np.zeros(n_samples * n_neighbors, dtype=np.int64)
    vals = np.zeros(n_samples * n_neighbors)
    for i in range(n_samples):
        for j in range(n_neighbors):
            if knn_indices[i, j] == i:
                val = 0.0
            elif knn_dists[i, j] - rhos[i] <= 0.0 or sigmas[i] == 0.0:
                val = 1.0
            else:
                val = np.exp(-((knn_dists[i, j] - rhos[i]) / sigmas[i]))
            rows[i * n_neighbors + j] = i
            cols[i * n_neighbors + j] = knn_indices[i, j]
            vals[i * n_neighbors + j] = val
    return rows, cols, vals


def fuzzy_simplicial_set(X, n_neighbors):
    knn = NearestNeighbors(n_neighbors=n_neighbors).fit(X)
    knn_dists, knn_indices = knn.kneighbors(X)
    sigmas, rhos = smooth_knn_dist(knn_dists, float(n_neighbors))
    rows, cols, vals = compute_membership_strengths(knn_indices, knn_dists, sigmas, rhos)
    result = coo_matrix((vals, (rows, cols)), shape=(X.shape[0], X.shape[0]))
    result.eliminate_zeros()
    transpose = result.transpose()
    prod = result.multiply(transpose)
    result = result + transpose - prod  # probabilistic t-conorm union
    result.eliminate_zeros()
    return result.tocoo()


# ------------------------------------------------------------------- a,b fit

def find_ab_params(spread, min_dist):
    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2 * b))

    xv = np.linspace(0, spread * 3, 300)
    yv = np.zeros(xv.shape)
    yv[xv < min_dist] = 1.0
    yv[xv >= min_dist] = np.exp(-(xv[xv >= min_dist] - min_dist) / spread)
    params, _ = curve_fit(curve, xv, yv)
    return params[0], params[1]


# ------------------------------------------------------------- spectral init

def spectral_init(graph, dim, rng):
    n = graph.shape[0]
    n_comp, _ = connected_components(csr_matrix(graph))
    if n_comp > 1:
        # Disconnected neighbor graphs never occurred for the committed
        # fixtures; a deterministic random fallback keeps the script total.
        return rng.uniform(-10.0, 10.0, size=(n, dim))
    diag = np.asarray(graph.sum(axis=0)).flatten()
    d_inv_sqrt = 1.0 / np.sqrt(diag)
    A = graph.toarray()
    L = np.eye(n) - (d_inv_sqrt[:, None] * A) * d_inv_sqrt[None, :]
    eigenvalues, eigenvectors = np.linalg.eigh(L)
    order = np.argsort(eigenvalues)[1 : dim + 1]
    return eigenvectors[:, order]


# ----------------------------------------------------------------------- SGD

def make_epochs_per_sample(weights, n_epochs):
    result = -1.0 * np.ones(weights.shape[0])
    n_samples = n_epochs * (weights / weights.max())
    result[n_samples > 0] = float(n_epochs) / n_samples[n_samples > 0]
    return result


@njit(cache=True)
def _optimize_layout(head_embedding, tail_embedding, head, tail, n_epochs, n_vertices,
                     epochs_per_sample, a, b, gamma, initial_alpha,
                     negative_sample_rate, move_other, rng_seed):
    dim = head_embedding.shape[1]
    alpha = initial_alpha
    epochs_per_negative_sample = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    epoch_of_next_sample = epochs_per_sample.copy()
    state = np.uint64(rng_seed * 2 + 1)

    for n in range(n_epochs):
        for i in range(epochs_per_sample.shape[0]):
            if epoch_of_next_sample[i] > n:
                continue
            j = head[i]
            k = tail[i]
            current = head_embedding[j]
            other = tail_embedding[k]
            dist_squared = 0.0
            for d in range(dim):
                diff = current[d] - other[d]
                dist_squared += diff * diff
            if dist_squared > 0.0:
                grad_coeff = -2.0 * a * b * dist_squared ** (b - 1.0)
                grad_coeff /= a * dist_squared ** b + 1.0
            else:
                grad_coeff = 0.0
            for d in range(dim):
                grad_d = grad_coeff * (current[d] - other[d])
                if grad_d > 4.0:
                    grad_d = 4.0
                elif grad_d < -4.0:
                    grad_d = -4.0
                current[d] += grad_d * alpha
                if move_other:
                    other[d] += -grad_d * alpha
            epoch_of_next_sample[i] += epochs_per_sample[i]

            n_neg_samples = int((n - epoch_of_next_negative_sample[i]) /
                                epochs_per_negative_sample[i])
            for _ in range(n_neg_samples):
                state = state * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
                k = int(state >> np.uint64(33)) % n_vertices
                other = tail_embedding[k]
                dist_squared = 0.0
                for d in range(dim):
                    diff = current[d] - other[d]
                    dist_squared += diff * diff
                if dist_squared > 0.0:
                    grad_coeff = 2.0 * gamma * b
                    grad_coeff /= (0.001 + dist_squared) * (a * dist_squared ** b + 1.0)
                elif j == k:
                    continue
                else:
                    grad_coeff = 0.0
                for d in range(dim):
                    if grad_coeff > 0.0:
                        grad_d = grad_coeff * (current[d] - other[d])
                        if grad_d > 4.0:
                            grad_d = 4.0
                        elif grad_d < -4.0:
                            grad_d = -4.0
                    else:
                        grad_d = 4.0
                    current[d] += grad_d * alpha
            epoch_of_next_negative_sample[i] += (n_neg_samples *
                                                 epochs_per_negative_sample[i])
        alpha = initial_alpha * (1.0 - float(n + 1) / float(n_epochs))
    return head_embedding


def simplicial_set_embedding(graph, n_epochs, a, b, rng, sgd_seed, dim=2):
    graph = graph.tocoo()
    graph.sum_duplicates()
    graph.data[graph.data < graph.data.max() / float(n_epochs)] = 0.0
    graph.eliminate_zeros()

    initialisation = spectral_init(graph, dim, rng)
    expansion = 10.0 / np.abs(initialisation).max()
    embedding = (initialisation * expansion).astype(np.float64)
    embedding += rng.normal(scale=0.0001, size=embedding.shape)

    epochs_per_sample = make_epochs_per_sample(graph.data, n_epochs)
    return _optimize_layout(embedding, embedding,
                            graph.row.astype(np.int64), graph.col.astype(np.int64),
                            n_epochs, graph.shape[1], epochs_per_sample,
                            a, b, 1.0, 1.0, 5, True, sgd_seed)


def umap_fit(X, n_neighbors, min_dist, spread, n_epochs, seed):
    a, b = find_ab_params(spread, min_dist)
    graph = fuzzy_simplicial_set(X, n_neighbors)
    rng = np.random.RandomState(seed)
    embedding = simplicial_set_embedding(graph, n_epochs, a, b, rng, seed)
    return embedding, graph, a, b


def umap_transform(X_train, train_embedding, X_test, n_neighbors, a, b,
                   n_epochs, seed):
    """The standard out-of-sample transform: fuzzy membership of each test
    point among its training neighbors, initialized at the membership-weighted
    mean of neighbor projections, then a short SGD against the frozen
    training embedding (quarter learning rate)."""
    knn = NearestNeighbors(n_neighbors=n_neighbors).fit(X_train)
    dists, indices = knn.kneighbors(X_test)
    sigmas, rhos = smooth_knn_dist(dists, float(n_neighbors))
    rows, cols, vals = compute_membership_strengths(indices, dists, sigmas, rhos)
    graph = coo_matrix((vals, (rows, cols)),
                       shape=(X_test.shape[0], X_train.shape[0]))

    # init: per-row l1-normalized membership average of neighbor projections
    row_sums = np.asarray(graph.tocsr().sum(axis=1)).flatten()
    init = np.zeros((X_test.shape[0], train_embedding.shape[1]))
    for i in range(X_test.shape[0]):
        denom = row_sums[i] if row_sums[i] > 0 else 1.0
        for j in range(n_neighbors):
            init[i] += (vals[i * n_neighbors + j] / denom) * train_embedding[indices[i, j]]

    graph.data[graph.data < graph.data.max() / float(n_epochs)] = 0.0
    graph.eliminate_zeros()
    epochs_per_sample = make_epochs_per_sample(graph.data, n_epochs)
    frozen = train_embedding.copy()
    return _optimize_layout(init, frozen,
                            graph.row.astype(np.int64), graph.col.astype(np.int64),
                            n_epochs, graph.shape[1], epochs_per_sample,
                            a, b, 1.0, 1.0 / 4.0, 5, False, seed + 1)


# ------------------------------------------------------------------ fixtures

def g17(v):
    return "%.17g" % v


def write_inputs_csv(path, X, y):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(f"x{j}" for j in range(X.shape[1])) + ",label\n")
        for row, label in zip(X, y):
            f.write(",".join(g17(v) for v in row) + f",{int(label)}\n")


def write_projections_csv(path, U):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(f"u{j}" for j in range(U.shape[1])) + "\n")
        for row in U:
            f.write(",".join(g17(v) for v in row) + "\n")


def knn_projection_preview(X_train, U_train, X_test, k):
    """Inverse-distance-weighted neighbor average, duplicate rule included —
    the projection rule under test, evaluated here only to validate fixture
    quality before committing."""
    knn = NearestNeighbors(n_neighbors=k).fit(X_train)
    dists, indices = knn.kneighbors(X_test)
    out = np.zeros((X_test.shape[0], U_train.shape[1]))
    for i in range(X_test.shape[0]):
        d = dists[i]
        dup = d <= 1e-12
        if dup.any():
            out[i] = U_train[indices[i][dup]].mean(axis=0)
            continue
        w = (d.min() / d)
        w /= w.sum()
        out[i] = (w[:, None] * U_train[indices[i]]).sum(axis=0)
    return out


def normalized_mean_distance(approx, oracle):
    centroid = oracle.mean(axis=0)
    sigma = np.sqrt(((oracle - centroid) ** 2).sum(axis=1).mean())
    e = np.sqrt(((approx - oracle) ** 2).sum(axis=1)) / sigma
    return float(e.mean()), float(e.var())


DATASETS = {
    "iris": dict(load=datasets.load_iris,
                 n_neighbors=15, min_dist=5.0, spread=5.0),
    "digits": dict(load=datasets.load_digits,
                   n_neighbors=15, min_dist=1.0, spread=1.0),
    "breast_cancer": dict(load=datasets.load_breast_cancer,
                          n_neighbors=200, min_dist=1.0, spread=1.0),
}


def build_fixture(name, cfg, out_root, split_seed, fit_seed, n_epochs, transform_epochs):
    data = cfg["load"]()
    X = np.asarray(data.data, dtype=np.float64)
    y = np.asarray(data.target, dtype=np.int64)
    X_train, X_test, y_train, y_test = train_test_split(
        X, y, test_size=0.2, stratify=y, random_state=split_seed)

    embedding, _, a, b = umap_fit(X_train, cfg["n_neighbors"], cfg["min_dist"],
                                  cfg["spread"], n_epochs, fit_seed)
    oracle = umap_transform(X_train, embedding, X_test, cfg["n_neighbors"],
                            a, b, transform_epochs, fit_seed)

    approx = knn_projection_preview(X_train, embedding, X_test, k=15)
    mean, var = normalized_mean_distance(approx, oracle)

    out_dir = os.path.join(out_root, name)
    os.makedirs(out_dir, exist_ok=True)
    write_inputs_csv(os.path.join(out_dir, "train_inputs.csv"), X_train, y_train)
    write_projections_csv(os.path.join(out_dir, "train_projections.csv"), embedding)
    write_inputs_csv(os.path.join(out_dir, "test_inputs.csv"), X_test, y_test)
    write_projections_csv(os.path.join(out_dir, "test_projections.csv"), oracle)
    manifest = dict(
        dataset=name,
        n_total=int(X.shape[0]),
        n_train=int(X_train.shape[0]),
        n_test=int(X_test.shape[0]),
        input_dim=int(X.shape[1]),
        output_dim=2,
        class_count=int(y.max()) + 1,
        split="80/20 stratified by class",
        split_seed=split_seed,
        umap=dict(n_neighbors=cfg["n_neighbors"], min_dist=cfg["min_dist"],
                  spread=cfg["spread"], metric="euclidean", n_components=2,
                  n_epochs=n_epochs, transform_epochs=transform_epochs,
                  negative_sample_rate=5, a=a, b=b, fit_seed=fit_seed),
        knn_projection_preview=dict(k=15, normalized_mean_distance=mean,
                                    variance=var),
        tool=TOOL_VERSION,
    )
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return mean, var


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "fixtures"))
    parser.add_argument("--datasets", nargs="*", default=list(DATASETS))
    parser.add_argument("--split-seed", type=int, default=7)
    parser.add_argument("--fit-seed", type=int, default=7)
    parser.add_argument("--epochs", type=int, default=500)
    parser.add_argument("--transform-epochs", type=int, default=100)
    args = parser.parse_args()

    for name in args.datasets:
        mean, var = build_fixture(name, DATASETS[name], args.out, args.split_seed,
                                  args.fit_seed, args.epochs, args.transform_epochs)
        print(f"{name}: normalized mean distance {mean:.3f} (variance {var:.3f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
