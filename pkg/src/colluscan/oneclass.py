"""One-class classifiers trained on collusive entities only.

Four kinds behind one train/score surface: a nu-formulation one-class SVM
solved by sequential minimal optimization over an RBF kernel, an isolation
forest, a FastMCD robust Gaussian, and the local outlier factor. Scores
are oriented so that higher always means more inlier-like, and every model
carries the per-feature standardization fitted on its training fold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import chi2

from .nn import Standardizer

KINDS = ("ocsvm", "iforest", "mcd", "lof")

MIN_SAMPLES = {"ocsvm": 2, "iforest": 2}


# ---------------------------------------------------------------------------
# nu one-class SVM, SMO over the dual
# ---------------------------------------------------------------------------

def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = (np.sum(a ** 2, axis=1)[:, None] + np.sum(b ** 2, axis=1)[None, :]
          - 2.0 * a @ b.T)
    return np.exp(-gamma * np.clip(sq, 0.0, None))


@dataclass
class OcsvmFit:
    support_vectors: np.ndarray
    alphas: np.ndarray
    rho: float
    gamma: float
    nu: float
    # full training-set state kept for KKT inspection
    train_alphas: np.ndarray = field(repr=False, default=None)
    train_gradient: np.ndarray = field(repr=False, default=None)

    def decision(self, x: np.ndarray) -> np.ndarray:
        k = rbf_kernel(np.atleast_2d(x), self.support_vectors, self.gamma)
        return k @ self.alphas - self.rho


def _smo_one_class(k: np.ndarray, nu: float, tol: float = 1e-6,
                   max_iter: Optional[int] = None):
    """Minimize (1/2) a^T K a  s.t.  0 <= a_i <= 1/(nu n), sum a = 1.

    Maximal-violating-pair selection; returns (alphas, rho, gradient).
    """
    n = k.shape[0]
    c = 1.0 / (nu * n)
    if c < 1.0 / n:
        raise ValueError("infeasible nu: 1/(nu*n) must be at least 1/n")
    alphas = np.zeros(n)
    n_full = int(np.floor(nu * n))
    alphas[:n_full] = c
    if n_full < n:
        alphas[n_full] = 1.0 - c * n_full
    grad = k @ alphas
    if max_iter is None:
        max_iter = 200 * n
    for _ in range(max_iter):
        up = alphas < c - 1e-12 * c
        low = alphas > 1e-12 * c
        i = int(np.argmin(np.where(up, grad, np.inf)))
        j = int(np.argmax(np.where(low, grad, -np.inf)))
        violation = grad[j] - grad[i]
        if violation <= tol:
            break
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta > 1e-15:
            delta = violation / eta
        else:
            delta = np.inf
        delta = min(delta, c - alphas[i], alphas[j])
        alphas[i] += delta
        alphas[j] -= delta
        grad += delta * (k[:, i] - k[:, j])
    free = (alphas > 1e-8 * c) & (alphas < c * (1 - 1e-8))
    if free.any():
        rho = float(grad[free].mean())
    else:
        lo = grad[alphas < c - 1e-12 * c].min() if (alphas < c).any() else grad.min()
        hi = grad[alphas > 1e-12 * c].max() if (alphas > 0).any() else grad.max()
        rho = float((lo + hi) / 2.0)
    return alphas, rho, grad


def kkt_residual(alphas: np.ndarray, grad: np.ndarray, rho: float,
                 c: float) -> float:
    """Worst first-order optimality violation over all dual variables."""
    worst = 0.0
    for a, g in zip(alphas, grad):
        if a <= 1e-8 * c:
            worst = max(worst, rho - g)       # should have g >= rho
        elif a >= c * (1 - 1e-8):
            worst = max(worst, g - rho)       # should have g <= rho
        else:
            worst = max(worst, abs(g - rho))  # free: g == rho
    return max(worst, 0.0)


def fit_ocsvm(x: np.ndarray, nu: float = 0.1,
              gamma: Optional[float] = None) -> OcsvmFit:
    x = np.asarray(x, dtype=float)
    n, dim = x.shape
    if gamma is None:
        var = float(x.var())
        gamma = 1.0 / (dim * var) if var > 0 else 1.0 / dim
    k = rbf_kernel(x, x, gamma)
    alphas, rho, grad = _smo_one_class(k, nu)
    keep = alphas > 1e-10
    return OcsvmFit(support_vectors=x[keep], alphas=alphas[keep], rho=rho,
                    gamma=gamma, nu=nu, train_alphas=alphas,
                    train_gradient=grad)


# ---------------------------------------------------------------------------
# isolation forest
# ---------------------------------------------------------------------------

_EULER_GAMMA = 0.5772156649015329


def average_path_length(n: int) -> float:
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (np.log(n - 1.0) + _EULER_GAMMA) - 2.0 * (n - 1.0) / n


def _build_itree(x: np.ndarray, depth: int, limit: int,
                 rng: np.random.Generator):
    n = x.shape[0]
    if depth >= limit or n <= 1:
        return {"size": n}
    feat = int(rng.integers(0, x.shape[1]))
    lo, hi = float(x[:, feat].min()), float(x[:, feat].max())
    if lo == hi:
        return {"size": n}
    split = float(rng.uniform(lo, hi))
    mask = x[:, feat] < split
    return {
        "feat": feat,
        "split": split,
        "left": _build_itree(x[mask], depth + 1, limit, rng),
        "right": _build_itree(x[~mask], depth + 1, limit, rng),
    }


def _itree_path(node: dict, x: np.ndarray, depth: int = 0) -> float:
    if "feat" not in node:
        return depth + average_path_length(node["size"])
    child = node["left"] if x[node["feat"]] < node["split"] else node["right"]
    return _itree_path(child, x, depth + 1)


@dataclass
class IsolationForestFit:
    trees: list
    subsample: int

    def anomaly_score(self, x: np.ndarray) -> np.ndarray:
        """Classic path-length score in (0, 1]; higher = more anomalous."""
        x = np.atleast_2d(x)
        depths = np.array([[_itree_path(t, row) for t in self.trees] for row in x])
        mean_depth = depths.mean(axis=1)
        return 2.0 ** (-mean_depth / average_path_length(self.subsample))


def fit_iforest(x: np.ndarray, n_trees: int = 100, subsample: int = 256,
                seed: int = 0) -> IsolationForestFit:
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    psi = min(subsample, x.shape[0])
    limit = int(np.ceil(np.log2(max(psi, 2))))
    trees = []
    for _ in range(n_trees):
        idx = rng.choice(x.shape[0], size=psi, replace=False)
        trees.append(_build_itree(x[idx], 0, limit, rng))
    return IsolationForestFit(trees=trees, subsample=psi)


# ---------------------------------------------------------------------------
# FastMCD robust location/scatter
# ---------------------------------------------------------------------------

@dataclass
class McdFit:
    location: np.ndarray
    scatter: np.ndarray
    precision: np.ndarray
    support: np.ndarray  # indices of the h-subset behind the estimate

    def squared_distance(self, x: np.ndarray) -> np.ndarray:
        diff = np.atleast_2d(x) - self.location
        return np.einsum("ij,jk,ik->i", diff, self.precision, diff)


def _cov_det(x: np.ndarray):
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / len(x)
    sign, logdet = np.linalg.slogdet(cov)
    det = np.exp(logdet) if sign > 0 else 0.0
    return mean, cov, det


def _c_steps(x: np.ndarray, subset: np.ndarray, h: int, max_steps: int = 30):
    """Concentration steps from an initial subset until det stops falling."""
    idx = subset
    best_det = np.inf
    for _ in range(max_steps):
        mean, cov, det = _cov_det(x[idx])
        if det <= 0:
            cov = cov + 1e-9 * (np.trace(cov) + 1e-12) * np.eye(cov.shape[0])
            mean, det = x[idx].mean(axis=0), float(np.linalg.det(cov))
        prec = np.linalg.inv(cov)
        diff = x - mean
        d2 = np.einsum("ij,jk,ik->i", diff, prec, diff)
        new_idx = np.argsort(d2, kind="stable")[:h]
        if det >= best_det - 1e-12 * max(best_det, 1.0):
            break
        best_det = det
        idx = new_idx
    return idx, best_det


def fit_mcd(x: np.ndarray, support_fraction: float = 0.75, n_starts: int = 30,
            seed: int = 0) -> McdFit:
    """FastMCD: many random starts, concentrate each, keep the lowest det.

    The returned scatter carries the usual chi-square consistency factor so
    squared robust distances of clean Gaussian data match their nominal
    quantiles.
    """
    x = np.asarray(x, dtype=float)
    n, dim = x.shape
    if n < dim + 1:
        raise ValueError("need at least dim+1 samples for mcd")
    h = max(int(np.floor(support_fraction * n)), dim + 1)
    rng = np.random.default_rng(seed)
    best = (np.inf, None)
    for _ in range(n_starts):
        start = rng.choice(n, size=dim + 1, replace=False)
        idx, det = _c_steps(x, start, h)
        if det < best[0]:
            best = (det, idx)
    if best[1] is None:
        raise ValueError("mcd failed to find a non-degenerate subset")
    idx = best[1]
    location, scatter, det = _cov_det(x[idx])
    if det <= 0:
        raise ValueError("degenerate data: mcd scatter is singular")
    # Consistency with the underlying Gaussian: the h-subset truncates the
    # distribution, shrinking the scatter by a known chi-square factor.
    quantile = h / n
    factor = quantile / chi2.cdf(chi2.ppf(quantile, dim), dim + 2)
    scatter = scatter * factor
    return McdFit(location=location, scatter=scatter,
                  precision=np.linalg.inv(scatter), support=idx)


# ---------------------------------------------------------------------------
# local outlier factor
# ---------------------------------------------------------------------------

@dataclass
class LofFit:
    reference: np.ndarray
    k: int
    k_distance: np.ndarray
    lrd: np.ndarray

    def factor(self, x: np.ndarray) -> np.ndarray:
        """LOF of query points against the training reference set.

        A single zero-distance match is dropped so scoring a training
        point does not count the point as its own neighbor.
        """
        x = np.atleast_2d(x)
        out = np.empty(len(x))
        for i, row in enumerate(x):
            dist = np.linalg.norm(self.reference - row, axis=1)
            order = np.argsort(dist, kind="stable")
            if dist[order[0]] == 0.0:
                order = order[1:]
            neigh = order[:self.k]
            reach = np.maximum(self.k_distance[neigh], dist[neigh])
            mean_reach = reach.mean()
            lrd_q = 1.0 / max(mean_reach, 1e-12)
            out[i] = float(np.mean(self.lrd[neigh]) / lrd_q)
        return out


def fit_lof(x: np.ndarray, k: int = 20) -> LofFit:
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < k + 1:
        raise ValueError(f"need at least k+1={k + 1} samples for lof")
    diff = x[:, None, :] - x[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")
    neigh = order[:, :k]
    neigh_dist = np.take_along_axis(dist, neigh, axis=1)
    k_distance = neigh_dist[:, -1].copy()
    reach = np.maximum(k_distance[neigh], neigh_dist)
    lrd = 1.0 / np.maximum(reach.mean(axis=1), 1e-12)
    return LofFit(reference=x, k=k, k_distance=k_distance, lrd=lrd)


# ---------------------------------------------------------------------------
# unified surface
# ---------------------------------------------------------------------------

FORMAT_VERSION = 1


@dataclass
class OneClassModel:
    kind: str
    fit: object
    norm: Standardizer
    threshold: float
    params: dict
    dim: int

    def to_obj(self) -> dict:
        """Versioned serialization with kind, hyperparameters, seed, and
        standardization; the heavy per-kind state travels under 'fit'."""
        if self.kind == "ocsvm":
            fit_obj = {"support_vectors": self.fit.support_vectors.tolist(),
                       "alphas": self.fit.alphas.tolist(),
                       "rho": self.fit.rho, "gamma": self.fit.gamma,
                       "nu": self.fit.nu}
        elif self.kind == "iforest":
            fit_obj = {"trees": self.fit.trees,
                       "subsample": self.fit.subsample}
        elif self.kind == "mcd":
            fit_obj = {"location": self.fit.location.tolist(),
                       "scatter": self.fit.scatter.tolist(),
                       "support": self.fit.support.tolist()}
        else:
            fit_obj = {"reference": self.fit.reference.tolist(),
                       "k": self.fit.k,
                       "k_distance": self.fit.k_distance.tolist(),
                       "lrd": self.fit.lrd.tolist()}
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "dim": self.dim,
            "threshold": self.threshold,
            "params": {k: v for k, v in self.params.items()
                       if isinstance(v, (int, float, str, bool))},
            "norm": self.norm.to_obj(),
            "fit": fit_obj,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "OneClassModel":
        if obj.get("format_version") != FORMAT_VERSION:
            raise ValueError("unsupported one-class model format version")
        kind = obj["kind"]
        fo = obj["fit"]
        if kind == "ocsvm":
            fit = OcsvmFit(
                support_vectors=np.asarray(fo["support_vectors"], dtype=float),
                alphas=np.asarray(fo["alphas"], dtype=float),
                rho=float(fo["rho"]), gamma=float(fo["gamma"]),
                nu=float(fo["nu"]))
        elif kind == "iforest":
            fit = IsolationForestFit(trees=fo["trees"],
                                     subsample=int(fo["subsample"]))
        elif kind == "mcd":
            scatter = np.asarray(fo["scatter"], dtype=float)
            fit = McdFit(location=np.asarray(fo["location"], dtype=float),
                         scatter=scatter,
                         precision=np.linalg.inv(scatter),
                         support=np.asarray(fo["support"], dtype=int))
        elif kind == "lof":
            fit = LofFit(reference=np.asarray(fo["reference"], dtype=float),
                         k=int(fo["k"]),
                         k_distance=np.asarray(fo["k_distance"], dtype=float),
                         lrd=np.asarray(fo["lrd"], dtype=float))
        else:
            raise ValueError(f"unknown kind '{kind}'")
        return cls(kind=kind, fit=fit, norm=Standardizer.from_obj(obj["norm"]),
                   threshold=float(obj["threshold"]), params=dict(obj["params"]),
                   dim=int(obj["dim"]))

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Inlier-oriented scores (higher = more inlier-like)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise ValueError(
                f"input dim {x.shape[1]} does not match model dim {self.dim}")
        xs = self.norm.transform(x)
        if self.kind == "ocsvm":
            return self.fit.decision(xs)
        if self.kind == "iforest":
            return 0.5 - self.fit.anomaly_score(xs)
        if self.kind == "mcd":
            return -self.fit.squared_distance(xs)
        if self.kind == "lof":
            return -self.fit.factor(xs)
        raise ValueError(f"unknown kind '{self.kind}'")


def train_one_class(features: np.ndarray, kind: str,
                    params: Optional[dict] = None) -> OneClassModel:
    """Fit one model kind on collusive-only feature vectors."""
    if kind not in KINDS:
        raise ValueError(f"unknown one-class kind '{kind}'")
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise ValueError("features must be a 2-D array")
    params = dict(params or {})
    n, dim = x.shape
    if kind != "iforest" and not (x.std(axis=0) > 0).any():
        raise ValueError("degenerate data: zero variance in every feature")
    norm = Standardizer.fit(x)
    xs = norm.transform(x)
    if kind == "ocsvm":
        if n < MIN_SAMPLES["ocsvm"]:
            raise ValueError("ocsvm needs at least 2 samples")
        nu = params.setdefault("nu", 0.1)
        fit = fit_ocsvm(xs, nu=nu, gamma=params.get("gamma"))
        params["gamma"] = fit.gamma
        threshold = params.setdefault("threshold", 0.0)
    elif kind == "iforest":
        if n < MIN_SAMPLES["iforest"]:
            raise ValueError("iforest needs at least 2 samples")
        fit = fit_iforest(xs, n_trees=params.setdefault("n_trees", 100),
                          subsample=params.setdefault("subsample", 256),
                          seed=params.setdefault("seed", 0))
        if "threshold" not in params:
            # calibrate at the contamination quantile of training scores
            contamination = params.setdefault("contamination", 0.1)
            train_scores = 0.5 - fit.anomaly_score(xs)
            params["threshold"] = float(
                np.percentile(train_scores, 100.0 * contamination))
        threshold = params["threshold"]
    elif kind == "mcd":
        fit = fit_mcd(xs,
                      support_fraction=params.setdefault("support_fraction", 0.75),
                      n_starts=params.setdefault("n_starts", 30),
                      seed=params.setdefault("seed", 0))
        threshold = params.setdefault(
            "threshold", -float(chi2.ppf(0.975, dim)))
    else:
        k = params.setdefault("k", 20)
        if n < k + 1:
            raise ValueError(f"lof needs at least k+1={k + 1} samples")
        fit = fit_lof(xs, k=k)
        threshold = params.setdefault("threshold", -1.5)
    return OneClassModel(kind=kind, fit=fit, norm=norm, threshold=threshold,
                         params=params, dim=dim)


def score_one_class(model: OneClassModel, x: np.ndarray) -> dict:
    """Score one point: inlier-oriented score and the threshold decision."""
    score = float(model.scores(np.asarray(x, dtype=float).reshape(1, -1))[0])
    return {"score": score, "is_inlier": score >= model.threshold}
