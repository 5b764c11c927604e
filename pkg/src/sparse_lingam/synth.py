"""Ground-truth DAG generation, SEM sampling and structure-recovery metrics.

Adjacency convention: ``B[j, k] != 0`` means a directed edge ``k -> j``, so
data satisfy ``x = B x + s``.
"""
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .exceptions import ParameterError

NOISE_KINDS = ("laplace", "uniform", "exponential")
WEIGHT_RANGE = (0.5, 1.5)
VARIANCE_RANGE = (1.0, 3.0)

# stream tags so each generation stage draws from its own seeded stream
_GRAPH, _WEIGHTS, _NOISE = 1, 2, 3


def _rng(seed, stage):
    return np.random.default_rng([int(seed), stage])


@dataclass
class GraphTruth:
    B: np.ndarray
    graph_kind: str
    seed: int
    noise_kinds: list = field(default_factory=list)
    noise_variances: list = field(default_factory=list)

    @property
    def n_vars(self):
        return self.B.shape[0]

    @property
    def n_edges(self):
        return int(np.count_nonzero(self.B))

    def to_json(self):
        rows, cols = np.nonzero(self.B)
        doc = {
            "format": "sparse-lingam-truth/1",
            "d": self.n_vars,
            "graph_kind": self.graph_kind,
            "seed": self.seed,
            # each edge is [target, source, weight]: B[target, source] = weight
            "edges": [[int(j), int(k), float(self.B[j, k])] for j, k in zip(rows, cols)],
            "noises": [
                {"distribution": kind, "variance": float(var)}
                for kind, var in zip(self.noise_kinds, self.noise_variances)
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        d = int(doc["d"])
        B = np.zeros((d, d))
        for j, k, w in doc["edges"]:
            B[int(j), int(k)] = float(w)
        return cls(
            B=B,
            graph_kind=doc["graph_kind"],
            seed=int(doc["seed"]),
            noise_kinds=[n["distribution"] for n in doc["noises"]],
            noise_variances=[float(n["variance"]) for n in doc["noises"]],
        )


def _skeleton_from_order(order, edges):
    d = len(order)
    S = np.zeros((d, d))
    for parent, child in edges:
        S[order[child], order[parent]] = 1.0
    return S


def gen_er_graph(d, expected_edges, seed):
    """Erdos-Renyi DAG: each pair consistent with a random order is an edge w.p. ``p``.

    ``p = expected_edges / (d (d - 1) / 2)``. Returns a :class:`GraphTruth`
    with unit weights on the edges and no noise specification yet.
    """
    if d < 2:
        raise ParameterError("d must be >= 2")
    slots = d * (d - 1) // 2
    if expected_edges < 0 or expected_edges > slots:
        raise ParameterError(
            f"expected_edges={expected_edges} outside [0, {slots}] for d={d}"
        )
    rng = _rng(seed, _GRAPH)
    order = rng.permutation(d)
    p = expected_edges / slots
    upper = np.triu(rng.random((d, d)) < p, k=1)
    parents, children = np.nonzero(upper)
    S = _skeleton_from_order(order, zip(parents, children))
    return GraphTruth(B=S, graph_kind="ER", seed=int(seed))


def gen_sf_graph(d, m=1, seed=0):
    """Scale-free DAG by preferential attachment, edges oriented old -> new.

    Node ``t >= m`` attaches to ``m`` distinct earlier nodes chosen with
    probability proportional to degree (uniformly while all degrees are 0).
    Node labels are randomly permuted afterwards.
    """
    if d < 2:
        raise ParameterError("d must be >= 2")
    if not 1 <= m < d:
        raise ParameterError(f"attachment m={m} must satisfy 1 <= m < d={d}")
    rng = _rng(seed, _GRAPH)
    degree = np.zeros(d)
    edges = []
    for t in range(m, d):
        w = degree[:t]
        prob = w / w.sum() if w.sum() > 0 else np.full(t, 1.0 / t)
        if t == m:
            targets = np.arange(m)
        else:
            targets = rng.choice(t, size=m, replace=False, p=prob)
        for s in targets:
            edges.append((int(s), t))
            degree[s] += 1
            degree[t] += 1
    order = rng.permutation(d)
    S = _skeleton_from_order(order, edges)
    return GraphTruth(B=S, graph_kind="SF", seed=int(seed))


def assign_weights_and_noises(skeleton, seed=None, noise="mixed"):
    """Draw edge weights from ``[-1.5, -0.5] U [0.5, 1.5]`` and per-variable noises.

    ``noise`` is ``"mixed"`` (distribution drawn per variable) or one of
    :data:`NOISE_KINDS`.
    """
    seed = skeleton.seed if seed is None else seed
    rng = _rng(seed, _WEIGHTS)
    d = skeleton.n_vars
    mask = skeleton.B != 0
    lo, hi = WEIGHT_RANGE
    mags = rng.uniform(lo, hi, size=(d, d))
    signs = np.where(rng.random((d, d)) < 0.5, -1.0, 1.0)
    B = np.where(mask, mags * signs, 0.0)
    if noise == "mixed":
        kinds = [NOISE_KINDS[i] for i in rng.integers(0, len(NOISE_KINDS), size=d)]
    elif noise in NOISE_KINDS:
        kinds = [noise] * d
    else:
        raise ParameterError(f"unknown noise kind {noise!r}")
    variances = rng.uniform(*VARIANCE_RANGE, size=d)
    return GraphTruth(
        B=B, graph_kind=skeleton.graph_kind, seed=int(seed),
        noise_kinds=kinds, noise_variances=[float(v) for v in variances],
    )


def draw_noise(kind, variance, n, rng):
    """Zero-mean noise with the requested variance."""
    if kind == "laplace":
        return rng.laplace(0.0, np.sqrt(variance / 2.0), size=n)
    if kind == "uniform":
        half = np.sqrt(3.0 * variance)
        return rng.uniform(-half, half, size=n)
    if kind == "exponential":
        scale = np.sqrt(variance)
        return rng.exponential(scale, size=n) - scale
    raise ParameterError(f"unknown noise kind {kind!r}")


def topological_order(B):
    """Topological order of a DAG adjacency (parents before children)."""
    from .postprocess import is_acyclic

    ok, order = is_acyclic(B)
    if not ok:
        raise ParameterError("graph is not acyclic")
    return order


def sample_data(truth, n, seed=None):
    """Sample ``n`` rows of ``x = B x + s`` following the causal order."""
    seed = truth.seed if seed is None else seed
    rng = _rng(seed, _NOISE)
    d = truth.n_vars
    S = np.column_stack([
        draw_noise(kind, var, n, rng)
        for kind, var in zip(truth.noise_kinds, truth.noise_variances)
    ])
    X = np.zeros((n, d))
    for j in topological_order(truth.B):
        X[:, j] = S[:, j] + X @ truth.B[j]
    return Dataset(X)


@dataclass(frozen=True)
class MetricsReport:
    distance: float
    shd: int
    fdr: float
    tpr: float
    n_edges: int = 0

    def as_dict(self):
        return asdict(self)


def evaluate(B_hat, B_true):
    """Distance, SHD, FDR and TPR of an estimated adjacency against the truth.

    An edge is present where the entry is exactly nonzero. SHD counts one step
    per unordered pair whose edge state differs (a reversal is one step). FDR
    counts false and reversed edges over estimated edges.
    """
    B_hat = np.asarray(B_hat, dtype=float)
    B_true = np.asarray(B_true, dtype=float)
    if B_hat.shape != B_true.shape or B_hat.ndim != 2 or B_hat.shape[0] != B_hat.shape[1]:
        raise ValueError(f"shape mismatch: {B_hat.shape} vs {B_true.shape}")
    est = B_hat != 0
    true = B_true != 0
    np.fill_diagonal(est, False)
    np.fill_diagonal(true, False)
    n_est = int(est.sum())
    n_true = int(true.sum())
    tp = int(np.sum(est & true))
    iu = np.triu_indices(B_hat.shape[0], k=1)
    differ = (est[iu] != true[iu]) | (est.T[iu] != true.T[iu])
    return MetricsReport(
        distance=float(np.linalg.norm(B_hat - B_true)),
        shd=int(differ.sum()),
        fdr=(n_est - tp) / max(1, n_est),
        tpr=tp / max(1, n_true),
        n_edges=n_est,
    )
