"""Numeric kernel for the two embedding-composition methods.

Weighted addition composes each position as a convex combination of the
source vector and learned tag vectors (all the same dimension, weights
summing to one). Linearized concatenation concatenates source and tag
vectors along the feature axis and projects back to the source dimension
through a linear layer. Both come with hand-written backward passes, a
finite-difference verifier, and a small full-batch gradient-descent loop
for exercising the learning contract without a full encoder-decoder.

Everything is float64; random initialization always takes an explicit seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

import numpy as np


class DimensionMismatch(ValueError):
    pass


class UnknownTag(KeyError):
    pass


def _check_finite(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} contains non-finite entries")
    return x


@dataclass
class TagEmbeddingTable:
    """Learned d-dimensional vector per tag. ``trainable=False`` freezes the
    vectors: fitting must leave them bit-identical."""

    kind: str
    dim: int
    vectors: dict[str, np.ndarray]
    trainable: bool = True

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DimensionMismatch(f"embedding dim must be >= 1, got {self.dim}")
        for tag, vec in self.vectors.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (self.dim,):
                raise DimensionMismatch(
                    f"tag {tag!r}: vector shape {vec.shape}, expected ({self.dim},)"
                )
            self.vectors[tag] = vec

    @classmethod
    def random_init(
        cls,
        kind: str,
        tags: Iterable[str],
        dim: int,
        seed: int,
        trainable: bool = True,
    ) -> "TagEmbeddingTable":
        """Uniform init in [-1/sqrt(d), +1/sqrt(d)], deterministic per seed."""
        rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(dim)
        vectors = {
            tag: rng.uniform(-bound, bound, size=dim) for tag in tags
        }
        return cls(kind, dim, vectors, trainable)

    def lookup(self, tag: str) -> np.ndarray:
        try:
            return self.vectors[tag]
        except KeyError:
            raise UnknownTag(f"{self.kind} table has no entry for tag {tag!r}") from None

    def gather(self, tags: Sequence[str]) -> np.ndarray:
        return np.stack([self.lookup(t) for t in tags]) if tags else np.zeros((0, self.dim))

    def save(self, fh: IO[str]) -> None:
        json.dump(
            {
                "kind": self.kind,
                "dim": self.dim,
                "trainable": self.trainable,
                "vectors": {t: v.tolist() for t, v in self.vectors.items()},
            },
            fh,
        )

    @classmethod
    def load(cls, fh: IO[str]) -> "TagEmbeddingTable":
        d = json.load(fh)
        return cls(
            d["kind"],
            int(d["dim"]),
            {t: np.asarray(v, dtype=np.float64) for t, v in d["vectors"].items()},
            bool(d.get("trainable", True)),
        )


WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class WaConfig:
    """Fractional weights of source, PoS and dependency embeddings; they
    must sum to one, each within [0, 1]."""

    wt_src: float
    wt_pos: float = 0.0
    wt_dp: float = 0.0

    def __post_init__(self) -> None:
        total = self.wt_src + self.wt_pos + self.wt_dp
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        for name, w in (("wt_src", self.wt_src), ("wt_pos", self.wt_pos), ("wt_dp", self.wt_dp)):
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {w!r}")

    def to_dict(self) -> dict:
        return {"wt_src": self.wt_src, "wt_pos": self.wt_pos, "wt_dp": self.wt_dp}


@dataclass
class LcConfig:
    """Linear projection from the concatenated (source + PoS + dep) feature
    space back to the source dimension; absent layers have dim 0."""

    dim_src: int
    dim_pos: int
    dim_dp: int
    projection: np.ndarray
    bias: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.projection = np.asarray(self.projection, dtype=np.float64)
        total = self.dim_src + self.dim_pos + self.dim_dp
        if self.dim_src < 1 or self.dim_pos < 0 or self.dim_dp < 0:
            raise DimensionMismatch("dims must be dim_src >= 1, others >= 0")
        if self.projection.shape != (self.dim_src, total):
            raise DimensionMismatch(
                f"projection shape {self.projection.shape}, expected ({self.dim_src}, {total})"
            )
        if self.bias is not None:
            self.bias = np.asarray(self.bias, dtype=np.float64)
            if self.bias.shape != (self.dim_src,):
                raise DimensionMismatch(
                    f"bias shape {self.bias.shape}, expected ({self.dim_src},)"
                )

    @classmethod
    def identity_init(
        cls, dim_src: int, dim_pos: int = 0, dim_dp: int = 0, with_bias: bool = True
    ) -> "LcConfig":
        """Projection [I | 0] with zero bias: the composition starts out as
        the exact identity on the source embedding."""
        proj = np.zeros((dim_src, dim_src + dim_pos + dim_dp))
        proj[:, :dim_src] = np.eye(dim_src)
        bias = np.zeros(dim_src) if with_bias else None
        return cls(dim_src, dim_pos, dim_dp, proj, bias)

    @classmethod
    def random_init(
        cls, dim_src: int, dim_pos: int, dim_dp: int, seed: int, with_bias: bool = True
    ) -> "LcConfig":
        rng = np.random.default_rng(seed)
        total = dim_src + dim_pos + dim_dp
        proj = rng.standard_normal((dim_src, total)) / np.sqrt(total)
        bias = rng.standard_normal(dim_src) * 0.01 if with_bias else None
        return cls(dim_src, dim_pos, dim_dp, proj, bias)


Tables = Mapping[str, TagEmbeddingTable]


def _as_src(src: np.ndarray, dim: int | None = None) -> np.ndarray:
    src = np.asarray(src, dtype=np.float64)
    if src.ndim != 2:
        raise DimensionMismatch(f"source embeddings must be N x d, got shape {src.shape}")
    if dim is not None and src.shape[1] != dim:
        raise DimensionMismatch(f"source dim {src.shape[1]}, expected {dim}")
    return src


def _layer_tags(tags: Sequence[str] | None, n: int, layer: str) -> Sequence[str]:
    if tags is None:
        raise DimensionMismatch(f"{layer} tags required but not supplied")
    if len(tags) != n:
        raise DimensionMismatch(f"{len(tags)} {layer} tags for {n} positions")
    return tags


def wa_forward(
    src: np.ndarray,
    pos_tags: Sequence[str] | None,
    dp_tags: Sequence[str] | None,
    tables: Tables,
    cfg: WaConfig,
) -> np.ndarray:
    """x_i = wt_src*src_i + wt_pos*emb(pos_i) + wt_dp*emb(dp_i).

    A layer with weight 0 is never looked up, so its tags and table may be
    omitted entirely.
    """
    src = _as_src(src)
    n, d = src.shape
    out = cfg.wt_src * src
    for weight, tags, key in ((cfg.wt_pos, pos_tags, "pos"), (cfg.wt_dp, dp_tags, "dp")):
        if weight == 0.0:
            continue
        table = tables.get(key)
        if table is None:
            raise DimensionMismatch(f"{key} table required for weight {weight}")
        if table.dim != d:
            raise DimensionMismatch(f"{key} table dim {table.dim}, source dim {d}")
        gathered = table.gather(_layer_tags(tags, n, key))
        out = out + weight * gathered
    return _check_finite(out, "composed embedding")


def wa_backward(
    upstream: np.ndarray,
    pos_tags: Sequence[str] | None,
    dp_tags: Sequence[str] | None,
    cfg: WaConfig,
) -> tuple[np.ndarray, dict[str, dict[str, np.ndarray]]]:
    """Gradients of the weighted addition: grad_src = wt_src * upstream and
    each tag vector accumulates wt_layer * upstream over the positions that
    carry the tag. Tags absent from the batch get no entry (exactly zero)."""
    upstream = _as_src(upstream)
    n, _ = upstream.shape
    grad_src = cfg.wt_src * upstream
    grad_tables: dict[str, dict[str, np.ndarray]] = {}
    for weight, tags, key in ((cfg.wt_pos, pos_tags, "pos"), (cfg.wt_dp, dp_tags, "dp")):
        if weight == 0.0:
            continue
        grads: dict[str, np.ndarray] = {}
        for i, tag in enumerate(_layer_tags(tags, n, key)):
            g = weight * upstream[i]
            if tag in grads:
                grads[tag] = grads[tag] + g
            else:
                grads[tag] = g.copy()
        grad_tables[key] = grads
    return grad_src, grad_tables


def _lc_concat(
    src: np.ndarray,
    pos_tags: Sequence[str] | None,
    dp_tags: Sequence[str] | None,
    tables: Tables,
    cfg: LcConfig,
) -> np.ndarray:
    """Concatenated (N, dim_src+dim_pos+dim_dp) input in the fixed order
    source, PoS, dependency."""
    src = _as_src(src, cfg.dim_src)
    n = src.shape[0]
    blocks = [src]
    for dim, tags, key in ((cfg.dim_pos, pos_tags, "pos"), (cfg.dim_dp, dp_tags, "dp")):
        if dim == 0:
            continue
        table = tables.get(key)
        if table is None:
            raise DimensionMismatch(f"{key} table required for dim {dim}")
        if table.dim != dim:
            raise DimensionMismatch(f"{key} table dim {table.dim}, config says {dim}")
        blocks.append(table.gather(_layer_tags(tags, n, key)))
    return np.concatenate(blocks, axis=1)


def lc_forward(
    src: np.ndarray,
    pos_tags: Sequence[str] | None,
    dp_tags: Sequence[str] | None,
    tables: Tables,
    cfg: LcConfig,
) -> np.ndarray:
    """x_i = projection @ (src_i ++ emb(pos_i) ++ emb(dp_i)) + bias."""
    concat = _lc_concat(src, pos_tags, dp_tags, tables, cfg)
    out = concat @ cfg.projection.T
    if cfg.bias is not None:
        out = out + cfg.bias
    return _check_finite(out, "composed embedding")


def lc_backward(
    upstream: np.ndarray,
    src: np.ndarray,
    pos_tags: Sequence[str] | None,
    dp_tags: Sequence[str] | None,
    tables: Tables,
    cfg: LcConfig,
) -> tuple[np.ndarray, dict[str, dict[str, np.ndarray]], np.ndarray, np.ndarray | None]:
    """Standard linear-layer gradients; the concatenated-input gradient is
    split by block into grad_src and per-tag accumulations."""
    upstream = _as_src(upstream, cfg.dim_src)
    concat = _lc_concat(src, pos_tags, dp_tags, tables, cfg)
    if upstream.shape[0] != concat.shape[0]:
        raise DimensionMismatch("upstream and input lengths differ")
    grad_proj = upstream.T @ concat
    grad_bias = upstream.sum(axis=0) if cfg.bias is not None else None
    grad_concat = upstream @ cfg.projection

    grad_src = grad_concat[:, : cfg.dim_src]
    grad_tables: dict[str, dict[str, np.ndarray]] = {}
    offset = cfg.dim_src
    for dim, tags, key in ((cfg.dim_pos, pos_tags, "pos"), (cfg.dim_dp, dp_tags, "dp")):
        if dim == 0:
            continue
        block = grad_concat[:, offset : offset + dim]
        offset += dim
        grads: dict[str, np.ndarray] = {}
        for i, tag in enumerate(_layer_tags(tags, upstream.shape[0], key)):
            if tag in grads:
                grads[tag] = grads[tag] + block[i]
            else:
                grads[tag] = block[i].copy()
        grad_tables[key] = grads
    return grad_src, grad_tables, grad_proj, grad_bias


# ---------------------------------------------------------------------------
# Toy learning loop
# ---------------------------------------------------------------------------


@dataclass
class ToyExample:
    """One desk-scale training item: source-table keys per position, tag
    lists per layer (None when the layer is unused) and the target matrix."""

    src_keys: tuple[str, ...]
    pos_tags: tuple[str, ...] | None
    dp_tags: tuple[str, ...] | None
    target: np.ndarray

    def __post_init__(self) -> None:
        self.target = np.asarray(self.target, dtype=np.float64)


def _toy_forward(tables: Tables, cfg: WaConfig | LcConfig, ex: ToyExample) -> np.ndarray:
    src = tables["src"].gather(ex.src_keys)
    if isinstance(cfg, WaConfig):
        return wa_forward(src, ex.pos_tags, ex.dp_tags, tables, cfg)
    return lc_forward(src, ex.pos_tags, ex.dp_tags, tables, cfg)


def _toy_loss(tables: Tables, cfg: WaConfig | LcConfig, dataset: Sequence[ToyExample]) -> float:
    total = 0.0
    for ex in dataset:
        out = _toy_forward(tables, cfg, ex)
        total += float(np.mean((out - ex.target) ** 2))
    return total / len(dataset)


def fit_toy(
    tables: Tables,
    cfg: WaConfig | LcConfig,
    dataset: Sequence[ToyExample],
    steps: int,
    lr: float,
) -> list[float]:
    """Full-batch gradient descent on the mean squared error between the
    composed embedding and the target. Returns steps+1 loss values (before
    any update, then after each step). Tables with trainable=False are left
    bit-identical; for linearized concatenation the projection and bias
    always train."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if not dataset:
        raise ValueError("dataset must be non-empty")
    losses = [_toy_loss(tables, cfg, dataset)]
    for _ in range(steps):
        src_grads: dict[str, np.ndarray] = {}
        tag_grads: dict[str, dict[str, np.ndarray]] = {"pos": {}, "dp": {}}
        proj_grad = None
        bias_grad = None
        for ex in dataset:
            src = tables["src"].gather(ex.src_keys)
            if isinstance(cfg, WaConfig):
                out = wa_forward(src, ex.pos_tags, ex.dp_tags, tables, cfg)
                upstream = 2.0 * (out - ex.target) / (out.size * len(dataset))
                g_src, g_tab = wa_backward(upstream, ex.pos_tags, ex.dp_tags, cfg)
            else:
                out = lc_forward(src, ex.pos_tags, ex.dp_tags, tables, cfg)
                upstream = 2.0 * (out - ex.target) / (out.size * len(dataset))
                g_src, g_tab, g_proj, g_bias = lc_backward(
                    upstream, src, ex.pos_tags, ex.dp_tags, tables, cfg
                )
                proj_grad = g_proj if proj_grad is None else proj_grad + g_proj
                if g_bias is not None:
                    bias_grad = g_bias if bias_grad is None else bias_grad + g_bias
            for i, key in enumerate(ex.src_keys):
                if key in src_grads:
                    src_grads[key] = src_grads[key] + g_src[i]
                else:
                    src_grads[key] = g_src[i].copy()
            for layer, grads in g_tab.items():
                acc = tag_grads[layer]
                for tag, g in grads.items():
                    if tag in acc:
                        acc[tag] = acc[tag] + g
                    else:
                        acc[tag] = g
        if tables["src"].trainable:
            for key, g in src_grads.items():
                tables["src"].vectors[key] = tables["src"].vectors[key] - lr * g
        for layer in ("pos", "dp"):
            table = tables.get(layer)
            if table is not None and table.trainable:
                for tag, g in tag_grads[layer].items():
                    table.vectors[tag] = table.vectors[tag] - lr * g
        if isinstance(cfg, LcConfig):
            cfg.projection = cfg.projection - lr * proj_grad
            if cfg.bias is not None and bias_grad is not None:
                cfg.bias = cfg.bias - lr * bias_grad
        losses.append(_toy_loss(tables, cfg, dataset))
    return losses


# ---------------------------------------------------------------------------
# Finite-difference verification
# ---------------------------------------------------------------------------

FD_EPSILON = 1e-5
FD_TOLERANCE = 1e-4


@dataclass
class GradCheckCase:
    kind: str
    dim: int
    length: int
    seed: int
    max_error: float
    n_params: int

    @property
    def ok(self) -> bool:
        return self.max_error <= FD_TOLERANCE


def _scaled_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


def _fd_probe(loss_fn, array: np.ndarray, analytic: np.ndarray, eps: float) -> float:
    """Central finite differences of loss_fn over every entry of ``array``,
    compared entrywise against the analytic gradient; returns max error."""
    worst = 0.0
    it = np.nditer(array, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = array[idx]
        array[idx] = orig + eps
        plus = loss_fn()
        array[idx] = orig - eps
        minus = loss_fn()
        array[idx] = orig
        numeric = (plus - minus) / (2.0 * eps)
        worst = max(worst, _scaled_error(float(analytic[idx]), numeric))
    return worst


def gradcheck_wa(dim: int, length: int, seed: int, eps: float = FD_EPSILON) -> GradCheckCase:
    rng = np.random.default_rng(seed)
    pos_pool = [f"P{i}" for i in range(3)]
    dp_pool = [f"D{i}" for i in range(3)]
    tables = {
        "pos": TagEmbeddingTable.random_init("pos", pos_pool + ["P_unused"], dim, seed + 1),
        "dp": TagEmbeddingTable.random_init("dp", dp_pool + ["D_unused"], dim, seed + 2),
    }
    raw = rng.uniform(0.1, 1.0, size=3)
    w = raw / raw.sum()
    # renormalize exactly so construction passes the strict sum check
    cfg = WaConfig(float(w[0]), float(w[1]), float(1.0 - w[0] - w[1]))
    src = rng.standard_normal((length, dim))
    pos_tags = [pos_pool[rng.integers(len(pos_pool))] for _ in range(length)]
    dp_tags = [dp_pool[rng.integers(len(dp_pool))] for _ in range(length)]
    upstream = rng.standard_normal((length, dim))

    def loss() -> float:
        return float(np.sum(wa_forward(src, pos_tags, dp_tags, tables, cfg) * upstream))

    grad_src, grad_tables = wa_backward(upstream, pos_tags, dp_tags, cfg)
    worst = _fd_probe(loss, src, grad_src, eps)
    n_params = src.size
    for key in ("pos", "dp"):
        table = tables[key]
        for tag, vec in table.vectors.items():
            analytic = grad_tables[key].get(tag, np.zeros(dim))
            worst = max(worst, _fd_probe(loss, vec, analytic, eps))
            n_params += vec.size
    return GradCheckCase("wa", dim, length, seed, worst, n_params)


def gradcheck_lc(dim: int, length: int, seed: int, eps: float = FD_EPSILON) -> GradCheckCase:
    rng = np.random.default_rng(seed)
    dim_pos = int(rng.integers(1, 6))
    dim_dp = int(rng.integers(1, 6))
    pos_pool = [f"P{i}" for i in range(3)]
    dp_pool = [f"D{i}" for i in range(3)]
    tables = {
        "pos": TagEmbeddingTable.random_init("pos", pos_pool + ["P_unused"], dim_pos, seed + 1),
        "dp": TagEmbeddingTable.random_init("dp", dp_pool + ["D_unused"], dim_dp, seed + 2),
    }
    cfg = LcConfig.random_init(dim, dim_pos, dim_dp, seed + 3)
    src = rng.standard_normal((length, dim))
    pos_tags = [pos_pool[rng.integers(len(pos_pool))] for _ in range(length)]
    dp_tags = [dp_pool[rng.integers(len(dp_pool))] for _ in range(length)]
    upstream = rng.standard_normal((length, dim))

    def loss() -> float:
        return float(np.sum(lc_forward(src, pos_tags, dp_tags, tables, cfg) * upstream))

    grad_src, grad_tables, grad_proj, grad_bias = lc_backward(
        upstream, src, pos_tags, dp_tags, tables, cfg
    )
    worst = _fd_probe(loss, src, grad_src, eps)
    n_params = src.size
    worst = max(worst, _fd_probe(loss, cfg.projection, grad_proj, eps))
    n_params += cfg.projection.size
    if cfg.bias is not None:
        worst = max(worst, _fd_probe(loss, cfg.bias, grad_bias, eps))
        n_params += cfg.bias.size
    for key in ("pos", "dp"):
        table = tables[key]
        for tag, vec in table.vectors.items():
            analytic = grad_tables[key].get(tag, np.zeros(table.dim))
            worst = max(worst, _fd_probe(loss, vec, analytic, eps))
            n_params += vec.size
    return GradCheckCase("lc", dim, length, seed, worst, n_params)


def run_gradcheck(
    seed: int = 0,
    dims: Sequence[int] = (2, 8, 16),
    lengths: Sequence[int] = (1, 3, 7),
    repeats: int = 6,
) -> list[GradCheckCase]:
    """Randomized finite-difference suite over both methods; dims x lengths
    x repeats cases per method (54 each with the defaults)."""
    cases = []
    k = 0
    for d in dims:
        for n in lengths:
            for _ in range(repeats):
                cases.append(gradcheck_wa(d, n, seed + k))
                cases.append(gradcheck_lc(d, n, seed + k + 1))
                k += 2
    return cases
