"""Directed Binary Tree (DBT) reference distribution over error sequences.

A sample is a complete binary tree of (alpha, beta) pairs stored in heap
order (children of node ``i`` sit at ``2i+1`` and ``2i+2``). Every node
owns an alpha interval and a beta interval inherited from its ancestors.
The root draws from [0, 1]^2; a left child draws alpha from the part of
its parent's alpha interval below the parent's alpha and beta from the
part of the parent's beta interval above the parent's beta. A right child
does the opposite. Sorting the nodes by alpha therefore sorts beta in
reverse, which is the ordering that thresholding a score imposes.

Intervals are sampled as closed ranges; hitting an endpoint exactly has
probability 2**-53 per draw.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .labeling import RNG_ID
from .metrics import CurveKind, PerformanceCurve

DEFAULT_DEPTH = 6
DEFAULT_SAMPLES = 10_000
DEFAULT_SEED = 20240501


def n_nodes(depth: int) -> int:
    return 2 ** (depth + 1) - 1


def _sample_trees(depth: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    J = n_nodes(depth)
    alpha = np.empty((count, J))
    beta = np.empty((count, J))
    # interval bounds of the current level's nodes, shape (count, 2**level)
    a_lo = np.zeros((count, 1))
    a_hi = np.ones((count, 1))
    b_lo = np.zeros((count, 1))
    b_hi = np.ones((count, 1))
    for level in range(depth + 1):
        width = 2**level
        u = rng.random((count, width, 2))
        a = a_lo + (a_hi - a_lo) * u[..., 0]
        b = b_lo + (b_hi - b_lo) * u[..., 1]
        alpha[:, width - 1 : 2 * width - 1] = a
        beta[:, width - 1 : 2 * width - 1] = b
        if level == depth:
            break
        # children of node i are 2i+1 (left) and 2i+2 (right): interleave
        nxt = [np.empty((count, 2 * width)) for _ in range(4)]
        for arr, left, right in zip(nxt, (a_lo, a, b, b_hi), (a, a_hi, b_lo, b)):
            arr[:, 0::2] = left
            arr[:, 1::2] = right
        a_lo, a_hi, b_lo, b_hi = nxt
    return alpha, beta


@dataclass(frozen=True, eq=False)
class DbtSample:
    alphas: np.ndarray
    betas: np.ndarray
    depth: int

    def __post_init__(self):
        J = n_nodes(self.depth)
        if np.shape(self.alphas) != (J,) or np.shape(self.betas) != (J,):
            raise ValueError(f"depth {self.depth} needs {J} alphas and betas")

    def in_order(self) -> tuple[np.ndarray, np.ndarray]:
        """Node pairs sorted by alpha ascending."""
        order = np.argsort(self.alphas, kind="stable")
        return self.alphas[order], self.betas[order]


def sample_dbt(depth: int, rng: np.random.Generator) -> DbtSample:
    alpha, beta = _sample_trees(depth, 1, rng)
    return DbtSample(alpha[0], beta[0], depth)


def sample_to_curve(s: DbtSample, pi: float, kind: CurveKind = CurveKind.ROC) -> PerformanceCurve:
    a, b = s.in_order()
    return PerformanceCurve(pi, np.r_[0.0, a, 1.0], np.r_[1.0, b, 0.0], kind)


@dataclass(frozen=True, eq=False)
class DbtPool:
    """``G`` DBT samples drawn from one seeded stream.

    ``alphas`` and ``betas`` have shape (G, J) in heap order.
    """

    alphas: np.ndarray
    betas: np.ndarray
    depth: int
    seed: int
    rng_id: str = RNG_ID

    def __post_init__(self):
        J = n_nodes(self.depth)
        if self.alphas.ndim != 2 or self.alphas.shape[1] != J or self.alphas.shape != self.betas.shape:
            raise ValueError(f"pool arrays must have shape (G, {J})")
        if self.alphas.shape[0] < 1:
            raise ValueError("pool must hold at least one sample")
        self.alphas.setflags(write=False)
        self.betas.setflags(write=False)

    def __len__(self) -> int:
        return self.alphas.shape[0]

    @property
    def size(self) -> int:
        return len(self)

    def __getitem__(self, g: int) -> DbtSample:
        return DbtSample(self.alphas[g], self.betas[g], self.depth)

    @property
    def samples(self) -> list[DbtSample]:
        return [self[g] for g in range(len(self))]

    @cached_property
    def curves(self) -> tuple[np.ndarray, np.ndarray]:
        """Anchored curves, shape (G, J + 2), each row sorted by alpha."""
        order = np.argsort(self.alphas, axis=1, kind="stable")
        a = np.take_along_axis(self.alphas, order, axis=1)
        b = np.take_along_axis(self.betas, order, axis=1)
        G = len(self)
        a = np.hstack([np.zeros((G, 1)), a, np.ones((G, 1))])
        b = np.hstack([np.ones((G, 1)), b, np.zeros((G, 1))])
        a.setflags(write=False)
        b.setflags(write=False)
        return a, b

    @cached_property
    def identity(self) -> str:
        """Content hash identifying the pool (hex sha256)."""
        h = hashlib.sha256()
        h.update(f"{self.rng_id}|{self.seed}|{self.depth}|{len(self)}|".encode())
        h.update(np.ascontiguousarray(self.alphas, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.betas, dtype="<f8").tobytes())
        return h.hexdigest()

    def metadata(self) -> dict:
        return {"rng_id": self.rng_id, "seed": self.seed, "depth": self.depth, "samples": len(self)}


def build_pool(depth: int = DEFAULT_DEPTH, G: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> DbtPool:
    if G < 1:
        raise ValueError(f"G must be >= 1, got {G}")
    rng = np.random.Generator(np.random.PCG64(seed))
    alpha, beta = _sample_trees(depth, G, rng)
    return DbtPool(alpha, beta, depth, seed)


def _cache_path(directory: Path, depth: int, G: int, seed: int) -> Path:
    return directory / f"dbt-{RNG_ID}-s{seed}-d{depth}-g{G}.npz"


def save_pool(pool: DbtPool, path: str | os.PathLike) -> Path:
    """Write ``pool`` to ``path`` atomically (write to a temp file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(
                fh,
                alphas=pool.alphas,
                betas=pool.betas,
                depth=np.int64(pool.depth),
                seed=np.array(str(pool.seed)),
                rng_id=np.array(pool.rng_id),
            )
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_pool(path: str | os.PathLike) -> DbtPool:
    with np.load(path, allow_pickle=False) as z:
        return DbtPool(
            alphas=z["alphas"].copy(),
            betas=z["betas"].copy(),
            depth=int(z["depth"]),
            seed=int(str(z["seed"])),
            rng_id=str(z["rng_id"]),
        )


def get_pool(depth: int = DEFAULT_DEPTH, G: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
             cache_dir: str | os.PathLike | None = None) -> DbtPool:
    """Build a pool, reading and writing ``cache_dir`` when one is given."""
    if cache_dir is None:
        return build_pool(depth, G, seed)
    path = _cache_path(Path(cache_dir), depth, G, seed)
    if path.exists():
        pool = load_pool(path)
        if (pool.rng_id, pool.seed, pool.depth, len(pool)) == (RNG_ID, seed, depth, G):
            return pool
    pool = build_pool(depth, G, seed)
    save_pool(pool, path)
    return pool
