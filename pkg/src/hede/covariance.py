"""Block-diagonal covariance estimation and whitening."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, SingularBlock
from .model import DataSet

EIG_FLOOR = 1e-6


@dataclass(frozen=True)
class BlockSpec:
    """Contiguous, disjoint column ranges ``[start, end)`` covering 0..p-1."""

    boundaries: Tuple[Tuple[int, int], ...]
    max_block_size: Optional[int] = None

    def __post_init__(self):
        b = tuple((int(s), int(e)) for s, e in self.boundaries)
        if not b:
            raise ValueError("BlockSpec needs at least one block")
        if b[0][0] != 0:
            raise ValueError("first block must start at column 0")
        for (s0, e0), (s1, _) in zip(b, b[1:]):
            if e0 != s1:
                raise ValueError(f"blocks must be contiguous: {e0} != {s1}")
        for s, e in b:
            if e <= s:
                raise ValueError(f"empty block [{s}, {e})")
            if self.max_block_size is not None and e - s > self.max_block_size:
                raise ValueError(f"block [{s}, {e}) exceeds the size cap")
        object.__setattr__(self, "boundaries", b)

    @property
    def p(self) -> int:
        return self.boundaries[-1][1]

    @classmethod
    def uniform(cls, p: int, size: int) -> "BlockSpec":
        return cls(tuple((s, min(s + size, p)) for s in range(0, p, size)))

    @classmethod
    def identity(cls, p: int) -> "BlockSpec":
        return cls.uniform(p, 1)


@dataclass(frozen=True)
class BlockCovariance:
    spec: BlockSpec
    blocks: List[np.ndarray]
    inverse_sqrt_blocks: List[np.ndarray]

    def dense(self) -> np.ndarray:
        p = self.spec.p
        out = np.zeros((p, p))
        for (s, e), B in zip(self.spec.boundaries, self.blocks):
            out[s:e, s:e] = B
        return out

    @classmethod
    def identity(cls, p: int) -> "BlockCovariance":
        spec = BlockSpec.identity(p)
        ones = [np.ones((1, 1)) for _ in range(p)]
        return cls(spec, ones, ones)


def _inverse_sqrt(B, floor=True):
    B = 0.5 * (B + B.T)
    w, V = np.linalg.eigh(B)
    if floor:
        w = np.maximum(w, EIG_FLOOR * np.trace(B) / B.shape[0])
    elif w.min() <= 0:
        raise SingularBlock(f"block has eigenvalue {w.min():.3g}")
    return (V / np.sqrt(w)) @ V.T, (V * w) @ V.T


def estimate_block_covariance(data: DataSet, spec: BlockSpec,
                              floor: bool = True) -> BlockCovariance:
    """Blockwise ``X_b' X_b / n`` with eigenvalues floored at
    ``1e-6 * trace / size`` before taking inverse square roots.

    Columns of a :class:`DataSet` are centered, so this is the (1/n) sample
    covariance of each block.
    """
    if spec.p != data.p:
        raise DimensionMismatch(f"block spec covers {spec.p} columns, data has {data.p}")
    n = data.n
    biggest = max(e - s for s, e in spec.boundaries)
    if biggest >= n:
        warnings.warn(f"largest block ({biggest}) is not smaller than n ({n})")
    blocks, inv = [], []
    for s, e in spec.boundaries:
        Xb = data.X[:, s:e]
        S = Xb.T @ Xb / n
        S = 0.5 * (S + S.T)
        if not floor or np.trace(S) > 0:
            W, S_floored = _inverse_sqrt(S, floor)
        else:
            # all-zero block: nothing to whiten
            W, S_floored = np.eye(e - s), S
        blocks.append(S_floored if floor else S)
        inv.append(W)
    return BlockCovariance(spec, blocks, inv)


def whiten(data: DataSet, cov: BlockCovariance, restandardize: bool = True) -> DataSet:
    """Right-multiply each column block by its inverse square root.

    With ``restandardize`` each whitened column is rescaled to unit (1/n)
    variance. A block whose inverse square root is the identity is copied
    unchanged.
    """
    if cov.spec.p != data.p:
        raise DimensionMismatch("covariance and data have different widths")
    X = np.array(data.X, dtype=float, copy=True)
    touched = np.zeros(data.p, dtype=bool)
    for (s, e), W in zip(cov.spec.boundaries, cov.inverse_sqrt_blocks):
        if np.array_equal(W, np.eye(e - s)):
            continue
        X[:, s:e] = data.X[:, s:e] @ W
        touched[s:e] = True
    if restandardize and touched.any():
        scale = np.sqrt(np.mean(X[:, touched]**2, axis=0))
        scale[scale == 0] = 1.0
        X[:, touched] /= scale
    return DataSet(y=data.y, X=X)
