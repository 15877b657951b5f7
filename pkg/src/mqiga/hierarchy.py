"""Dyadic multilevel coarsening of tensor-product spline spaces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spline import SplineSpace1D, TensorSpace

__all__ = ("Level", "MeshHierarchy", "dyadic_coarsen", "level_cap",
           "build_hierarchy", "sigma_constant")


def dyadic_coarsen(space: SplineSpace1D) -> SplineSpace1D:
    """Remove every second interior knot, doubling the element size.

    Interior knots ``t_{p+1}, t_{p+2}, ...`` sit at element indices
    ``1, 2, ...``; the odd ones are dropped.
    """
    ne, p = space.n_elements, space.degree
    if ne < 2 or ne % 2:
        raise ValueError(f"dyadic coarsening needs an even element count >= 2, got {ne}")
    t = space.knots
    interior = t[p + 1: t.size - p - 1]
    kept = interior[1::2]
    knots = np.concatenate([t[: p + 1], kept, t[-p - 1:]])
    return SplineSpace1D(knots, p)


def level_cap(space: SplineSpace1D) -> int:
    """Number of dyadic coarsenings a direction admits: ``floor(log2(n_elements))``."""
    return int(np.floor(np.log2(space.n_elements)))


@dataclass(frozen=True)
class Level:
    spaces: tuple[SplineSpace1D, ...]
    mesh_sizes: tuple[float, ...]
    weight: float

    @property
    def mesh_size(self) -> float:
        return max(self.mesh_sizes)

    @property
    def n_elements(self) -> tuple[int, ...]:
        return tuple(s.n_elements for s in self.spaces)


@dataclass(frozen=True)
class MeshHierarchy:
    """Fine space plus ``L`` coarsened levels.

    ``levels[k-1]`` is level k. The weight ``c_k`` is the ratio of the fine
    maximum element size to the level-k maximum element size.
    """

    fine: TensorSpace
    levels: tuple[Level, ...]

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def weights(self) -> np.ndarray:
        return np.array([lv.weight for lv in self.levels])

    @property
    def h(self) -> float:
        return self.fine.mesh_size


def build_hierarchy(fine: TensorSpace, L: int) -> MeshHierarchy:
    """Coarsen each direction dyadically ``L`` times.

    A direction whose coarsening count (see :func:`level_cap`) is exhausted
    stays frozen at its coarsest space for the remaining levels. Each element
    count must be divisible by ``2**min(L, cap)``.
    """
    if L < 1:
        raise ValueError(f"number of levels must be >= 1, got {L}")
    caps = [level_cap(s) for s in fine.directions]
    for s, cap in zip(fine.directions, caps):
        if s.n_elements % 2 ** min(L, cap):
            raise ValueError(
                f"{s.n_elements} elements cannot be coarsened dyadically {min(L, cap)} times")
    h = fine.mesh_size
    current = list(fine.directions)
    levels = []
    for k in range(1, L + 1):
        current = [dyadic_coarsen(s) if k <= cap else s
                   for s, cap in zip(current, caps)]
        sizes = tuple(s.mesh_size for s in current)
        levels.append(Level(tuple(current), sizes, h / max(sizes)))
    return MeshHierarchy(fine, tuple(levels))


def sigma_constant(hier: MeshHierarchy, p: int) -> float:
    """Multilevel approximation constant ``sum_k c_k (H^(k))^{2p}``."""
    if hier.L < 1:
        raise ValueError("hierarchy has no levels")
    return float(sum(lv.weight * lv.mesh_size ** (2 * p) for lv in hier.levels))
