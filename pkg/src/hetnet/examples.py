"""The two three-node comparison networks (chain and tree) in both variants."""

from __future__ import annotations

import numpy as np

from .model import NetworkSpec, homogenize, make_spec

I2 = np.eye(2)


def _chain_W() -> np.ndarray:
    W = np.zeros((3, 3))
    W[1, 0] = W[2, 1] = 1.0
    return W


def _tree_W() -> np.ndarray:
    W = np.zeros((3, 3))
    W[1, 0] = W[2, 0] = 1.0
    return W


def example1_homogeneous() -> NetworkSpec:
    A = [[1, 0], [2, 1]]
    B = [[1, 2], [0, 1]]
    C = [[1, 0], [0, 2]]
    return make_spec([A] * 3, [B] * 3, [C] * 3, _chain_W(), I2, [1, 0, 0])


def example1_heterogeneous() -> NetworkSpec:
    As = [[[1, 0], [2, 1]], [[1, 0], [0, 1]], [[1, 2], [0, 1]]]
    Bs = [[[1, 0], [0, 1]], [[1, 0], [0, 2]], [[2, 0], [0, 1]]]
    Cs = [[[0, 1], [0, 0]], [[0, 2], [0, 0]], [[0, 3], [0, 0]]]
    return make_spec(As, Bs, Cs, _chain_W(), I2, [1, 0, 0])


def example2_heterogeneous() -> NetworkSpec:
    As = [[[0, 1], [2, 0]], [[1, 3], [0, 1]], [[2, 3], [0, 2]]]
    Bs = [[[1, 0], [0, 1]], [[2, 0], [0, 1]], [[1, 0], [0, 3]]]
    Cs = [[[0, 1], [1, 0]], [[2, 1], [1, 3]], [[3, 1], [1, 0]]]
    H = [[0, 1], [1, 0]]
    return make_spec(As, Bs, Cs, _tree_W(), H, [1, 0, 0])


def example2_homogeneous() -> NetworkSpec:
    """Tree with every node given node 1's matrices (the homogeneous variant lists none)."""
    return homogenize(example2_heterogeneous())


ALL = {
    "example1_homo": example1_homogeneous,
    "example1_hetero": example1_heterogeneous,
    "example2_homo": example2_homogeneous,
    "example2_hetero": example2_heterogeneous,
}
