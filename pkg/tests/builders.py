"""Random generators shared by the unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from dirackit.linear_dirac import (
    construct_graph_flat,
    construct_graph_sharp,
    direct_sum,
    verify_dirac,
)
from dirackit.subspaces import PontryaginSpace, null_space, span

KINDS = ("graph_flat", "graph_sharp", "direct_sum", "explicit")


def random_space(rng, n: int, partial: bool) -> PontryaginSpace:
    if not partial or n == 1:
        return PontryaginSpace.full_dual(n) if rng.random() < 0.5 else PontryaginSpace(n, rng.normal(size=(n, n)) + 3 * np.eye(n))
    m = int(rng.integers(1, n))
    B = rng.normal(size=(m, n))
    return PontryaginSpace(n, B)


def random_skew(rng, m: int) -> np.ndarray:
    A = rng.normal(size=(m, m))
    return A - A.T


def random_flat(rng, P: PontryaginSpace):
    """Graph of a skew map over a subspace F that contains ker B, so it certifies."""
    S = random_skew(rng, P.dim_Eflat)
    Q = -S @ P.pairing_B
    kerB = null_space(P.pairing_B, scale=P.scale) if P.dim_Eflat < P.dim_E else np.zeros((0, P.dim_E))
    extra = rng.normal(size=(int(rng.integers(0, P.dim_E + 1)), P.dim_E))
    F = span(list(kerB) + list(extra), P.dim_E) if len(kerB) + len(extra) else None
    if F is not None and F.dim == 0:
        F = None
    return construct_graph_flat(P, Q, F)


def random_sharp(rng, P: PontryaginSpace):
    S = random_skew(rng, P.dim_Eflat)
    Pmap = np.linalg.pinv(P.pairing_B) @ S
    return construct_graph_sharp(P, Pmap)


def random_explicit(rng, P: PontryaginSpace):
    """A flat graph re-expressed through a randomly mixed basis."""
    base = random_flat(rng, P)
    k = base.D.dim
    M = rng.normal(size=(k, k)) + 2 * np.eye(k)
    return verify_dirac(span(list(M @ base.D.basis), P.ambient_dim), P)


def random_construction(rng, kind: str, n: int, partial: bool):
    if kind == "direct_sum":
        n1 = max(1, n // 2)
        n2 = max(1, n - n1)
        a = random_flat(rng, random_space(rng, n1, partial))
        b = random_sharp(rng, random_space(rng, n2, False)) if rng.random() < 0.5 else random_flat(rng, random_space(rng, n2, partial))
        return direct_sum(a, b)
    P = random_space(rng, n, partial)
    if kind == "graph_flat":
        return random_flat(rng, P)
    if kind == "graph_sharp":
        return random_sharp(rng, P)
    return random_explicit(rng, P)


def suite(count: int = 500, seed: int = 2024):
    """``count`` constructions cycling through kinds, dims 1..8 and both dual types."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        kind = KINDS[i % len(KINDS)]
        n = 1 + (i // len(KINDS)) % 8
        partial = (i // (len(KINDS) * 8)) % 2 == 1
        out.append((kind, n, partial, random_construction(rng, kind, n, partial)))
    return out
