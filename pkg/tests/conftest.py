"""Shared fixtures: canonical small spaces and the randomized corpus generators."""

import math

import numpy as np
import pytest

from hypflow.convex import busemann, combine, distance_to
from hypflow.spaces import (
    INF,
    Euclid2,
    EuclidEnd,
    HalfPlane,
    HalfPlaneEnd,
    PlanePoint,
    Tree,
    TreeEnd,
    TreePoint,
)


@pytest.fixture(scope="session")
def line():
    """L --5-- C --5-- R with both ends extendable; edge 0 toward L, edge 1 toward R."""
    return Tree(["C", "L", "R"], [("C", "L", 5.0), ("C", "R", 5.0)], ["L", "R"])


@pytest.fixture(scope="session")
def ytree():
    """Center c with unit edges to leaves u, v, w, all ends."""
    return Tree(["c", "u", "v", "w"],
                [("c", "u", 1.0), ("c", "v", 1.0), ("c", "w", 1.0)],
                ["u", "v", "w"])


@pytest.fixture(scope="session")
def hp():
    return HalfPlane()


@pytest.fixture(scope="session")
def e2():
    return Euclid2()


# ---------------------------------------------------------------------------
# randomized corpus

def random_tree(rng) -> Tree:
    n = int(rng.integers(4, 13))
    vertices = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        edges.append((f"v{parent}", f"v{i}", float(rng.uniform(0.4, 2.0))))
    deg = {v: 0 for v in vertices}
    for a, b, _ in edges:
        deg[a] += 1
        deg[b] += 1
    leaves = [v for v in vertices if deg[v] == 1]
    k = int(rng.integers(2, len(leaves) + 1))
    ends = [str(v) for v in rng.choice(leaves, size=k, replace=False)]
    return Tree(vertices, edges, ends)


def random_tree_point(rng, tree: Tree) -> TreePoint:
    eid = int(rng.integers(0, len(tree.edges)))
    return TreePoint(eid, float(rng.uniform(0.0, tree.edges[eid][2])))


def random_tree_function(rng, tree: Tree):
    """Positive Busemann combination with one dominant end; optionally a small
    distance term. Returns (f, dominant end, exact alpha)."""
    ends = tree.boundary_directions()
    dom = ends[int(rng.integers(0, len(ends)))]
    base = tree.origin()
    terms, others = [], 0.0
    for e in ends:
        if e != dom:
            w = float(rng.uniform(0.02, 0.4))
            others += w
            terms.append((w, busemann(tree, tree.ray_from(base, e))))
    margin = float(rng.uniform(0.3, 1.0))
    terms.append((others + margin, busemann(tree, tree.ray_from(base, dom))))
    f = combine(terms, "sum")
    if rng.uniform() < 0.4:
        q = random_tree_point(rng, tree)
        scale = float(rng.uniform(0.05, 0.4)) * margin
        f = combine([(1.0, f), (1.0, distance_to(tree, q, scale))], "sum")
        margin -= scale
    return f, dom, margin


def random_hp_point(rng) -> PlanePoint:
    return PlanePoint(float(rng.uniform(-3, 3)), float(math.exp(rng.uniform(-1.5, 1.5))))


def random_hp_function(rng, hp: HalfPlane):
    m = int(rng.integers(1, 4))
    anchors = []
    if rng.uniform() < 0.5:
        anchors.append(HalfPlaneEnd(INF))
    while len(anchors) < m:
        c = HalfPlaneEnd(float(rng.uniform(-5, 5)))
        if c not in anchors:
            anchors.append(c)
    dom = anchors[int(rng.integers(0, len(anchors)))]
    base = random_hp_point(rng)
    terms, others = [], 0.0
    for a in anchors:
        if a != dom:
            w = float(rng.uniform(0.02, 0.4))
            others += w
            terms.append((w, busemann(hp, hp.ray_from(base, a))))
    margin = float(rng.uniform(0.3, 1.0))
    terms.append((others + margin, busemann(hp, hp.ray_from(base, dom))))
    f = combine(terms, "sum")
    if rng.uniform() < 0.4:
        q = random_hp_point(rng)
        scale = float(rng.uniform(0.05, 0.4)) * margin
        f = combine([(1.0, f), (1.0, distance_to(hp, q, scale))], "sum")
        margin -= scale
    return f, dom, margin


def random_e2_function(rng, e2: Euclid2):
    """Clustered angles keep the resultant (the exact steepness) well away from 0."""
    while True:
        m = int(rng.integers(1, 4))
        theta0 = float(rng.uniform(0, 2 * math.pi))
        angles = [theta0] + [(theta0 + float(rng.uniform(-1.0, 1.0))) % (2 * math.pi)
                             for _ in range(m - 1)]
        weights = [float(rng.uniform(0.2, 1.0)) for _ in angles]
        resultant = abs(sum(w * complex(math.cos(a), math.sin(a))
                            for w, a in zip(weights, angles)))
        if resultant >= 0.2:
            break
    base = PlanePoint(0.0, 0.0)
    terms = [(w, busemann(e2, e2.ray_from(base, EuclidEnd(a))))
             for w, a in zip(weights, angles)]
    f = combine(terms, "sum")
    alpha = resultant
    if rng.uniform() < 0.4:
        q = PlanePoint(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
        scale = float(rng.uniform(0.05, 0.3)) * resultant
        f = combine([(1.0, f), (1.0, distance_to(e2, q, scale))], "sum")
        alpha -= scale
    return f, alpha
