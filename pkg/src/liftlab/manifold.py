"""Base-manifold geometry: metric, Christoffel symbols, curvature.

Index layout, fixed once for the whole package:

* ``gamma[k][i][j]``  = Gamma^k_{ij}        (upper, lower, lower)
* ``dgamma[l][k][i][j]`` = d_l Gamma^k_{ij}
* ``kt[i][j][k][m]``  = K_{ijk}^m           (three lower, upper LAST)

The curvature components are those of the local formula

    K_{ijk}^m = d_i G_{jk}^m - d_j G_{ik}^m + G_{ia}^m G_{jk}^a - G_{ja}^m G_{ik}^a

which the adapted-frame bracket identities consume verbatim.  With this
convention the full lowering ``K_{ijk}^a g_{am}`` carries the OPPOSITE sign
of the textbook curvature operator, so the 2-d sectional scalar exposed
here is ``-K_{1212} / det g``; it is calibrated so the round unit sphere
reports +1 and the hyperbolic half-plane -1 (see the bracket commutator
tests, which pin the operative sign numerically).

The ``*_general`` helpers accept coordinates whose entries are dual
numbers and return nested lists; the public operations take float points
and return numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr_dsl
from .dualnum import mat_inv, to_float_array, value
from .errors import ConfigError, SingularMatrixError
from .expr_dsl import ExprAst


@dataclass(frozen=True)
class ManifoldSpec:
    """A chart of a Riemannian manifold: dimension, metric component
    expressions g_ij(x), and an optional coordinate box for sampling."""

    name: str
    dim: int
    metric_exprs: tuple  # dim x dim tuple of ExprAst
    domain_hint: tuple | None = None  # ((lo, hi), ...) per coordinate

    def sample_box(self, margin: float = 0.1):
        """Domain box shrunk inward by `margin` (fraction per side), used
        for grid sampling so short flows cannot immediately exit."""
        box = self.domain_hint or tuple((-1.0, 1.0) for _ in range(self.dim))
        out = []
        for lo, hi in box:
            pad = (hi - lo) * margin
            out.append((lo + pad, hi - pad))
        return tuple(out)


def manifold_from_strings(name, dim, entries, domain_hint=None, validate=True) -> ManifoldSpec:
    """Build a spec from a dim x dim matrix of expression strings."""
    if len(entries) != dim or any(len(row) != dim for row in entries):
        raise ConfigError(f"metric matrix for {name!r} must be {dim}x{dim}")
    exprs = tuple(
        tuple(expr_dsl.parse(src, dim) for src in row) for row in entries
    )
    hint = tuple(tuple(float(v) for v in pair) for pair in domain_hint) if domain_hint else None
    if hint and len(hint) != dim:
        raise ConfigError(f"domain_hint for {name!r} must list {dim} intervals")
    spec = ManifoldSpec(name, dim, exprs, hint)
    if validate:
        _validate_metric(spec)
    return spec


def _validate_metric(spec: ManifoldSpec, samples_per_axis: int = 3):
    """Check symmetry and positive-definiteness on a small lattice over the
    sample box."""
    axes = [np.linspace(lo, hi, samples_per_axis) for lo, hi in spec.sample_box()]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    for p in pts:
        g = to_float_array(metric_matrix(spec, list(p)))
        if not np.allclose(g, g.T, rtol=0, atol=1e-10 * max(1.0, np.abs(g).max())):
            raise ConfigError(f"metric of {spec.name!r} is not symmetric at {p.tolist()}")
        eig = np.linalg.eigvalsh(g)
        if eig.min() <= 0:
            raise ConfigError(
                f"metric of {spec.name!r} is not positive definite at {p.tolist()}"
                f" (eigenvalues {eig.tolist()})"
            )


# ---------------------------------------------------------------------------
# dual-capable evaluators (nested lists in, nested lists out)


def metric_matrix(spec: ManifoldSpec, x):
    return [
        [expr_dsl.evaluate(spec.metric_exprs[i][j], x) for j in range(spec.dim)]
        for i in range(spec.dim)
    ]


def metric_inverse_matrix(spec: ManifoldSpec, x):
    try:
        return mat_inv(metric_matrix(spec, x))
    except SingularMatrixError:
        raise SingularMatrixError(
            f"metric of {spec.name!r} is singular at {[value(v) for v in x]}"
        ) from None


def metric_partials(spec: ManifoldSpec, x):
    """dg[k][i][j] = d_k g_ij, exact."""
    n = spec.dim
    return [
        [[expr_dsl.derivative(spec.metric_exprs[i][j], x, 1, k) for j in range(n)] for i in range(n)]
        for k in range(n)
    ]


def christoffel_matrix(spec: ManifoldSpec, x):
    """gamma[k][i][j] = Gamma^k_{ij} of the Levi-Civita connection."""
    n = spec.dim
    ginv = metric_inverse_matrix(spec, x)
    dg = metric_partials(spec, x)
    gamma = []
    for k in range(n):
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                s = 0.0
                for m in range(n):
                    s = s + ginv[k][m] * (dg[i][m][j] + dg[j][m][i] - dg[m][i][j])
                row.append(0.5 * s)
            rows.append(row)
        gamma.append(rows)
    return gamma


def christoffel_partials(spec: ManifoldSpec, x):
    """(gamma, dgamma) with dgamma[l][k][i][j] = d_l Gamma^k_{ij}.

    Assembled from exact first and second metric derivatives rather than
    from an extra dual level over christoffel_matrix; this keeps the float
    path at nesting depth two.
    """
    n = spec.dim
    g_inv = metric_inverse_matrix(spec, x)
    dg = metric_partials(spec, x)
    d2g = [
        [
            [
                [expr_dsl.derivative(spec.metric_exprs[i][j], x, 2, (l, k)) for j in range(n)]
                for i in range(n)
            ]
            for k in range(n)
        ]
        for l in range(n)
    ]  # d2g[l][k][i][j] = d_l d_k g_ij

    # d_l g^{km} = -g^{ka} (d_l g_ab) g^{bm}
    dginv = []
    for l in range(n):
        lk = []
        for k in range(n):
            row = []
            for m in range(n):
                s = 0.0
                for a in range(n):
                    for b in range(n):
                        s = s - g_inv[k][a] * dg[l][a][b] * g_inv[b][m]
                row.append(s)
            lk.append(row)
        dginv.append(lk)

    def S(m, i, j):
        return dg[i][m][j] + dg[j][m][i] - dg[m][i][j]

    def dS(l, m, i, j):
        return d2g[l][i][m][j] + d2g[l][j][m][i] - d2g[l][m][i][j]

    gamma = []
    dgamma = []
    for k in range(n):
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                s = 0.0
                for m in range(n):
                    s = s + g_inv[k][m] * S(m, i, j)
                row.append(0.5 * s)
            rows.append(row)
        gamma.append(rows)
    for l in range(n):
        per_k = []
        for k in range(n):
            rows = []
            for i in range(n):
                row = []
                for j in range(n):
                    s = 0.0
                    for m in range(n):
                        s = s + dginv[l][k][m] * S(m, i, j) + g_inv[k][m] * dS(l, m, i, j)
                    row.append(0.5 * s)
                rows.append(row)
            per_k.append(rows)
        dgamma.append(per_k)
    return gamma, dgamma


def curvature_tensor(spec: ManifoldSpec, x):
    """kt[i][j][k][m] = K_{ijk}^m per the local formula (module docstring)."""
    n = spec.dim
    gamma, dgamma = christoffel_partials(spec, x)
    kt = []
    for i in range(n):
        bi = []
        for j in range(n):
            bj = []
            for k in range(n):
                row = []
                for m in range(n):
                    s = dgamma[i][m][j][k] - dgamma[j][m][i][k]
                    for a in range(n):
                        s = s + gamma[m][i][a] * gamma[a][j][k] - gamma[m][j][a] * gamma[a][i][k]
                    row.append(s)
                bj.append(row)
            bi.append(bj)
        kt.append(bi)
    return kt


# ---------------------------------------------------------------------------
# public float-path operations


@dataclass
class ChristoffelValue:
    point: np.ndarray
    gamma: np.ndarray  # [k, i, j] = Gamma^k_{ij}


@dataclass
class CurvatureValue:
    point: np.ndarray
    k: np.ndarray  # [i, j, k, m] = K_{ijk}^m
    sectional: float | None = field(default=None)  # 2-d charts only


def metric_at(spec: ManifoldSpec, p):
    """Metric matrix and its inverse at a chart point (floats)."""
    x = list(np.asarray(p, dtype=float))
    if len(x) != spec.dim:
        raise ConfigError(f"point has length {len(x)}, expected {spec.dim}")
    g = to_float_array(metric_matrix(spec, x))
    g_inv = to_float_array(metric_inverse_matrix(spec, x))
    return g, g_inv


def christoffel(spec: ManifoldSpec, p) -> ChristoffelValue:
    x = list(np.asarray(p, dtype=float))
    gamma = to_float_array(christoffel_matrix(spec, x))
    return ChristoffelValue(np.asarray(p, dtype=float), gamma)


def curvature(spec: ManifoldSpec, p) -> CurvatureValue:
    x = list(np.asarray(p, dtype=float))
    kt = to_float_array(curvature_tensor(spec, x))
    sectional = None
    if spec.dim == 2:
        g, _ = metric_at(spec, p)
        det = float(np.linalg.det(g))
        lowered = float(kt[0, 1, 0, :] @ g[:, 1])
        sectional = -lowered / det
    return CurvatureValue(np.asarray(p, dtype=float), kt, sectional)


# ---------------------------------------------------------------------------
# catalog


def euclidean(n: int) -> ManifoldSpec:
    entries = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    hint = [(-2.0, 2.0)] * n
    return manifold_from_strings(f"euclidean{n}", n, entries, hint)


def polar2() -> ManifoldSpec:
    """Flat plane in the polar chart (x1 = radius, x2 = angle)."""
    return manifold_from_strings(
        "polar2", 2, [["1", "0"], ["0", "x1^2"]], [(0.5, 3.0), (-2.5, 2.5)]
    )


def sphere2(radius: float = 1.0) -> ManifoldSpec:
    """Round sphere in spherical coordinates (x1 = colatitude, x2 =
    longitude); the domain stays 0.1 away from the poles."""
    r2 = repr(float(radius) ** 2)
    return manifold_from_strings(
        "sphere2",
        2,
        [[r2, "0"], ["0", f"{r2} * sin(x1)^2"]],
        [(0.1, np.pi - 0.1), (-3.0, 3.0)],
    )


def halfplane2() -> ManifoldSpec:
    """Hyperbolic upper half-plane, curvature -1 (x2 > 0)."""
    return manifold_from_strings(
        "halfplane2", 2, [["1/x2^2", "0"], ["0", "1/x2^2"]], [(-2.0, 2.0), (0.5, 3.0)]
    )


def torus_flat2() -> ManifoldSpec:
    """Flat square torus chart; metrically euclidean, periodic domain."""
    return manifold_from_strings(
        "torus_flat2", 2, [["1", "0"], ["0", "1"]], [(-np.pi, np.pi), (-np.pi, np.pi)]
    )


CATALOG = {
    "euclidean2": lambda: euclidean(2),
    "euclidean3": lambda: euclidean(3),
    "polar2": polar2,
    "sphere2": sphere2,
    "halfplane2": halfplane2,
    "torus_flat2": torus_flat2,
}


def catalog_manifold(name: str) -> ManifoldSpec:
    try:
        return CATALOG[name]()
    except KeyError:
        raise ConfigError(
            f"unknown catalog manifold {name!r}; available: {sorted(CATALOG)}"
        ) from None


def sample_points(spec: ManifoldSpec, count: int, rng: np.random.Generator):
    """Random chart points uniform over the sample box."""
    box = spec.sample_box()
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return [lo + (hi - lo) * rng.random(spec.dim) for _ in range(count)]
