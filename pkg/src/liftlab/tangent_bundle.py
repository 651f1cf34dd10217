"""Structures on TM: non-linear connection, adapted frame, lift metric.

A point of TM is (x, y): chart position and fiber direction.  The
non-linear connection induced by the Levi-Civita connection is

    N_i^j(x, y) = y^a Gamma^j_{ai},     stored as  N[i][j].

Frame and coframe are stored column-wise (column A = components of the
A-th basis element / covector in the coordinate frame {d/dx, d/dy} resp.
coordinate coframe {dx, dy}):

    frame   F = [[ I, 0], [-N^T, I]]      columns {X_h, X_hbar}
    coframe Q = [[ I, N], [ 0,   I]]      columns {dx^h, delta y^h}

so duality is the matrix identity F @ Q.T = I, coordinate components of a
vector are F @ (adapted components), and a bilinear form with adapted
matrix M has coordinate matrix Q @ M @ Q.T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr_dsl, manifold
from .dualnum import mat_inv, to_float_array, value
from .errors import ConfigError, SingularMatrixError
from .manifold import ManifoldSpec


@dataclass(frozen=True)
class TMPoint:
    """Tangent-bundle point: base position x and fiber direction y."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ConfigError("TMPoint needs equal-length x and y vectors")

    @property
    def dim(self) -> int:
        return len(self.x)

    def as_state(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class LiftMetricCoeffs:
    """Coefficients (a, b, c) of the lift metric a*g1 + b*g2 + c*g3."""

    a: float
    b: float
    c: float

    @property
    def discriminant(self) -> float:
        return self.a * self.c - self.b * self.b

    def require_nonsingular(self):
        if self.discriminant == 0.0:
            raise ConfigError(
                f"singular coefficients: ac - b^2 = 0 for (a, b, c) = "
                f"({self.a}, {self.b}, {self.c})"
            )


def signature_classify(coeffs: LiftMetricCoeffs) -> str:
    """'riemannian' | 'pseudo' | 'singular' for the 2n x 2n lift metric."""
    d = coeffs.discriminant
    if d == 0.0:
        return "singular"
    if d > 0.0 and coeffs.a > 0.0:
        return "riemannian"
    return "pseudo"


# ---------------------------------------------------------------------------
# non-linear connection


def nonlinear_connection_matrix(spec: ManifoldSpec, x, y):
    """N[i][j] = y^a Gamma^j_{ai}; dual-capable."""
    n = spec.dim
    gamma = manifold.christoffel_matrix(spec, x)
    return [
        [sum(y[a] * gamma[j][a][i] for a in range(n)) for j in range(n)]
        for i in range(n)
    ]


def nonlinear_connection(spec: ManifoldSpec, p: TMPoint) -> np.ndarray:
    return to_float_array(nonlinear_connection_matrix(spec, list(p.x), list(p.y)))


def chart_transform_n(
    spec_from: ManifoldSpec,
    spec_to: ManifoldSpec,
    chart_map,
    p: TMPoint,
) -> np.ndarray:
    """Transport N from `spec_from`'s chart through `chart_map` (a vector of
    ExprAst giving target coordinates as functions of source coordinates).

    Applies the transformation rule

        N'[i'][h'] = J[h'][h] * ( Jinv[i][i'] N[i][h] + H[h][i'][a'] y'[a'] )

    where J is the chart Jacobian, y' = J y, and H is the Hessian of the
    inverse map, recovered from the forward Hessian via
    H = -Jinv . (d2 map) . Jinv . Jinv.  Matches the native computation in
    the target chart at the mapped point.
    """
    n = spec_from.dim
    if len(chart_map) != n or spec_to.dim != n:
        raise ConfigError("chart map dimension mismatch")
    x = list(p.x)
    jac = np.array(
        [[expr_dsl.derivative(chart_map[hp], x, 1, h) for h in range(n)] for hp in range(n)]
    )  # jac[h'][h] = d x^{h'} / d x^h
    det = np.linalg.det(jac)
    if abs(det) < 1e-12:
        raise SingularMatrixError("chart map Jacobian is singular at the given point")
    jinv = np.linalg.inv(jac)  # jinv[h][h'] = d x^h / d x^{h'}
    hess_fwd = np.array(
        [
            [[expr_dsl.derivative(chart_map[hp], x, 2, (pq, q)) for q in range(n)] for pq in range(n)]
            for hp in range(n)
        ]
    )  # hess_fwd[h'][p][q] = d2 x^{h'} / dx^p dx^q
    # Hessian of the inverse map: H[h][i'][a'] = d2 x^h / dx^{i'} dx^{a'}
    hess_inv = -np.einsum("hk,kpq,pi,qa->hia", jinv, hess_fwd, jinv, jinv)

    n_src = nonlinear_connection(spec_from, p)
    y_tgt = jac @ p.y
    out = np.zeros((n, n))
    for ip in range(n):
        for hp in range(n):
            s = 0.0
            for h in range(n):
                inner = sum(jinv[i, ip] * n_src[i, h] for i in range(n))
                inner += sum(hess_inv[h, ip, ap] * y_tgt[ap] for ap in range(n))
                s += jac[hp, h] * inner
            out[ip, hp] = s
    return out


# ---------------------------------------------------------------------------
# adapted frame


@dataclass
class AdaptedFrame:
    point: TMPoint
    frame: np.ndarray    # 2n x 2n, columns = {X_h, X_hbar} in {d/dx, d/dy}
    coframe: np.ndarray  # 2n x 2n, columns = {dx^h, delta y^h} in {dx, dy}
    n_coeffs: np.ndarray

    def to_adapted_vector(self, v_coord: np.ndarray) -> np.ndarray:
        return self.coframe.T @ v_coord

    def to_coordinate_vector(self, v_adapted: np.ndarray) -> np.ndarray:
        return self.frame @ v_adapted

    def to_adapted_bilinear(self, m_coord: np.ndarray) -> np.ndarray:
        return self.frame.T @ m_coord @ self.frame

    def to_coordinate_bilinear(self, m_adapted: np.ndarray) -> np.ndarray:
        return self.coframe @ m_adapted @ self.coframe.T


def adapted_frame(spec: ManifoldSpec, p: TMPoint) -> AdaptedFrame:
    n = spec.dim
    nmat = nonlinear_connection(spec, p)
    eye = np.eye(n)
    frame = np.block([[eye, np.zeros((n, n))], [-nmat.T, eye]])
    coframe = np.block([[eye, nmat], [np.zeros((n, n)), eye]])
    dual_defect = np.abs(frame @ coframe.T - np.eye(2 * n)).max()
    if dual_defect > 1e-12:
        raise SingularMatrixError(f"frame/coframe duality defect {dual_defect}")
    return AdaptedFrame(p, frame, coframe, nmat)


# ---------------------------------------------------------------------------
# lift metric


@dataclass
class LiftMetricValue:
    point: TMPoint
    coeffs: LiftMetricCoeffs
    adapted_blocks: np.ndarray     # [[a g, b g], [b g, c g]]
    coordinate_matrix: np.ndarray  # same form in the coordinate coframe


def lift_blocks(coeffs: LiftMetricCoeffs, g):
    """Adapted-basis block matrix of the lift metric; dual-capable."""
    n = len(g)
    out = [[0.0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = coeffs.a * g[i][j]
            out[i][n + j] = coeffs.b * g[i][j]
            out[n + i][j] = coeffs.b * g[i][j]
            out[n + i][n + j] = coeffs.c * g[i][j]
    return out


def lift_metric(spec: ManifoldSpec, coeffs: LiftMetricCoeffs, p: TMPoint) -> LiftMetricValue:
    coeffs.require_nonsingular()
    g, _ = manifold.metric_at(spec, p.x)
    blocks = np.array(lift_blocks(coeffs, g.tolist()))
    fr = adapted_frame(spec, p)
    coordinate = fr.to_coordinate_bilinear(blocks)
    return LiftMetricValue(p, coeffs, blocks, coordinate)


def lift_metric_adapted_general(spec: ManifoldSpec, coeffs: LiftMetricCoeffs, x):
    """Adapted blocks with dual-capable entries (depends on x only)."""
    return lift_blocks(coeffs, manifold.metric_matrix(spec, x))


def determinant_identity_defect(spec: ManifoldSpec, coeffs: LiftMetricCoeffs, p: TMPoint) -> float:
    """Relative defect of det(g~) = (ac - b^2)^n (det g)^2."""
    n = spec.dim
    val = lift_metric(spec, coeffs, p)
    g, _ = manifold.metric_at(spec, p.x)
    lhs = float(np.linalg.det(val.adapted_blocks))
    rhs = coeffs.discriminant ** n * float(np.linalg.det(g)) ** 2
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)
