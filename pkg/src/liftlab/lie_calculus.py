"""Closed-form Lie derivatives: base tensors, adapted frame, lift metrics.

Everything here works in the adapted frame, with the shared term tables

    T[i][m] = y^b X^c K_{icb}^m - X^bbar Gamma^m_{bi} - X_i(X^mbar)
    S[i][m] = X_ibar(X^mbar) - X^b Gamma^m_{bi}

where X_i(f) = d f/dx^i - N_i^k d f/dy^k and X_ibar(f) = d f/dy^i are the
frame-field derivatives of component functions, taken exactly with dual
numbers.  The Lie derivatives of the three lift summands assemble as
symmetric 2n x 2n matrices over the adapted coframe (dx block first):

    L_X g1 = (L_V g_ij) dx dx
    L_X g2 = 2[ -(g T)_sym dx dx + C_ij dx^j dy^i ],
             C_ij = L_V g_ij - g_jm (Cov_i X^m - X_ibar(X^mbar))
    L_X g3 = -2 g_mi T_j^m dx^j dy^i + D_ij dy^i dy^j,
             D_ij = L_V g_ij - 2 g_mj (Cov_i X^m - X_ibar(X^mbar))

(the raw fiber derivative enters here, not S, whose Gamma term would then
be counted twice against the Cov X one)

The dx dx and dy dy coefficient tables are symmetrized explicitly when the
matrices are assembled; the flow-pullback oracle arbitrates that this is
the correct reading, and the test suite keeps it honest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import manifold, tangent_bundle
from .dualnum import Dual, to_float_array, value
from .errors import ConfigError
from .lift_fields import BaseField, LiftField
from .manifold import ManifoldSpec
from .tangent_bundle import TMPoint


@dataclass
class BilinearFormValue:
    """A (0,2)-tensor value on TM in a declared basis."""

    point: TMPoint
    matrix: np.ndarray
    basis: str  # "adapted" | "coordinate"
    symmetric: bool = True

    def __post_init__(self):
        if self.symmetric:
            m = self.matrix
            defect = np.abs(m - m.T).max()
            scale = max(np.abs(m).max(), 1.0)
            if defect > 1e-10 * scale:
                raise AssertionError(
                    f"matrix declared symmetric has asymmetry {defect:g}"
                )


# ---------------------------------------------------------------------------
# Lie derivatives of base-manifold tensors


class MetricField:
    """The metric of a spec as a (0,2) tensor field."""

    rank = ("l", "l")

    def __init__(self, spec: ManifoldSpec):
        self.spec = spec

    def value(self, x):
        return manifold.metric_matrix(self.spec, x)


class ConnectionDifferenceField:
    """Gamma(spec_a) - Gamma(spec_b) on a shared chart: a (1,2) tensor,
    layout T[h][i][j]."""

    rank = ("u", "l", "l")

    def __init__(self, spec_a: ManifoldSpec, spec_b: ManifoldSpec):
        if spec_a.dim != spec_b.dim:
            raise ConfigError("connection difference needs equal dimensions")
        self.spec_a = spec_a
        self.spec_b = spec_b

    def value(self, x):
        ga = manifold.christoffel_matrix(self.spec_a, x)
        gb = manifold.christoffel_matrix(self.spec_b, x)
        n = self.spec_a.dim
        return [
            [[ga[k][i][j] - gb[k][i][j] for j in range(n)] for i in range(n)]
            for k in range(n)
        ]


class MixedIdentityField:
    """The (1,1) identity tensor delta^h_i (layout T[h][i])."""

    rank = ("u", "l")

    def __init__(self, dim: int):
        self.dim = dim

    def value(self, x):
        return [[1.0 if i == j else 0.0 for j in range(self.dim)] for i in range(self.dim)]


def _tensor_entry(tensor_value, idx):
    out = tensor_value
    for k in idx:
        out = out[k]
    return out


def _tensor_partials(tensor, x, n):
    """dT[a][idx...] by seeding a dual level per coordinate direction."""
    out = []
    for a in range(n):
        seeded = [Dual(v, 1.0 if k == a else 0.0) for k, v in enumerate(x)]
        val = tensor.value(seeded)

        def strip(node):
            if isinstance(node, list):
                return [strip(e) for e in node]
            return node.im if isinstance(node, Dual) else 0.0

        out.append(strip(val))
    return out


def base_lie_derivative(v: BaseField, tensor, spec: ManifoldSpec, p):
    """Lie derivative of a base tensor along V, by two routes.

    Returns (partial_form, covariant_form) as float arrays of the tensor's
    shape; the covariant route uses the Levi-Civita connection of `spec`.
    Supported ranks: (0,2), (1,1), (1,2) via the tensor's `rank` tuple.
    """
    rank = tuple(tensor.rank)
    if rank not in {("l", "l"), ("u", "l"), ("u", "l", "l")}:
        raise ConfigError(f"unsupported tensor type {rank}")
    n = spec.dim
    x = list(np.asarray(p, dtype=float))
    tval = tensor.value(x)
    dt = _tensor_partials(tensor, x, n)
    vvals = v.values(x)
    dv = v.partials(x)  # dv[a][h] = d_a V^h
    r = len(rank)

    partial = np.zeros((n,) * r)
    for idx in itertools.product(range(n), repeat=r):
        s = sum(vvals[a] * _tensor_entry(dt[a], idx) for a in range(n))
        for k, flag in enumerate(rank):
            for a in range(n):
                swapped = list(idx)
                swapped[k] = a
                entry = _tensor_entry(tval, swapped)
                if flag == "l":
                    s += dv[idx[k]][a] * entry
                else:
                    s -= dv[a][idx[k]] * entry
        partial[idx] = s

    gamma = to_float_array(manifold.christoffel_matrix(spec, x))

    def nabla_t(a, idx):
        s = _tensor_entry(dt[a], idx)
        for k, flag in enumerate(rank):
            for c in range(n):
                swapped = list(idx)
                swapped[k] = c
                entry = _tensor_entry(tval, swapped)
                if flag == "u":
                    s += gamma[idx[k]][a][c] * entry
                else:
                    s -= gamma[c][a][idx[k]] * entry
        return s

    nabla_v = [
        [dv[i][h] + sum(gamma[h][i][b] * vvals[b] for b in range(n)) for h in range(n)]
        for i in range(n)
    ]  # nabla_v[i][h] = Cov_i V^h

    covariant = np.zeros((n,) * r)
    for idx in itertools.product(range(n), repeat=r):
        s = sum(vvals[a] * nabla_t(a, idx) for a in range(n))
        for k, flag in enumerate(rank):
            for a in range(n):
                swapped = list(idx)
                swapped[k] = a
                entry = _tensor_entry(tval, swapped)
                if flag == "l":
                    s += nabla_v[idx[k]][a] * entry
                else:
                    s -= nabla_v[a][idx[k]] * entry
        covariant[idx] = s

    return partial, covariant


# ---------------------------------------------------------------------------
# adapted-frame brackets


def adapted_bracket(spec: ManifoldSpec, p: TMPoint, slot1, slot2) -> np.ndarray:
    """Closed-form bracket of two adapted frame fields, in adapted
    components.  Slots are (index, barred) pairs:

        [X_i, X_j]       = y^r K_{jir}^m X_mbar
        [X_i, X_jbar]    = Gamma^m_{ji} X_mbar
        [X_ibar, X_jbar] = 0
    """
    n = spec.dim
    (i, bar1), (j, bar2) = slot1, slot2
    out = np.zeros(2 * n)
    if bar1 and bar2:
        return out
    x, y = list(p.x), list(p.y)
    gamma = to_float_array(manifold.christoffel_matrix(spec, x))
    if not bar1 and not bar2:
        kt = to_float_array(manifold.curvature_tensor(spec, x))
        for m in range(n):
            out[n + m] = sum(p.y[r] * kt[j, i, r, m] for r in range(n))
        return out
    if not bar1 and bar2:
        for m in range(n):
            out[n + m] = gamma[m][j][i]
        return out
    # barred first slot: [X_ibar, X_j] = -[X_j, X_ibar]
    for m in range(n):
        out[n + m] = -gamma[m][i][j]
    return out


def numeric_adapted_bracket(spec: ManifoldSpec, p: TMPoint, slot1, slot2, step=1e-5) -> np.ndarray:
    """Finite-difference commutator of the frame fields (independent check
    of the closed forms), converted back to adapted components."""
    n = spec.dim

    def frame_col(z, col):
        pt = TMPoint(z[:n], z[n:])
        return tangent_bundle.adapted_frame(spec, pt).frame[:, col]

    (i, bar1), (j, bar2) = slot1, slot2
    col_a = i + (n if bar1 else 0)
    col_b = j + (n if bar2 else 0)
    z0 = p.as_state()
    ea = frame_col(z0, col_a)
    eb = frame_col(z0, col_b)
    comm = np.zeros(2 * n)
    for nu in range(2 * n):
        dz = np.zeros(2 * n)
        dz[nu] = step
        da = (frame_col(z0 + dz, col_a) - frame_col(z0 - dz, col_a)) / (2 * step)
        db = (frame_col(z0 + dz, col_b) - frame_col(z0 - dz, col_b)) / (2 * step)
        comm += ea[nu] * db - eb[nu] * da
    fr = tangent_bundle.adapted_frame(spec, p)
    return fr.to_adapted_vector(comm)


# ---------------------------------------------------------------------------
# shared ingredient tables


@dataclass
class LieIngredients:
    """Per-point term tables shared by the frame and lift-metric formulas.
    Entries may be dual-valued when the point is."""

    n: int
    g: list        # g[i][j]
    gamma: list    # gamma[k][i][j]
    kt: list       # kt[i][j][k][m]
    nmat: list     # N[i][j]
    xh: list       # X^h
    xv: list       # X^hbar
    dv: list       # dv[i][h] = d_i X^h
    lvg: list      # (L_V g)[i][j]
    cov_dv: list   # Cov_i X^m
    xbar_xv: list  # X_ibar(X^mbar), indexed [i][m]
    t_term: list   # T[i][m]
    s_term: list   # S[i][m]


def _require_fiber_preserving(x_field: LiftField):
    if not x_field.fiber_preserving:
        raise ConfigError(
            "field of kind 'general' is outside the closed-form calculus "
            "(fiber-preserving hypothesis)"
        )


def component_frame_derivatives(x_field: LiftField, spec: ManifoldSpec, x, y):
    """(X_i(X^mbar), X_ibar(X^mbar)) tables via dual seeding of the vertical
    component functions; dual-capable in (x, y)."""
    n = x_field.n
    nmat = tangent_bundle.nonlinear_connection_matrix(spec, x, y)
    dvert_dx = []
    dvert_dy = []
    for i in range(n):
        xs = [Dual(v, 1.0 if k == i else 0.0) for k, v in enumerate(x)]
        ys = [Dual(v, 0.0) for v in y]
        vals = x_field.vert(xs, ys)
        dvert_dx.append([v.im if isinstance(v, Dual) else 0.0 for v in vals])
    for k in range(n):
        xs = [Dual(v, 0.0) for v in x]
        ys = [Dual(v, 1.0 if q == k else 0.0) for q, v in enumerate(y)]
        vals = x_field.vert(xs, ys)
        dvert_dy.append([v.im if isinstance(v, Dual) else 0.0 for v in vals])
    xi_xv = [
        [
            dvert_dx[i][m] - sum(nmat[i][k] * dvert_dy[k][m] for k in range(n))
            for m in range(n)
        ]
        for i in range(n)
    ]
    return xi_xv, dvert_dy


def lie_ingredients(x_field: LiftField, spec: ManifoldSpec, x, y) -> LieIngredients:
    _require_fiber_preserving(x_field)
    n = x_field.n
    g = manifold.metric_matrix(spec, x)
    dgx = manifold.metric_partials(spec, x)
    gamma = manifold.christoffel_matrix(spec, x)
    kt = manifold.curvature_tensor(spec, x)
    nmat = tangent_bundle.nonlinear_connection_matrix(spec, x, y)
    xh = x_field.horiz(x, y)
    xv = x_field.vert(x, y)

    dv = []
    for i in range(n):
        xs = [Dual(v, 1.0 if k == i else 0.0) for k, v in enumerate(x)]
        ys = [Dual(v, 0.0) for v in y]
        vals = x_field.horiz(xs, ys)
        dv.append([v.im if isinstance(v, Dual) else 0.0 for v in vals])

    xi_xv, xbar_xv = component_frame_derivatives(x_field, spec, x, y)

    t_term = [
        [
            sum(y[b] * xh[c] * kt[i][c][b][m] for b in range(n) for c in range(n))
            - sum(xv[b] * gamma[m][b][i] for b in range(n))
            - xi_xv[i][m]
            for m in range(n)
        ]
        for i in range(n)
    ]
    s_term = [
        [
            xbar_xv[i][m] - sum(xh[b] * gamma[m][b][i] for b in range(n))
            for m in range(n)
        ]
        for i in range(n)
    ]
    cov_dv = [
        [dv[i][m] + sum(gamma[m][i][a] * xh[a] for a in range(n)) for m in range(n)]
        for i in range(n)
    ]
    lvg = [
        [
            sum(xh[a] * dgx[a][i][j] for a in range(n))
            + sum(g[a][j] * dv[i][a] for a in range(n))
            + sum(g[i][a] * dv[j][a] for a in range(n))
            for j in range(n)
        ]
        for i in range(n)
    ]
    return LieIngredients(
        n, g, gamma, kt, nmat, xh, xv, dv, lvg, cov_dv, xbar_xv, t_term, s_term
    )


# ---------------------------------------------------------------------------
# Lie derivative of the adapted frame and coframe


@dataclass
class LieFrameValue:
    """Adapted components of L_X applied to each frame/coframe element.

    Row h of `frame_h` holds L_X X_h over (X_a, X_abar); row h of
    `coframe_h` holds L_X dx^h over (dx^m, dy^m); same pattern for the
    barred families.
    """

    point: TMPoint
    frame_h: np.ndarray
    frame_v: np.ndarray
    coframe_h: np.ndarray
    coframe_v: np.ndarray

    def duality_defect(self) -> float:
        """max over (coframe, frame) pairs of <L omega, e> + <omega, L e>;
        zero because <omega, e> is constant."""
        n = self.frame_h.shape[0]
        cof = np.vstack([self.coframe_h, self.coframe_v])  # rows: omega^A
        fr = np.vstack([self.frame_h, self.frame_v])       # rows: e_B
        worst = 0.0
        for a in range(2 * n):
            for b in range(2 * n):
                lhs = cof[a][b] + fr[b][a]
                worst = max(worst, abs(lhs))
        return worst


def lie_frame(x_field: LiftField, spec: ManifoldSpec, p: TMPoint) -> LieFrameValue:
    ing = lie_ingredients(x_field, spec, list(p.x), list(p.y))
    n = ing.n
    t, s, dv = ing.t_term, ing.s_term, ing.dv
    frame_h = np.zeros((n, 2 * n))
    frame_v = np.zeros((n, 2 * n))
    coframe_h = np.zeros((n, 2 * n))
    coframe_v = np.zeros((n, 2 * n))
    for h in range(n):
        for a in range(n):
            frame_h[h][a] = -value(dv[h][a])
            frame_h[h][n + a] = value(t[h][a])
            frame_v[h][n + a] = -value(s[h][a])
            coframe_h[h][a] = value(dv[a][h])
            coframe_v[h][a] = -value(t[a][h])
            coframe_v[h][n + a] = value(s[a][h])
    return LieFrameValue(p, frame_h, frame_v, coframe_h, coframe_v)


# ---------------------------------------------------------------------------
# Lie derivatives of the lift metrics


def _sym(mat, n2):
    return [[0.5 * (mat[i][j] + mat[j][i]) for j in range(n2)] for i in range(n2)]


def lie_g1_matrix(x_field: LiftField, spec: ManifoldSpec, x, y):
    ing = lie_ingredients(x_field, spec, x, y)
    n = ing.n
    out = [[0.0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = 0.5 * (ing.lvg[i][j] + ing.lvg[j][i])
    return out


def lie_g2_matrix(x_field: LiftField, spec: ManifoldSpec, x, y):
    ing = lie_ingredients(x_field, spec, x, y)
    n = ing.n
    g, t = ing.g, ing.t_term
    tg = [[sum(t[i][m] * g[m][j] for m in range(n)) for j in range(n)] for i in range(n)]
    c = [
        [
            ing.lvg[i][j]
            - sum(g[j][m] * (ing.cov_dv[i][m] - ing.xbar_xv[i][m]) for m in range(n))
            for j in range(n)
        ]
        for i in range(n)
    ]
    out = [[0.0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = -(tg[i][j] + tg[j][i])
            out[j][n + i] = out[j][n + i] + c[i][j]
            out[n + i][j] = out[n + i][j] + c[i][j]
    return out


def lie_g3_matrix(x_field: LiftField, spec: ManifoldSpec, x, y):
    ing = lie_ingredients(x_field, spec, x, y)
    n = ing.n
    g, t = ing.g, ing.t_term
    tg = [[sum(t[i][m] * g[m][j] for m in range(n)) for j in range(n)] for i in range(n)]
    d = [
        [
            ing.lvg[i][j]
            - 2.0 * sum(g[m][j] * (ing.cov_dv[i][m] - ing.xbar_xv[i][m]) for m in range(n))
            for j in range(n)
        ]
        for i in range(n)
    ]
    out = [[0.0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            out[j][n + i] = out[j][n + i] - tg[j][i]
            out[n + i][j] = out[n + i][j] - tg[j][i]
            out[n + i][n + j] = 0.5 * (d[i][j] + d[j][i])
    return out


def lie_gtilde_matrix(x_field, spec, coeffs, x, y):
    n = x_field.n
    m1 = lie_g1_matrix(x_field, spec, x, y)
    m2 = lie_g2_matrix(x_field, spec, x, y)
    m3 = lie_g3_matrix(x_field, spec, x, y)
    return [
        [
            coeffs.a * m1[i][j] + coeffs.b * m2[i][j] + coeffs.c * m3[i][j]
            for j in range(2 * n)
        ]
        for i in range(2 * n)
    ]


def _as_form(x_field, spec, p, mat) -> BilinearFormValue:
    return BilinearFormValue(p, to_float_array(mat), "adapted", True)


def lie_g1(x_field: LiftField, spec: ManifoldSpec, p: TMPoint) -> BilinearFormValue:
    return _as_form(x_field, spec, p, lie_g1_matrix(x_field, spec, list(p.x), list(p.y)))


def lie_g2(x_field: LiftField, spec: ManifoldSpec, p: TMPoint) -> BilinearFormValue:
    return _as_form(x_field, spec, p, lie_g2_matrix(x_field, spec, list(p.x), list(p.y)))


def lie_g3(x_field: LiftField, spec: ManifoldSpec, p: TMPoint) -> BilinearFormValue:
    return _as_form(x_field, spec, p, lie_g3_matrix(x_field, spec, list(p.x), list(p.y)))


def lie_gtilde(
    x_field: LiftField,
    spec: ManifoldSpec,
    coeffs: tangent_bundle.LiftMetricCoeffs,
    p: TMPoint,
) -> BilinearFormValue:
    mat = lie_gtilde_matrix(x_field, spec, coeffs, list(p.x), list(p.y))
    return _as_form(x_field, spec, p, mat)
