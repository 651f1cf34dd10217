"""Vector fields on TM in adapted components.

A LiftField stores its adapted components (X^h, X^hbar) as callables of
(x, y) lists; both accept dual-number entries so the Lie calculus can take
exact derivatives of components along frame fields.  Kinds:

* complete / horizontal / vertical  - lifts of a base field V
* fiber_preserving                  - X^hbar affine in y, X^h = X^h(x)
* general                           - unrestricted, for negative tests only

The complete lift of V has X^h = V^h and
X^hbar = y^m (Gamma^h_{ma} V^a + d_m V^h).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr_dsl, manifold, tangent_bundle
from .dualnum import to_float_array
from .errors import ConfigError
from .expr_dsl import ExprAst
from .manifold import ManifoldSpec
from .tangent_bundle import TMPoint


@dataclass(frozen=True)
class BaseField:
    """Vector field on the base manifold, V^h(x) as expressions."""

    components: tuple  # of ExprAst
    known_class: str | None = None  # test annotation: killing | homothetic | ...
    label: str = "V"

    @property
    def dim(self) -> int:
        return len(self.components)

    def values(self, x):
        return [expr_dsl.evaluate(c, x) for c in self.components]

    def partials(self, x):
        """dv[a][h] = d_a V^h."""
        n = self.dim
        return [
            [expr_dsl.derivative(self.components[h], x, 1, a) for h in range(n)]
            for a in range(n)
        ]


def base_field_from_strings(components, dim=None, known_class=None, label="V") -> BaseField:
    dim = dim or len(components)
    if len(components) != dim:
        raise ConfigError(f"base field needs {dim} components, got {len(components)}")
    return BaseField(
        tuple(expr_dsl.parse(src, dim) for src in components), known_class, label
    )


@dataclass
class LiftField:
    """Field on TM; `horiz` and `vert` map (x, y) lists to component lists."""

    kind: str  # complete | horizontal | vertical | fiber_preserving | general
    n: int
    horiz: Callable
    vert: Callable
    label: str = "X"
    base: BaseField | None = None  # provenance for the lift kinds

    @property
    def fiber_preserving(self) -> bool:
        return self.kind != "general"

    def adapted_components(self, p: TMPoint) -> np.ndarray:
        x, y = list(p.x), list(p.y)
        return np.array(
            [float(v) for v in self.horiz(x, y)] + [float(v) for v in self.vert(x, y)]
        )

    def induced_base_values(self, x):
        """Components of the induced base field (horizontal part; depends on
        x only for fiber-preserving kinds)."""
        return self.horiz(x, [0.0] * self.n)


def complete_lift(v: BaseField, spec: ManifoldSpec) -> LiftField:
    n = spec.dim
    if v.dim != n:
        raise ConfigError("field dimension does not match the manifold")

    def horiz(x, y):
        return v.values(x)

    def vert(x, y):
        gamma = manifold.christoffel_matrix(spec, x)
        vals = v.values(x)
        dv = v.partials(x)
        return [
            sum(
                y[m] * (sum(gamma[h][m][a] * vals[a] for a in range(n)) + dv[m][h])
                for m in range(n)
            )
            for h in range(n)
        ]

    return LiftField("complete", n, horiz, vert, f"{v.label}^C", v)


def horizontal_lift(v: BaseField, spec: ManifoldSpec) -> LiftField:
    n = spec.dim
    if v.dim != n:
        raise ConfigError("field dimension does not match the manifold")
    return LiftField(
        "horizontal",
        n,
        lambda x, y: v.values(x),
        lambda x, y: [0.0] * n,
        f"{v.label}^H",
        v,
    )


def vertical_lift(v: BaseField, spec: ManifoldSpec) -> LiftField:
    n = spec.dim
    if v.dim != n:
        raise ConfigError("field dimension does not match the manifold")
    return LiftField(
        "vertical",
        n,
        lambda x, y: [0.0] * n,
        lambda x, y: v.values(x),
        f"{v.label}^V",
        v,
    )


@dataclass(frozen=True)
class AffineFiberField:
    """Fiber-preserving field with X^mbar = alpha^m_a y^a + beta^m."""

    alpha: tuple  # n x n of ExprAst, alpha[m][a] = alpha^m_a
    beta: tuple   # n of ExprAst
    horiz: tuple  # n of ExprAst
    label: str = "X"


def affine_fiber_field(spec: ManifoldSpec, alpha, beta, horiz, label="X") -> LiftField:
    """Build the fiber-preserving field from component expressions (strings
    or parsed ASTs) for alpha (n x n), beta (n) and the horizontal part (n)."""
    n = spec.dim

    def _parse(src):
        return src if isinstance(src, ExprAst) else expr_dsl.parse(src, n)

    alpha_ast = tuple(tuple(_parse(e) for e in row) for row in alpha)
    beta_ast = tuple(_parse(e) for e in beta)
    horiz_ast = tuple(_parse(e) for e in horiz)
    if len(alpha_ast) != n or any(len(r) != n for r in alpha_ast):
        raise ConfigError(f"alpha must be {n}x{n}")
    if len(beta_ast) != n or len(horiz_ast) != n:
        raise ConfigError(f"beta and horiz must have length {n}")

    def horiz_fn(x, y):
        return [expr_dsl.evaluate(e, x) for e in horiz_ast]

    def vert_fn(x, y):
        return [
            sum(expr_dsl.evaluate(alpha_ast[m][a], x) * y[a] for a in range(n))
            + expr_dsl.evaluate(beta_ast[m], x)
            for m in range(n)
        ]

    lf = LiftField("fiber_preserving", n, horiz_fn, vert_fn, label)
    return lf


def general_field(horiz_sources, vert_sources, n: int, label="X") -> LiftField:
    """Unrestricted field on TM.  Component expressions use 2n variables:
    x1..xn are base coordinates, x(n+1)..x(2n) the fiber coordinates."""
    horiz_ast = [expr_dsl.parse(s, 2 * n) for s in horiz_sources]
    vert_ast = [expr_dsl.parse(s, 2 * n) for s in vert_sources]
    if len(horiz_ast) != n or len(vert_ast) != n:
        raise ConfigError(f"general field needs {n} + {n} components")

    def horiz(x, y):
        return [expr_dsl.evaluate(e, list(x) + list(y)) for e in horiz_ast]

    def vert(x, y):
        return [expr_dsl.evaluate(e, list(x) + list(y)) for e in vert_ast]

    return LiftField("general", n, horiz, vert, label)


def complete_lift_alpha(v: BaseField, spec: ManifoldSpec, x):
    """alpha[m][a] = Gamma^m_{ah} V^h + d_a V^m, the position-only tensor
    whose contraction with y gives the complete lift's vertical part."""
    n = spec.dim
    gamma = manifold.christoffel_matrix(spec, x)
    vals = v.values(x)
    dv = v.partials(x)
    return [
        [sum(gamma[m][a][h] * vals[h] for h in range(n)) + dv[a][m] for a in range(n)]
        for m in range(n)
    ]


def coordinate_components(x_field: LiftField, spec: ManifoldSpec, p: TMPoint) -> np.ndarray:
    """Components in the coordinate frame {d/dx, d/dy}: frame @ adapted."""
    fr = tangent_bundle.adapted_frame(spec, p)
    return fr.to_coordinate_vector(x_field.adapted_components(p))


def coordinate_components_general(x_field: LiftField, spec: ManifoldSpec, x, y):
    """Dual-capable coordinate components (used by the flow integrator):
    x-part = X^h, y-part m = X^mbar - N_h^m X^h."""
    n = x_field.n
    h = x_field.horiz(x, y)
    v = x_field.vert(x, y)
    nmat = tangent_bundle.nonlinear_connection_matrix(spec, x, y)
    dy = [v[m] - sum(nmat[hh][m] * h[hh] for hh in range(n)) for m in range(n)]
    return list(h) + dy


# ---------------------------------------------------------------------------
# base-field catalog

CATALOG_FIELDS = {
    # name -> (components, description)
    "constant_x": (("1", "0"), "unit field along x1"),
    "constant_y": (("0", "1"), "unit field along x2"),
    "rotation": (("-x2", "x1"), "rotation about the origin (cartesian chart)"),
    "dilation": (("x1", "x2"), "radial dilation from the origin"),
    "angular": (("0", "1"), "coordinate field along x2 (polar/spherical charts)"),
    "radial_dilation": (("x1", "0"), "radial dilation in the polar chart"),
    "conformal_quadratic": (
        ("x1^2 - x2^2", "2*x1*x2"),
        "planar conformal field with non-constant factor 2*x1",
    ),
}

# (manifold, field, base classification on that manifold)
CATALOG_PAIRS = (
    ("euclidean2", "rotation", "killing"),
    ("euclidean2", "dilation", "homothetic"),
    ("euclidean2", "constant_x", "killing"),
    ("euclidean2", "conformal_quadratic", "conformal"),
    ("polar2", "angular", "killing"),
    ("polar2", "radial_dilation", "homothetic"),
    ("sphere2", "angular", "killing"),
    ("halfplane2", "constant_x", "killing"),
    ("halfplane2", "dilation", "killing"),
    ("torus_flat2", "constant_x", "killing"),
    ("torus_flat2", "constant_y", "killing"),
)


def catalog_field(name: str, dim: int = 2, known_class=None) -> BaseField:
    try:
        components, _ = CATALOG_FIELDS[name]
    except KeyError:
        raise ConfigError(
            f"unknown catalog field {name!r}; available: {sorted(CATALOG_FIELDS)}"
        ) from None
    if len(components) != dim:
        raise ConfigError(f"catalog field {name!r} has dimension {len(components)}")
    return base_field_from_strings(components, dim, known_class, label=name)


def catalog_cases():
    """(spec, base_field) pairs for every catalog manifold/field pairing."""
    out = []
    for mname, fname, cls in CATALOG_PAIRS:
        spec = manifold.catalog_manifold(mname)
        out.append((spec, catalog_field(fname, spec.dim, cls)))
    return out


def canonical_dilation_field(spec: ManifoldSpec, label="fiber_dilation") -> LiftField:
    """The affine field with alpha = identity, beta = 0, no horizontal part:
    vertical part equals y itself."""
    n = spec.dim
    alpha = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    return affine_fiber_field(spec, alpha, ["0"] * n, ["0"] * n, label)
