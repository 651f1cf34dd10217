"""Independent numerical Lie derivative through the flow definition.

The flow of X is integrated on TM with classical fixed-step RK4, entirely
in the coordinate basis (structurally independent of the adapted-frame
closed forms it audits).  Seeding the initial state with unit dual vectors
makes the same RK4 pass integrate the variational equation, so the flow
Jacobian comes out of the dual parts.  The Lie derivative is the central
difference in flow time of the pullback J^T g~(phi_t(p)) J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lift_fields, tangent_bundle
from .dualnum import Dual, value
from .errors import FlowDomainError
from .lie_calculus import BilinearFormValue
from .lift_fields import LiftField
from .manifold import ManifoldSpec
from .tangent_bundle import LiftMetricCoeffs, TMPoint


@dataclass
class OracleSettings:
    """Step sizes for the flow oracle; both configurable via the CLI."""

    t_step: float = 1e-3
    steps: int = 64


@dataclass
class FlowState:
    point: TMPoint
    jacobian: np.ndarray  # d phi_t / d p0, 2n x 2n
    t: float


def _domain_box(spec: ManifoldSpec, margin: float = 0.2):
    if spec.domain_hint is None:
        return None
    out = []
    for lo, hi in spec.domain_hint:
        pad = (hi - lo) * margin
        out.append((lo - pad, hi + pad))
    return out


def flow(
    x_field: LiftField,
    spec: ManifoldSpec,
    p0: TMPoint,
    t: float,
    steps: int = 64,
    jacobian: bool = True,
) -> FlowState:
    """Integrate the flow of X from p0 for time t with `steps` RK4 steps."""
    if steps < 1:
        raise ValueError("steps must be positive")
    n = x_field.n
    dim = 2 * n

    def rhs(z):
        return lift_fields.coordinate_components_general(
            x_field, spec, z[:n], z[n:]
        )

    z0 = list(p0.as_state())
    if jacobian:
        z = [Dual(v, np.eye(dim)[k]) for k, v in enumerate(z0)]
    else:
        z = list(z0)

    box = _domain_box(spec)
    h = t / steps
    for _ in range(steps):
        k1 = rhs(z)
        k2 = rhs([z[i] + (0.5 * h) * k1[i] for i in range(dim)])
        k3 = rhs([z[i] + (0.5 * h) * k2[i] for i in range(dim)])
        k4 = rhs([z[i] + h * k3[i] for i in range(dim)])
        z = [
            z[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(dim)
        ]
        xs = [value(z[i]) for i in range(n)]
        if not all(np.isfinite(value(zi)) for zi in z):
            raise FlowDomainError(f"flow of {x_field.label} became non-finite")
        if box is not None:
            for c, (lo, hi) in zip(xs, box):
                if not lo <= c <= hi:
                    raise FlowDomainError(
                        f"flow of {x_field.label} left the chart box of "
                        f"{spec.name} at x = {xs}"
                    )

    if not jacobian:
        # Jacobian not tracked; identity placeholder keeps the field typed
        return FlowState(TMPoint(z[:n], z[n:]), np.eye(dim), t)
    jac = np.array([z[i].im for i in range(dim)])
    pt = TMPoint([value(z[i]) for i in range(n)], [value(z[i]) for i in range(n, dim)])
    return FlowState(pt, jac, t)


def pullback_metric(
    x_field: LiftField,
    spec: ManifoldSpec,
    coeffs: LiftMetricCoeffs,
    p0: TMPoint,
    t: float,
    steps: int,
) -> np.ndarray:
    """(phi_t^* g~)(p0) = J^T g~(phi_t(p0)) J in the coordinate basis."""
    st = flow(x_field, spec, p0, t, steps, jacobian=True)
    gt = tangent_bundle.lift_metric(spec, coeffs, st.point)
    return st.jacobian.T @ gt.coordinate_matrix @ st.jacobian


def numeric_lie_derivative(
    x_field: LiftField,
    spec: ManifoldSpec,
    coeffs: LiftMetricCoeffs,
    p0: TMPoint,
    t_step: float = 1e-3,
    steps: int = 64,
) -> BilinearFormValue:
    """Central difference [phi_t^* g~ - phi_-t^* g~] / (2 t) at p0."""
    plus = pullback_metric(x_field, spec, coeffs, p0, t_step, steps)
    minus = pullback_metric(x_field, spec, coeffs, p0, -t_step, steps)
    mat = (plus - minus) / (2.0 * t_step)
    mat = 0.5 * (mat + mat.T)  # pullbacks are symmetric; drop round-off skew
    return BilinearFormValue(p0, mat, "coordinate", True)
