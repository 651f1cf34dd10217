"""Conformal-factor extraction, field classification, and theorem suites.

From L = Lie derivative of the lift metric and the metric value g~, the
factor of a would-be conformal relation L = 2 Omega g~ is recovered by
trace projection, Omega = tr(g~^{-1} L) / (4n), with the scale-normalized
residual ||L - 2 Omega g~||_F / ||g~||_F vanishing exactly when the field
is conformal at that point.

Verdicts, decided over a sample grid:

* non_conformal          some residual >= residual_tol
* killing                all residuals and |Omega| < killing_tol
* homothetic             residuals ok, std(Omega) < constancy_tol
* conformal_inessential  Omega non-constant but depends on x only
* conformal_essential    Omega genuinely depends on the fiber

A field whose Omega depends on both x and y is reported essential (it is
certainly not a function of position alone); the raw derivative norms are
always included so other readings can be applied downstream.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import flow_oracle, lie_calculus, lift_fields, manifold, tangent_bundle
from .dualnum import Dual, mat_inv, value
from .errors import ConfigError, CrossCheckError
from .flow_oracle import OracleSettings
from .lie_calculus import BilinearFormValue
from .lift_fields import BaseField, LiftField
from .manifold import ManifoldSpec
from .tangent_bundle import LiftMetricCoeffs, LiftMetricValue, TMPoint


@dataclass
class Tolerances:
    killing_tol: float = 1e-6
    residual_tol: float = 1e-4
    constancy_tol: float = 1e-5
    cross_check_tol: float = 1e-4

    def as_dict(self):
        return {
            "killing_tol": self.killing_tol,
            "residual_tol": self.residual_tol,
            "constancy_tol": self.constancy_tol,
            "cross_check_tol": self.cross_check_tol,
        }


@dataclass
class AnalysisGrid:
    """Sample points on TM: deterministic lattice or seeded random."""

    points: list  # of TMPoint
    mode: str
    count: int
    seed: int | None = None

    def __post_init__(self):
        if self.count < 8:
            raise ConfigError(f"grid count must be at least 8, got {self.count}")


def _fiber_box(spec: ManifoldSpec, fiber_box):
    if fiber_box is None:
        return [(-1.5, 1.5)] * spec.dim
    fiber_box = [tuple(map(float, b)) for b in fiber_box]
    if len(fiber_box) == 1:
        fiber_box = fiber_box * spec.dim
    if len(fiber_box) != spec.dim:
        raise ConfigError("fiber_box must list one interval or one per dimension")
    return fiber_box


def random_grid(spec: ManifoldSpec, count: int, seed: int = 0, fiber_box=None) -> AnalysisGrid:
    rng = np.random.default_rng(seed)
    fbox = _fiber_box(spec, fiber_box)
    box = list(spec.sample_box()) + list(fbox)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    pts = []
    for _ in range(count):
        z = lo + (hi - lo) * rng.random(2 * spec.dim)
        pts.append(TMPoint(z[: spec.dim], z[spec.dim :]))
    return AnalysisGrid(pts, "random", count, seed)


def lattice_grid(spec: ManifoldSpec, count: int, fiber_box=None) -> AnalysisGrid:
    n2 = 2 * spec.dim
    per_axis = max(2, int(np.ceil(count ** (1.0 / n2))))
    fbox = _fiber_box(spec, fiber_box)
    box = list(spec.sample_box()) + list(fbox)
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)[:count]
    pts = [TMPoint(z[: spec.dim], z[spec.dim :]) for z in flat]
    return AnalysisGrid(pts, "lattice", len(pts))


def base_grid(spec: ManifoldSpec, count: int, seed: int = 0):
    """Random sample points on the base manifold."""
    rng = np.random.default_rng(seed)
    return manifold.sample_points(spec, count, rng)


# ---------------------------------------------------------------------------
# extraction


def extract_conformal_factor(form: BilinearFormValue, gt: LiftMetricValue):
    """(Omega, residual) of L = 2 Omega g~ by trace projection.

    `form` and the metric are compared in the form's own basis.
    """
    if form.basis == "adapted":
        gmat = gt.adapted_blocks
    elif form.basis == "coordinate":
        gmat = gt.coordinate_matrix
    else:
        raise ConfigError(f"unknown basis {form.basis!r}")
    return _extract(form.matrix, gmat)


def _extract(lmat: np.ndarray, gmat: np.ndarray):
    dim2 = gmat.shape[0]
    ginv = np.linalg.inv(gmat)
    omega = float(np.trace(ginv @ lmat)) / (2.0 * dim2)
    residual = float(
        np.linalg.norm(lmat - 2.0 * omega * gmat) / np.linalg.norm(gmat)
    )
    return omega, residual


def _omega_general(x_field, spec, coeffs, x, y):
    """Trace-projected Omega with dual-capable inputs (closed form)."""
    n = x_field.n
    lmat = lie_calculus.lie_gtilde_matrix(x_field, spec, coeffs, x, y)
    gmat = tangent_bundle.lift_metric_adapted_general(spec, coeffs, x)
    ginv = mat_inv(gmat)
    tr = 0.0
    for i in range(2 * n):
        for j in range(2 * n):
            tr = tr + ginv[i][j] * lmat[j][i]
    return tr / (4.0 * n)


def omega_gradients(x_field, spec, coeffs, p: TMPoint):
    """(d Omega/dx, d Omega/dy) at p via dual seeding of the closed form."""
    n = x_field.n
    gx, gy = [], []
    for i in range(n):
        xs = [Dual(v, 1.0 if k == i else 0.0) for k, v in enumerate(p.x)]
        ys = [Dual(v, 0.0) for v in p.y]
        om = _omega_general(x_field, spec, coeffs, xs, ys)
        gx.append(om.im if isinstance(om, Dual) else 0.0)
    for k in range(n):
        xs = [Dual(v, 0.0) for v in p.x]
        ys = [Dual(v, 1.0 if q == k else 0.0) for q, v in enumerate(p.y)]
        om = _omega_general(x_field, spec, coeffs, xs, ys)
        gy.append(om.im if isinstance(om, Dual) else 0.0)
    return np.array(gx, dtype=float), np.array(gy, dtype=float)


# ---------------------------------------------------------------------------
# classification


@dataclass
class ConformalReport:
    label: str
    classification: str
    samples: list  # (TMPoint, omega, residual)
    omega_stats: dict  # mean/std/min/max
    residual_max: float
    dOmega_dx_norm: float
    dOmega_dy_norm: float
    tolerances: dict
    method: str
    cross_check_max: float | None = None
    cross_check_failed: bool = False
    kind: str | None = None

    @property
    def omega(self) -> float:
        return self.omega_stats["mean"]

    def to_dict(self):
        return {
            "label": self.label,
            "kind": self.kind,
            "classification": self.classification,
            "omega_stats": self.omega_stats,
            "residual_max": self.residual_max,
            "dOmega_dx_norm": self.dOmega_dx_norm,
            "dOmega_dy_norm": self.dOmega_dy_norm,
            "tolerances": self.tolerances,
            "method": self.method,
            "cross_check_max": self.cross_check_max,
            "cross_check_failed": self.cross_check_failed,
            "samples": [
                {
                    "x": list(map(float, p.x)),
                    "y": list(map(float, p.y)),
                    "omega": om,
                    "residual": res,
                }
                for p, om, res in self.samples
            ],
        }


def decide_classification(omegas, residuals, dx_norm, dy_norm, tol: Tolerances) -> str:
    omegas = np.asarray(omegas)
    residuals = np.asarray(residuals)
    if residuals.max() >= tol.residual_tol:
        return "non_conformal"
    if residuals.max() < tol.killing_tol and np.abs(omegas).max() < tol.killing_tol:
        return "killing"
    if omegas.std() < tol.constancy_tol:
        return "homothetic"
    if dy_norm < tol.constancy_tol:
        return "conformal_inessential"
    return "conformal_essential"


def _map_points(fn, points):
    """Apply fn to each point, optionally in parallel (LIFTLAB_THREADS);
    results keep grid order either way."""
    workers = int(os.environ.get("LIFTLAB_THREADS", "1") or "1")
    if workers <= 1 or len(points) < 4:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points))


def classify(
    x_field: LiftField,
    spec: ManifoldSpec,
    coeffs: LiftMetricCoeffs,
    grid: AnalysisGrid,
    tol: Tolerances | None = None,
    method: str = "both",
    oracle: OracleSettings | None = None,
    perturb_closed_form: float = 0.0,
    on_cross_fail: str = "raise",
) -> ConformalReport:
    """Classify a lift field against the lift metric over a grid.

    method: "closed_form", "flow_oracle", or "both" (default: each point is
    evaluated by both routes and they must agree within cross_check_tol;
    verdict statistics come from the closed form).
    `perturb_closed_form` is the fault-injection hook: it adds that
    fraction of ||g~|| to one closed-form matrix entry.
    """
    tol = tol or Tolerances()
    oracle = oracle or OracleSettings()
    if method not in ("closed_form", "flow_oracle", "both"):
        raise ConfigError(f"unknown method {method!r}")
    use_cf = method in ("closed_form", "both")
    use_or = method in ("flow_oracle", "both")
    if use_cf and not x_field.fiber_preserving:
        raise ConfigError("closed-form classification needs a fiber-preserving field")

    def analyze(p: TMPoint):
        gt = tangent_bundle.lift_metric(spec, coeffs, p)
        fr = tangent_bundle.adapted_frame(spec, p)
        out = {}
        cf_coord = None
        if use_cf:
            lcf = lie_calculus.lie_gtilde(x_field, spec, coeffs, p)
            mat = lcf.matrix.copy()
            if perturb_closed_form:
                bump = perturb_closed_form * np.linalg.norm(gt.adapted_blocks)
                mat[0, 0] += bump
                mat = 0.5 * (mat + mat.T)
            out["cf"] = _extract(mat, gt.adapted_blocks)
            cf_coord = fr.to_coordinate_bilinear(mat)
        if use_or:
            lor = flow_oracle.numeric_lie_derivative(
                x_field, spec, coeffs, p, oracle.t_step, oracle.steps
            )
            out["or"] = _extract(lor.matrix, gt.coordinate_matrix)
            if use_cf:
                scale = max(
                    np.linalg.norm(cf_coord), np.linalg.norm(gt.coordinate_matrix)
                )
                out["defect"] = float(np.linalg.norm(cf_coord - lor.matrix) / scale)
        return out

    results = _map_points(analyze, grid.points)

    cross_max = None
    failed = False
    if use_cf and use_or:
        cross_max = max(r["defect"] for r in results)
        if cross_max > tol.cross_check_tol:
            failed = True
            if on_cross_fail == "raise":
                raise CrossCheckError(
                    f"closed form and flow oracle disagree for {x_field.label}: "
                    f"defect {cross_max:.3e} > {tol.cross_check_tol:.1e}"
                )

    key = "cf" if use_cf else "or"
    omegas = np.array([r[key][0] for r in results])
    residuals = np.array([r[key][1] for r in results])

    if use_cf:
        gx_norms, gy_norms = [], []
        for p in grid.points:
            gx, gy = omega_gradients(x_field, spec, coeffs, p)
            gx_norms.append(np.linalg.norm(gx))
            gy_norms.append(np.linalg.norm(gy))
        dx_norm = float(max(gx_norms))
        dy_norm = float(max(gy_norms))
    else:
        dx_norm, dy_norm = _oracle_omega_gradients(
            x_field, spec, coeffs, grid, oracle
        )

    classification = decide_classification(omegas, residuals, dx_norm, dy_norm, tol)
    stats = {
        "mean": float(omegas.mean()),
        "std": float(omegas.std()),
        "min": float(omegas.min()),
        "max": float(omegas.max()),
    }
    samples = [
        (p, float(om), float(res))
        for p, om, res in zip(grid.points, omegas, residuals)
    ]
    return ConformalReport(
        label=x_field.label,
        classification=classification,
        samples=samples,
        omega_stats=stats,
        residual_max=float(residuals.max()),
        dOmega_dx_norm=dx_norm,
        dOmega_dy_norm=dy_norm,
        tolerances=tol.as_dict(),
        method=method,
        cross_check_max=cross_max,
        cross_check_failed=failed,
        kind=x_field.kind,
    )


def _oracle_omega_gradients(x_field, spec, coeffs, grid, oracle, h=1e-4, max_points=8):
    """Central-difference Omega gradients along the oracle route, on a
    subsample of the grid."""
    n = x_field.n

    def omega_at(p):
        gt = tangent_bundle.lift_metric(spec, coeffs, p)
        lor = flow_oracle.numeric_lie_derivative(
            x_field, spec, coeffs, p, oracle.t_step, oracle.steps
        )
        return _extract(lor.matrix, gt.coordinate_matrix)[0]

    dx_norm = dy_norm = 0.0
    for p in grid.points[:max_points]:
        gx = np.zeros(n)
        gy = np.zeros(n)
        for i in range(n):
            dxv = np.zeros(n)
            dxv[i] = h
            gx[i] = (
                omega_at(TMPoint(p.x + dxv, p.y)) - omega_at(TMPoint(p.x - dxv, p.y))
            ) / (2 * h)
            gy[i] = (
                omega_at(TMPoint(p.x, p.y + dxv)) - omega_at(TMPoint(p.x, p.y - dxv))
            ) / (2 * h)
        dx_norm = max(dx_norm, float(np.linalg.norm(gx)))
        dy_norm = max(dy_norm, float(np.linalg.norm(gy)))
    return dx_norm, dy_norm


def analyze_base(
    v: BaseField,
    spec: ManifoldSpec,
    points=None,
    tol: Tolerances | None = None,
    count: int = 16,
    seed: int = 0,
) -> ConformalReport:
    """Run the same extraction on the base manifold: L_V g = 2 rho g."""
    tol = tol or Tolerances()
    n = spec.dim
    pts = points if points is not None else base_grid(spec, count, seed)
    metric_field = lie_calculus.MetricField(spec)
    omegas, residuals = [], []
    for x in pts:
        lv, _ = lie_calculus.base_lie_derivative(v, metric_field, spec, x)
        g, _ = manifold.metric_at(spec, x)
        dim = n
        om = float(np.trace(np.linalg.inv(g) @ lv)) / (2.0 * dim)
        res = float(np.linalg.norm(lv - 2.0 * om * g) / np.linalg.norm(g))
        omegas.append(om)
        residuals.append(res)
    omegas = np.array(omegas)
    residuals = np.array(residuals)

    # rho gradient in position, by dual seeding of the trace projection
    def rho_general(x):
        gm = manifold.metric_matrix(spec, x)
        ginv = mat_inv(gm)
        vvals = v.values(x)
        dv = v.partials(x)  # dv[a][h] = d_a V^h
        dg = manifold.metric_partials(spec, x)
        tr = 0.0
        for i in range(n):
            for j in range(n):
                lv_ij = sum(vvals[a] * dg[a][i][j] for a in range(n))
                lv_ij = lv_ij + sum(gm[a][j] * dv[i][a] + gm[i][a] * dv[j][a] for a in range(n))
                tr = tr + ginv[j][i] * lv_ij
        return tr / (2.0 * n)

    dx_norm = 0.0
    for x in pts:
        grad = []
        for i in range(n):
            xs = [Dual(float(xv), 1.0 if k == i else 0.0) for k, xv in enumerate(x)]
            om = rho_general(xs)
            grad.append(om.im if isinstance(om, Dual) else 0.0)
        dx_norm = max(dx_norm, float(np.linalg.norm(grad)))

    classification = decide_classification(omegas, residuals, dx_norm, 0.0, tol)
    stats = {
        "mean": float(omegas.mean()),
        "std": float(omegas.std()),
        "min": float(omegas.min()),
        "max": float(omegas.max()),
    }
    samples = [
        (TMPoint(np.asarray(x, dtype=float), np.zeros(n)), float(om), float(res))
        for x, om, res in zip(pts, omegas, residuals)
    ]
    return ConformalReport(
        label=v.label,
        classification=classification,
        samples=samples,
        omega_stats=stats,
        residual_max=float(residuals.max()),
        dOmega_dx_norm=dx_norm,
        dOmega_dy_norm=0.0,
        tolerances=tol.as_dict(),
        method="closed_form",
        kind="base",
    )


# ---------------------------------------------------------------------------
# theorem suites


@dataclass
class SuiteReport:
    name: str
    passed: bool
    instances: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    worst_defect: float | None = None
    note: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "instances": self.instances,
            "violations": self.violations,
            "worst_defect": self.worst_defect,
            "note": self.note,
        }


def verify_theorem1(
    spec: ManifoldSpec,
    coeffs: LiftMetricCoeffs,
    base_fields,
    grid: AnalysisGrid,
    tol: Tolerances | None = None,
    method: str = "both",
    oracle: OracleSettings | None = None,
) -> SuiteReport:
    """Every conformal-or-better complete lift must have constant, fiber-
    independent Omega; every conformal-or-better horizontal/vertical lift
    must have Omega = 0.  Non-conformal lifts are vacuous instances."""
    tol = tol or Tolerances()
    if tangent_bundle.signature_classify(coeffs) != "riemannian":
        raise ConfigError("theorem suites run in the Riemannian regime (a>0, ac-b^2>0)")
    report = SuiteReport("theorem1", True)
    lifts = (
        ("complete", lift_fields.complete_lift),
        ("horizontal", lift_fields.horizontal_lift),
        ("vertical", lift_fields.vertical_lift),
    )
    for v in base_fields:
        for kind, build in lifts:
            x_field = build(v, spec)
            rep = classify(x_field, spec, coeffs, grid, tol, method, oracle)
            inst = {
                "field": x_field.label,
                "lift": kind,
                "classification": rep.classification,
                "omega_mean": rep.omega_stats["mean"],
                "omega_std": rep.omega_stats["std"],
                "dOmega_dy_norm": rep.dOmega_dy_norm,
                "residual_max": rep.residual_max,
                "vacuous": rep.classification == "non_conformal",
            }
            if rep.classification != "non_conformal":
                if kind == "complete":
                    ok = (
                        rep.omega_stats["std"] < tol.constancy_tol
                        and rep.dOmega_dy_norm < tol.constancy_tol
                    )
                    if not ok:
                        report.violations.append(
                            {**inst, "reason": "complete lift with non-constant Omega"}
                        )
                else:
                    max_abs = max(abs(rep.omega_stats["min"]), abs(rep.omega_stats["max"]))
                    if max_abs >= tol.killing_tol:
                        report.violations.append(
                            {**inst, "reason": f"{kind} lift conformal with Omega != 0"}
                        )
            report.instances.append(inst)
    report.passed = not report.violations
    return report


def verify_theorem2(
    spec: ManifoldSpec,
    coeffs: LiftMetricCoeffs,
    fields,
    grid: AnalysisGrid,
    tol: Tolerances | None = None,
    method: str = "both",
    oracle: OracleSettings | None = None,
) -> SuiteReport:
    """No fiber-preserving field may classify conformal_inessential with
    non-constant Omega: inessential conformal implies homothetic."""
    tol = tol or Tolerances()
    if tangent_bundle.signature_classify(coeffs) != "riemannian":
        raise ConfigError("theorem suites run in the Riemannian regime (a>0, ac-b^2>0)")
    report = SuiteReport("theorem2", True)
    for x_field in fields:
        if not x_field.fiber_preserving:
            raise ConfigError("theorem 2 applies to fiber-preserving fields")
        rep = classify(x_field, spec, coeffs, grid, tol, method, oracle)
        inst = {
            "field": x_field.label,
            "classification": rep.classification,
            "omega_std": rep.omega_stats["std"],
            "residual_max": rep.residual_max,
            "vacuous": rep.classification == "non_conformal",
        }
        if (
            rep.classification == "conformal_inessential"
            and rep.omega_stats["std"] >= tol.constancy_tol
        ):
            report.violations.append(
                {**inst, "reason": "inessential conformal field with non-constant Omega"}
            )
        report.instances.append(inst)
    report.passed = not report.violations
    return report
