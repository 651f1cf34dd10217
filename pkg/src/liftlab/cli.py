"""Batch front-end: JSON config in, JSON report (and optional CSV) out.

Commands:
    liftlab analyze <config.json>              classify the configured fields
    liftlab verify  <config.json> --suite S    run verification suites
    liftlab catalog                            list built-ins as JSON lines

Exit codes: 0 all checks passed, 1 config or engine error, 2 a suite
violation or cross-check failure (the report is still written for 0/2).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, conformal_analyzer, lie_calculus, lift_fields, manifold
from . import flow_oracle, tangent_bundle
from .conformal_analyzer import AnalysisGrid, SuiteReport, Tolerances
from .errors import ConfigError, LiftLabError
from .flow_oracle import OracleSettings
from .lift_fields import LiftField
from .manifold import ManifoldSpec
from .tangent_bundle import LiftMetricCoeffs

EQ1_TOL = 1e-9
LEMMA1_TOL = 1e-6
LEMMA3_TOL = 1e-9

SUITE_NAMES = ("lemma1", "lemma3-duality", "lemma4-oracle", "eq1", "theorem1", "theorem2")


@dataclass
class FieldSpecEntry:
    kind: str
    label: str
    lift: LiftField
    base: lift_fields.BaseField | None = None


@dataclass
class RunConfig:
    spec: ManifoldSpec
    fields: list  # of FieldSpecEntry
    coeffs: LiftMetricCoeffs
    grid: AnalysisGrid
    tolerances: Tolerances
    oracle: OracleSettings
    report_path: str
    csv_path: str | None
    echo: dict = field(default_factory=dict)


def _load_manifold(node) -> ManifoldSpec:
    if isinstance(node, str):
        return manifold.catalog_manifold(node)
    if not isinstance(node, dict):
        raise ConfigError("manifold must be a catalog name or an object")
    try:
        dim = int(node["dim"])
        metric = node["metric"]
    except KeyError as missing:
        raise ConfigError(f"manifold object needs key {missing}") from None
    return manifold.manifold_from_strings(
        node.get("name", "custom"), dim, metric, node.get("domain_hint")
    )


def _load_field(node, spec: ManifoldSpec, index: int) -> FieldSpecEntry:
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError(f"field #{index} must be an object with a 'kind'")
    kind = node["kind"]
    label = node.get("label", f"field{index}:{kind}")
    if kind in ("complete", "horizontal", "vertical"):
        if "name" in node:
            base = lift_fields.catalog_field(node["name"], spec.dim)
        elif "V" in node:
            base = lift_fields.base_field_from_strings(node["V"], spec.dim, label=label)
        else:
            raise ConfigError(f"field #{index}: give 'V' expressions or a catalog 'name'")
        build = {
            "complete": lift_fields.complete_lift,
            "horizontal": lift_fields.horizontal_lift,
            "vertical": lift_fields.vertical_lift,
        }[kind]
        lift = build(base, spec)
        lift.label = label
        return FieldSpecEntry(kind, label, lift, base)
    if kind == "fiber_preserving":
        for key in ("alpha", "beta", "horiz"):
            if key not in node:
                raise ConfigError(f"field #{index}: fiber_preserving needs '{key}'")
        lift = lift_fields.affine_fiber_field(
            spec, node["alpha"], node["beta"], node["horiz"], label
        )
        return FieldSpecEntry(kind, label, lift)
    if kind == "general":
        lift = lift_fields.general_field(
            node["horiz"], node["vert"], spec.dim, label
        )
        return FieldSpecEntry(kind, label, lift)
    raise ConfigError(f"field #{index}: unknown kind {kind!r}")


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path!r}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path!r} is not valid JSON: {err}") from None

    spec = _load_manifold(raw.get("manifold", "euclidean2"))

    co = raw.get("metric_coeffs", {})
    try:
        coeffs = LiftMetricCoeffs(float(co["a"]), float(co["b"]), float(co["c"]))
    except KeyError:
        raise ConfigError("metric_coeffs must give a, b and c") from None
    coeffs.require_nonsingular()

    fields = [
        _load_field(node, spec, i) for i, node in enumerate(raw.get("fields", []))
    ]

    gnode = raw.get("grid", {})
    count = int(gnode.get("count", 16))
    seed = int(gnode.get("seed", 0))
    mode = gnode.get("mode", "random")
    fiber_box = gnode.get("fiber_box")
    if mode == "random":
        grid = conformal_analyzer.random_grid(spec, count, seed, fiber_box)
    elif mode == "lattice":
        grid = conformal_analyzer.lattice_grid(spec, count, fiber_box)
    else:
        raise ConfigError(f"unknown grid mode {mode!r}")

    tnode = raw.get("tolerances", {})
    tol = Tolerances(
        killing_tol=float(tnode.get("killing_tol", 1e-6)),
        residual_tol=float(tnode.get("residual_tol", 1e-4)),
        constancy_tol=float(tnode.get("constancy_tol", 1e-5)),
        cross_check_tol=float(tnode.get("cross_check_tol", 1e-4)),
    )

    onode = raw.get("oracle", {})
    oracle = OracleSettings(
        t_step=float(onode.get("t_step", 1e-3)), steps=int(onode.get("steps", 64))
    )

    out = raw.get("outputs", {})
    report_path = out.get("report_path", "liftlab_report.json")
    csv_path = out.get("csv_path")

    return RunConfig(
        spec, fields, coeffs, grid, tol, oracle, report_path, csv_path, raw
    )


# ---------------------------------------------------------------------------
# suites over a config


def _grid_subset(grid: AnalysisGrid, k: int):
    return grid.points[: max(1, min(k, len(grid.points)))]


def suite_lemma1(cfg: RunConfig) -> SuiteReport:
    """Closed-form adapted-frame brackets against numeric commutators."""
    n = cfg.spec.dim
    worst = 0.0
    worst_bar = 0.0
    slots = [(i, b) for i in range(n) for b in (False, True)]
    for p in _grid_subset(cfg.grid, 6):
        for s1 in slots:
            for s2 in slots:
                closed = lie_calculus.adapted_bracket(cfg.spec, p, s1, s2)
                numeric = lie_calculus.numeric_adapted_bracket(cfg.spec, p, s1, s2)
                worst = max(worst, float(np.abs(closed - numeric).max()))
                if s1[1] and s2[1]:
                    worst_bar = max(worst_bar, float(np.abs(closed).max()))
    passed = worst <= LEMMA1_TOL and worst_bar == 0.0
    return SuiteReport(
        "lemma1",
        passed,
        instances=[{"worst_commutator_defect": worst, "vertical_bracket_max": worst_bar}],
        violations=[] if passed else [{"worst_commutator_defect": worst}],
        worst_defect=worst,
        note=f"tolerance {LEMMA1_TOL:g}",
    )


def suite_lemma3_duality(cfg: RunConfig) -> SuiteReport:
    """Leibniz/duality identity for the Lie derivative of frame + coframe."""
    report = SuiteReport("lemma3-duality", True, note=f"tolerance {LEMMA3_TOL:g}")
    worst = 0.0
    for entry in cfg.fields:
        if not entry.lift.fiber_preserving:
            continue
        for p in _grid_subset(cfg.grid, 6):
            lf = lie_calculus.lie_frame(entry.lift, cfg.spec, p)
            worst = max(worst, lf.duality_defect())
        report.instances.append({"field": entry.label, "duality_defect": worst})
    report.worst_defect = worst
    if worst > LEMMA3_TOL:
        report.violations.append({"duality_defect": worst})
        report.passed = False
    return report


def suite_lemma4_oracle(cfg: RunConfig) -> SuiteReport:
    """Closed-form Lie derivative of the lift metric against the flow
    oracle, at the config's coefficients and oracle settings."""
    report = SuiteReport(
        "lemma4-oracle", True, note=f"tolerance {cfg.tolerances.cross_check_tol:g}"
    )
    worst = 0.0
    for entry in cfg.fields:
        if not entry.lift.fiber_preserving:
            continue
        field_worst = 0.0
        for p in _grid_subset(cfg.grid, 8):
            lcf = lie_calculus.lie_gtilde(entry.lift, cfg.spec, cfg.coeffs, p)
            fr = tangent_bundle.adapted_frame(cfg.spec, p)
            cf_coord = fr.to_coordinate_bilinear(lcf.matrix)
            lor = flow_oracle.numeric_lie_derivative(
                entry.lift, cfg.spec, cfg.coeffs, p, cfg.oracle.t_step, cfg.oracle.steps
            )
            gt = tangent_bundle.lift_metric(cfg.spec, cfg.coeffs, p)
            scale = max(np.linalg.norm(cf_coord), np.linalg.norm(gt.coordinate_matrix))
            field_worst = max(
                field_worst, float(np.linalg.norm(cf_coord - lor.matrix) / scale)
            )
        report.instances.append({"field": entry.label, "oracle_defect": field_worst})
        worst = max(worst, field_worst)
    report.worst_defect = worst
    if worst > cfg.tolerances.cross_check_tol:
        report.violations.append({"oracle_defect": worst})
        report.passed = False
    return report


def suite_eq1(cfg: RunConfig) -> SuiteReport:
    """Partial-derivative vs covariant form of the base Lie derivative on
    the metric and on the connection-difference (1,2) tensor."""
    report = SuiteReport("eq1", True, note=f"tolerance {EQ1_TOL:g}")
    flat = manifold.euclidean(cfg.spec.dim)
    tensors = [
        ("metric", lie_calculus.MetricField(cfg.spec)),
        ("connection_difference", lie_calculus.ConnectionDifferenceField(cfg.spec, flat)),
    ]
    bases = [e.base for e in cfg.fields if e.base is not None]
    if not bases:
        bases = [lift_fields.base_field_from_strings(["x1", "x2"][: cfg.spec.dim], cfg.spec.dim)]
    worst = 0.0
    for v in bases:
        for name, tensor in tensors:
            for p in [pt.x for pt in _grid_subset(cfg.grid, 6)]:
                part, cov = lie_calculus.base_lie_derivative(v, tensor, cfg.spec, p)
                worst = max(worst, float(np.abs(part - cov).max()))
            report.instances.append({"field": v.label, "tensor": name, "defect": worst})
    report.worst_defect = worst
    if worst > EQ1_TOL:
        report.violations.append({"eq1_defect": worst})
        report.passed = False
    return report


def suite_theorem1(cfg: RunConfig) -> SuiteReport:
    bases = [e.base for e in cfg.fields if e.base is not None]
    if not bases:
        return SuiteReport("theorem1", True, note="no base fields configured; vacuous")
    return conformal_analyzer.verify_theorem1(
        cfg.spec, cfg.coeffs, bases, cfg.grid, cfg.tolerances, "both", cfg.oracle
    )


def suite_theorem2(cfg: RunConfig) -> SuiteReport:
    fields = [e.lift for e in cfg.fields if e.lift.fiber_preserving]
    if not fields:
        return SuiteReport("theorem2", True, note="no fiber-preserving fields; vacuous")
    return conformal_analyzer.verify_theorem2(
        cfg.spec, cfg.coeffs, fields, cfg.grid, cfg.tolerances, "both", cfg.oracle
    )


SUITES = {
    "lemma1": suite_lemma1,
    "lemma3-duality": suite_lemma3_duality,
    "lemma4-oracle": suite_lemma4_oracle,
    "eq1": suite_eq1,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
}


# ---------------------------------------------------------------------------
# report plumbing


def _write_report(report: dict, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(cfg: RunConfig, field_reports, path: str):
    n = cfg.spec.dim
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["field"]
            + [f"x{i+1}" for i in range(n)]
            + [f"y{i+1}" for i in range(n)]
            + ["omega", "residual"]
        )
        for rep in field_reports:
            for p, om, res in rep.samples:
                writer.writerow(
                    [rep.label]
                    + [repr(float(v)) for v in p.x]
                    + [repr(float(v)) for v in p.y]
                    + [repr(om), repr(res)]
                )


def _base_report(cfg: RunConfig) -> dict:
    return {
        "schema": 1,
        "engine_version": __version__,
        "config": cfg.echo,
        "manifold": cfg.spec.name,
        "coefficients": {"a": cfg.coeffs.a, "b": cfg.coeffs.b, "c": cfg.coeffs.c},
        "signature": tangent_bundle.signature_classify(cfg.coeffs),
    }


def cmd_analyze(config_path: str, perturb_closed_form: float = 0.0) -> int:
    t0 = time.perf_counter()
    cfg = load_config(config_path)
    report = _base_report(cfg)
    field_reports = []
    any_cross_fail = False
    for entry in cfg.fields:
        method = "both" if entry.lift.fiber_preserving else "flow_oracle"
        rep = conformal_analyzer.classify(
            entry.lift,
            cfg.spec,
            cfg.coeffs,
            cfg.grid,
            cfg.tolerances,
            method,
            cfg.oracle,
            perturb_closed_form=perturb_closed_form,
            on_cross_fail="record",
        )
        any_cross_fail = any_cross_fail or rep.cross_check_failed
        field_reports.append(rep)
    report["fields"] = [rep.to_dict() for rep in field_reports]
    report["wall_time_s"] = time.perf_counter() - t0
    _write_report(report, cfg.report_path)
    if cfg.csv_path:
        _write_csv(cfg, field_reports, cfg.csv_path)
    return 2 if any_cross_fail else 0


def cmd_verify(config_path: str, suite_names) -> int:
    t0 = time.perf_counter()
    cfg = load_config(config_path)
    for name in suite_names:
        if name not in SUITES:
            raise ConfigError(
                f"unknown suite {name!r}; available: {', '.join(SUITE_NAMES)}"
            )
    report = _base_report(cfg)
    suites = {}
    all_passed = True
    for name in suite_names:
        result = SUITES[name](cfg)
        suites[name] = result.to_dict()
        all_passed = all_passed and result.passed
    report["suites"] = suites
    report["wall_time_s"] = time.perf_counter() - t0
    _write_report(report, cfg.report_path)
    return 0 if all_passed else 2


def cmd_catalog(stream=None) -> int:
    stream = stream or sys.stdout
    for name in sorted(manifold.CATALOG):
        spec = manifold.CATALOG[name]()
        entry = {
            "type": "manifold",
            "name": name,
            "dim": spec.dim,
            "domain_hint": [list(b) for b in (spec.domain_hint or [])],
        }
        print(json.dumps(entry, sort_keys=True), file=stream)
    for name in sorted(lift_fields.CATALOG_FIELDS):
        components, describes = lift_fields.CATALOG_FIELDS[name]
        entry = {
            "type": "field",
            "name": name,
            "dim": len(components),
            "components": list(components),
            "description": describes,
        }
        print(json.dumps(entry, sort_keys=True), file=stream)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="liftlab",
        description="lift-metric geometry engine: analyze and verify conformal "
        "vector fields on tangent bundles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="classify the configured fields")
    p_an.add_argument("config")
    p_an.add_argument(
        "--perturb-closed-form",
        type=float,
        nargs="?",
        const=1e-3,
        default=0.0,
        help="testing hook: corrupt the closed form by this relative amount "
        "(the cross-check must then fail with exit code 2)",
    )

    p_ve = sub.add_parser("verify", help="run verification suites")
    p_ve.add_argument("config")
    p_ve.add_argument(
        "--suite",
        action="append",
        default=[],
        help=f"suite to run (repeatable); one of: {', '.join(SUITE_NAMES)}",
    )

    sub.add_parser("catalog", help="list built-in manifolds and fields")

    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args.config, args.perturb_closed_form)
        if args.command == "verify":
            suites = args.suite or list(SUITE_NAMES)
            return cmd_verify(args.config, suites)
        if args.command == "catalog":
            return cmd_catalog()
        raise AssertionError("unreachable")
    except LiftLabError as err:
        print(f"liftlab: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
