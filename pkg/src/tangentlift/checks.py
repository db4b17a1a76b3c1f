"""Check suites and the machine-readable report.

Every check reduces to one number, the largest absolute residual over the
sampled points, compared with a tolerance. Most checks assert that a
residual is small (``relation = "<="``); a few assert that a quantity is
visibly non-zero (``relation = ">="``).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import __version__
from . import bundle as bd
from . import geometry as geom
from . import killing as kl
from . import oracle
from .geometry import ManifoldSpec
from .sampling import sample_bundle_points

TAGS = frozenset(
    [f"E{k}" for k in range(1, 18)] + ["T1", "T2a", "T2b"]
)


@dataclass
class Entry:
    check: str
    tag: str
    spec: str
    field: str | None
    kind: str | None
    max_abs_residual: float
    tolerance: float
    relation: str = "<="
    criterion: int | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown equation tag {self.tag!r}")
        self.max_abs_residual = float(self.max_abs_residual)

    @property
    def verdict(self) -> str:
        r, t = self.max_abs_residual, self.tolerance
        ok = r <= t if self.relation == "<=" else r >= t
        return "pass" if ok else "fail"

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "equation": self.tag,
            "spec": self.spec,
            "field": self.field,
            "lift": self.kind,
            "max_abs_residual": self.max_abs_residual,
            "relation": self.relation,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "criterion": self.criterion,
        }


@dataclass
class CheckReport:
    spec: str
    seed: int
    points: int | None
    entries: list[Entry] = field(default_factory=list)
    audits: list[dict] = field(default_factory=list)
    version: str = __version__

    @property
    def failures(self) -> list[Entry]:
        return [e for e in self.entries if e.verdict == "fail"]

    @property
    def counterexamples(self) -> list[dict]:
        return [a for a in self.audits if a["verdict"] == "counterexample-candidate"]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.counterexamples

    def to_json(self) -> str:
        doc = {
            "tool": "tangentlift",
            "version": self.version,
            "spec": self.spec,
            "seed": self.seed,
            "points": self.points,
            "entries": [e.as_dict() for e in self.entries],
            "audits": self.audits,
        }
        return json.dumps(doc, indent=2, allow_nan=True) + "\n"

    def to_table(self) -> str:
        head = ("verdict", "eq", "check", "spec", "field", "lift", "residual", "rel", "tol")
        rows = [head] + [
            (e.verdict, e.tag, e.check, e.spec, e.field or "-", e.kind or "-",
             f"{e.max_abs_residual:.3e}", e.relation, f"{e.tolerance:.1e}")
            for e in self.entries
        ]
        widths = [max(len(r[k]) for r in rows) for k in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        for a in self.audits:
            line = f"{a['theorem']:<4} {a['spec']}/{a['field']}: {a['verdict']}"
            if not a["engines_agree"]:
                line += " (engines disagree)"
            lines.append(line)
            if a.get("note"):
                lines.append(f"     {a['note']}")
        return "\n".join(lines)


def _max_over(points: Iterable, fn: Callable) -> float:
    return max((float(np.max(np.abs(fn(q)))) for q in points), default=0.0)


def audit_dict(spec: ManifoldSpec, name: str, audit: kl.TheoremAudit) -> dict:
    return {"spec": spec.name, "field": name} | asdict(audit)


def _tol(default: float, override: float | None) -> float:
    return default if override is None else override


# ---------------------------------------------------------------------------
# connection and frame checks (verify-connection)


def connection_entries(spec: ManifoldSpec, points: int, seed: int, tol: float | None = None,
                       criterion: int | None = None) -> list[Entry]:
    """Connection table against the oracle, plus its two zero patterns."""
    pts = [bd.bundle_geometry(spec, q) for q in sample_bundle_points(spec, points, seed)]
    resid = {p: 0.0 for p in bd.PATTERNS}
    zeros = {p: 0.0 for p in bd.ZERO_PATTERNS}
    for bg in pts:
        table = bd.bundle_connection_at(spec, bg)
        ref = oracle.connection_to_adapted(spec, bg, oracle.levi_civita_induced(spec, bg))
        for p in bd.PATTERNS:
            resid[p] = max(resid[p], float(np.max(np.abs(table.pattern(*p) - ref.pattern(*p)))))
        for p in bd.ZERO_PATTERNS:
            zeros[p] = max(zeros[p], float(np.max(np.abs(ref.pattern(*p)))))
    out = [Entry("connection-vs-oracle", "E3", spec.name, None, bd.pattern_label(p), r,
                 _tol(1e-8, tol), criterion=criterion) for p, r in resid.items()]
    out += [Entry("connection-zero-pattern", "E3", spec.name, None, bd.pattern_label(p), r,
                  _tol(1e-10, tol), criterion=criterion) for p, r in zeros.items()]
    return out


def frame_entries(spec: ManifoldSpec, points: int, seed: int, tol: float | None = None) -> list[Entry]:
    pts = [bd.bundle_geometry(spec, q) for q in sample_bundle_points(spec, points, seed)]
    n = spec.dim
    eye = np.eye(2 * n)

    def duality(bg):
        frame, dual = bd.adapted_frame_at(spec, bg)
        return dual @ frame - eye

    def inverse(bg):
        return bd.metric_adapted_at(spec, bg).data @ bd.metric_adapted_inv_at(spec, bg).data - eye

    def congruence(bg):
        _, dual = bd.adapted_frame_at(spec, bg)
        return bd.metric_induced_at(spec, bg).data - dual.T @ bd.metric_adapted_at(spec, bg).data @ dual

    def compat(bg):
        return oracle.metric_compatibility_induced(spec, bg)

    out = [
        Entry("frame-duality", "E4", spec.name, None, None, _max_over(pts, duality), _tol(1e-12, tol)),
        Entry("metric-inverse", "E2", spec.name, None, None, _max_over(pts, inverse), _tol(1e-12, tol)),
        Entry("frame-congruence", "E1", spec.name, None, None, _max_over(pts, congruence), _tol(1e-12, tol)),
        Entry("oracle-metric-compatibility", "E3", spec.name, None, None, _max_over(pts, compat), _tol(1e-9, tol)),
    ]
    for name in spec.vector_fields:
        for kind in bd.KINDS:
            def lift_consistency(bg, kind=kind, name=name):
                _, dual = bd.adapted_frame_at(spec, bg)
                induced = bd.lift_vector(spec, name, kind, bg, bd.INDUCED)
                return bd.to_adapted_vector(induced, dual).data - bd.lift_vector(spec, name, kind, bg).data

            def covector(bg, kind=kind, name=name):
                lowered = bd.lower(bd.metric_adapted_at(spec, bg), bd.lift_vector(spec, name, kind, bg))
                return lowered.data - bd.associated_covector(spec, name, kind, bg).data

            out.append(Entry("lift-frame-consistency", "E6", spec.name, name, kind,
                             _max_over(pts, lift_consistency), _tol(1e-12, tol)))
            out.append(Entry("associated-covector", "E10", spec.name, name, kind,
                             _max_over(pts, covector), _tol(1e-12, tol)))
    return out


def verify_connection(spec: ManifoldSpec, points: int = 50, seed: int = 0, tol: float | None = None) -> CheckReport:
    report = CheckReport(spec.name, seed, points)
    report.entries += connection_entries(spec, points, seed, tol)
    report.entries += frame_entries(spec, points, seed, tol)
    return report


# ---------------------------------------------------------------------------
# per-field checks (classify, check-closed)

_COV_TAG = {"vertical": "E7", "complete": "E8", "horizontal": "E9"}
_ROT_TAG = {"vertical": "E11", "complete": "E12", "horizontal": "E13"}
_LIE_TAG = {"vertical": "E15", "complete": "E16", "horizontal": "E17"}


def lift_entries(spec: ManifoldSpec, name: str, points: int, seed: int, tol: float | None = None) -> list[Entry]:
    """Closed-form lift blocks against the generic assembly and the oracle."""
    pts = [bd.bundle_geometry(spec, q) for q in sample_bundle_points(spec, points, seed)]
    out = []
    for kind in bd.KINDS:
        def cov_specialized(bg):
            return (kl.cov_deriv_lift(spec, name, kind, bg, "closed").data
                    - kl.cov_deriv_lift(spec, name, kind, bg, "assembled").data)

        def cov_generic(bg):
            return (kl.cov_deriv_lift(spec, name, kind, bg, "assembled").data
                    - oracle.covariant_derivative_adapted(spec, name, kind, bg).data)

        def rot_printed(bg):
            return kl.rotation_lift(spec, name, kind, bg, "closed").data - oracle.rotation_adapted(spec, name, kind, bg).data

        def rot_assembled(bg):
            return kl.rotation_lift(spec, name, kind, bg, "assembled").data - oracle.rotation_adapted(spec, name, kind, bg).data

        def lie_printed(bg):
            return (kl.lie_derivative_lift(spec, name, kind, bg, "closed", symmetrize=True).data
                    - oracle.lie_derivative_adapted(spec, name, kind, bg).data)

        def lie_unsymmetrized(bg):
            return kl.lie_derivative_lift(spec, name, kind, bg, "closed").data - oracle.lie_derivative_adapted(spec, name, kind, bg).data

        def lie_assembled(bg):
            return kl.lie_derivative_lift(spec, name, kind, bg, "assembled").data - oracle.lie_derivative_adapted(spec, name, kind, bg).data

        out += [
            Entry("cov-specialized-vs-generic", _COV_TAG[kind], spec.name, name, kind,
                  _max_over(pts, cov_specialized), _tol(1e-10, tol)),
            Entry("cov-generic-vs-oracle", "E4", spec.name, name, kind, _max_over(pts, cov_generic), _tol(1e-8, tol)),
            Entry("rotation-printed-vs-oracle", _ROT_TAG[kind], spec.name, name, kind,
                  _max_over(pts, rot_printed), _tol(1e-8, tol)),
            Entry("rotation-assembled-vs-oracle", _ROT_TAG[kind], spec.name, name, kind,
                  _max_over(pts, rot_assembled), _tol(1e-8, tol)),
            Entry("lie-two-engine", _LIE_TAG[kind], spec.name, name, kind, _max_over(pts, lie_printed), _tol(1e-8, tol)),
            Entry("lie-unsymmetrized-vs-oracle", _LIE_TAG[kind], spec.name, name, kind,
                  _max_over(pts, lie_unsymmetrized), _tol(1e-8, tol)),
            Entry("lie-assembled-vs-oracle", _LIE_TAG[kind], spec.name, name, kind,
                  _max_over(pts, lie_assembled), _tol(1e-8, tol)),
        ]
    return out


def classify(spec: ManifoldSpec, name: str, points: int = 50, seed: int = 0, tol: float | None = None) -> CheckReport:
    report = CheckReport(spec.name, seed, points)
    report.entries += lift_entries(spec, name, points, seed, tol)
    result = kl.classify_field(spec, name, points, seed)
    report.audits += [audit_dict(spec, name, a) for a in result.audits]
    return report


def closedness_entries(spec: ManifoldSpec, name: str, points: int, seed: int, tol: float | None = None,
                       criterion: int | None = None) -> list[Entry]:
    rep = kl.closedness_check(spec, name, sample_bundle_points(spec, points, seed))
    out = [
        Entry("closed-1form", "E14", spec.name, name, None, rep.antisym_max, _tol(1e-12, tol), criterion=criterion),
        Entry("second-derivative", "E14", spec.name, name, None, rep.second_derivative_max, _tol(1e-12, tol),
              criterion=criterion),
    ]
    out += [Entry(f"complete-rotation-{b}", "E12", spec.name, name, "complete", r, _tol(1e-10, tol),
                  criterion=criterion) for b, r in rep.rotation_blocks_max.items()]
    return out


def check_closed(spec: ManifoldSpec, name: str, points: int = 50, seed: int = 0, tol: float | None = None) -> CheckReport:
    report = CheckReport(spec.name, seed, points)
    report.entries += closedness_entries(spec, name, points, seed, tol)
    return report


# ---------------------------------------------------------------------------
# the full acceptance suite (verify-paper)


def _lie_max(spec, name, kind, pts, form="closed", block=None):
    def fn(bg):
        t = kl.lie_derivative_lift(spec, name, kind, bg, form)
        return t.data if block is None else t.block(*block)
    return _max_over(pts, fn)


def _cov_max(spec, name, kind, pts):
    return _max_over(pts, lambda bg: kl.cov_deriv_lift(spec, name, kind, bg, "closed").data)


def _bundle_points(spec, count, seed):
    return [bd.bundle_geometry(spec, q) for q in sample_bundle_points(spec, count, seed)]


def base_killing_fields(spec: ManifoldSpec, points: int, seed: int) -> list[str]:
    """Declared fields whose base Killing residual vanishes at every sample."""
    xs = [q.x for q in sample_bundle_points(spec, points, seed)]
    out = []
    for name in spec.vector_fields:
        scale = res = 0.0
        for x in xs:
            f = geom.field_jet(spec, name, x)
            res = max(res, float(np.max(np.abs(f.nabla_low + f.nabla_low.T))))
            scale = max(scale, float(np.max(np.abs(f.nabla_low))), float(np.max(np.abs(f.X_low))))
        if kl.is_zero(res, scale):
            out.append(name)
    return out


def criterion_1(specs, seed, points=None, tol=None):
    out = []
    for spec in specs.values():
        out += connection_entries(spec, points or 20, seed, tol, criterion=1)
    return out


def criterion_2(specs, seed, points=None, tol=None):
    out = []
    for spec in specs.values():
        pts = _bundle_points(spec, points or 50, seed)
        for name in spec.vector_fields:
            for kind in bd.KINDS:
                r = _max_over(pts, lambda bg: kl.lie_derivative_lift(spec, name, kind, bg, "closed", symmetrize=True).data
                              - oracle.lie_derivative_adapted(spec, name, kind, bg).data)
                out.append(Entry("lie-two-engine", _LIE_TAG[kind], spec.name, name, kind, r, _tol(1e-8, tol),
                                 criterion=2))
                r = _max_over(pts, lambda bg: kl.lie_derivative_lift(spec, name, kind, bg, "closed").data
                              - oracle.lie_derivative_adapted(spec, name, kind, bg).data)
                out.append(Entry("lie-unsymmetrized-vs-oracle", _LIE_TAG[kind], spec.name, name, kind, r,
                                 _tol(1e-8, tol)))
                r = _max_over(pts, lambda bg: kl.lie_derivative_lift(spec, name, kind, bg, "assembled").data
                              - oracle.lie_derivative_adapted(spec, name, kind, bg).data)
                out.append(Entry("lie-assembled-vs-oracle", _LIE_TAG[kind], spec.name, name, kind, r,
                                 _tol(1e-8, tol)))
    return out


def criterion_3(specs, seed, points=None, tol=None):
    out = []
    for spec in specs.values():
        pts = _bundle_points(spec, points or 50, seed)
        for name in spec.vector_fields:
            for kind in bd.KINDS:
                r = _max_over(pts, lambda bg: kl.cov_deriv_lift(spec, name, kind, bg, "closed").data
                              - kl.cov_deriv_lift(spec, name, kind, bg, "assembled").data)
                out.append(Entry("cov-specialized-vs-generic", _COV_TAG[kind], spec.name, name, kind, r,
                                 _tol(1e-10, tol), criterion=3))
    return out


def criterion_4(specs, seed, points=None, tol=None):
    out = []
    if "flat_cartesian" in specs:
        spec = specs["flat_cartesian"]
        pts = _bundle_points(spec, points or 50, seed)
        for kind in bd.KINDS:
            out.append(Entry("lift-parallel", _COV_TAG[kind], spec.name, "translation", kind,
                             _cov_max(spec, "translation", kind, pts), _tol(1e-10, tol), criterion=4))
    for sname, name in (("flat_cartesian", "rotation"), ("sphere", "dphi")):
        if sname not in specs:
            continue
        spec = specs[sname]
        pts = _bundle_points(spec, points or 50, seed)
        for kind in bd.KINDS:
            out.append(Entry("lift-not-parallel", _COV_TAG[kind], spec.name, name, kind,
                             _cov_max(spec, name, kind, pts), 1e-3, ">=", criterion=4))
    return out


def criterion_5(specs, seed, points=None, tol=None):
    out = []
    if "flat_cartesian" in specs:
        spec = specs["flat_cartesian"]
        pts = _bundle_points(spec, points or 50, seed)
        for kind in bd.KINDS:
            out.append(Entry("lift-killing", _LIE_TAG[kind], spec.name, "translation", kind,
                             _lie_max(spec, "translation", kind, pts), _tol(1e-10, tol), criterion=5))
        out.append(Entry("lift-killing", "E17", spec.name, "rotation", "horizontal",
                         _lie_max(spec, "rotation", "horizontal", pts), _tol(1e-10, tol), criterion=5))
        r = _max_over(pts, lambda bg: kl.lie_derivative_lift(spec, "rotation", "complete", bg, "closed", symmetrize=True).data
                      - oracle.lie_derivative_adapted(spec, "rotation", "complete", bg).data)
        out.append(Entry("lie-two-engine", "E16", spec.name, "rotation", "complete", r, _tol(1e-8, tol), criterion=5))
    if "sphere" in specs:
        spec = specs["sphere"]
        pts = _bundle_points(spec, points or 50, seed)
        out.append(Entry("horizontal-upper-left-nonzero", "E17", spec.name, "dphi", "horizontal",
                         _lie_max(spec, "dphi", "horizontal", pts, block=(False, False)), 1e-3, ">=", criterion=5))
    return out


def criterion_6(specs, seed, points=None, tol=None):
    out = []
    if "flat_cartesian" not in specs:
        return out
    spec = specs["flat_cartesian"]
    count = points or 50
    out += closedness_entries(spec, "gradient", count, seed, tol, criterion=6)
    rep = kl.closedness_check(spec, "rotation", sample_bundle_points(spec, count, seed))
    out.append(Entry("closed-1form-violated", "E14", spec.name, "rotation", None, rep.antisym_min, 1.0, ">=",
                     criterion=6))
    return out


def criterion_7(specs, seed, points=None, tol=None):
    out = []
    for spec in specs.values():
        count = points or 50
        pts = sample_bundle_points(spec, count, seed)
        for name in base_killing_fields(spec, count, seed):
            r = _max_over(pts, lambda q: kl.killing_identity_residual(spec, name, q))
            out.append(Entry("killing-integrability", "E16", spec.name, name, None, r, _tol(1e-8, tol), criterion=7))
            r = _max_over(pts, lambda q: kl.killing_identity_symmetric_residual(spec, name, q))
            out.append(Entry("killing-integrability-symmetric", "E16", spec.name, name, None, r, _tol(1e-8, tol)))
    return out


FD_STEPS = (1e-4, 2e-4)


def fd_ratio(spec: ManifoldSpec, quantity: str, seed: int) -> tuple[float, float, float]:
    """Deviations at h and 2h at the first sampled point that fits the stencil."""
    for q in sample_bundle_points(spec, 64, seed):
        try:
            small = oracle.finite_difference_audit(spec, quantity, q, FD_STEPS[0]).max_deviation
            large = oracle.finite_difference_audit(spec, quantity, q, FD_STEPS[1]).max_deviation
        except oracle.StencilError:
            continue
        ratio = large / small if small > 0 else float("inf")
        return small, large, ratio
    raise RuntimeError(f"no sample of {spec.name} is far enough from the domain edge")


def criterion_8(specs, seed, points=None, tol=None):
    out = []
    for sname in ("sphere", "flat_polar"):
        if sname not in specs:
            continue
        for quantity in ("christoffel", "riemann"):
            _, _, ratio = fd_ratio(specs[sname], quantity, seed)
            out.append(Entry(f"fd-convergence-{quantity}", "E3", sname, None, None, abs(ratio - 4.0), 1.2,
                             criterion=8))
    return out


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
}


def verify_paper(specs: dict[str, ManifoldSpec], seed: int = 0, points: int | None = None,
                 tol: float | None = None, label: str = "catalog") -> CheckReport:
    report = CheckReport(label, seed, points)
    for k in sorted(CRITERIA):
        report.entries += CRITERIA[k](specs, seed, points, tol)
    for spec in specs.values():
        for name in spec.vector_fields:
            result = kl.classify_field(spec, name, points or 50, seed)
            report.audits += [audit_dict(spec, name, a) for a in result.audits]
    return report
