"""Covariant derivatives, rotations and Lie derivatives of lifted fields
under II+III, and empirical audits of the lift theorems.

Two adapted-frame engines live here:

* ``form="closed"`` evaluates the closed-form block formulas for each lift
  kind exactly as printed, with ``nabla X^j`` read as ``y^l nabla_l X^j``;
* ``form="assembled"`` builds the same objects generically from the
  connection table: ``nabla_c X^a = e_c(X^a) + Gamma^a_{cb} X^b`` and
  ``nabla_b X_a = e_b(X_a) - Gamma^c_{ba} X_c``.

The induced-coordinate engine in :mod:`tangentlift.oracle` is the third,
independent one.

Layouts: mixed derivatives are ``data[a, b] = nabla_b X^a``; rotations and
Lie derivatives are ``data[b, a] = nabla_b X_a -/+ nabla_a X_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geom
from . import oracle
from .bundle import (
    ADAPTED, KINDS, Block2Tensor, BundleGeometry, BundlePoint, adapted_frame_at, assemble,
    bundle_connection_at, bundle_geometry, lift_vector_jet, metric_adapted_jet,
)
from .geometry import FieldJet, ManifoldSpec
from .sampling import sample_bundle_points

ZERO_RTOL = 1e-9
FORMS = ("closed", "assembled")


def is_zero(residual: float, scale: float, rtol: float = ZERO_RTOL) -> bool:
    """Zero test used by every predicate: r <= rtol * (1 + s)."""
    return residual <= rtol * (1.0 + scale)


@dataclass(frozen=True)
class _Ctx:
    bg: BundleGeometry
    jet: FieldJet

    @property
    def n(self) -> int:
        return self.bg.n


def _ctx(spec: ManifoldSpec, name: str, q) -> _Ctx:
    bg = q if isinstance(q, BundleGeometry) else bundle_geometry(spec, q)
    return _Ctx(bg, geom.field_jet(spec, name, bg.q.x, bg.base))


def _check(kind: str, form: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown lift kind {kind!r}")
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")


# ---------------------------------------------------------------------------
# curvature contractions shared by the printed formulas


@dataclass(frozen=True)
class _Terms:
    nabla_t: np.ndarray   # [h, i] = nabla_i X^h
    rx1: np.ndarray       # [h, i] = y^s R^h_{sij} X^j
    rx2: np.ndarray       # [h, i] = y^s R^h_{sji} X^j
    rn1: np.ndarray       # [h, i] = y^s R^h_{sij} (y^l nabla_l X^j)
    yn2: np.ndarray       # [h, i] = y^l nabla_i nabla_l X^h
    A: np.ndarray         # [i, j] = nabla_i X_j - nabla_j X_i
    S: np.ndarray         # [i, j] = nabla_i X_j + nabla_j X_i
    B: np.ndarray         # [i, j] = y^l (nabla_i nabla_l - nabla_l nabla_i) X_j
    N2: np.ndarray        # [i, j] = y^l nabla_i nabla_l X_j
    QX: np.ndarray        # [i, j] = y^s R^h_{sij} X_h
    QN: np.ndarray        # [i, j] = y^s R^h_{sij} (y^l nabla_l X_h)
    W: np.ndarray         # [i, j] = R_{hsij} X^h y^s


def _terms(c: _Ctx) -> _Terms:
    y = c.bg.q.y
    R = c.bg.base.riemann
    Rl = c.bg.base.riemann_lowered
    f = c.jet
    ny = y @ f.nabla              # y^l nabla_l X^h
    ny_low = y @ f.nabla_low      # y^l nabla_l X_h
    n2 = f.nabla2_low
    return _Terms(
        nabla_t=f.nabla.T,
        rx1=np.einsum("s,hsij,j->hi", y, R, f.X),
        rx2=np.einsum("s,hsji,j->hi", y, R, f.X),
        rn1=np.einsum("s,hsij,j->hi", y, R, ny),
        yn2=np.einsum("l,ilh->hi", y, f.nabla2),
        A=f.nabla_low - f.nabla_low.T,
        S=f.nabla_low + f.nabla_low.T,
        B=np.einsum("l,ilj->ij", y, n2) - np.einsum("l,lij->ij", y, n2),
        N2=np.einsum("l,ilj->ij", y, n2),
        QX=np.einsum("s,hsij,h->ij", y, R, f.X_low),
        QN=np.einsum("s,hsij,h->ij", y, R, ny_low),
        W=np.einsum("h,s,hsij->ij", f.X, y, Rl),
    )


# ---------------------------------------------------------------------------
# covariant derivative of a lift


def _cov_deriv_closed(kind: str, t: _Terms) -> np.ndarray:
    z = np.zeros_like(t.nabla_t)
    if kind == "vertical":
        return assemble(-0.5 * t.rx1, z, t.nabla_t + 0.5 * t.rx1, z)
    if kind == "complete":
        return assemble(
            t.nabla_t - 0.5 * (t.rx2 + t.rx1) - 0.5 * t.rn1,
            -0.5 * t.rx2,
            t.yn2 + t.rx1 + 0.5 * t.rn1,
            t.nabla_t + 0.5 * t.rx2,
        )
    return assemble(
        t.nabla_t - 0.5 * (t.rx2 + t.rx1),
        -0.5 * t.rx2,
        t.rx2,
        0.5 * t.rx2,
    )


def _cov_deriv_assembled(spec, name, kind, c: _Ctx) -> np.ndarray:
    frame, _ = adapted_frame_at(spec, c.bg)
    X, dX = lift_vector_jet(spec, name, kind, c.bg, ADAPTED, jet=c.jet)
    conn = bundle_connection_at(spec, c.bg).coeffs
    directional = (frame.T @ dX).T          # [a, c] = e_c(X^a)
    return directional + np.einsum("acb,b->ac", conn, X)


def cov_deriv_lift(spec: ManifoldSpec, name: str, kind: str, q, form: str = "closed") -> Block2Tensor:
    """Adapted-frame covariant derivative of the ``kind`` lift, ``data[a, b] = nabla_b X^a``."""
    _check(kind, form)
    c = _ctx(spec, name, q)
    data = _cov_deriv_closed(kind, _terms(c)) if form == "closed" else _cov_deriv_assembled(spec, name, kind, c)
    return Block2Tensor(ADAPTED, "mixed", data)


def covector_derivative(spec: ManifoldSpec, name: str, kind: str, q) -> Block2Tensor:
    """``data[b, a] = nabla_b X_a`` for the II+III-lowered lift, assembled generically."""
    _check(kind, "assembled")
    c = _ctx(spec, name, q)
    frame, _ = adapted_frame_at(spec, c.bg)
    X, dX = lift_vector_jet(spec, name, kind, c.bg, ADAPTED, jet=c.jet)
    G, dG = metric_adapted_jet(spec, c.bg)
    low = G @ X
    dlow = np.einsum("Cab,b->Ca", dG, X) + np.einsum("ab,Cb->Ca", G, dX)    # [C, a]
    conn = bundle_connection_at(spec, c.bg).coeffs
    return Block2Tensor(ADAPTED, "covariant", frame.T @ dlow - np.einsum("cba,c->ba", conn, low))


# ---------------------------------------------------------------------------
# rotation and Lie derivative


def _rotation_closed(kind: str, t: _Terms) -> np.ndarray:
    z = np.zeros_like(t.A)
    # QX[i, j] = y^s R^h_{sij} X_h, so QX - QX.T is y^s (R^h_{sij} - R^h_{sji}) X_h
    qx_ij_ji = t.QX - t.QX.T
    if kind == "vertical":
        return assemble(t.A - qx_ij_ji, t.A, z, z)
    if kind == "complete":
        qn_ji_ij = t.QN.T - t.QN
        return assemble(t.B + qn_ji_ij + qx_ij_ji, t.A + t.B, -0.5 * qx_ij_ji, z)
    return assemble(qx_ij_ji, t.A - 0.5 * qx_ij_ji, 0.5 * qx_ij_ji, z)


def _lie_closed(kind: str, t: _Terms, symmetrize: bool) -> np.ndarray:
    z = np.zeros_like(t.S)
    qx_sym = t.QX + t.QX.T         # [i, j] = y^s (R^h_{sij} + R^h_{sji}) X_h
    if kind == "vertical":
        return assemble(t.S, t.S, z, z)
    if kind == "complete":
        n2 = 0.5 * (t.N2 + t.N2.T) if symmetrize else t.N2
        return assemble(n2 + t.W + t.W.T, t.S + t.N2 + t.N2.T, -0.5 * qx_sym, z)
    return assemble(qx_sym, t.S + 0.5 * qx_sym, -0.5 * qx_sym, z)


def rotation_lift(spec: ManifoldSpec, name: str, kind: str, q, form: str = "closed") -> Block2Tensor:
    """``data[b, a] = nabla_b X_a - nabla_a X_b`` for the lowered lift."""
    _check(kind, form)
    if form == "assembled":
        T = covector_derivative(spec, name, kind, q).data
        return Block2Tensor(ADAPTED, "covariant", T - T.T)
    return Block2Tensor(ADAPTED, "covariant", _rotation_closed(kind, _terms(_ctx(spec, name, q))))


def lie_derivative_lift(
    spec: ManifoldSpec, name: str, kind: str, q, form: str = "closed", symmetrize: bool = False,
) -> Block2Tensor:
    """``data[b, a] = nabla_b X_a + nabla_a X_b``, the Lie derivative of II+III.

    With ``symmetrize`` the printed complete-lift (i, j) block uses the
    symmetric part of ``y^l nabla_i nabla_l X_j``.
    """
    _check(kind, form)
    if form == "assembled":
        T = covector_derivative(spec, name, kind, q).data
        return Block2Tensor(ADAPTED, "covariant", T + T.T)
    return Block2Tensor(ADAPTED, "covariant", _lie_closed(kind, _terms(_ctx(spec, name, q)), symmetrize))


def killing_identity_residual(spec: ManifoldSpec, name: str, q, symmetrize: bool = False) -> np.ndarray:
    """``y^l nabla_i nabla_l X_j + (R_{hsij} + R_{hsji}) X^h y^s``, indexed [i, j].

    For a Killing field this is the quantity the complete-lift argument
    needs to vanish.
    """
    t = _terms(_ctx(spec, name, q))
    n2 = 0.5 * (t.N2 + t.N2.T) if symmetrize else t.N2
    return n2 + t.W + t.W.T


def killing_identity_symmetric_residual(spec: ManifoldSpec, name: str, q) -> np.ndarray:
    """``y^l (nabla_i nabla_l X_j + nabla_j nabla_l X_i) - (R_{hsij} + R_{hsji}) X^h y^s``.

    The form of the identity that follows from the Ricci identity for a
    Killing field; it vanishes for every Killing field in any chart.
    """
    t = _terms(_ctx(spec, name, q))
    return (t.N2 + t.N2.T) - (t.W + t.W.T)


# ---------------------------------------------------------------------------
# closedness


@dataclass
class ClosednessReport:
    field: str
    points: int
    antisym_max: float           # max |nabla_i X_j - nabla_j X_i|
    antisym_min: float           # min over points of the per-point max
    second_derivative_max: float  # max |nabla_i nabla_l X_j|
    rotation_blocks_max: dict[str, float]
    conditions_hold: bool
    lift_closed: bool

    @property
    def implication_holds(self) -> bool:
        """Conditions imply a closed complete-lift covector (at sample resolution)."""
        return (not self.conditions_hold) or self.lift_closed


def closedness_check(spec: ManifoldSpec, name: str, samples, form: str = "closed", rtol: float = ZERO_RTOL) -> ClosednessReport:
    """Base conditions for a closed complete lift, and the complete-lift rotation blocks."""
    antisym, second = [], []
    blocks = {"ij": 0.0, "ijb": 0.0, "ibj": 0.0, "ibjb": 0.0}
    scale = 0.0
    for q in samples:
        c = _ctx(spec, name, q)
        f = c.jet
        antisym.append(float(np.max(np.abs(f.nabla_low - f.nabla_low.T))))
        second.append(float(np.max(np.abs(f.nabla2_low))))
        scale = max(scale, float(np.max(np.abs(f.nabla_low))), float(np.max(np.abs(f.X_low))))
        rot = rotation_lift(spec, name, "complete", c.bg, form)
        for key, blk in rot.blocks.items():
            blocks[key] = max(blocks[key], float(np.max(np.abs(blk))))
    conditions = is_zero(max(antisym), scale, rtol) and is_zero(max(second), scale, rtol)
    closed = is_zero(max(blocks.values()), scale, rtol)
    return ClosednessReport(name, len(antisym), max(antisym), min(antisym), max(second), blocks, conditions, closed)


# ---------------------------------------------------------------------------
# classification and theorem audits


@dataclass
class LiftAnalysis:
    field: str
    kind: str
    points: list[BundlePoint] = field(repr=False, default_factory=list)
    results: dict[str, list[Block2Tensor]] = field(repr=False, default_factory=dict)
    summary: dict[str, dict[str, float]] = field(default_factory=dict)

    def add(self, key: str, t: Block2Tensor) -> None:
        self.results.setdefault(key, []).append(t)
        acc = self.summary.setdefault(key, {"ij": 0.0, "ijb": 0.0, "ibj": 0.0, "ibjb": 0.0})
        for b, blk in t.blocks.items():
            acc[b] = max(acc[b], float(np.max(np.abs(blk))))

    def max_abs(self, key: str) -> float:
        return max(self.summary[key].values())


@dataclass
class TheoremAudit:
    theorem: str
    hypothesis: dict[str, bool]
    conclusion: dict[str, bool]
    residuals: dict[str, float]
    thresholds: dict[str, float]
    verdict: str
    engines_agree: bool
    witness: list[float] | None = None
    note: str = ""


@dataclass
class BasePredicates:
    killing: bool
    parallel: bool
    second_parallel: bool
    closed: bool
    residuals: dict[str, float]
    thresholds: dict[str, float]


@dataclass
class Classification:
    field: str
    base: BasePredicates
    lifts: dict[str, LiftAnalysis]
    parallel: dict[str, dict[str, bool]]
    killing: dict[str, dict[str, bool]]
    audits: list[TheoremAudit]


def _base_predicates(spec, name, xs, rtol) -> BasePredicates:
    kres = par = par2 = clo = scale = 0.0
    for x in xs:
        f = geom.field_jet(spec, name, x)
        scale = max(scale, float(np.max(np.abs(f.X_low))), float(np.max(np.abs(f.nabla_low))))
        kres = max(kres, float(np.max(np.abs(f.nabla_low + f.nabla_low.T))))
        clo = max(clo, float(np.max(np.abs(f.nabla_low - f.nabla_low.T))))
        par = max(par, float(np.max(np.abs(f.nabla))))
        par2 = max(par2, float(np.max(np.abs(f.nabla2))))
    thr = rtol * (1.0 + scale)
    res = {"killing": kres, "nabla_X": par, "nabla_nabla_X": par2, "rotation": clo}
    return BasePredicates(kres <= thr, par <= thr, par2 <= thr, clo <= thr, res,
                          {k: thr for k in res})


def classify_field(
    spec: ManifoldSpec, name: str, sample_count: int, seed: int, rtol: float = ZERO_RTOL,
) -> Classification:
    """Measure base and bundle predicates for every lift and audit the theorems."""
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    spec.vector_field(name)
    points = sample_bundle_points(spec, sample_count, seed)
    base = _base_predicates(spec, name, [q.x for q in points], rtol)

    lifts = {k: LiftAnalysis(name, k) for k in KINDS}
    witness: dict[tuple[str, str], tuple[float, BundlePoint]] = {}
    scale = 0.0
    for q in points:
        bg = bundle_geometry(spec, q)
        jet = geom.field_jet(spec, name, q.x, bg.base)
        scale = max(scale, float(np.max(np.abs(jet.X))), float(np.max(np.abs(jet.nabla))),
                    float(np.max(np.abs(q.y))))
        for kind in KINDS:
            la = lifts[kind]
            la.points.append(q)
            entries = {
                "cov_closed": cov_deriv_lift(spec, name, kind, bg, "closed"),
                "cov_assembled": cov_deriv_lift(spec, name, kind, bg, "assembled"),
                "cov_oracle": oracle.covariant_derivative_adapted(spec, name, kind, bg),
                "lie_closed": lie_derivative_lift(spec, name, kind, bg, "closed"),
                "lie_closed_sym": lie_derivative_lift(spec, name, kind, bg, "closed", symmetrize=True),
                "lie_assembled": lie_derivative_lift(spec, name, kind, bg, "assembled"),
                "lie_oracle": oracle.lie_derivative_adapted(spec, name, kind, bg),
            }
            for key, t in entries.items():
                la.add(key, t)
                m = t.max_abs()
                if m > witness.get((kind, key), (-1.0, None))[0]:
                    witness[(kind, key)] = (m, q)

    thr = rtol * (1.0 + scale)
    parallel = {k: {"closed": lifts[k].max_abs("cov_closed") <= thr,
                    "oracle": lifts[k].max_abs("cov_oracle") <= thr} for k in KINDS}
    # the printed complete-lift (i, j) block is not symmetric; its symmetric
    # part is what a Lie derivative of a metric can be compared with
    killing = {k: {"closed": lifts[k].max_abs("lie_closed_sym") <= thr,
                   "oracle": lifts[k].max_abs("lie_oracle") <= thr} for k in KINDS}

    def wit(kind, key):
        q = witness[(kind, key)][1]
        return [float(v) for v in q.coords]

    audits = []
    # T1: each lift is parallel iff X is parallel.
    violated = {e: any(parallel[k][e] != base.parallel for k in KINDS) for e in ("closed", "oracle")}
    bad = [k for k in KINDS if parallel[k]["closed"] != base.parallel]
    audits.append(TheoremAudit(
        theorem="T1",
        hypothesis={"parallel": base.parallel, "second_parallel": base.second_parallel},
        conclusion={f"{k}_parallel": parallel[k]["closed"] for k in KINDS}
        | {f"{k}_parallel_oracle": parallel[k]["oracle"] for k in KINDS},
        residuals={"nabla_X": base.residuals["nabla_X"]}
        | {f"{k}_cov_closed": lifts[k].max_abs("cov_closed") for k in KINDS}
        | {f"{k}_cov_oracle": lifts[k].max_abs("cov_oracle") for k in KINDS},
        thresholds={"base": base.thresholds["nabla_X"], "bundle": thr},
        verdict="counterexample-candidate" if violated["closed"] and violated["oracle"] else "consistent",
        engines_agree=all(parallel[k]["closed"] == parallel[k]["oracle"] for k in KINDS),
        witness=wit(bad[0], "cov_closed") if bad else None,
        note="; ".join(filter(None, [
            "bare nabla X in the complete-lift blocks read as y^l nabla_l X",
            "" if violated["closed"] == violated["oracle"] else
            "engines disagree on lift parallelism; see the per-engine conclusion flags",
        ])),
    ))
    # T2: complete lift Killing iff X Killing with nabla X = 0;
    # horizontal lift Killing iff X Killing with nabla nabla X = 0.
    for tid, kind, needs in (("T2a", "complete", base.parallel), ("T2b", "horizontal", base.second_parallel)):
        hyp = base.killing and needs
        by_engine = {e: killing[kind][e] != hyp for e in ("closed", "oracle")}
        notes = []
        if by_engine["closed"] != by_engine["oracle"]:
            only = "oracle" if by_engine["oracle"] else "closed-form blocks"
            verb = "shows" if only == "oracle" else "show"
            notes.append(f"engines disagree on the {kind}-lift Killing status; only the {only} {verb} a violation")
        if tid == "T2a":
            alt = base.killing and base.second_parallel
            notes.append(f"with 'vanishing second covariant derivative' as the hypothesis the "
                         f"oracle verdict would be {'consistent' if killing[kind]['oracle'] == alt else 'violated'}")
        note = "; ".join(notes)
        audits.append(TheoremAudit(
            theorem=tid,
            hypothesis={"killing": base.killing, "parallel": base.parallel,
                        "second_parallel": base.second_parallel},
            conclusion={f"{kind}_killing": killing[kind]["closed"],
                        f"{kind}_killing_oracle": killing[kind]["oracle"]},
            residuals={"base_killing": base.residuals["killing"],
                       "nabla_X": base.residuals["nabla_X"],
                       "nabla_nabla_X": base.residuals["nabla_nabla_X"],
                       f"{kind}_lie_closed": lifts[kind].max_abs("lie_closed"),
                       f"{kind}_lie_closed_sym": lifts[kind].max_abs("lie_closed_sym"),
                       f"{kind}_lie_oracle": lifts[kind].max_abs("lie_oracle")},
            thresholds={"base": base.thresholds["killing"], "bundle": thr},
            verdict="counterexample-candidate" if by_engine["closed"] and by_engine["oracle"] else "consistent",
            engines_agree=killing[kind]["closed"] == killing[kind]["oracle"],
            witness=wit(kind, "lie_oracle") if by_engine["oracle"] else None,
            note=note,
        ))
    return Classification(name, base, lifts, parallel, killing, audits)
