"""Tangent-bundle data at a point (x, y): adapted frame, the metric II+III,
its connection in the adapted frame, and lifts of fields and 1-forms.

Indices on T(M) run over ``0..2n-1``; the first ``n`` are unbarred (base
directions), the last ``n`` barred (fiber directions). The adapted coframe
is ``(dx^h, dy^h + Gamma^h_i dx^i)`` with ``Gamma^h_i = y^j Gamma^h_{ji}``; the
frame is its inverse, ``e_i = d_i - Gamma^h_i d_hbar``, ``e_ibar = d_ibar``.

Jets of component functions are arrays ``d[C, A]`` holding the partial of
component ``A`` along the induced coordinate ``C`` (``x`` first, then ``y``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import geometry as geom
from .geometry import BaseGeometry, FieldJet, ManifoldSpec

ADAPTED = "adapted"
INDUCED = "induced"
KINDS = ("vertical", "complete", "horizontal")

Frame = Literal["adapted", "induced"]
Kind = Literal["vertical", "complete", "horizontal"]


class FrameError(ValueError):
    pass


def require_frame(obj, frame: str) -> None:
    if obj.frame != frame:
        raise FrameError(f"expected {frame}-frame components, got {obj.frame}")


def _check_frame_name(frame: str) -> None:
    if frame not in (ADAPTED, INDUCED):
        raise FrameError(f"unknown frame {frame!r}")


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown lift kind {kind!r}; expected one of {KINDS}")


@dataclass(frozen=True)
class BundlePoint:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError(f"base and fiber parts must be equal-length vectors, got {x.shape}, {y.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class BlockVector:
    frame: str
    data: np.ndarray
    variance: str = "contravariant"

    @property
    def n(self) -> int:
        return self.data.size // 2

    @property
    def unbarred(self) -> np.ndarray:
        return self.data[: self.n]

    @property
    def barred(self) -> np.ndarray:
        return self.data[self.n:]


@dataclass(frozen=True)
class Block2Tensor:
    """A 2n x 2n array with frame and variance tags.

    For covariant tensors ``data[b, a]`` is the component with indices in
    that order. For the mixed covariant derivative of a vector field,
    ``data[a, b]`` is ``nabla_b X^a`` (rows: component, columns: direction),
    the layout in which the lift formulas are written.
    """

    frame: str
    variance: str
    data: np.ndarray

    @property
    def n(self) -> int:
        return self.data.shape[0] // 2

    def block(self, row_barred: bool, col_barred: bool) -> np.ndarray:
        n = self.n
        r = slice(n, 2 * n) if row_barred else slice(0, n)
        c = slice(n, 2 * n) if col_barred else slice(0, n)
        return self.data[r, c]

    @property
    def blocks(self) -> dict[str, np.ndarray]:
        return {
            "ij": self.block(False, False),
            "ijb": self.block(False, True),
            "ibj": self.block(True, False),
            "ibjb": self.block(True, True),
        }

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0


def assemble(ul, ur, ll, lr) -> np.ndarray:
    return np.block([[ul, ur], [ll, lr]])


# ---------------------------------------------------------------------------
# connection coefficients


PATTERNS = [(a, b, c) for a in (False, True) for b in (False, True) for c in (False, True)]


def pattern_label(pattern: tuple[bool, bool, bool]) -> str:
    up, first, second = pattern
    bar = lambda flag, s: s + "b" if flag else s  # noqa: E731
    return f"G^{bar(up, 'h')}_{bar(first, 'j')}{bar(second, 'i')}"


@dataclass(frozen=True)
class BundleConnection:
    """Connection coefficients ``coeffs[a, c, b]`` = Gamma^a_{cb}.

    ``c`` is the differentiating direction: nabla_{e_c} e_b = Gamma^a_{cb} e_a.
    """

    frame: str
    coeffs: np.ndarray

    @property
    def n(self) -> int:
        return self.coeffs.shape[0] // 2

    def pattern(self, upper: bool, first: bool, second: bool) -> np.ndarray:
        n = self.n
        s = lambda flag: slice(n, 2 * n) if flag else slice(0, n)  # noqa: E731
        return self.coeffs[s(upper), s(first), s(second)]

    def patterns(self) -> dict[str, np.ndarray]:
        return {pattern_label(p): self.pattern(*p) for p in PATTERNS}


# Patterns the adapted-frame table sets identically to zero.
ZERO_PATTERNS = [(True, True, True), (False, True, True)]


@dataclass(frozen=True)
class BundleGeometry:
    """Everything at a bundle point that depends only on (x, y) and g."""

    q: BundlePoint
    base: BaseGeometry
    gamma_y: np.ndarray      # Gamma^h_i = y^j Gamma^h_{ji}, indexed [h, i]
    ry: np.ndarray           # y^b R^h_{bji}, indexed [h, j, i]

    @property
    def n(self) -> int:
        return self.q.n


def bundle_geometry(spec: ManifoldSpec, q: BundlePoint) -> BundleGeometry:
    if q.n != spec.dim:
        raise ValueError(f"bundle point has dimension {q.n}, spec has {spec.dim}")
    base = geom.base_geometry(spec, q.x)
    gamma_y = np.einsum("j,hji->hi", q.y, base.gamma)
    ry = np.einsum("b,hbji->hji", q.y, base.riemann)
    return BundleGeometry(q, base, gamma_y, ry)


def _bg(spec, q) -> BundleGeometry:
    return q if isinstance(q, BundleGeometry) else bundle_geometry(spec, q)


def adapted_frame_at(spec: ManifoldSpec, q) -> tuple[np.ndarray, np.ndarray]:
    """(frame, dual): columns of ``frame`` are e_b in induced components;
    rows of ``dual`` are the adapted coframe. ``dual @ frame`` is the identity."""
    bg = _bg(spec, q)
    n = bg.n
    eye, zero = np.eye(n), np.zeros((n, n))
    frame = assemble(eye, zero, -bg.gamma_y, eye)
    dual = assemble(eye, zero, bg.gamma_y, eye)
    return frame, dual


def metric_adapted_at(spec: ManifoldSpec, q) -> Block2Tensor:
    g = _bg(spec, q).base.g
    return Block2Tensor(ADAPTED, "covariant", assemble(np.zeros_like(g), g, g, g))


def metric_adapted_inv_at(spec: ManifoldSpec, q) -> Block2Tensor:
    ginv = _bg(spec, q).base.ginv
    return Block2Tensor(ADAPTED, "contravariant", assemble(-ginv, ginv, ginv, np.zeros_like(ginv)))


def metric_induced_at(spec: ManifoldSpec, q) -> Block2Tensor:
    """II + III expanded in dx, dy with delta y^i = dy^i + Gamma^i_a dx^a."""
    bg = _bg(spec, q)
    g, G = bg.base.g, bg.gamma_y
    gG = np.einsum("aj,jb->ab", g, G)
    quad = np.einsum("ij,ia,jb->ab", g, G, G)
    ul = gG + gG.T + 0.5 * (quad + quad.T)     # symmetric bit for bit
    ur = g + np.einsum("jb,ja->ab", g, G)
    return Block2Tensor(INDUCED, "covariant", assemble(ul, ur, ur.T, g.copy()))


def bundle_connection_at(spec: ManifoldSpec, q) -> BundleConnection:
    """Levi-Civita coefficients of II+III in the adapted frame, from base
    Christoffel symbols and curvature contracted with the fiber point."""
    bg = _bg(spec, q)
    n = bg.n
    G = bg.base.gamma
    ry = bg.ry                         # [h, j, i] = y^b R^h_{bji}
    ryt = np.swapaxes(ry, 1, 2)        # [h, j, i] = y^b R^h_{bij}
    table = {
        (False, False, False): G - 0.5 * (ry + ryt),
        (True, False, False): ry,
        (True, True, True): np.zeros((n, n, n)),
        (False, True, True): np.zeros((n, n, n)),
        (True, False, True): G + 0.5 * ryt,
        (False, False, True): -0.5 * ryt,
        (True, True, False): 0.5 * ry,
        (False, True, False): -0.5 * ry,
    }
    coeffs = np.zeros((2 * n,) * 3)
    for (up, first, second), arr in table.items():
        s = lambda flag: slice(n, 2 * n) if flag else slice(0, n)  # noqa: E731
        coeffs[s(up), s(first), s(second)] = arr
    return BundleConnection(ADAPTED, coeffs)


# ---------------------------------------------------------------------------
# lifts


def _field(spec, name, bg: BundleGeometry, jet: FieldJet | None) -> FieldJet:
    return jet if jet is not None else geom.field_jet(spec, name, bg.q.x, bg.base)


def lift_vector_jet(
    spec: ManifoldSpec, name: str, kind: Kind, q, frame: Frame = ADAPTED,
    jet: FieldJet | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Lifted components and their induced-coordinate partials ``d[C, A]``."""
    _check_kind(kind)
    _check_frame_name(frame)
    bg = _bg(spec, q)
    f = _field(spec, name, bg, jet)
    n, y = bg.n, bg.q.y
    zero_v, zero_m = np.zeros(n), np.zeros((n, n))
    if kind == "vertical":
        value = np.concatenate([zero_v, f.X])
        dx = np.hstack([zero_m, f.dX])
        dy = np.zeros((n, 2 * n))
    elif kind == "complete" and frame == ADAPTED:
        value = np.concatenate([f.X, y @ f.nabla])
        dx = np.hstack([f.dX, np.einsum("l,klh->kh", y, f.dnabla)])
        dy = np.hstack([zero_m, f.nabla])
    elif kind == "complete":
        value = np.concatenate([f.X, y @ f.dX])
        dx = np.hstack([f.dX, np.einsum("l,klh->kh", y, f.ddX)])
        dy = np.hstack([zero_m, f.dX])
    elif frame == ADAPTED:
        value = np.concatenate([f.X, zero_v])
        dx = np.hstack([f.dX, zero_m])
        dy = np.zeros((n, 2 * n))
    else:
        G, dG = bg.base.gamma, bg.base.dgamma
        value = np.concatenate([f.X, -bg.gamma_y @ f.X])
        fiber_dx = -(np.einsum("j,khji,i->kh", y, dG, f.X) + np.einsum("j,hji,ki->kh", y, G, f.dX))
        dx = np.hstack([f.dX, fiber_dx])
        dy = np.hstack([zero_m, -np.einsum("hki,i->kh", G, f.X)])
    return value, np.vstack([dx, dy])


def lift_vector(spec: ManifoldSpec, name: str, kind: Kind, q, frame: Frame = ADAPTED) -> BlockVector:
    value, _ = lift_vector_jet(spec, name, kind, q, frame)
    return BlockVector(frame, value)


def to_adapted_vector(v: BlockVector, dual: np.ndarray) -> BlockVector:
    require_frame(v, INDUCED)
    if v.variance != "contravariant":
        raise FrameError("vector transform applies to contravariant components")
    return BlockVector(ADAPTED, dual @ v.data)


def lift_oneform(spec: ManifoldSpec, name: str, kind: Kind, q, frame: Frame = INDUCED) -> BlockVector:
    """Vertical (w, 0), complete (y.dw, w), horizontal (-Gamma^k_i w_k, w)."""
    _check_kind(kind)
    _check_frame_name(frame)
    bg = _bg(spec, q)
    w = spec.oneform_jet(name, bg.q.x, 0)
    if kind == "vertical":
        data = np.concatenate([w, np.zeros_like(w)])
    elif kind == "complete":
        dw = spec.oneform_jet(name, bg.q.x, 1)
        data = np.concatenate([bg.q.y @ dw, w])
    else:
        data = np.concatenate([-bg.gamma_y.T @ w, w])
    if frame == ADAPTED:
        frame_m, _ = adapted_frame_at(spec, bg)
        data = frame_m.T @ data
    return BlockVector(frame, data, "covariant")


def associated_covector(spec: ManifoldSpec, name: str, kind: Kind, q, jet: FieldJet | None = None) -> BlockVector:
    """Adapted components of the II+III-lowering of a lift:
    vertical (X_i, X_i), complete (y.nabla X_i, X_i + y.nabla X_i), horizontal (0, X_i)."""
    _check_kind(kind)
    bg = _bg(spec, q)
    f = _field(spec, name, bg, jet)
    xl = f.X_low
    if kind == "vertical":
        data = np.concatenate([xl, xl])
    elif kind == "complete":
        dxl = bg.q.y @ f.nabla_low
        data = np.concatenate([dxl, xl + dxl])
    else:
        data = np.concatenate([np.zeros_like(xl), xl])
    return BlockVector(ADAPTED, data, "covariant")


def lower(metric: Block2Tensor, v: BlockVector) -> BlockVector:
    if metric.frame != v.frame:
        raise FrameError(f"metric is {metric.frame}, vector is {v.frame}")
    if v.variance != "contravariant" or metric.variance != "covariant":
        raise FrameError("lowering needs a covariant metric and a contravariant vector")
    return BlockVector(v.frame, metric.data @ v.data, "covariant")


def metric_adapted_jet(spec: ManifoldSpec, q) -> tuple[np.ndarray, np.ndarray]:
    """II+III adapted components and their induced partials ``d[C, a, b]``."""
    bg = _bg(spec, q)
    n = bg.n
    g, dg = bg.base.g, bg.base.dg
    value = assemble(np.zeros_like(g), g, g, g)
    d = np.zeros((2 * n, 2 * n, 2 * n))
    for k in range(n):
        d[k] = assemble(np.zeros((n, n)), dg[k], dg[k], dg[k])
    return value, d
