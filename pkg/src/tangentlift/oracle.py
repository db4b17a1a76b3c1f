"""Independent recomputation of bundle quantities in induced coordinates.

Everything here is built from first principles on the 2n-dimensional
manifold T(M): the metric II+III written out in (dx, dy), its Christoffel
symbols, the coordinate Lie derivative and the coordinate exterior
derivative. Nothing in this module reads the adapted-frame connection table
or the lift-derivative formulas, so agreement with them is evidence rather
than a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geom
from .bundle import (
    ADAPTED, INDUCED, Block2Tensor, BundleConnection, BundleGeometry, FrameError,
    adapted_frame_at, bundle_geometry, lift_vector_jet, require_frame,
)
from .geometry import ManifoldSpec


def _bg(spec, q) -> BundleGeometry:
    return q if isinstance(q, BundleGeometry) else bundle_geometry(spec, q)


def _gamma_y_jet(bg: BundleGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Gamma^h_a = y^j Gamma^h_{ja} and its induced partials ``d[C, h, a]``."""
    y, G, dG = bg.q.y, bg.base.gamma, bg.base.dgamma
    d = np.concatenate([np.einsum("j,khja->kha", y, dG), G.transpose(1, 0, 2)])
    return np.einsum("j,hja->ha", y, G), d


def induced_metric_jet(spec: ManifoldSpec, q) -> tuple[np.ndarray, np.ndarray]:
    """II+III in induced coordinates and its partials ``d[C, A, B]``.

    The metric is 2 g_{ji} dx^j dy^i + g_{ji} dy^j dy^i with every dy
    replaced by dy + Gamma dx, written out term by term.
    """
    bg = _bg(spec, q)
    n = bg.n
    g = bg.base.g
    dg = np.concatenate([bg.base.dg, np.zeros((n, n, n))])
    P, dP = _gamma_y_jet(bg)

    ul = g @ P + (g @ P).T + P.T @ g @ P
    ur = g + P.T @ g
    value = np.block([[ul, ur], [ur.T, g]])

    d = np.empty((2 * n, 2 * n, 2 * n))
    for c in range(2 * n):
        gP = dg[c] @ P + g @ dP[c]
        d_ul = gP + gP.T + dP[c].T @ g @ P + P.T @ dg[c] @ P + P.T @ g @ dP[c]
        d_ur = dg[c] + dP[c].T @ g + P.T @ dg[c]
        d[c] = np.block([[d_ul, d_ur], [d_ur.T, dg[c]]])
    return value, d


def levi_civita_induced(spec: ManifoldSpec, q) -> BundleConnection:
    """Christoffel symbols of II+III in induced coordinates, ``[A, B, C]`` = Gamma^A_{BC}."""
    G, dG = induced_metric_jet(spec, q)
    det = np.linalg.det(G)
    if not abs(det) > geom.DET_FLOOR:
        raise RuntimeError(f"induced metric is singular (|det| = {abs(det):.3g})")
    return BundleConnection(INDUCED, geom.christoffel_from(np.linalg.inv(G), dG))


def metric_compatibility_induced(spec: ManifoldSpec, q) -> np.ndarray:
    """Coordinate covariant derivative of the induced metric, ``[C, A, B]``."""
    G, dG = induced_metric_jet(spec, q)
    L = levi_civita_induced(spec, q).coeffs
    return dG - np.einsum("dca,db->cab", L, G) - np.einsum("dcb,ad->cab", L, G)


def _frame_jet(bg: BundleGeometry) -> np.ndarray:
    """Induced partials of the frame matrix, ``d[B, D, b]``."""
    n = bg.n
    _, dP = _gamma_y_jet(bg)
    d = np.zeros((2 * n, 2 * n, 2 * n))
    d[:, n:, :n] = -dP
    return d


def connection_to_adapted(spec: ManifoldSpec, q, induced: BundleConnection) -> BundleConnection:
    """Change of frame for connection coefficients, with the anholonomy term:

    Gamma^a_{cb} = A^a_D ( e_c(A^D_b) + A^B_c A^C_b Gamma^D_{BC} )
    """
    require_frame(induced, INDUCED)
    bg = _bg(spec, q)
    frame, dual = adapted_frame_at(spec, bg)
    dframe = _frame_jet(bg)
    derivative = np.einsum("Bc,BDb->Dcb", frame, dframe)
    tensorial = np.einsum("Bc,Cb,DBC->Dcb", frame, frame, induced.coeffs)
    return BundleConnection(ADAPTED, np.einsum("aD,Dcb->acb", dual, derivative + tensorial))


def to_adapted_covariant(t: Block2Tensor, frame: np.ndarray) -> Block2Tensor:
    require_frame(t, INDUCED)
    if t.variance != "covariant":
        raise FrameError("covariant transform applied to a non-covariant tensor")
    return Block2Tensor(ADAPTED, "covariant", frame.T @ t.data @ frame)


def to_adapted_mixed(t: Block2Tensor, frame: np.ndarray, dual: np.ndarray) -> Block2Tensor:
    require_frame(t, INDUCED)
    if t.variance != "mixed":
        raise FrameError("mixed transform applied to a non-mixed tensor")
    return Block2Tensor(ADAPTED, "mixed", dual @ t.data @ frame)


def lie_derivative_induced(spec: ManifoldSpec, name: str, kind: str, q) -> Block2Tensor:
    """(L_X g)_{AB} = X^C d_C g_{AB} + g_{CB} d_A X^C + g_{AC} d_B X^C."""
    bg = _bg(spec, q)
    X, dX = lift_vector_jet(spec, name, kind, bg, INDUCED)
    G, dG = induced_metric_jet(spec, bg)
    L = np.einsum("c,cab->ab", X, dG) + np.einsum("cb,ac->ab", G, dX) + np.einsum("ac,bc->ab", G, dX)
    return Block2Tensor(INDUCED, "covariant", L)


def lie_derivative_adapted(spec: ManifoldSpec, name: str, kind: str, q) -> Block2Tensor:
    bg = _bg(spec, q)
    frame, _ = adapted_frame_at(spec, bg)
    return to_adapted_covariant(lie_derivative_induced(spec, name, kind, bg), frame)


def rotation_induced(spec: ManifoldSpec, name: str, kind: str, q) -> Block2Tensor:
    """d_B X_A - d_A X_B for the lowered lift, ``[B, A]``; needs no connection."""
    bg = _bg(spec, q)
    X, dX = lift_vector_jet(spec, name, kind, bg, INDUCED)
    G, dG = induced_metric_jet(spec, bg)
    dlow = np.einsum("bac,c->ba", dG, X) + np.einsum("ac,bc->ba", G, dX)
    return Block2Tensor(INDUCED, "covariant", dlow - dlow.T)


def rotation_adapted(spec: ManifoldSpec, name: str, kind: str, q) -> Block2Tensor:
    bg = _bg(spec, q)
    frame, _ = adapted_frame_at(spec, bg)
    return to_adapted_covariant(rotation_induced(spec, name, kind, bg), frame)


def covariant_derivative_induced(spec: ManifoldSpec, name: str, kind: str, q) -> Block2Tensor:
    """nabla_B X^A = d_B X^A + Gamma^A_{BC} X^C, stored ``[A, B]``."""
    bg = _bg(spec, q)
    X, dX = lift_vector_jet(spec, name, kind, bg, INDUCED)
    L = levi_civita_induced(spec, bg).coeffs
    return Block2Tensor(INDUCED, "mixed", dX.T + np.einsum("abc,c->ab", L, X))


def covariant_derivative_adapted(spec: ManifoldSpec, name: str, kind: str, q) -> Block2Tensor:
    bg = _bg(spec, q)
    frame, dual = adapted_frame_at(spec, bg)
    return to_adapted_mixed(covariant_derivative_induced(spec, name, kind, bg), frame, dual)


# ---------------------------------------------------------------------------
# finite-difference audit


class StencilError(ValueError):
    pass


@dataclass(frozen=True)
class FDReport:
    quantity: str
    h: float
    max_deviation: float
    scale: float


FD_QUANTITIES = ("christoffel", "riemann", "levi_civita_induced")


def _stencil_ok(lo: float, hi: float, v: float, h: float) -> bool:
    return lo <= v - h and v + h <= hi


def finite_difference_audit(spec: ManifoldSpec, quantity: str, q, h: float) -> FDReport:
    """Swap the symbolic partials in ``quantity`` for central differences and
    report the largest deviation from the exact value."""
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"step {h} outside [1e-7, 1e-3]")
    if quantity not in FD_QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {FD_QUANTITIES}")
    x = np.asarray(getattr(q, "x", q), dtype=float)
    n = spec.dim
    for k, (lo, hi) in enumerate(spec.domain):
        if not _stencil_ok(lo, hi, x[k], h):
            raise StencilError(f"coordinate {spec.coords[k]} = {x[k]} too close to the domain edge for h = {h}")
    eye = np.eye(n)

    if quantity == "christoffel":
        exact = geom.christoffel_at(spec, x)
        dg = np.stack([
            (spec.metric_jet(x + h * eye[k], 0) - spec.metric_jet(x - h * eye[k], 0)) / (2 * h)
            for k in range(n)
        ])
        approx = geom.christoffel_from(geom.inverse_metric_at(spec, x), dg)
    elif quantity == "riemann":
        exact = geom.riemann_at(spec, x)
        gamma = geom.christoffel_at(spec, x)
        dgamma = np.stack([
            (geom.christoffel_at(spec, x + h * eye[k]) - geom.christoffel_at(spec, x - h * eye[k])) / (2 * h)
            for k in range(n)
        ])
        approx = geom.riemann_from(gamma, dgamma)
    else:
        from .bundle import BundlePoint

        if not hasattr(q, "y"):
            raise ValueError("levi_civita_induced needs a bundle point")
        lo, hi = spec.fiber
        for k, v in enumerate(q.y):
            if not _stencil_ok(lo, hi, v, h):
                raise StencilError(f"fiber coordinate {k} = {v} too close to the fiber edge for h = {h}")
        z = np.concatenate([x, q.y])
        E = np.eye(2 * n)

        def metric(zz):
            return induced_metric_jet(spec, BundlePoint(zz[:n], zz[n:]))[0]

        exact = levi_civita_induced(spec, q).coeffs
        G = metric(z)
        dG = np.stack([(metric(z + h * E[c]) - metric(z - h * E[c])) / (2 * h) for c in range(2 * n)])
        approx = geom.christoffel_from(np.linalg.inv(G), dG)
    return FDReport(quantity, h, float(np.max(np.abs(approx - exact))), float(np.max(np.abs(exact))))
