"""Tensor calculus on the base manifold at sampled points.

Index conventions (arrays are numpy, indices in the order written):

* ``gamma[h, j, i]``    = Gamma^h_{ji}
* ``dgamma[k, h, j, i]`` = d_k Gamma^h_{ji}
* ``riemann[h, k, j, i]`` = R^h_{kji}
      = d_k Gamma^h_{ji} - d_j Gamma^h_{ki} + Gamma^h_{km} Gamma^m_{ji} - Gamma^h_{jm} Gamma^m_{ki}
* ``nabla[i, h]``       = nabla_i X^h
* ``nabla2[i, l, h]``   = nabla_i nabla_l X^h

Lowered curvature is ``R_{hkji} = g_{hm} R^m_{kji}``. All partial derivatives
come from exact symbolic differentiation of the spec's expressions; the
chain rule is then applied numerically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as ex

DET_FLOOR = 1e-12


class GeometryError(ValueError):
    pass


class SingularMetricError(GeometryError):
    pass


class UnknownFieldError(GeometryError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0])


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    """A chart: coordinates, metric entries, named fields, sampling box."""

    name: str
    coords: tuple[str, ...]
    metric: tuple[tuple[ex.Expr, ...], ...]
    vector_fields: dict[str, tuple[ex.Expr, ...]] = field(default_factory=dict)
    oneforms: dict[str, tuple[ex.Expr, ...]] = field(default_factory=dict)
    domain: tuple[tuple[float, float], ...] = ()
    fiber: tuple[float, float] = (-1.0, 1.0)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __post_init__(self):
        n = self.dim
        if n < 1:
            raise GeometryError("dimension must be at least 1")
        if len(self.metric) != n or any(len(row) != n for row in self.metric):
            raise GeometryError(f"metric must be {n}x{n}")
        for j, i in itertools.combinations(range(n), 2):
            if self.metric[j][i] != self.metric[i][j]:
                raise GeometryError(f"metric entries g[{j}][{i}] and g[{i}][{j}] differ")
        for kind, table in (("vector field", self.vector_fields), ("1-form", self.oneforms)):
            for name, comps in table.items():
                if len(comps) != n:
                    raise GeometryError(f"{kind} {name!r} needs {n} components")
        allowed = set(self.coords)
        for e in self._all_exprs():
            extra = ex.symbols_of(e) - allowed
            if extra:
                raise GeometryError(f"undeclared symbols {sorted(extra)} in {e}")
        if self.domain and len(self.domain) != n:
            raise GeometryError(f"domain needs {n} intervals")

    def _all_exprs(self):
        for row in self.metric:
            yield from row
        for comps in self.vector_fields.values():
            yield from comps
        for comps in self.oneforms.values():
            yield from comps

    # compiled evaluators, built once per spec and quantity

    def _compiled(self, key, build: Callable[[], tuple[list[ex.Expr], tuple[int, ...]]]):
        if key not in self._cache:
            exprs, shape = build()
            fn = ex.compile_exprs(exprs, self.coords)
            self._cache[key] = (fn, shape)
        fn, shape = self._cache[key]
        return fn, shape

    def _evaluate(self, key, build, p) -> np.ndarray:
        fn, shape = self._compiled(key, build)
        return np.array(fn(*(float(v) for v in p)), dtype=float).reshape(shape)

    def _jet_builder(self, comps: list[ex.Expr], order: int, shape: tuple[int, ...]):
        """Exprs for all partials of ``comps`` of the given order, derivative axes first."""
        n = self.dim

        def build():
            layer = list(comps)
            for _ in range(order):
                layer = [ex.differentiate(e, c) for c in self.coords for e in layer]
            return layer, (n,) * order + shape

        return build

    def metric_jet(self, p, order: int) -> np.ndarray:
        n = self.dim
        flat = [self.metric[j][i] for j in range(n) for i in range(n)]
        return self._evaluate(("g", order), self._jet_builder(flat, order, (n, n)), p)

    def field_jet(self, name: str, p, order: int) -> np.ndarray:
        comps = self.vector_field(name)
        return self._evaluate(("X", name, order), self._jet_builder(list(comps), order, (self.dim,)), p)

    def oneform_jet(self, name: str, p, order: int) -> np.ndarray:
        if name not in self.oneforms:
            raise UnknownFieldError(f"unknown 1-form {name!r} in {self.name}")
        comps = self.oneforms[name]
        return self._evaluate(("w", name, order), self._jet_builder(list(comps), order, (self.dim,)), p)

    def vector_field(self, name: str) -> tuple[ex.Expr, ...]:
        try:
            return self.vector_fields[name]
        except KeyError:
            raise UnknownFieldError(f"unknown vector field {name!r} in {self.name}") from None


@dataclass(frozen=True)
class BaseGeometry:
    """Metric, connection and curvature evaluated at one base point."""

    point: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    riemann: np.ndarray

    @property
    def riemann_lowered(self) -> np.ndarray:
        return np.einsum("hm,mkji->hkji", self.g, self.riemann)


def _as_point(spec: ManifoldSpec, p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (spec.dim,):
        raise GeometryError(f"point must have {spec.dim} coordinates, got shape {arr.shape}")
    return arr


def _checked_inverse(g: np.ndarray, p) -> np.ndarray:
    det = np.linalg.det(g)
    if not abs(det) > DET_FLOOR:
        raise SingularMetricError(f"|det g| = {abs(det):.3g} <= {DET_FLOOR} at {list(p)}")
    return np.linalg.inv(g)


def metric_at(spec: ManifoldSpec, p) -> np.ndarray:
    p = _as_point(spec, p)
    g = spec.metric_jet(p, 0)
    _checked_inverse(g, p)
    return g


def inverse_metric_at(spec: ManifoldSpec, p) -> np.ndarray:
    p = _as_point(spec, p)
    return _checked_inverse(spec.metric_jet(p, 0), p)


def christoffel_from(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^h_{ji} from g^{-1} and dg[k, j, i] = d_k g_{ji}."""
    lowered = 0.5 * (
        np.einsum("jmi->mji", dg) + np.einsum("imj->mji", dg) - dg
    )
    return np.einsum("hm,mji->hji", ginv, lowered)


def christoffel_derivative_from(ginv, dg, ddg) -> np.ndarray:
    """d_l Gamma^h_{ji} as ``[l, h, j, i]``; ``ddg[l, k, j, i]`` = d_l d_k g_{ji}."""
    # d_l of the lowered symbol Gamma_{mji}
    dlow = 0.5 * (
        np.einsum("ljmi->lmji", ddg) + np.einsum("limj->lmji", ddg) - ddg
    )
    lowered = 0.5 * (np.einsum("jmi->mji", dg) + np.einsum("imj->mji", dg) - dg)
    dginv = -np.einsum("ha,lab,bm->lhm", ginv, dg, ginv)
    return np.einsum("lhm,mji->lhji", dginv, lowered) + np.einsum("hm,lmji->lhji", ginv, dlow)


def riemann_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    return (
        np.einsum("khji->hkji", dgamma)
        - np.einsum("jhki->hkji", dgamma)
        + np.einsum("hkm,mji->hkji", gamma, gamma)
        - np.einsum("hjm,mki->hkji", gamma, gamma)
    )


def base_geometry(spec: ManifoldSpec, p) -> BaseGeometry:
    p = _as_point(spec, p)
    g = spec.metric_jet(p, 0)
    ginv = _checked_inverse(g, p)
    dg = spec.metric_jet(p, 1)
    ddg = spec.metric_jet(p, 2)
    gamma = christoffel_from(ginv, dg)
    dgamma = christoffel_derivative_from(ginv, dg, ddg)
    return BaseGeometry(p, g, ginv, dg, gamma, dgamma, riemann_from(gamma, dgamma))


def christoffel_at(spec: ManifoldSpec, p) -> np.ndarray:
    p = _as_point(spec, p)
    return christoffel_from(inverse_metric_at(spec, p), spec.metric_jet(p, 1))


def riemann_at(spec: ManifoldSpec, p) -> np.ndarray:
    return base_geometry(spec, p).riemann


@dataclass(frozen=True)
class FieldJet:
    """A vector field and its covariant derivatives at one point."""

    X: np.ndarray
    dX: np.ndarray       # dX[k, h] = d_k X^h
    ddX: np.ndarray      # ddX[l, k, h] = d_l d_k X^h
    nabla: np.ndarray    # nabla[i, h] = nabla_i X^h
    dnabla: np.ndarray   # dnabla[i, l, h] = d_i (nabla_l X^h)
    nabla2: np.ndarray   # nabla2[i, l, h] = nabla_i nabla_l X^h
    X_low: np.ndarray    # X_i = g_{ih} X^h
    nabla_low: np.ndarray   # nabla_i X_j
    nabla2_low: np.ndarray  # nabla_i nabla_l X_j


def field_jet(spec: ManifoldSpec, name: str, p, geo: BaseGeometry | None = None) -> FieldJet:
    spec.vector_field(name)
    p = _as_point(spec, p)
    geo = geo if geo is not None else base_geometry(spec, p)
    X = spec.field_jet(name, p, 0)
    dX = spec.field_jet(name, p, 1)
    ddX = spec.field_jet(name, p, 2)
    G, dG = geo.gamma, geo.dgamma
    nabla = dX + np.einsum("him,m->ih", G, X)
    # d_i of T_l^h = nabla_l X^h
    dT = ddX + np.einsum("ihlm,m->ilh", dG, X) + np.einsum("hlm,im->ilh", G, dX)
    nabla2 = dT + np.einsum("him,lm->ilh", G, nabla) - np.einsum("mil,mh->ilh", G, nabla)
    g = geo.g
    return FieldJet(
        X=X, dX=dX, ddX=ddX, nabla=nabla, dnabla=dT, nabla2=nabla2,
        X_low=g @ X,
        nabla_low=np.einsum("jh,ih->ij", g, nabla),
        nabla2_low=np.einsum("jh,ilh->ilj", g, nabla2),
    )


def covariant_derivatives_at(spec: ManifoldSpec, name: str, p) -> tuple[np.ndarray, np.ndarray]:
    jet = field_jet(spec, name, p)
    return jet.nabla, jet.nabla2


def killing_residual_base(spec: ManifoldSpec, name: str, p) -> np.ndarray:
    """nabla_j X_i + nabla_i X_j, as an n x n matrix indexed [j, i]."""
    jet = field_jet(spec, name, p)
    return jet.nabla_low + jet.nabla_low.T


def metric_compatibility_residual(spec: ManifoldSpec, p) -> np.ndarray:
    """nabla_k g_{ji}; zero for the Levi-Civita connection."""
    geo = base_geometry(spec, p)
    return (
        geo.dg
        - np.einsum("mkj,mi->kji", geo.gamma, geo.g)
        - np.einsum("mki,jm->kji", geo.gamma, geo.g)
    )


def corner_points(spec: ManifoldSpec) -> list[np.ndarray]:
    """All corners of the sampling box plus its centre."""
    box = spec.domain
    corners = [np.array(c, dtype=float) for c in itertools.product(*box)]
    corners.append(np.array([(lo + hi) / 2 for lo, hi in box]))
    return corners


def check_domain(spec: ManifoldSpec) -> None:
    """Reject boxes whose corner probe hits a degenerate metric."""
    for lo, hi in spec.domain:
        if not lo < hi:
            raise GeometryError(f"empty interval [{lo}, {hi}] in domain of {spec.name}")
    lo, hi = spec.fiber
    if not lo <= hi:
        raise GeometryError(f"empty fiber interval in {spec.name}")
    for c in corner_points(spec):
        try:
            metric_at(spec, c)
        except ex.EvalDomainError as exc:
            raise SingularMetricError(f"metric undefined at corner {list(c)}: {exc}") from None
