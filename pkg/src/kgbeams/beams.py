"""Generating functions and the beam families derived from them.

Every function takes a :class:`~kgbeams.coords.SpacetimePoint` (scalar or array
valued) and returns the complex amplitude.  Conventions are unnormalized and
keep the overall constants of the closed forms, e.g. the ``2 pi (-i)^l`` of
the Bessel-Gauss beams.

Families are also registered in :data:`FAMILIES` so that the verification
and command-line layers can build a :class:`ComplexField` from a family id
and a flat parameter dict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .coords import OffSliceTransverse, SpacetimePoint, azimuth
from .specfun import bessel_j, hermite, laguerre, macdonald_k1


class BranchCutError(ArithmeticError):
    """A principal square root was requested on its branch cut."""


class ParameterRangeError(ValueError):
    """A parameter lies outside its documented validated range."""


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class BeamPhysical:
    E: float = 1.0
    m: float = 0.0
    w0: float = 1.0

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"E must be positive, got {self.E}")
        if not self.w0 > 0:
            raise ValueError(f"w0 must be positive, got {self.w0}")
        if not self.m >= 0:
            raise ValueError(f"m must be non-negative, got {self.m}")


@dataclass(frozen=True)
class LGIndices:
    n: int
    l: int

    def __post_init__(self):
        if self.n < 0 or self.l < 0:
            raise ValueError("LG indices must be non-negative")


@dataclass(frozen=True)
class HGIndices:
    mx: int
    ny: int

    def __post_init__(self):
        if self.mx < 0 or self.ny < 0:
            raise ValueError("HG indices must be non-negative")


@dataclass(frozen=True)
class ExpParams:
    q: float
    k: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("derivative order k must be non-negative")


@dataclass(frozen=True)
class BesselParams:
    p_perp: float
    p_z: float = 0.0
    l: int = 0

    def __post_init__(self):
        if not self.p_perp > 0:
            raise ValueError("p_perp must be positive")


@dataclass(frozen=True)
class BGParams:
    b: float
    l: int = 0

    def __post_init__(self):
        if not self.b >= 0:
            raise ValueError("b must be non-negative")
        if self.l < 0:
            raise ValueError("l must be non-negative")


# ---------------------------------------------------------------- fields


@dataclass(frozen=True)
class ComplexField:
    """A complex amplitude defined on spacetime.

    ``func`` maps broadcast arrays ``(t, x, y, z)`` to complex amplitudes.
    """

    func: Callable
    family: str = "custom"
    params: Mapping = field(default_factory=dict)

    def evaluate(self, t, x, y, z):
        return np.asarray(self.func(t, x, y, z), dtype=complex)

    def __call__(self, p: SpacetimePoint):
        out = self.evaluate(*p.arrays())
        return out[()] if out.ndim == 0 else out

    def __add__(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(lambda t, x, y, z: self.func(t, x, y, z) + other.func(t, x, y, z),
                            family=f"({self.family}+{other.family})")

    def __rmul__(self, c) -> "ComplexField":
        return ComplexField(lambda t, x, y, z: c * self.func(t, x, y, z),
                            family=f"{c}*{self.family}")


def _point(p):
    if isinstance(p, SpacetimePoint):
        return p.arrays()
    return tuple(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in p)))


def _o(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a


# ---------------------------------------------------------------- Gaussian generator


def envelope_a(t_plus, phys: BeamPhysical):
    """Complex envelope ``w0^2 + 2i t_plus / E``; its real part is ``w0^2``."""
    return phys.w0 ** 2 + 2j * np.asarray(t_plus, dtype=float) / phys.E


def gaussian_phase(t_plus, t_minus, phys: BeamPhysical):
    """``exp(-i E t_minus / 2) exp(-i m^2 t_plus / (2E))``."""
    return np.exp(-0.5j * phys.E * np.asarray(t_minus) - 0.5j * phys.m ** 2 / phys.E * np.asarray(t_plus))


def g_lg_offslice(xt: OffSliceTransverse, t_plus, t_minus, phys: BeamPhysical):
    a = envelope_a(t_plus, phys)
    return _o(gaussian_phase(t_plus, t_minus, phys) / a
              * np.exp(-np.asarray(xt.x_plus) * np.asarray(xt.x_minus) / a))


def g_lg(p, phys: BeamPhysical):
    """Gaussian generating function of the Laguerre-Gauss family."""
    t, x, y, z = _point(p)
    tp, tm = t + z, t - z
    a = envelope_a(tp, phys)
    return _o(gaussian_phase(tp, tm, phys) / a * np.exp(-(x * x + y * y) / a))


def f_lg(idx: LGIndices, p, phys: BeamPhysical):
    """Laguerre-Gauss beam of radial order ``n`` and azimuthal order ``l``.

    The Laguerre argument ``rho^2 / a`` is complex away from ``t_plus = 0``.
    """
    t, x, y, z = _point(p)
    tp, tm = t + z, t - z
    a = envelope_a(tp, phys)
    r2 = x * x + y * y
    return _o(gaussian_phase(tp, tm, phys) * (x + 1j * y) ** idx.l / a ** (idx.n + idx.l + 1)
              * np.exp(-r2 / a) * laguerre(idx.n, idx.l, r2 / a))


def g_hg(p, phys: BeamPhysical):
    """The Gaussian generator viewed as a function of ``x`` and ``y``."""
    return g_lg(p, phys)


def g_hg_complex(x, y, t, z, phys: BeamPhysical):
    """Holomorphic extension of :func:`g_hg` to complex ``x`` and/or ``y``."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    tp, tm = t + z, t - z
    a = envelope_a(tp, phys)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return _o(gaussian_phase(tp, tm, phys) / a * np.exp(-(x * x + y * y) / a))


def f_hg(idx: HGIndices, p, phys: BeamPhysical):
    """Hermite-Gauss beam; ``sqrt(a)`` is the principal root (``Re a > 0``)."""
    t, x, y, z = _point(p)
    tp = t + z
    sa = np.sqrt(envelope_a(tp, phys))
    return _o(hermite(idx.mx, x / sa) * hermite(idx.ny, y / sa) * g_hg((t, x, y, z), phys)
              / sa ** (idx.mx + idx.ny))


# ---------------------------------------------------------------- exponential generator


def _branch_safe_sqrt(w):
    w = np.asarray(w, dtype=complex)
    if np.any((w.imag == 0.0) & (w.real <= 0.0)):
        raise BranchCutError("square-root argument on the closed negative real axis")
    return np.sqrt(w)


def exp_u_squared(x_plus, x_minus, t, q, phys: BeamPhysical):
    """``u^2 = (w0 + i kappa t)^2 + kappa^2 x_plus x_minus``, ``kappa^2 = m^2 + q^2``."""
    k2 = phys.m ** 2 + q ** 2
    return (phys.w0 + 1j * math.sqrt(k2) * np.asarray(t)) ** 2 + k2 * x_plus * x_minus


def g_exp(p, q: float, phys: BeamPhysical):
    """``e^{iqz} e^{-u} / u``; on real points ``Re u > 0``."""
    t, x, y, z = _point(p)
    k2 = phys.m ** 2 + q ** 2
    u = np.sqrt((phys.w0 + 1j * math.sqrt(k2) * t) ** 2 + k2 * (x * x + y * y))
    if np.any(~(u.real > 0)):
        raise BranchCutError("Re(u) <= 0 at a real point")
    return _o(np.exp(1j * q * z) * np.exp(-u) / u)


def g_exp_offslice(xt: OffSliceTransverse, t, z, q: float, phys: BeamPhysical):
    u = _branch_safe_sqrt(exp_u_squared(np.asarray(xt.x_plus), np.asarray(xt.x_minus), t, q, phys))
    return _o(np.exp(1j * q * np.asarray(z)) * np.exp(-u) / u)


def f_exp_first_derivative(p, q: float, phys: BeamPhysical):
    """Chain-rule closed form of the first ``x_minus`` derivative of ``g_exp``."""
    t, x, y, z = _point(p)
    k2 = phys.m ** 2 + q ** 2
    u = np.sqrt((phys.w0 + 1j * math.sqrt(k2) * t) ** 2 + k2 * (x * x + y * y))
    xp = x + 1j * y
    return _o(-np.exp(1j * q * z) * np.exp(-u) * (1 + u) / u ** 2 * k2 * xp / (2 * u))


def f_exp(k: int, p, q: float, phys: BeamPhysical, spec=None):
    """``k``-th derivative of ``g_exp`` with respect to ``x_minus`` (no factorial).

    Evaluated by contour integration on the off-slice extension; see
    :func:`kgbeams.construct.exp_derivative`.
    """
    from .construct import exp_derivative

    if k < 1:
        raise ValueError("f_exp needs k >= 1; use g_exp for k = 0")
    return exp_derivative(k, p, q, phys, spec)


# ---------------------------------------------------------------- Macdonald generator


def g_md(p, phys: BeamPhysical):
    """``m K_1(m s) / s`` with ``s^2 = (w0 + it)^2 + rho^2 + z^2``."""
    if not phys.m > 0:
        raise ValueError("g_md requires m > 0")
    t, x, y, z = _point(p)
    s = np.sqrt((phys.w0 + 1j * t) ** 2 + x * x + y * y + z * z)
    if np.any(~(s.real > 0)):
        raise BranchCutError("Re(s) <= 0 at a real point")
    return _o(phys.m * macdonald_k1(phys.m * s) / s)


# ---------------------------------------------------------------- Bessel family


def bessel_frequency(prm: BesselParams, m: float) -> float:
    return math.sqrt(prm.p_perp ** 2 + prm.p_z ** 2 + m ** 2)


def g_b(p, prm: BesselParams, m: float, varphi):
    """Plane wave with transverse momentum ``p_perp`` at azimuth ``varphi``."""
    t, x, y, z = _point(p)
    om = bessel_frequency(prm, m)
    proj = x * np.cos(varphi) + y * np.sin(varphi)
    return _o(np.exp(1j * (-om * t + prm.p_z * z + prm.p_perp * proj)))


def f_bessel(prm: BesselParams, p, m: float):
    """Bessel beam ``2 pi i^l e^{il phi} J_l(p_perp rho) e^{-i Omega t + i p_z z}``."""
    t, x, y, z = _point(p)
    om = bessel_frequency(prm, m)
    rho = np.hypot(x, y)
    phi = azimuth(x, y)
    return _o(2 * np.pi * 1j ** prm.l * np.exp(1j * prm.l * phi) * bessel_j(prm.l, prm.p_perp * rho)
              * np.exp(1j * (-om * t + prm.p_z * z)))


# ---------------------------------------------------------------- Bessel-Gauss family


def g_bg(p, b: float, varphi, phys: BeamPhysical):
    """Gaussian generator displaced by ``i b`` along azimuth ``varphi``."""
    t, x, y, z = _point(p)
    tp, tm = t + z, t - z
    a = envelope_a(tp, phys)
    proj = x * np.cos(varphi) + y * np.sin(varphi)
    return _o(gaussian_phase(tp, tm, phys) / a
              * np.exp(-(x * x + y * y - b * b + 2j * b * proj) / a))


def f_bg(prm: BGParams, p, phys: BeamPhysical):
    """Bessel-Gauss beam with complex Bessel argument ``2 b rho / a``."""
    t, x, y, z = _point(p)
    tp, tm = t + z, t - z
    a = envelope_a(tp, phys)
    r2 = x * x + y * y
    rho = np.sqrt(r2)
    phi = azimuth(x, y)
    return _o(2 * np.pi * (-1j) ** prm.l * np.exp(1j * prm.l * phi) / a
              * gaussian_phase(tp, tm, phys) * np.exp(-(r2 - prm.b ** 2) / a)
              * bessel_j(prm.l, 2 * prm.b * rho / a))


# ---------------------------------------------------------------- registry


# validated parameter ranges (inclusive)
RANGES = {
    "E": (1.0, 20.0),
    "m": (0.0, 5.0),
    "w0": (0.5, 3.0),
    "q": (-3.0, 3.0),
    "p_perp": (0.0, 3.0),
    "p_z": (-3.0, 3.0),
    "b": (0.0, 2.0),
    "varphi": (-2 * np.pi, 4 * np.pi),
    "n": (0, 8),
    "l": (0, 8),
    "mx": (0, 8),
    "ny": (0, 8),
    "k": (1, 6),
}


@dataclass(frozen=True)
class FamilyInfo:
    id: str
    title: str
    formula: str
    params: tuple[str, ...]
    defaults: Mapping
    build: Callable[[Mapping], Callable]
    order_param: str | None = None
    ranges: Mapping = field(default_factory=dict)
    conventions: str = ""


def _phys(pr):
    return BeamPhysical(E=float(pr["E"]), m=float(pr["m"]), w0=float(pr["w0"]))


_GAUSS_DEFAULTS = {"E": 2.0, "m": 1.0, "w0": 1.0}

FAMILIES: dict[str, FamilyInfo] = {}


def _register(info: FamilyInfo):
    FAMILIES[info.id] = info


_register(FamilyInfo(
    "g_lg", "Gaussian generating function",
    "exp(-i E t_-/2) exp(-i m^2 t_+/(2E)) exp(-x_+ x_-/a)/a,  a = w0^2 + 2i t_+/E",
    ("E", "m", "w0"), dict(_GAUSS_DEFAULTS),
    lambda pr: (lambda t, x, y, z: g_lg((t, x, y, z), _phys(pr))),
    conventions="t_+- = t +- z, x_+- = x +- iy, hbar = c = 1",
))
_register(FamilyInfo(
    "lg", "Laguerre-Gauss beams",
    "phases * (x+iy)^l / a^(n+l+1) * exp(-rho^2/a) * L_n^l(rho^2/a)"
    "  =  (-1)^(n+l)/n! d^(n+l)/dx_-^(n+l) d^n/dx_+^n G_LG",
    ("n", "l", "E", "m", "w0"), {"n": 0, "l": 0, **_GAUSS_DEFAULTS},
    lambda pr: (lambda t, x, y, z: f_lg(LGIndices(int(pr["n"]), int(pr["l"])), (t, x, y, z), _phys(pr))),
    order_param="l",
    conventions="unnormalized; Laguerre argument complex (carries the Gouy phase)",
))
_register(FamilyInfo(
    "g_hg", "Gaussian generating function as a function of x and y",
    "G_HG(x, y, z, t) = G_LG(x_+, x_-, z, t)",
    ("E", "m", "w0"), dict(_GAUSS_DEFAULTS),
    lambda pr: (lambda t, x, y, z: g_hg((t, x, y, z), _phys(pr))),
))
_register(FamilyInfo(
    "hg", "Hermite-Gauss beams",
    "(-1)^(mx+ny) d^mx/dx^mx d^ny/dy^ny G_HG = H_mx(x/sqrt a) H_ny(y/sqrt a) G_HG / a^((mx+ny)/2)",
    ("mx", "ny", "E", "m", "w0"), {"mx": 0, "ny": 0, **_GAUSS_DEFAULTS},
    lambda pr: (lambda t, x, y, z: f_hg(HGIndices(int(pr["mx"]), int(pr["ny"])), (t, x, y, z), _phys(pr))),
    conventions="principal sqrt(a); Hermite arguments complex",
))
_register(FamilyInfo(
    "g_exp", "Exponential generating function",
    "e^(iqz) e^(-u)/u,  u = sqrt((w0 + i kappa t)^2 + kappa^2 x_+ x_-),  kappa^2 = m^2 + q^2",
    ("q", "m", "w0"), {"q": 1.0, "m": 1.0, "w0": 1.0},
    lambda pr: (lambda t, x, y, z: g_exp((t, x, y, z), float(pr["q"]), BeamPhysical(m=float(pr["m"]), w0=float(pr["w0"])))),
    conventions="principal sqrt; Re(u) > 0 on real points",
))
_register(FamilyInfo(
    "exp", "Exponential-falloff beams",
    "d^k/dx_-^k [e^(iqz) e^(-u)/u]  (no factorial prefactor)",
    ("k", "q", "m", "w0"), {"k": 1, "q": 1.0, "m": 1.0, "w0": 1.0},
    lambda pr: (lambda t, x, y, z: f_exp(int(pr["k"]), (t, x, y, z), float(pr["q"]),
                                         BeamPhysical(m=float(pr["m"]), w0=float(pr["w0"])))),
    order_param="k",
    conventions="evaluated by contour integration in the independent variable x_-",
))
_register(FamilyInfo(
    "g_md", "Macdonald generating function",
    "m K_1(m s)/s,  s = sqrt((w0 + it)^2 + x_+ x_- + z^2)",
    ("m", "w0"), {"m": 1.0, "w0": 1.0},
    lambda pr: (lambda t, x, y, z: g_md((t, x, y, z), BeamPhysical(m=float(pr["m"]), w0=float(pr["w0"])))),
    ranges={"m": (1e-3, 5.0)},
    conventions="principal sqrt; Re(s) >= w0 on real points; requires m > 0",
))
_register(FamilyInfo(
    "g_b", "Bessel generating function (tilted plane wave)",
    "exp(-i sqrt(p_perp^2 + p_z^2 + m^2) t + i p_z z) exp(i p_perp rho cos(phi - varphi))",
    ("p_perp", "p_z", "m", "varphi"), {"p_perp": 1.0, "p_z": 0.5, "m": 1.0, "varphi": 0.0},
    lambda pr: (lambda t, x, y, z: g_b((t, x, y, z), BesselParams(float(pr["p_perp"]), float(pr["p_z"])),
                                       float(pr["m"]), float(pr["varphi"]))),
))
_register(FamilyInfo(
    "bessel", "Bessel beams",
    "int_0^2pi e^(il varphi) G_B dvarphi = 2 pi i^l e^(il phi) J_l(p_perp rho) exp(-i Omega t + i p_z z)",
    ("p_perp", "p_z", "l", "m"), {"p_perp": 1.0, "p_z": 0.5, "l": 0, "m": 1.0},
    lambda pr: (lambda t, x, y, z: f_bessel(BesselParams(float(pr["p_perp"]), float(pr["p_z"]), int(pr["l"])),
                                            (t, x, y, z), float(pr["m"]))),
    order_param="l",
    ranges={"l": (-8, 8)},
    conventions="Omega = sqrt(p_perp^2 + p_z^2 + m^2)",
))
_register(FamilyInfo(
    "g_bg", "Bessel-Gauss generating function",
    "phases * exp(-(rho^2 - b^2 + 2i b rho cos(phi - varphi))/a)/a",
    ("b", "varphi", "E", "m", "w0"), {"b": 1.0, "varphi": 0.0, **_GAUSS_DEFAULTS},
    lambda pr: (lambda t, x, y, z: g_bg((t, x, y, z), float(pr["b"]), float(pr["varphi"]), _phys(pr))),
))
_register(FamilyInfo(
    "bg", "Bessel-Gauss beams",
    "2 pi (-i)^l e^(il phi)/a * phases * exp(-(rho^2 - b^2)/a) * J_l(2 b rho/a)",
    ("b", "l", "E", "m", "w0"), {"b": 1.0, "l": 0, **_GAUSS_DEFAULTS},
    lambda pr: (lambda t, x, y, z: f_bg(BGParams(float(pr["b"]), int(pr["l"])), (t, x, y, z), _phys(pr))),
    order_param="l",
    conventions="obtained by integrating e^(il varphi) G_BG over varphi in [0, 2pi)",
))


def family_info(family: str) -> FamilyInfo:
    try:
        return FAMILIES[family]
    except KeyError:
        raise KeyError(f"unknown family {family!r}; valid ids: {', '.join(FAMILIES)}") from None


def resolve_params(family: str, params: Mapping | None = None, check_ranges: bool = True) -> dict:
    """Merge ``params`` over the family defaults and validate them."""
    info = family_info(family)
    params = dict(params or {})
    unknown = set(params) - set(info.params)
    if unknown:
        raise ParameterRangeError(f"{family}: unknown parameter(s) {sorted(unknown)}; "
                                  f"expected {list(info.params)}")
    out = dict(info.defaults)
    out.update(params)
    if check_ranges:
        for name in info.params:
            lo, hi = info.ranges.get(name, RANGES[name])
            if not lo <= out[name] <= hi:
                raise ParameterRangeError(f"{family}: {name}={out[name]} outside [{lo}, {hi}]")
    return out


def make_field(family: str, params: Mapping | None = None, check_ranges: bool = True) -> ComplexField:
    """Build the :class:`ComplexField` for a registered family."""
    info = family_info(family)
    pr = resolve_params(family, params, check_ranges)
    func = info.build(pr)
    # force parameter-record validation (E > 0, p_perp > 0, ...) up front
    func(np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1))
    return ComplexField(func, family=family, params=pr)


def field_order(field: ComplexField) -> int | None:
    """Rotation eigenphase order of a registered field, if it has one."""
    info = FAMILIES.get(field.family)
    if info is None or info.order_param is None:
        return None
    return int(field.params[info.order_param])


def field_mass(field: ComplexField) -> float:
    return float(field.params.get("m", 0.0))
