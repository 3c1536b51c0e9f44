"""Exact calculus in the closed family p(z, zbar) * exp(Q(z, zbar)) on C^g.

``Q`` is a polynomial of degree at most two in the 2g commuting symbols
(z_1..z_g, zbar_1..zbar_g) and ``p`` an arbitrary polynomial in the same
symbols.  Differentiation and multiplication by coordinates stay inside the
family and never touch ``Q``, so the whole ladder-operator algebra of the
deformed oscillators is carried exactly: residuals of the commutation
relations are pure floating-point roundoff.

Inner products integrate against Lebesgue measure dx_1 dy_1 ... dx_g dy_g of
the complex chart (z_j = x_j + i y_j).  They are evaluated analytically by
completing the square and a Stein/Wick moment recursion; a trapezoid
quadrature cross-check lives in :func:`quadrature_inner_product`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .torus import TorusData

TWO_PI = 2.0 * np.pi

Monomial = tuple[tuple[int, ...], tuple[int, ...]]  # (z exponents, zbar exponents)


class DomainError(ValueError):
    """Requested an integral of a non-integrable exponent."""


class ExponentMismatchError(ValueError):
    """Linear combination of PolyGauss values with different exponents."""


@dataclass(frozen=True)
class Quad:
    """Degree-<=2 exponent: q0 + lz.z + lzb.zbar + z'Azz z + zb'Abb zb + z'Azb zb."""

    g: int
    q0: complex
    lz: np.ndarray
    lzb: np.ndarray
    azz: np.ndarray
    abb: np.ndarray
    azb: np.ndarray

    @classmethod
    def zero(cls, g: int) -> "Quad":
        return cls(
            g=g,
            q0=0.0,
            lz=np.zeros(g, dtype=complex),
            lzb=np.zeros(g, dtype=complex),
            azz=np.zeros((g, g), dtype=complex),
            abb=np.zeros((g, g), dtype=complex),
            azb=np.zeros((g, g), dtype=complex),
        )

    def __add__(self, other: "Quad") -> "Quad":
        return Quad(
            g=self.g,
            q0=self.q0 + other.q0,
            lz=self.lz + other.lz,
            lzb=self.lzb + other.lzb,
            azz=self.azz + other.azz,
            abb=self.abb + other.abb,
            azb=self.azb + other.azb,
        )

    def conjugate(self) -> "Quad":
        return Quad(
            g=self.g,
            q0=np.conj(self.q0),
            lz=self.lzb.conj(),
            lzb=self.lz.conj(),
            azz=self.abb.conj(),
            abb=self.azz.conj(),
            azb=self.azb.conj().T,
        )

    def grad_z(self, k: int):
        """Coefficients (const, z-vector, zbar-vector) of dQ/dz_k."""
        return self.lz[k], 2.0 * self.azz[k, :], self.azb[k, :]

    def grad_zb(self, k: int):
        return self.lzb[k], self.azb[:, k].copy(), 2.0 * self.abb[k, :]

    def distance(self, other: "Quad") -> float:
        return max(
            abs(self.q0 - other.q0),
            np.max(np.abs(self.lz - other.lz), initial=0.0),
            np.max(np.abs(self.lzb - other.lzb), initial=0.0),
            np.max(np.abs(self.azz - other.azz), initial=0.0),
            np.max(np.abs(self.abb - other.abb), initial=0.0),
            np.max(np.abs(self.azb - other.azb), initial=0.0),
        )

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        zb = np.conj(z)
        val = np.full(z.shape[1:], self.q0, dtype=complex)
        for i in range(self.g):
            val += self.lz[i] * z[i] + self.lzb[i] * zb[i]
            for j in range(self.g):
                val += (
                    self.azz[i, j] * z[i] * z[j]
                    + self.abb[i, j] * zb[i] * zb[j]
                    + self.azb[i, j] * z[i] * zb[j]
                )
        return val


def _poly_mul(p1: dict, p2: dict) -> dict:
    out: dict[Monomial, complex] = {}
    for (a1, b1), c1 in p1.items():
        for (a2, b2), c2 in p2.items():
            key = (
                tuple(x + y for x, y in zip(a1, a2)),
                tuple(x + y for x, y in zip(b1, b2)),
            )
            out[key] = out.get(key, 0.0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def _poly_add(p1: dict, p2: dict, scale: complex = 1.0) -> dict:
    out = dict(p1)
    for k, c in p2.items():
        out[k] = out.get(k, 0.0) + scale * c
    return {k: v for k, v in out.items() if v != 0}


class PolyGauss:
    """Value p(z, zbar) * exp(Q(z, zbar)); immutable by convention."""

    __slots__ = ("g", "quad", "poly")

    def __init__(self, g: int, quad: Quad, poly: dict[Monomial, complex]):
        self.g = g
        self.quad = quad
        self.poly = {k: complex(c) for k, c in poly.items() if c != 0}

    @classmethod
    def gaussian(cls, quad: Quad) -> "PolyGauss":
        g = quad.g
        one = ((0,) * g, (0,) * g)
        return cls(g, quad, {one: 1.0})

    # -- linear structure ----------------------------------------------------

    def _require_same_quad(self, other: "PolyGauss", tol: float = 1e-9) -> None:
        if self.quad is not other.quad and self.quad.distance(other.quad) > tol:
            raise ExponentMismatchError("PolyGauss exponents differ; cannot combine")

    def __add__(self, other: "PolyGauss") -> "PolyGauss":
        self._require_same_quad(other)
        return PolyGauss(self.g, self.quad, _poly_add(self.poly, other.poly))

    def __sub__(self, other: "PolyGauss") -> "PolyGauss":
        self._require_same_quad(other)
        return PolyGauss(self.g, self.quad, _poly_add(self.poly, other.poly, scale=-1.0))

    def scale(self, factor: complex) -> "PolyGauss":
        return PolyGauss(self.g, self.quad, {k: c * factor for k, c in self.poly.items()})

    def norm(self) -> float:
        """Max absolute polynomial coefficient (the exponent is shared context)."""
        return max((abs(c) for c in self.poly.values()), default=0.0)

    def distance(self, other: "PolyGauss") -> float:
        return (self - other).norm()

    # -- closed operations ---------------------------------------------------

    def mul_poly(self, poly: dict[Monomial, complex]) -> "PolyGauss":
        return PolyGauss(self.g, self.quad, _poly_mul(self.poly, poly))

    def mul_coord(self, coord: str, k: int, power: int = 1) -> "PolyGauss":
        """Multiply by z_k (coord='z') or zbar_k (coord='zb'); k is 0-based."""
        az = [0] * self.g
        ab = [0] * self.g
        (az if coord == "z" else ab)[k] = power
        return self.mul_poly({(tuple(az), tuple(ab)): 1.0})

    def _poly_diff(self, coord: str, k: int) -> dict:
        out: dict[Monomial, complex] = {}
        for (a, b), c in self.poly.items():
            e = (a if coord == "z" else b)[k]
            if e == 0:
                continue
            if coord == "z":
                key = (tuple(x - (1 if i == k else 0) for i, x in enumerate(a)), b)
            else:
                key = (a, tuple(x - (1 if i == k else 0) for i, x in enumerate(b)))
            out[key] = out.get(key, 0.0) + e * c
        return out

    def diff(self, coord: str, k: int) -> "PolyGauss":
        """Exact d/dz_k or d/dzbar_k; output shares this value's exponent."""
        c0, vz, vzb = self.quad.grad_z(k) if coord == "z" else self.quad.grad_zb(k)
        grad: dict[Monomial, complex] = {}
        one_z = lambda i: (tuple(1 if t == i else 0 for t in range(self.g)), (0,) * self.g)
        one_zb = lambda i: ((0,) * self.g, tuple(1 if t == i else 0 for t in range(self.g)))
        if c0 != 0:
            grad[((0,) * self.g, (0,) * self.g)] = c0
        for i in range(self.g):
            if vz[i] != 0:
                grad[one_z(i)] = grad.get(one_z(i), 0.0) + vz[i]
            if vzb[i] != 0:
                grad[one_zb(i)] = grad.get(one_zb(i), 0.0) + vzb[i]
        chain = _poly_mul(self.poly, grad) if grad else {}
        return PolyGauss(self.g, self.quad, _poly_add(self._poly_diff(coord, k), chain))

    def conjugate(self) -> "PolyGauss":
        poly = {(b, a): np.conj(c) for (a, b), c in self.poly.items()}
        return PolyGauss(self.g, self.quad.conjugate(), poly)

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at points; z has shape (g,) + grid_shape, complex entries."""
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        val = np.zeros(z.shape[1:], dtype=complex)
        for (a, b), c in self.poly.items():
            term = np.full(z.shape[1:], c, dtype=complex)
            for i in range(self.g):
                if a[i]:
                    term = term * z[i] ** a[i]
                if b[i]:
                    term = term * zb[i] ** b[i]
            val += term
        return val * np.exp(self.quad.evaluate(z))


# -- oscillator vacua ----------------------------------------------------------


def vacuum_x(torus: TorusData, mu) -> PolyGauss:
    """Deformed Gaussian ground state attached to lattice point mu (X side).

    exp(-2 pi (|z|^2 + i sum_j B_j(mu) z_j + i sum_j conj(B_j(mu) z_j))).
    """
    g = torus.g
    beta = torus.b_coefficient_lattice(mu)
    quad = Quad.zero(g) + Quad(
        g=g,
        q0=0.0,
        lz=-TWO_PI * 1j * beta,
        lzb=-TWO_PI * 1j * beta.conj(),
        azz=np.zeros((g, g), dtype=complex),
        abb=np.zeros((g, g), dtype=complex),
        azb=-TWO_PI * np.eye(g, dtype=complex),
    )
    return PolyGauss.gaussian(quad)


def vacuum_y(torus: TorusData, w) -> PolyGauss:
    """a(., w) = sigma(z, w) exp(-2 pi |z - w|^2), w in complex coordinates."""
    g = torus.g
    w = np.asarray(w, dtype=complex)
    # 2 pi i B(z, w) as a function of z: linear part of the scalar identity
    lz_phase = TWO_PI * 1j * (torus.b @ w + torus.c @ w.conj())
    lzb_phase = TWO_PI * 1j * (torus.b.conj() @ w.conj() - torus.c.T @ w)
    quad = Quad(
        g=g,
        q0=complex(-TWO_PI * np.vdot(w, w).real),
        lz=TWO_PI * w.conj() + lz_phase,
        lzb=TWO_PI * w + lzb_phase,
        azz=np.zeros((g, g), dtype=complex),
        abb=np.zeros((g, g), dtype=complex),
        azb=-TWO_PI * np.eye(g, dtype=complex),
    )
    return PolyGauss.gaussian(quad)


# -- ladder operators, Hamiltonians --------------------------------------------

Operator = Callable[[PolyGauss], PolyGauss]


def _affine_poly(g: int, const: complex, coord: str | None = None, k: int = 0) -> dict:
    out: dict[Monomial, complex] = {}
    if const != 0:
        out[((0,) * g, (0,) * g)] = const
    if coord is not None:
        az = [0] * g
        ab = [0] * g
        (az if coord == "z" else ab)[k] = 1
        out[(tuple(az), tuple(ab))] = out.get((tuple(az), tuple(ab)), 0.0) + 1.0
    return out


def make_ladder(kind: str, j: int, center: complex, beta: complex) -> Operator:
    """First-order ladder operator in coordinate j (1-based).

    With zeta = z_j - center and beta the relevant coefficient B_j:

        A  =  d/dzbar_j + 2 pi (zeta        + i conj(beta))
        A* = -d/dz_j    + 2 pi (conj(zeta)  - i beta)
        B  =  d/dz_j    + 2 pi (conj(zeta)  + i beta)
        B* = -d/dzbar_j + 2 pi (zeta        - i conj(beta))

    A and B annihilate the matching vacuum; (A, A*) and (B, B*) are formal
    adjoint pairs and together they satisfy the usual +-2 pi ladder algebra.
    """
    k = j - 1

    def op(f: PolyGauss, *, _kind=kind, _k=k, _center=center, _beta=beta) -> PolyGauss:
        g = f.g
        if _kind == "A":
            mult = _affine_poly(g, -_center + 1j * np.conj(_beta), "z", _k)
            return f.diff("zb", _k) + f.mul_poly(mult).scale(TWO_PI)
        if _kind == "A*":
            mult = _affine_poly(g, -np.conj(_center) - 1j * _beta, "zb", _k)
            return f.diff("z", _k).scale(-1.0) + f.mul_poly(mult).scale(TWO_PI)
        if _kind == "B":
            mult = _affine_poly(g, -np.conj(_center) + 1j * _beta, "zb", _k)
            return f.diff("z", _k) + f.mul_poly(mult).scale(TWO_PI)
        if _kind == "B*":
            mult = _affine_poly(g, -_center - 1j * np.conj(_beta), "z", _k)
            return f.diff("zb", _k).scale(-1.0) + f.mul_poly(mult).scale(TWO_PI)
        raise ValueError(f"unknown ladder kind {_kind!r}")

    return op


def make_ladder_x(torus: TorusData, kind: str, mu, j: int = 1) -> Operator:
    beta = torus.b_coefficient_lattice(mu)[j - 1]
    return make_ladder(kind, j, 0.0, beta)


def make_ladder_y(torus: TorusData, kind: str, w, j: int = 1) -> Operator:
    w = np.asarray(w, dtype=complex)
    beta = torus.b_coefficient(w)[j - 1]
    return make_ladder(kind, j, w[j - 1], beta)


def _hamiltonian_coord(f: PolyGauss, k: int, center: complex, beta: complex) -> PolyGauss:
    g = f.g
    second = f.diff("z", k).diff("zb", k).scale(-1.0)
    first = (f.diff("zb", k).scale(beta) + f.diff("z", k).scale(np.conj(beta))).scale(
        -TWO_PI * 1j
    )
    zeta = _affine_poly(g, -center, "z", k)
    zeta_bar = _affine_poly(g, -np.conj(center), "zb", k)
    absq = _poly_mul(zeta, zeta_bar)
    potential = f.mul_poly(absq).scale(TWO_PI**2) + f.scale(TWO_PI**2 * abs(beta) ** 2)
    return second + first + potential


def make_hamiltonian_x(torus: TorusData, mu) -> Operator:
    """The deformed oscillator sum over coordinates with coefficients B_j(mu)."""
    beta = torus.b_coefficient_lattice(mu)

    def op(f: PolyGauss) -> PolyGauss:
        total = None
        for k in range(f.g):
            term = _hamiltonian_coord(f, k, 0.0, beta[k])
            total = term if total is None else total + term
        return total

    return op


def make_operator_l(torus: TorusData, w) -> Operator:
    """Same oscillator centered at w with coefficients B_j(w) (Y side)."""
    w = np.asarray(w, dtype=complex)
    beta = torus.b_coefficient(w)

    def op(f: PolyGauss) -> PolyGauss:
        total = None
        for k in range(f.g):
            term = _hamiltonian_coord(f, k, w[k], beta[k])
            total = term if total is None else total + term
        return total

    return op


def commutator(op1: Operator, op2: Operator, f: PolyGauss) -> PolyGauss:
    return op1(op2(f)) - op2(op1(f))


def hermite_state(torus: TorusData, side: str, i: int, j: int, parameter, coord: int = 1) -> PolyGauss:
    """b^(i,j) (side='X', parameter a lattice point) or a^(i,j) (side='Y', parameter w).

    Built from the vacuum by i applications of A* and j of B* in coordinate
    ``coord``; the order is immaterial because A* and B* commute.
    """
    if i < 0 or j < 0:
        raise ValueError("Hermite indices must be nonnegative")
    if side == "X":
        state = vacuum_x(torus, parameter)
        astar = make_ladder_x(torus, "A*", parameter, coord)
        bstar = make_ladder_x(torus, "B*", parameter, coord)
    elif side == "Y":
        state = vacuum_y(torus, parameter)
        astar = make_ladder_y(torus, "A*", parameter, coord)
        bstar = make_ladder_y(torus, "B*", parameter, coord)
    else:
        raise ValueError("side must be 'X' or 'Y'")
    for _ in range(i):
        state = astar(state)
    for _ in range(j):
        state = bstar(state)
    return state


# -- analytic Gaussian integration ---------------------------------------------


def _real_quadratic(quad: Quad):
    """Exponent as -(1/2) x'Mx + u'x + s0 over the 2g real chart coordinates."""
    g = quad.g
    n = 2 * g
    P = np.zeros((g, n), dtype=complex)
    for j in range(g):
        P[j, 2 * j] = 1.0
        P[j, 2 * j + 1] = 1j
    W = P.T @ quad.azz @ P + P.conj().T @ quad.abb @ P.conj() + P.T @ quad.azb @ P.conj()
    M = -(W + W.T)
    u = P.T @ quad.lz + P.conj().T @ quad.lzb
    return M, u, quad.q0


def _monomial_to_real(a: tuple[int, ...], b: tuple[int, ...]) -> dict[tuple[int, ...], complex]:
    """Expand prod (x+iy)^a (x-iy)^b into real-chart monomials."""
    g = len(a)
    out: dict[tuple[int, ...], complex] = {(0,) * (2 * g): 1.0}
    from math import comb

    for j in range(g):
        factor: dict[tuple[int, int], complex] = {}
        for r in range(a[j] + 1):
            for s in range(b[j] + 1):
                coeff = (
                    comb(a[j], r)
                    * comb(b[j], s)
                    * (1j) ** (a[j] - r)
                    * (-1j) ** (b[j] - s)
                )
                key = (r + s, (a[j] - r) + (b[j] - s))
                factor[key] = factor.get(key, 0.0) + coeff
        new: dict[tuple[int, ...], complex] = {}
        for idx, c in out.items():
            for (px, py), fc in factor.items():
                lst = list(idx)
                lst[2 * j] += px
                lst[2 * j + 1] += py
                key = tuple(lst)
                new[key] = new.get(key, 0.0) + c * fc
        out = new
    return out


class _MomentTable:
    """E[x^beta] for a Gaussian with complex mean m and covariance S (Stein recursion)."""

    def __init__(self, mean: np.ndarray, cov: np.ndarray):
        self.m = mean
        self.S = cov
        self.cache: dict[tuple[int, ...], complex] = {}

    def moment(self, beta: tuple[int, ...]) -> complex:
        if all(x == 0 for x in beta):
            return 1.0
        if beta in self.cache:
            return self.cache[beta]
        i = next(k for k, x in enumerate(beta) if x > 0)
        rest = tuple(x - (1 if k == i else 0) for k, x in enumerate(beta))
        val = self.m[i] * self.moment(rest)
        for jj, e in enumerate(rest):
            if e > 0:
                lower = tuple(x - (1 if k == jj else 0) for k, x in enumerate(rest))
                val += self.S[i, jj] * e * self.moment(lower)
        self.cache[beta] = val
        return val


def integral(f: PolyGauss) -> complex:
    """Exact integral of f over C^g against the chart Lebesgue measure."""
    M, u, s0 = _real_quadratic(f.quad)
    n = M.shape[0]
    re_eigs = np.linalg.eigvalsh(0.5 * (M.real + M.real.T))
    if np.min(re_eigs) <= 0:
        raise DomainError("exponent is not integrable (Re of quadratic part not negative definite)")
    Minv = np.linalg.inv(M)
    mean = Minv @ u
    base = (2 * np.pi) ** (n / 2) / np.sqrt(np.linalg.det(M)) * np.exp(0.5 * u @ Minv @ u + s0)
    table = _MomentTable(mean, Minv)
    total = 0.0 + 0.0j
    for (a, b), c in f.poly.items():
        for beta, rc in _monomial_to_real(a, b).items():
            total += c * rc * table.moment(beta)
    return complex(total * base)


def inner_product(f: PolyGauss, g: PolyGauss) -> complex:
    """<f, g> = integral of f * conj(g)."""
    gc = g.conjugate()
    combined = PolyGauss(f.g, f.quad + gc.quad, _poly_mul(f.poly, gc.poly))
    return integral(combined)


def quadrature_inner_product(f: PolyGauss, g: PolyGauss, radius: float = 4.0, h: float = 0.05) -> complex:
    """Trapezoid-rule oracle for :func:`inner_product` on a truncated box."""
    axis = np.arange(-radius, radius + h / 2, h)
    grids = np.meshgrid(*([axis] * (2 * f.g)), indexing="ij")
    z = np.stack([grids[2 * j] + 1j * grids[2 * j + 1] for j in range(f.g)])
    vals = f.evaluate(z) * np.conj(g.evaluate(z))
    return complex(vals.sum() * h ** (2 * f.g))
