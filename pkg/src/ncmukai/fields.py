"""Sampled graded-valued functions on a truncated grid of V.

A grid covers the box [-R, R]^(2g) in the chart coordinates (x_j, y_j),
z_j = x_j + i y_j, with uniform spacing h.  Fields carry a sparse map from
blade masks to complex arrays over the grid.  Lattice translations are
integer grid shifts (1/h must be an integer), with zero extension outside
the box; this is only sound for fields that have decayed at the boundary,
which :meth:`Field.require_decayed` enforces before any derivative-based
identity is evaluated.

Derivatives are second-order central differences; one-sided stencils are
never used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exterior import GradedValue, wedge_generator, blade_wedge, contract as blade_contract
from .torus import TorusData, ConfigurationError


class FieldBoundaryError(ValueError):
    """Field has not decayed at the grid boundary within tolerance."""


class WindowOverflowError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    torus: TorusData
    radius: float
    h: float
    boundary_tol: float = 1e-8

    def __post_init__(self):
        steps = 1.0 / self.h
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigurationError("1/h must be an integer so lattice shifts stay on the grid")

    @property
    def g(self) -> int:
        return self.torus.g

    @property
    def axis(self) -> np.ndarray:
        n = int(round(2 * self.radius / self.h)) + 1
        return -self.radius + self.h * np.arange(n)

    @property
    def shape(self) -> tuple[int, ...]:
        n = len(self.axis)
        return (n,) * (2 * self.g)

    def complex_grid(self) -> np.ndarray:
        """Array of shape (g,) + shape with the complex coordinates of gridpoints."""
        mesh = np.meshgrid(*([self.axis] * (2 * self.g)), indexing="ij")
        return np.stack([mesh[2 * j] + 1j * mesh[2 * j + 1] for j in range(self.g)])

    def refine(self) -> "GridSpec":
        return GridSpec(self.torus, self.radius, self.h / 2, self.boundary_tol)

    def lattice_shift_steps(self, m) -> tuple[int, ...]:
        """Grid steps realizing translation by the lattice point with coordinates m.

        Works in chart coordinates: translation by m shifts (x_j, y_j) by
        (m_2j, m_2j+1), each an integer multiple of h.
        """
        out = []
        for comp in m:
            steps = comp / self.h
            if abs(steps - round(steps)) > 1e-9:
                raise ConfigurationError(f"lattice step {comp} is not a grid multiple of h={self.h}")
            out.append(int(round(steps)))
        return tuple(out)


def shift_array(arr: np.ndarray, steps: tuple[int, ...]) -> np.ndarray:
    """arr evaluated at (point + steps*h): index shift with zero fill."""
    out = arr
    for axis, k in enumerate(steps):
        if k == 0:
            continue
        moved = np.zeros_like(out)
        src = [slice(None)] * out.ndim
        dst = [slice(None)] * out.ndim
        if k > 0:
            src[axis] = slice(k, None)
            dst[axis] = slice(None, -k)
        else:
            src[axis] = slice(None, k)
            dst[axis] = slice(-k, None)
        moved[tuple(dst)] = out[tuple(src)]
        out = moved
    return out


def central_difference(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    plus = shift_array(arr, tuple(1 if a == axis else 0 for a in range(arr.ndim)))
    minus = shift_array(arr, tuple(-1 if a == axis else 0 for a in range(arr.ndim)))
    return (plus - minus) / (2.0 * h)


class Field:
    """Graded-valued function sampled on a grid: blade mask -> complex array."""

    __slots__ = ("grid", "data")

    def __init__(self, grid: GridSpec, data: dict[int, np.ndarray] | None = None):
        self.grid = grid
        self.data = {}
        for mask, arr in (data or {}).items():
            arr = np.asarray(arr, dtype=complex)
            if arr.shape != grid.shape:
                raise ValueError(f"array shape {arr.shape} does not match grid {grid.shape}")
            if np.any(arr):
                self.data[int(mask)] = arr

    # -- construction --------------------------------------------------------

    @classmethod
    def from_scalar_array(cls, grid: GridSpec, arr: np.ndarray, mask: int = 0) -> "Field":
        return cls(grid, {mask: arr})

    @classmethod
    def sample(cls, grid: GridSpec, func, blade: GradedValue | None = None) -> "Field":
        """Sample func(z) (z the (g,)+shape complex grid) times an optional blade."""
        arr = func(grid.complex_grid())
        if blade is None:
            return cls(grid, {0: arr})
        return cls(grid, {mask: coeff * arr for mask, coeff in blade.coeffs.items()})

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "Field") -> "Field":
        out = dict(self.data)
        for mask, arr in other.data.items():
            out[mask] = out[mask] + arr if mask in out else arr
        return Field(self.grid, out)

    def __sub__(self, other: "Field") -> "Field":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "Field":
        return Field(self.grid, {m: factor * a for m, a in self.data.items()})

    def multiply_array(self, arr: np.ndarray) -> "Field":
        return Field(self.grid, {m: arr * a for m, a in self.data.items()})

    def norm(self) -> float:
        return max((float(np.max(np.abs(a))) for a in self.data.values()), default=0.0)

    def distance(self, other: "Field") -> float:
        return (self - other).norm()

    def value_at(self, index: tuple[int, ...]) -> GradedValue:
        return GradedValue(self.grid.g, {m: a[index] for m, a in self.data.items()})

    # -- analysis ------------------------------------------------------------

    def boundary_sup(self) -> float:
        worst = 0.0
        for arr in self.data.values():
            for axis in range(arr.ndim):
                sl = [slice(None)] * arr.ndim
                sl[axis] = 0
                worst = max(worst, float(np.max(np.abs(arr[tuple(sl)]))))
                sl[axis] = -1
                worst = max(worst, float(np.max(np.abs(arr[tuple(sl)]))))
        return worst

    def require_decayed(self) -> None:
        sup = self.boundary_sup()
        if sup > self.grid.boundary_tol:
            raise FieldBoundaryError(
                f"boundary sup {sup:.3e} exceeds tolerance {self.grid.boundary_tol:.1e}"
            )

    # -- calculus building blocks ---------------------------------------------

    def dz_bar(self, j: int) -> "Field":
        """Central-difference d/dzbar_j = (d/dx_j + i d/dy_j)/2, j 1-based."""
        h = self.grid.h
        ax, ay = 2 * (j - 1), 2 * (j - 1) + 1
        return Field(
            self.grid,
            {
                m: 0.5 * (central_difference(a, ax, h) + 1j * central_difference(a, ay, h))
                for m, a in self.data.items()
            },
        )

    def dz(self, j: int) -> "Field":
        h = self.grid.h
        ax, ay = 2 * (j - 1), 2 * (j - 1) + 1
        return Field(
            self.grid,
            {
                m: 0.5 * (central_difference(a, ax, h) - 1j * central_difference(a, ay, h))
                for m, a in self.data.items()
            },
        )

    def wedge_generator(self, family: str, j: int, coeff_arr=1.0) -> "Field":
        """Left-wedge by a generator with a constant or gridwise coefficient."""
        out: dict[int, np.ndarray] = {}
        for mask, arr in self.data.items():
            gv = wedge_generator(family, j, GradedValue(self.grid.g, {mask: 1.0}))
            for out_mask, sign in gv.coeffs.items():
                term = sign * coeff_arr * arr
                out[out_mask] = out[out_mask] + term if out_mask in out else term
        return Field(self.grid, out)

    def contract_generator(self, family: str, j: int) -> "Field":
        out: dict[int, np.ndarray] = {}
        for mask, arr in self.data.items():
            gv = blade_contract(family, j, GradedValue(self.grid.g, {mask: 1.0}))
            for out_mask, sign in gv.coeffs.items():
                term = sign * arr
                out[out_mask] = out[out_mask] + term if out_mask in out else term
        return Field(self.grid, out)

    def wedge_constant(self, gv: GradedValue) -> "Field":
        """Left-wedge by a constant graded value."""
        out: dict[int, np.ndarray] = {}
        for gmask, gcoeff in gv.coeffs.items():
            for mask, arr in self.data.items():
                s, m = blade_wedge(gmask, mask)
                if not s:
                    continue
                term = (s * gcoeff) * arr
                out[m] = out[m] + term if m in out else term
        return Field(self.grid, out)

    def shift_lattice(self, m) -> "Field":
        """Field evaluated at (v + lattice point m): f(v + m)."""
        steps = self.grid.lattice_shift_steps(m)
        return Field(self.grid, {mask: shift_array(a, steps) for mask, a in self.data.items()})

    def integrate(self) -> GradedValue:
        """Plain box quadrature of each blade coefficient (trapezoid with decay)."""
        w = self.grid.h ** (2 * self.grid.g)
        return GradedValue(self.grid.g, {m: w * complex(a.sum()) for m, a in self.data.items()})


def sigma_on_grid(grid: GridSpec, u_real) -> np.ndarray:
    """sigma(u, .) sampled at every gridpoint; u a point of V in real coordinates."""
    torus = grid.torus
    s = torus.lattice_basis.T @ (torus.B.T @ np.asarray(u_real, dtype=float))
    mesh = np.meshgrid(*([grid.axis] * (2 * grid.g)), indexing="ij")
    phase = np.zeros(grid.shape)
    for k in range(2 * grid.g):
        if s[k] != 0:
            phase = phase + s[k] * mesh[k]
    return np.exp(2j * np.pi * phase)


def omega_arrays(grid: GridSpec) -> list[np.ndarray]:
    """The coefficients omega_j(z) of the primitive (0,1)-form on the grid."""
    torus = grid.torus
    Z = grid.complex_grid()
    out = []
    for j in range(grid.g):
        arr = np.zeros(grid.shape, dtype=complex)
        for i in range(grid.g):
            arr = arr + np.conj(torus.b[i, j]) * np.conj(Z[i]) + torus.c[i, j] * Z[i]
        out.append(arr)
    return out


def b_coefficient_arrays(grid: GridSpec, center=None, negate: bool = False) -> list[np.ndarray]:
    """Arrays of B_j(w - z) (negate) or B_j(z - center) style combinations.

    With center=None, negate=False this is B_j(z); with center=w, negate=True
    it is B_j(w - z).  Real-linearity of B_j makes both cases one formula.
    """
    torus = grid.torus
    Z = grid.complex_grid()
    sign = -1.0 if negate else 1.0
    out = []
    for j in range(grid.g):
        arr = np.zeros(grid.shape, dtype=complex)
        for i in range(grid.g):
            zi = sign * Z[i] + (center[i] if center is not None else 0.0)
            arr = arr + zi * torus.b[i, j] + np.conj(zi * torus.c[i, j])
        out.append(arr)
    return out


class LatticeField:
    """Field on V x (lattice window): lattice point -> Field slice."""

    __slots__ = ("grid", "window", "slices")

    def __init__(self, grid: GridSpec, window: int, slices: dict[tuple[int, ...], Field] | None = None):
        self.grid = grid
        self.window = window
        self.slices = {}
        for m, f in (slices or {}).items():
            m = tuple(int(x) for x in m)
            if max((abs(x) for x in m), default=0) > window:
                raise WindowOverflowError(f"lattice slice {m} outside window {window}")
            if f.data:
                self.slices[m] = f

    def window_points(self):
        from itertools import product

        rng = range(-self.window, self.window + 1)
        return product(*([rng] * (2 * self.grid.g)))

    def __add__(self, other: "LatticeField") -> "LatticeField":
        out = dict(self.slices)
        for m, f in other.slices.items():
            out[m] = out[m] + f if m in out else f
        return LatticeField(self.grid, max(self.window, other.window), out)

    def __sub__(self, other: "LatticeField") -> "LatticeField":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "LatticeField":
        return LatticeField(self.grid, self.window, {m: f.scale(factor) for m, f in self.slices.items()})

    def norm(self) -> float:
        return max((f.norm() for f in self.slices.values()), default=0.0)

    def distance(self, other: "LatticeField") -> float:
        return (self - other).norm()

    def map_slices(self, fn) -> "LatticeField":
        return LatticeField(self.grid, self.window, {m: fn(m, f) for m, f in self.slices.items()})
