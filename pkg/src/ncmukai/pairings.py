"""Integral pairings between the composed bimodules and the base algebras.

``alpha`` integrates the top dzbar-degree of a field on V x (lattice window)
against the holomorphic volume dz_1 ^ ... ^ dz_g, with the normalization
(2 sqrt(-1))^(-g) and sqrt(-1) = +i, producing an element of the twisted
Dolbeault algebra; its remaining zeta and tau factors both land on the
output generator family.

``beta`` contracts the full dzeta_1 ^ ... ^ dzeta_g factor out of a field on
V x V, renames the remaining tau generators (the second V^(0,1) copy) to
zbar, and restricts to the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exterior import GradedValue, generator_bit
from .fields import Field, GridSpec, LatticeField, sigma_on_grid
from .ncalg import NCDolbeaultElement, NCTorusElement
from .torus import TorusData, ConfigurationError

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class QuadratureScheme:
    """Trapezoid rule on the truncated grid box for Schwartz-decayed integrands."""

    grid: GridSpec
    quad_tol: float = 1e-6

    def integrate_scalar(self, arr: np.ndarray) -> complex:
        return complex(arr.sum() * self.grid.h ** (2 * self.grid.g))

    def holomorphic_volume_factor(self) -> complex:
        """Scalar relating  (2i)^-g  int . dzbar_top ^ dz_top  to the Lebesgue sum.

        Reordering dzbar_1..dzbar_g dz_1..dz_g into pairs dzbar_j ^ dz_j
        costs (-1)^(g(g-1)/2) and each pair equals 2i dx_j ^ dy_j, cancelling
        the normalization.
        """
        g = self.grid.g
        return complex((-1.0) ** (g * (g - 1) // 2))

    def gaussian_sanity_residual(self) -> float:
        """|quadrature - analytic| for the reference Gaussian exp(-2 pi |z|^2)."""
        Z = self.grid.complex_grid()
        arr = np.exp(-2 * np.pi * np.sum(np.abs(Z) ** 2, axis=0))
        return abs(self.integrate_scalar(arr) - 0.5 ** self.grid.g)


def _masks(mask: int, g: int) -> tuple[int, int, int]:
    zeta = mask & ((1 << g) - 1)
    zbar = (mask >> g) & ((1 << g) - 1)
    tau = (mask >> (2 * g)) & ((1 << g) - 1)
    return zeta, zbar, tau


def _merge_sign(first_bits: list[int], second_bits: list[int]) -> int:
    """Parity of inversions when concatenating two sorted index lists."""
    inv = sum(1 for i in first_bits for k in second_bits if k < i)
    return -1 if inv & 1 else 1


def _bits(mask: int) -> list[int]:
    out = []
    b = 0
    while mask:
        if mask & 1:
            out.append(b)
        mask >>= 1
        b += 1
    return out


def alpha_blade_map(mask: int, g: int) -> tuple[int, int] | None:
    """(sign, output zeta-family mask) of a triple blade under alpha.

    Requires the zbar block to be full; the zeta and tau blocks merge into
    the single output family (zero if they overlap).  The sign accounts for
    moving the zbar block to the right end of the word and for sorting the
    merged zeta/tau labels.
    """
    zeta, zbar, tau = _masks(mask, g)
    if zbar != (1 << g) - 1:
        return None
    if zeta & tau:
        return 0, 0
    move_sign = -1 if (g * bin(tau).count("1")) & 1 else 1
    sign = move_sign * _merge_sign(_bits(zeta), _bits(tau))
    return sign, zeta | tau


def alpha(phi: LatticeField, window: int | None = None) -> NCDolbeaultElement:
    """The integral pairing into the twisted Dolbeault algebra.

    alpha(phi) = sum_m (2i)^-g [ int phi(z+m, -m) sigma^-1(m, z) ^ dz_top ] [m].
    """
    grid = phi.grid
    torus = grid.torus
    g = grid.g
    out_window = window if window is not None else phi.window
    quad = QuadratureScheme(grid)
    factor = quad.holomorphic_volume_factor()

    parts: dict[int, dict[tuple[int, ...], complex]] = {}
    for m_out in LatticeField(grid, out_window).window_points():
        source = phi.slices.get(tuple(-x for x in m_out))
        if source is None:
            continue
        source.require_decayed()
        lam_real = torus.embed_lattice(m_out)
        shifted = source.shift_lattice(lam_real)
        phase = np.conj(sigma_on_grid(grid, lam_real))
        for mask, arr in shifted.data.items():
            mapped = alpha_blade_map(mask, g)
            if mapped is None:
                continue
            sign, out_mask = mapped
            if sign == 0:
                continue
            val = factor * sign * quad.integrate_scalar(arr * phase)
            if val != 0:
                bucket = parts.setdefault(out_mask, {})
                bucket[tuple(m_out)] = bucket.get(tuple(m_out), 0.0) + val
    elements = {
        mask: NCTorusElement.make(torus, out_window, coeffs) for mask, coeffs in parts.items()
    }
    return NCDolbeaultElement.make(torus, out_window, elements)


def stokes_residual(f: Field) -> float:
    """|int dbar(f) ^ dz_top| for a Schwartz-decayed field valued in zbar blades."""
    from .connections import dbar_field

    f.require_decayed()
    grid = f.grid
    g = grid.g
    quad = QuadratureScheme(grid)
    df = dbar_field(f)
    top = 0
    for j in range(1, g + 1):
        top |= 1 << generator_bit("zbar", j, g)
    arr = df.data.get(top)
    if arr is None:
        return 0.0
    return abs(quad.holomorphic_volume_factor() * quad.integrate_scalar(arr))


def beta_blade_map(mask: int, g: int) -> tuple[int, int] | None:
    """(sign, zbar-family mask) of a triple blade under beta.

    Requires the zeta block to be full (it is contracted away by the
    multivector iota in increasing order, sign +1); tau generators (the
    dwbar copy) rename to zbar and merge.
    """
    zeta, zbar, tau = _masks(mask, g)
    if zeta != (1 << g) - 1:
        return None
    if zbar & tau:
        return 0, 0
    sign = _merge_sign(_bits(zbar), _bits(tau))
    return sign, zbar | tau


def beta(phi, grid: GridSpec) -> Field:
    """Diagonal restriction pairing for double fields.

    ``phi`` is a callable (z, w) -> GradedValue over the triple blade
    algebra (zbar for the z side, zeta for the middle V_(1,0), tau for the
    w-side copy of V^(0,1)); the result is a field on the z grid valued in
    zbar blades.
    """
    g = grid.g
    Z = grid.complex_grid()
    data: dict[int, np.ndarray] = {}
    it = np.ndindex(grid.shape)
    for idx in it:
        zpt = np.array([Z[j][idx] for j in range(g)])
        val = phi(zpt, zpt)
        if not isinstance(val, GradedValue):
            raise ConfigurationError("beta expects GradedValue-valued callables")
        for mask, coeff in val.coeffs.items():
            mapped = beta_blade_map(mask, g)
            if mapped is None:
                continue
            sign, out_mask = mapped
            if sign == 0:
                continue
            out_mask_shifted = out_mask << g  # zbar family bits
            if out_mask_shifted not in data:
                data[out_mask_shifted] = np.zeros(grid.shape, dtype=complex)
            data[out_mask_shifted][idx] += sign * coeff
    return Field(grid, data)
