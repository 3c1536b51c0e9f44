"""Twisted group algebra on a truncated lattice window and its Dolbeault complex.

Elements are finitely supported coefficient maps on integer lattice points
with sup-norm at most the declared window radius.  The product twists the
additive convolution by the cocycle of the torus configuration:

    [m1] o [m2] = sigma(m1, m2) [m1 + m2].

Truncation is explicit: an operation whose exact result would leave the
target window raises ``WindowOverflowError`` instead of dropping terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exterior import GradedValue, blade_wedge, wedge_generator
from .torus import TorusData


class WindowOverflowError(ValueError):
    """Exact support of a result does not fit the declared window."""


class PreconditionError(ValueError):
    pass


def _norm_inf(m: tuple[int, ...]) -> int:
    return max((abs(x) for x in m), default=0)


@dataclass(frozen=True)
class NCTorusElement:
    """Finitely supported function on the lattice, window of radius W."""

    torus: TorusData
    window: int
    coeffs: dict[tuple[int, ...], complex]

    @classmethod
    def make(cls, torus: TorusData, window: int, coeffs=None) -> "NCTorusElement":
        clean = {}
        for m, c in (coeffs or {}).items():
            m = tuple(int(x) for x in m)
            if len(m) != 2 * torus.g:
                raise ValueError(f"lattice point {m} has wrong length for g={torus.g}")
            if _norm_inf(m) > window:
                raise WindowOverflowError(f"support point {m} outside window {window}")
            if c != 0:
                clean[m] = complex(c)
        return cls(torus=torus, window=window, coeffs=clean)

    @classmethod
    def delta(cls, torus: TorusData, window: int, m, coeff: complex = 1.0) -> "NCTorusElement":
        """The basis element [m]."""
        return cls.make(torus, window, {tuple(m): coeff})

    @classmethod
    def unit(cls, torus: TorusData, window: int) -> "NCTorusElement":
        return cls.delta(torus, window, (0,) * (2 * torus.g))

    def __add__(self, other: "NCTorusElement") -> "NCTorusElement":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return NCTorusElement.make(self.torus, max(self.window, other.window), out)

    def __sub__(self, other: "NCTorusElement") -> "NCTorusElement":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "NCTorusElement":
        return NCTorusElement.make(
            self.torus, self.window, {m: c * factor for m, c in self.coeffs.items()}
        )

    def norm(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def distance(self, other: "NCTorusElement") -> float:
        return (self - other).norm()


def nc_mul(f: NCTorusElement, g: NCTorusElement, out_window: int | None = None) -> NCTorusElement:
    """Twisted convolution; exact when out_window >= W_f + W_g (the default)."""
    torus = f.torus
    if out_window is None:
        out_window = f.window + g.window
    out: dict[tuple[int, ...], complex] = {}
    for m1, c1 in f.coeffs.items():
        v1 = torus.embed_lattice(m1)
        for m2, c2 in g.coeffs.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            phase = torus.sigma(v1, torus.embed_lattice(m2))
            out[m] = out.get(m, 0.0) + c1 * c2 * phase
    for m, c in out.items():
        if c != 0 and _norm_inf(m) > out_window:
            raise WindowOverflowError(
                f"product support reaches {m}, outside window {out_window}"
            )
    return NCTorusElement.make(torus, out_window, out)


def involution(f: NCTorusElement) -> NCTorusElement:
    """The *-structure: f*(m) = conj(f(-m))."""
    return NCTorusElement.make(
        f.torus,
        f.window,
        {tuple(-x for x in m): np.conj(c) for m, c in f.coeffs.items()},
    )


def derivation_xi(xi, f: NCTorusElement) -> NCTorusElement:
    """Derivation attached to a real covector: (xi f)(m) = 2 pi i <xi, m> f(m)."""
    xi = np.asarray(xi, dtype=float)
    out = {}
    for m, c in f.coeffs.items():
        pairing = float(xi @ f.torus.embed_lattice(m))
        out[m] = 2j * np.pi * pairing * c
    return NCTorusElement.make(f.torus, f.window, out)


@dataclass(frozen=True)
class NCDolbeaultElement:
    """Element of the Dolbeault complex: blade (zeta family) -> coefficient element."""

    torus: TorusData
    window: int
    parts: dict[int, NCTorusElement]

    @classmethod
    def make(cls, torus: TorusData, window: int, parts=None) -> "NCDolbeaultElement":
        clean = {}
        for mask, el in (parts or {}).items():
            if el.coeffs:
                clean[int(mask)] = el
        return cls(torus=torus, window=window, parts=clean)

    @classmethod
    def from_function(cls, f: NCTorusElement) -> "NCDolbeaultElement":
        return cls.make(f.torus, f.window, {0: f})

    def __add__(self, other: "NCDolbeaultElement") -> "NCDolbeaultElement":
        out = dict(self.parts)
        for mask, el in other.parts.items():
            out[mask] = out[mask] + el if mask in out else el
        return NCDolbeaultElement.make(self.torus, max(self.window, other.window), out)

    def __sub__(self, other: "NCDolbeaultElement") -> "NCDolbeaultElement":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "NCDolbeaultElement":
        return NCDolbeaultElement.make(
            self.torus, self.window, {m: el.scale(factor) for m, el in self.parts.items()}
        )

    def norm(self) -> float:
        return max((el.norm() for el in self.parts.values()), default=0.0)

    def distance(self, other: "NCDolbeaultElement") -> float:
        return (self - other).norm()

    def graded_coefficient(self, m: tuple[int, ...]) -> GradedValue:
        """The exterior-algebra value sitting over one lattice point."""
        return GradedValue(
            self.torus.g, {mask: el.coeffs.get(m, 0.0) for mask, el in self.parts.items()}
        )


def dolbeault_mul(
    x: NCDolbeaultElement, y: NCDolbeaultElement, out_window: int | None = None
) -> NCDolbeaultElement:
    """(f ox u) o (g ox v) = (f o g) ox (u ^ v), extended bilinearly."""
    torus = x.torus
    if out_window is None:
        out_window = x.window + y.window
    parts: dict[int, NCTorusElement] = {}
    for mx, ex in x.parts.items():
        for my, ey in y.parts.items():
            s, m = blade_wedge(mx, my)
            if not s:
                continue
            term = nc_mul(ex, ey, out_window).scale(s)
            parts[m] = parts[m] + term if m in parts else term
    return NCDolbeaultElement.make(torus, out_window, parts)


def dbar_nc(x: NCDolbeaultElement) -> NCDolbeaultElement:
    """dbar([m] ox u) = 2 pi i sum_j z_j(m) [m] ox dzeta_j ^ u.

    Degree +1, graded Leibniz over the twisted product, square zero.
    """
    torus = x.torus
    parts: dict[int, NCTorusElement] = {}
    for mask, el in x.parts.items():
        for m, c in el.coeffs.items():
            z = torus.complex_coords(torus.embed_lattice(m))
            base = GradedValue(torus.g, {mask: 1.0})
            for j in range(1, torus.g + 1):
                if z[j - 1] == 0:
                    continue
                contrib = wedge_generator("zeta", j, base, coeff=2j * np.pi * z[j - 1] * c)
                for out_mask, cc in contrib.coeffs.items():
                    tgt = parts.setdefault(
                        out_mask, NCTorusElement.make(torus, x.window, {})
                    )
                    parts[out_mask] = tgt + NCTorusElement.make(torus, x.window, {m: cc})
    return NCDolbeaultElement.make(torus, x.window, parts)


def classical_limit_check(
    f: NCTorusElement, g: NCTorusElement, points_per_axis: int = 8, deriv_points: int = 64
) -> dict[str, float]:
    """Compare the B = 0 algebra with the commutative Fourier model.

    Samples fhat(x) = sum_m f(m) exp(2 pi i m . x) on a uniform grid of the
    dual torus and reports the max residuals of

    * product:  (f o g)^hat - fhat * ghat   (exact up to roundoff),
    * dbar:     the algebraic dbar pushed through the transform against a
      central-difference dbar on a finer grid (second-order in the spacing).
    """
    torus = f.torus
    if np.max(np.abs(torus.B)) != 0:
        raise PreconditionError("classical limit requires B = 0")
    n = 2 * torus.g

    def sample(el: NCTorusElement, grid_axes):
        mesh = np.meshgrid(*grid_axes, indexing="ij")
        total = np.zeros(mesh[0].shape, dtype=complex)
        for m, c in el.coeffs.items():
            phase = np.zeros(mesh[0].shape)
            for k in range(n):
                phase = phase + m[k] * mesh[k]
            total += c * np.exp(2j * np.pi * phase)
        return total

    axes = [np.arange(points_per_axis) / points_per_axis for _ in range(n)]
    fg = nc_mul(f, g)
    prod_resid = np.max(np.abs(sample(fg, axes) - sample(f, axes) * sample(g, axes)))

    # grid dbar: T_j = d/dx_(2j-1) + i d/dx_(2j) on the dual coordinates,
    # matching dbar [m] = 2 pi i z_j(m) [m] ox dzeta_j
    h = 1.0 / deriv_points
    fine = [np.arange(deriv_points) * h for _ in range(n)]
    fx = sample(f, fine)
    df = dbar_nc(NCDolbeaultElement.from_function(f))
    dbar_resid = 0.0
    for j in range(1, torus.g + 1):
        ax_re, ax_im = 2 * (j - 1), 2 * (j - 1) + 1
        fd = (np.roll(fx, -1, axis=ax_re) - np.roll(fx, 1, axis=ax_re)) / (2 * h) + 1j * (
            np.roll(fx, -1, axis=ax_im) - np.roll(fx, 1, axis=ax_im)
        ) / (2 * h)
        mask = 1 << (j - 1)
        alg = df.parts.get(mask)
        alg_sampled = sample(alg, fine) if alg is not None else 0.0
        dbar_resid = max(dbar_resid, float(np.max(np.abs(fd - alg_sampled))))
    return {"product": float(prod_resid), "dbar": dbar_resid, "dbar_spacing": h}
