"""Z-connections on the deformed Poincare modules and their composed Laplacians.

All wedge factors act from the left, with the generator families of
:mod:`ncmukai.exterior`:

* ``zbar``  carries forms produced by dbar and by multiplication by omega;
* ``zeta``  carries the V_(1,0) factor produced on the Q side (D'(v), and
  the (w - z) term of the coinvariant model);
* ``tau``   carries the second V_(1,0) copy produced on the P side.

With these conventions the connection squares reproduce the curvature
identities

    P(P p) = 2 pi i B02 ^ p,      Q(Q q) = - 2 pi i B02 ^ q,
    [Y0, Phi] = -2 pi i B02 ^ .,  Phi o Phi = 0,

where ``B02`` is the graded value dbar(omega) held by the torus data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .exterior import (
    GradedValue,
    all_blades,
    generator_bit,
    pm_sector,
    wedge,
    wedge_generator,
)
from .fields import (
    Field,
    GridSpec,
    LatticeField,
    WindowOverflowError,
    b_coefficient_arrays,
    omega_arrays,
    sigma_on_grid,
)
from .torus import TorusData

TWO_PI_I = 2j * np.pi


def b02_graded(torus: TorusData) -> GradedValue:
    """dbar(omega) as a graded value on zbar blades."""
    g = torus.g
    out: dict[int, complex] = {}
    for (p, q), coeff in torus.b02_coefficients().items():
        mask = (1 << generator_bit("zbar", p + 1, g)) | (1 << generator_bit("zbar", q + 1, g))
        out[mask] = coeff
    return GradedValue(g, out)


# -- module actions on Schwartz-type fields -------------------------------------


def right_action_p(p: Field, m) -> Field:
    """(p . m)(v) = sigma(m, v) p(m + v) for a lattice point m."""
    lam = p.grid.torus.embed_lattice(m)
    return p.shift_lattice(lam).multiply_array(sigma_on_grid(p.grid, lam))


def left_action_q(m, q: Field) -> Field:
    """(m . q)(v) = sigma(m, -m + v) q(-m + v)."""
    lam = q.grid.torus.embed_lattice(m)
    shifted = q.shift_lattice(-lam)
    phase = sigma_on_grid(q.grid, lam) * q.grid.torus.sigma(lam, -lam)
    return shifted.multiply_array(phase)


# -- the P and Q connections ----------------------------------------------------


def dbar_field(f: Field) -> Field:
    """sum_j dzbar_j ^ d f / dzbar_j with central differences."""
    total = None
    for j in range(1, f.grid.g + 1):
        term = f.dz_bar(j).wedge_generator("zbar", j)
        total = term if total is None else total + term
    return total if total is not None else Field(f.grid)


def omega_wedge(f: Field) -> Field:
    total = None
    for j, arr in enumerate(omega_arrays(f.grid), start=1):
        term = f.wedge_generator("zbar", j, arr)
        total = term if total is None else total + term
    return total if total is not None else Field(f.grid)


def d_prime_wedge(f: Field, family: str) -> Field:
    """D'(v) ^ f = sum_j z_j (gen_j ^ f) into the requested V_(1,0) family."""
    Z = f.grid.complex_grid()
    total = None
    for j in range(1, f.grid.g + 1):
        term = f.wedge_generator(family, j, Z[j - 1])
        total = term if total is None else total + term
    return total if total is not None else Field(f.grid)


def P_apply(part: int, p: Field) -> Field:
    """P0 = dbar + 2 pi i omega ^ .;  P1 = -2 pi i D'(v) ^ . into the tau copy."""
    if part == 0:
        p.require_decayed()
        return dbar_field(p) + omega_wedge(p).scale(TWO_PI_I)
    if part == 1:
        return d_prime_wedge(p, "tau").scale(-TWO_PI_I)
    raise ValueError("part must be 0 or 1")


def Q_apply(part: int, q: Field) -> Field:
    """Q0 = 2 pi i D'(v) ^ . into the zeta copy;  Q1 = dbar - 2 pi i omega ^ ."""
    if part == 0:
        return d_prime_wedge(q, "zeta").scale(TWO_PI_I)
    if part == 1:
        q.require_decayed()
        return dbar_field(q) - omega_wedge(q).scale(TWO_PI_I)
    raise ValueError("part must be 0 or 1")


def P_full(p: Field) -> Field:
    return P_apply(0, p) + P_apply(1, p)


def Q_full(q: Field) -> Field:
    return Q_apply(0, q) + Q_apply(1, q)


def P_curvature_residual(p: Field) -> float:
    """Max residual of P(P p) - 2 pi i B02 ^ p."""
    target = p.wedge_constant(b02_graded(p.grid.torus)).scale(TWO_PI_I)
    return P_full(P_full(p)).distance(target)

def Q_curvature_residual(q: Field) -> float:
    """Max residual of Q(Q q) + 2 pi i B02 ^ q."""
    target = q.wedge_constant(b02_graded(q.grid.torus)).scale(-TWO_PI_I)
    return Q_full(Q_full(q)).distance(target)


# -- projectivity splitting ------------------------------------------------------


def _bump_1d(t: np.ndarray) -> np.ndarray:
    """Smooth compactly supported bump on (-1, 1)."""
    out = np.zeros_like(t, dtype=float)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def partition_bump(grid: GridSpec) -> np.ndarray:
    """Smooth h with sum over lattice translates equal to 1 on the grid.

    Built per chart axis as bump(t) / sum_n bump(t + n); the product over
    axes then sums to one over the lattice.
    """
    axis = grid.axis
    num = _bump_1d(axis)
    den = np.zeros_like(num)
    for n in range(-2, 3):
        den += _bump_1d(axis + n)
    h1 = num / den
    total = np.ones(grid.shape)
    for k in range(2 * grid.g):
        shape = [1] * (2 * grid.g)
        shape[k] = len(axis)
        total = total * h1.reshape(shape)
    return total


def partition_residual(grid: GridSpec) -> float:
    """Max |sum_m h(m + v) - 1| over the grid, m ranging over nearby lattice points."""
    bump = partition_bump(grid)
    f = Field.from_scalar_array(grid, bump)
    total = np.zeros(grid.shape, dtype=complex)
    reach = int(np.ceil(grid.radius)) + 1
    from itertools import product

    for m in product(*([range(-reach, reach + 1)] * (2 * grid.g))):
        total = total + f.shift_lattice(grid.torus.embed_lattice(m)).data.get(0, 0.0)
    return float(np.max(np.abs(total - 1.0)))


def iota_splitting(p: Field, window: int) -> LatticeField:
    """iota p = sum_m (p . (-m))(v) h(v) ox [m] over the window."""
    bump = partition_bump(p.grid)
    slices = {}
    for m in LatticeField(p.grid, window).window_points():
        neg = tuple(-x for x in m)
        piece = right_action_p(p, neg).multiply_array(bump)
        if piece.data:
            slices[tuple(m)] = piece
    return LatticeField(p.grid, window, slices)


def splitting_action(xi: LatticeField) -> Field:
    """The module action map sum_m (slice_m . [m]) collapsing back to P."""
    total = None
    for m, f in xi.slices.items():
        term = right_action_p(f, m)
        total = term if total is None else total + term
    return total if total is not None else Field(xi.grid)


def lattice_field_right_action(phi: LatticeField, mu) -> LatticeField:
    """(xi . mu) on P ox A(lattice): slice_m ox [m][mu] = sigma(m, mu) slice at m + mu."""
    torus = phi.grid.torus
    out: dict[tuple[int, ...], Field] = {}
    for m, f in phi.slices.items():
        tgt = tuple(a + b for a, b in zip(m, mu))
        phase = torus.sigma(torus.embed_lattice(m), torus.embed_lattice(mu))
        piece = f.scale(phase)
        out[tgt] = out[tgt] + piece if tgt in out else piece
    return LatticeField(phi.grid, phi.window, out)


# -- the composed X connection on S(V x Lambda) ----------------------------------


def X_right_action(phi: LatticeField, mu) -> LatticeField:
    """(phi . mu)(z, m) = sigma(mu, z + m) phi(z, m + mu).

    This is the transport of the right action on the second Schwartz factor
    through the identification (v1, v2) -> (v1, v2 - v1); it is the action
    for which the integral pairing is a right module map.
    """
    grid = phi.grid
    torus = grid.torus
    mu_real = torus.embed_lattice(mu)
    base_phase = sigma_on_grid(grid, mu_real)
    out = {}
    for m, f in phi.slices.items():
        tgt = tuple(a - b for a, b in zip(m, mu))
        phase = base_phase * torus.sigma(mu_real, torus.embed_lattice(tgt))
        out[tgt] = f.multiply_array(phase)
    return LatticeField(grid, phi.window, out)


def X_left_action(mu, phi: LatticeField) -> LatticeField:
    """(mu . phi)(z, m) = sigma(mu, z) phi(z - mu, m + mu), transported likewise."""
    grid = phi.grid
    torus = grid.torus
    mu_real = torus.embed_lattice(mu)
    phase = sigma_on_grid(grid, mu_real)
    out = {}
    for m, f in phi.slices.items():
        tgt = tuple(a - b for a, b in zip(m, mu))
        out[tgt] = f.shift_lattice(-mu_real).multiply_array(phase)
    return LatticeField(grid, phi.window, out)


def X_apply(part: int, phi: LatticeField) -> LatticeField:
    """The composed connection in the S(V x Lambda) picture.

    X0 = sum_j [ 2 pi i z_j dzeta_j ^ . + dzbar_j ^ d/dzbar_j
                 + 2 pi i conj(B_j(m)) dzbar_j ^ . ]   (diagonal in m)
    X1 = -2 pi i sum_j (z_j + m_j) dtau_j ^ .
    """
    grid = phi.grid
    torus = grid.torus
    Z = grid.complex_grid()

    def x0(m, f: Field) -> Field:
        f.require_decayed()
        beta = torus.b_coefficient_lattice(m)
        total = None
        for j in range(1, grid.g + 1):
            term = f.wedge_generator("zeta", j, TWO_PI_I * Z[j - 1])
            term = term + f.dz_bar(j).wedge_generator("zbar", j)
            term = term + f.wedge_generator("zbar", j, TWO_PI_I * np.conj(beta[j - 1]))
            total = term if total is None else total + term
        return total

    def x1(m, f: Field) -> Field:
        lam_c = torus.complex_coords(torus.embed_lattice(m))
        total = None
        for j in range(1, grid.g + 1):
            term = f.wedge_generator("tau", j, -TWO_PI_I * (Z[j - 1] + lam_c[j - 1]))
            total = term if total is None else total + term
        return total

    if part == 0:
        return phi.map_slices(x0)
    if part == 1:
        return phi.map_slices(x1)
    raise ValueError("part must be 0 or 1")


def X_full(phi: LatticeField) -> LatticeField:
    return X_apply(0, phi) + X_apply(1, phi)


def X0_adjoint_apply(phi: LatticeField) -> LatticeField:
    """Formal adjoint of X0 for the L2(V) x counting inner product."""
    grid = phi.grid
    torus = grid.torus
    Z = grid.complex_grid()

    def adj(m, f: Field) -> Field:
        f.require_decayed()
        beta = torus.b_coefficient_lattice(m)
        total = None
        for j in range(1, grid.g + 1):
            term = f.contract_generator("zeta", j).multiply_array(-TWO_PI_I * np.conj(Z[j - 1]))
            term = term + f.contract_generator("zbar", j).dz(j).scale(-1.0)
            term = term + f.contract_generator("zbar", j).scale(-TWO_PI_I * beta[j - 1])
            total = term if total is None else total + term
        return total

    return phi.map_slices(adj)


def eta_state(grid: GridSpec, mu, *, with_tau: bool) -> LatticeField:
    """The vacuum-times-blade states of the composed complex.

    ``with_tau=False`` gives b_mu e_1^- ^ ... ^ e_g^-; ``with_tau=True``
    gives b_0-based eta = b_0 prod_j (e_j^- + i dtau_j) (only mu = 0 makes
    the closed one).
    """
    from .polygauss import vacuum_x

    g = grid.g
    blade = GradedValue.scalar(g, 1.0)
    for j in range(1, g + 1):
        factor = GradedValue(
            g,
            {
                1 << generator_bit("zbar", j, g): 1.0,
                1 << generator_bit("zeta", j, g): -1.0j,
            },
        )
        if with_tau:
            factor = factor + GradedValue.generator(g, "tau", j, 1.0j)
        blade = wedge(blade, factor)
    vac = vacuum_x(grid.torus, mu)
    f = Field.sample(grid, vac.evaluate, blade)
    return LatticeField(grid, max(abs(x) for x in mu) if any(mu) else 1, {tuple(mu): f})


# -- the coinvariant Y model ------------------------------------------------------


def Y0_apply(f: Field, w) -> Field:
    """Y0 phi = sum_j dzbar_j ^ d/dzbar_j + 2 pi i conj(B_j(z)) dzbar_j ^ + 2 pi i (w_j - z_j) dzeta_j ^ ."""
    f.require_decayed()
    grid = f.grid
    Z = grid.complex_grid()
    w = np.asarray(w, dtype=complex)
    omega_j = omega_arrays(grid)  # omega_j(z) = conj(B_j(z))
    total = None
    for j in range(1, grid.g + 1):
        term = f.dz_bar(j).wedge_generator("zbar", j)
        term = term + f.wedge_generator("zbar", j, TWO_PI_I * omega_j[j - 1])
        term = term + f.wedge_generator("zeta", j, TWO_PI_I * (w[j - 1] - Z[j - 1]))
        total = term if total is None else total + term
    return total


def Phi_apply(f: Field, w) -> Field:
    """Phi phi = 2 pi i sum_j conj(B_j(w - z)) dzbar_j ^ phi; exactly square-zero."""
    grid = f.grid
    w = np.asarray(w, dtype=complex)
    b_wz = b_coefficient_arrays(grid, center=w, negate=True)
    total = None
    for j in range(1, grid.g + 1):
        term = f.wedge_generator("zbar", j, TWO_PI_I * np.conj(b_wz[j - 1]))
        total = term if total is None else total + term
    return total if total is not None else Field(grid)


def Y_gauge_residuals(f: Field, w) -> dict[str, float]:
    """Residuals of Phi^2 = 0, [Y0, Phi] + 2 pi i B02 = 0 and (Y0 + Phi)^2 = 0."""
    torus = f.grid.torus
    phi2 = Phi_apply(Phi_apply(f, w), w)
    comm = Y0_apply(Phi_apply(f, w), w) + Phi_apply(Y0_apply(f, w), w)
    target = f.wedge_constant(b02_graded(torus)).scale(-TWO_PI_I)
    yp = lambda u: Y0_apply(u, w) + Phi_apply(u, w)
    return {
        "phi_square": phi2.norm(),
        "gauge_commutator": comm.distance(target),
        "square_zero": yp(yp(f)).norm(),
    }


def YPhi_adjoint_apply(f: Field, w) -> Field:
    f.require_decayed()
    grid = f.grid
    Z = grid.complex_grid()
    w = np.asarray(w, dtype=complex)
    b_z = b_coefficient_arrays(grid)
    b_wz = b_coefficient_arrays(grid, center=w, negate=True)
    total = None
    for j in range(1, grid.g + 1):
        bw = b_z[j - 1] + b_wz[j - 1]   # B_j(w) as a constant field
        term = f.contract_generator("zbar", j).dz(j).scale(-1.0)
        term = term + f.contract_generator("zbar", j).multiply_array(-TWO_PI_I * bw)
        term = term + f.contract_generator("zeta", j).multiply_array(
            -TWO_PI_I * np.conj(w[j - 1] - Z[j - 1])
        )
        total = term if total is None else total + term
    return total


def tau_coinvariants(phi_raw, torus: TorusData, window: int):
    """Averaging map onto invariants: (tau phi)(z, w) = sum_m phi(z+m, w+m) sigma(m, z-w).

    ``phi_raw`` is a callable (z, w) -> complex on complex coordinate
    vectors; the lattice sum is truncated to the window.
    """
    from itertools import product

    points = [
        torus.complex_coords(torus.embed_lattice(m))
        for m in product(*([range(-window, window + 1)] * (2 * torus.g)))
    ]

    def tau(z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        total = 0.0 + 0.0j
        zw = torus.point_from_complex(z - w)
        for lam_c in points:
            lam_real = torus.point_from_complex(lam_c)
            total += phi_raw(z + lam_c, w + lam_c) * np.exp(
                TWO_PI_I * (lam_real @ torus.B @ zw)
            )
        return total

    return tau


def rho_section(psi, torus: TorusData, grid: GridSpec):
    """rho(psi)(z, w) = h(z) psi(z, w) with the partition bump h."""
    def rho(z, w):
        a = torus.lattice_coords(torus.point_from_complex(z)).real
        num = _bump_1d(a)
        den = np.zeros_like(num)
        for n in range(-2, 3):
            den += _bump_1d(a + n)
        return float(np.prod(num / den)) * psi(z, w)

    return rho


def invariance_residual(phi, torus: TorusData, samples, lattice_points) -> float:
    """Max |phi(z+m, w+m) sigma(m, z-w) - phi(z, w)| over given samples."""
    worst = 0.0
    for z, w in samples:
        base = phi(np.asarray(z, complex), np.asarray(w, complex))
        for m in lattice_points:
            lam_real = torus.embed_lattice(m)
            lam_c = torus.complex_coords(lam_real)
            phase = torus.sigma(lam_real, torus.point_from_complex(np.asarray(z) - np.asarray(w)))
            moved = phi(np.asarray(z) + lam_c, np.asarray(w) + lam_c) * phase
            worst = max(worst, abs(moved - base))
    return worst


# -- discretized Laplacians and spectra -------------------------------------------


class SizeError(ValueError):
    """Requested eigenproblem exceeds the configured dense-solve budget."""


@dataclass(frozen=True)
class SectorSpectrum:
    sector: tuple[int, int]
    eigenvalues: np.ndarray
    kernel_overlap: float | None
    off_sector_norm: float
    epsilon_disc: float
    factored_residual: float = float("nan")


def _grid_operators(grid: GridSpec):
    """Sparse 1-complex-dimension building blocks on the flattened grid."""
    n = len(grid.axis)
    h = grid.h
    d1 = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1]) / (2 * h)
    eye = sp.identity(n)
    dx = sp.kron(d1, eye, format="csr")
    dy = sp.kron(eye, d1, format="csr")
    dzbar = 0.5 * (dx + 1j * dy)
    X, Y = np.meshgrid(grid.axis, grid.axis, indexing="ij")
    zdiag = sp.diags((X + 1j * Y).ravel())
    return dzbar, zdiag


def assemble_oscillator_matrix(grid: GridSpec, beta: complex, center: complex = 0.0) -> sp.spmatrix:
    """Compact second-order discretization of the scalar oscillator block

        -d^2/(dz dzbar) - 2 pi i (beta d/dzbar + conj(beta) d/dz)
        + 4 pi^2 (|z - center|^2 + |beta|^2).

    The second derivative uses the three-point stencil per real axis; the
    first derivatives are central.  This is the sector-diagonal part shared
    by the two composed Laplacians; composing the first-order factors
    instead would couple only next-nearest neighbours and admit spurious
    checkerboard near-kernel modes.
    """
    if grid.g != 1:
        raise SizeError("dense spectral assembly is supported at g = 1 only")
    n = len(grid.axis)
    h = grid.h
    lap1 = sp.diags(
        [np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]
    ) / (h * h)
    d1 = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1]) / (2 * h)
    eye = sp.identity(n)
    lxx = sp.kron(lap1, eye)
    lyy = sp.kron(eye, lap1)
    dx = sp.kron(d1, eye)
    dy = sp.kron(eye, d1)
    dzbar = 0.5 * (dx + 1j * dy)
    dz = 0.5 * (dx - 1j * dy)
    X, Y = np.meshgrid(grid.axis, grid.axis, indexing="ij")
    pot = 4 * np.pi**2 * (np.abs(X + 1j * Y - center) ** 2 + abs(beta) ** 2)
    return (
        -0.25 * (lxx + lyy)
        - TWO_PI_I * (beta * dzbar + np.conj(beta) * dz)
        + sp.diags(pot.ravel())
    ).tocsr()


def _wedge_matrices(g: int):
    """4^g x 4^g wedge matrices for each zeta/zbar generator, and the blade list."""
    blades = sorted(all_blades(g, ("zeta", "zbar")))
    index = {m: i for i, m in enumerate(blades)}
    mats = {}
    for fam in ("zeta", "zbar"):
        for j in range(1, g + 1):
            rows, cols, vals = [], [], []
            for m in blades:
                gv = wedge_generator(fam, j, GradedValue(g, {m: 1.0}))
                for mo, s in gv.coeffs.items():
                    rows.append(index[mo])
                    cols.append(index[m])
                    vals.append(s)
            mats[(fam, j)] = sp.coo_matrix(
                (vals, (rows, cols)), shape=(len(blades), len(blades))
            ).tocsr()
    return blades, mats


def _pm_basis_matrix(g: int, blades):
    """Unitary blade -> normalized e^pm basis change, with sector labels."""
    from .exterior import from_pm_basis

    index = {m: i for i, m in enumerate(blades)}
    cols = []
    sectors = []
    for m in blades:
        vec = from_pm_basis(GradedValue(g, {m: 1.0}))
        col = np.zeros(len(blades), dtype=complex)
        for mask, coeff in vec.coeffs.items():
            col[index[mask]] = coeff
        col = col / np.linalg.norm(col)
        cols.append(col)
        sectors.append(pm_sector(m, g))
    return np.stack(cols, axis=1), sectors


def assemble_x0_matrix(grid: GridSpec, m_lattice) -> tuple[sp.spmatrix, list, np.ndarray, list]:
    """Sparse matrix of X0 on (blades over zeta/zbar) x grid, one lattice slice."""
    if grid.g != 1:
        raise SizeError("dense spectral assembly is supported at g = 1 only")
    torus = grid.torus
    dzbar, zdiag = _grid_operators(grid)
    blades, wedges = _wedge_matrices(1)
    beta = torus.b_coefficient_lattice(m_lattice)[0]
    npts = zdiag.shape[0]
    eye = sp.identity(npts)
    A = (
        sp.kron(wedges[("zeta", 1)], TWO_PI_I * zdiag)
        + sp.kron(wedges[("zbar", 1)], dzbar)
        + sp.kron(wedges[("zbar", 1)], TWO_PI_I * np.conj(beta) * eye)
    )
    U, sectors = _pm_basis_matrix(1, blades)
    return A.tocsr(), blades, U, sectors


def assemble_yphi_matrix(grid: GridSpec, w) -> tuple[sp.spmatrix, list, np.ndarray, list]:
    """Sparse matrix of Y0 + Phi at a fixed sampled w (g = 1)."""
    if grid.g != 1:
        raise SizeError("dense spectral assembly is supported at g = 1 only")
    torus = grid.torus
    w = np.asarray(w, dtype=complex)
    dzbar, zdiag = _grid_operators(grid)
    blades, wedges = _wedge_matrices(1)
    beta_w = torus.b_coefficient(w)[0]
    npts = zdiag.shape[0]
    eye = sp.identity(npts)
    A = (
        sp.kron(wedges[("zbar", 1)], dzbar)
        + sp.kron(wedges[("zbar", 1)], TWO_PI_I * np.conj(beta_w) * eye)
        + sp.kron(wedges[("zeta", 1)], TWO_PI_I * (w[0] * eye - zdiag))
    )
    U, sectors = _pm_basis_matrix(1, blades)
    return A.tocsr(), blades, U, sectors


def _factored_pm_blocks(A: sp.spmatrix, U: np.ndarray, sectors: list):
    """Laplacian A*A + AA* rotated into the pm sector basis, as one sparse matrix."""
    npts = A.shape[0] // len(sectors)
    lap = (A.getH() @ A + A @ A.getH()).tocsr()
    UI = sp.kron(sp.csr_matrix(U), sp.identity(npts)).tocsr()
    return (UI.getH() @ lap @ UI).tocsr(), npts


def sector_spectra(
    grid: GridSpec,
    factored: sp.spmatrix,
    sectors: list,
    direct_blocks: dict,
    num_eigenvalues: int = 4,
    kernel_reference: dict | None = None,
    budget: int = 6000,
    smooth_probe: np.ndarray | None = None,
) -> dict[tuple[int, int], SectorSpectrum]:
    """Per-sector spectra of a composed-connection Laplacian.

    Eigenvalues come from ``direct_blocks`` (the compact discretization of
    the explicitly calculated sector operator).  The factored first-order
    form contributes two diagnostics: its off-sector blocks (exactly zero)
    and its agreement with the direct block when applied to a smooth
    decayed probe vector (second order in h).
    """
    npts = factored.shape[0] // len(sectors)
    if npts > budget:
        raise SizeError(f"grid block dimension {npts} exceeds eigensolver budget {budget}")
    out: dict[tuple[int, int], SectorSpectrum] = {}
    nb = len(sectors)
    scale = max(abs(factored).max(), 1e-30)
    for s_idx, sector in enumerate(sectors):
        rows = slice(s_idx * npts, (s_idx + 1) * npts)
        off = 0.0
        for t_idx in range(nb):
            if t_idx == s_idx:
                continue
            sub = factored[rows, slice(t_idx * npts, (t_idx + 1) * npts)]
            if sub.nnz:
                off = max(off, float(abs(sub).max()))
        direct = direct_blocks[sector]
        k = min(num_eigenvalues, npts)
        vals, vecs = scipy.linalg.eigh(direct.toarray(), subset_by_index=[0, k - 1])
        overlap = None
        if kernel_reference is not None and sector in kernel_reference:
            ref = np.asarray(kernel_reference[sector], dtype=complex).ravel()
            refn = np.linalg.norm(ref)
            v0 = vecs[:, 0]
            overlap = float(abs(np.vdot(v0, ref)) / (np.linalg.norm(v0) * refn)) if refn > 0 else 0.0
        fres = float("nan")
        if smooth_probe is not None:
            probe = smooth_probe.ravel()
            diff = factored[rows, rows] @ probe - direct @ probe
            fres = float(np.max(np.abs(diff)))
        gap = float(vals[1] - vals[0]) if len(vals) > 1 else float("nan")
        out[sector] = SectorSpectrum(
            sector=sector,
            eigenvalues=vals,
            kernel_overlap=overlap,
            off_sector_norm=float(off / scale),
            epsilon_disc=0.1 * abs(gap),
            factored_residual=fres,
        )
    return out


def x_kernel_spectrum(grid: GridSpec, m_lattice, num_eigenvalues: int = 4, budget: int = 6000):
    """Per-sector spectrum of the X-side Laplacian block at one lattice point."""
    from .polygauss import vacuum_x

    A, blades, U, sectors = assemble_x0_matrix(grid, m_lattice)
    factored, npts = _factored_pm_blocks(A, U, sectors)
    beta = grid.torus.b_coefficient_lattice(m_lattice)[0]
    osc = assemble_oscillator_matrix(grid, beta)
    direct = {
        s: (osc + 2 * np.pi * (s[0] - s[1]) * sp.identity(npts)).tocsr() for s in sectors
    }
    vac = vacuum_x(grid.torus, m_lattice)
    ref = vac.evaluate(grid.complex_grid())
    return sector_spectra(
        grid, factored, sectors, direct,
        num_eigenvalues=num_eigenvalues,
        kernel_reference={(0, 1): ref},
        budget=budget,
        smooth_probe=ref,
    )


def y_kernel_spectrum(grid: GridSpec, w, num_eigenvalues: int = 4, budget: int = 6000):
    """Per-sector spectrum of the coinvariant-model Laplacian at one sampled w."""
    from .polygauss import vacuum_y

    w = np.asarray(w, dtype=complex)
    A, blades, U, sectors = assemble_yphi_matrix(grid, w)
    factored, npts = _factored_pm_blocks(A, U, sectors)
    beta = grid.torus.b_coefficient(w)[0]
    osc = assemble_oscillator_matrix(grid, beta, center=w[0])
    direct = {
        s: (osc - 2 * np.pi * (s[0] - s[1]) * sp.identity(npts)).tocsr() for s in sectors
    }
    vac = vacuum_y(grid.torus, w)
    ref = vac.evaluate(grid.complex_grid())
    return sector_spectra(
        grid, factored, sectors, direct,
        num_eigenvalues=num_eigenvalues,
        kernel_reference={(1, 0): ref},
        budget=budget,
        smooth_probe=ref,
    )


def grid_inner_product(f: Field, g_: Field) -> complex:
    """<f, g> = h^(2g) sum over gridpoints and blades of f conj(g)."""
    total = 0.0 + 0.0j
    for mask, arr in f.data.items():
        other = g_.data.get(mask)
        if other is not None:
            total += np.sum(arr * np.conj(other))
    return complex(total * f.grid.h ** (2 * f.grid.g))


def lattice_inner_product(x: LatticeField, y: LatticeField) -> complex:
    total = 0.0 + 0.0j
    for m, f in x.slices.items():
        other = y.slices.get(m)
        if other is not None:
            total += grid_inner_product(f, other)
    return complex(total)
