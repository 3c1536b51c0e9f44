"""Complex torus data: lattice, complex chart, B-field and its decomposition.

A torus configuration holds a real vector space V = R^(2g) with a lattice
basis, the complex chart pairing consecutive basis directions into complex
coordinates z_j, a real antisymmetric two-form B, and everything derived
from it: the unitary cocycle

    sigma(u, v) = exp(2*pi*i * B(u, v)),

the complex decomposition of B into a skew-symmetric matrix ``b`` (the
(2,0) coefficients) and a skew-Hermitian matrix ``c`` (the (1,1)
coefficients), the primitive (0,1)-form omega with dbar(omega) equal to
the (0,2) part of B, and the coefficient functions B_j used throughout the
connection and oscillator modules.

Conventions fixed here and shared by every other module:

* complex chart: a vector with lattice coordinates (a_1, ..., a_2g) has
  complex coordinates z_j = a_(2j-1) + i*a_(2j);
* the scalar decomposition identity defining b and c is

      B(u, v) = sum_ij [ b_ij z_i(u) z_j(v) + conj(b_ij z_i(u) z_j(v)) ]
              + sum_ij c_ij [ z_i(u) conj(z_j(v)) - z_i(v) conj(z_j(u)) ]

  so that sigma(u, v) literally exponentiates the right-hand side;
* all sigma values are recomputed from B on demand; no phase is cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI_I = 2j * np.pi


class ConfigurationError(ValueError):
    """Structural problem in torus input data (bad basis, bad B matrix)."""


@dataclass(frozen=True)
class ComplexProjection:
    """Matrices of the projections of complexified V onto its J-eigenspaces.

    ``d_prime`` projects onto the +i eigenspace of J and ``d_second`` onto
    the -i eigenspace; they sum to the identity and conjugation swaps them.
    """

    j_matrix: np.ndarray
    d_prime: np.ndarray
    d_second: np.ndarray

    @classmethod
    def from_j(cls, j_matrix: np.ndarray) -> "ComplexProjection":
        n = j_matrix.shape[0]
        eye = np.eye(n)
        d_prime = (j_matrix * 1.0 + 1j * eye) / 2j
        d_second = (-j_matrix * 1.0 + 1j * eye) / 2j
        return cls(j_matrix=j_matrix, d_prime=d_prime, d_second=d_second)


@dataclass(frozen=True)
class TorusData:
    """Immutable torus configuration; safe to share across workers."""

    g: int
    lattice_basis: np.ndarray        # (2g, 2g), columns are lattice vectors
    B: np.ndarray                    # (2g, 2g), real antisymmetric
    b: np.ndarray = field(repr=False, default=None)  # (g, g) skew-symmetric
    c: np.ndarray = field(repr=False, default=None)  # (g, g) skew-Hermitian
    projection: ComplexProjection = field(repr=False, default=None)
    _basis_inv: np.ndarray = field(repr=False, default=None)

    # -- coordinates -------------------------------------------------------

    def lattice_coords(self, v) -> np.ndarray:
        """Coordinates of a point of V with respect to the lattice basis."""
        return self._basis_inv @ np.asarray(v, dtype=complex)

    def embed_lattice(self, m) -> np.ndarray:
        """Real coordinates of the lattice point with integer coordinates m."""
        return (self.lattice_basis @ np.asarray(m, dtype=float)).astype(float)

    def complex_coords(self, v) -> np.ndarray:
        """Complex chart z_j = a_(2j-1) + i*a_(2j) in lattice coordinates a."""
        a = self.lattice_coords(v)
        return a[0::2] + 1j * a[1::2]

    def point_from_complex(self, z) -> np.ndarray:
        """Inverse chart: real V-coordinates of a point given by z in C^g."""
        z = np.asarray(z, dtype=complex)
        a = np.zeros(2 * self.g)
        a[0::2] = z.real
        a[1::2] = z.imag
        return self.lattice_basis @ a

    # -- the form and its cocycle ------------------------------------------

    def b_form(self, u, v) -> float:
        """B(u, v) for points of V in real coordinates."""
        return float(np.asarray(u, dtype=float) @ self.B @ np.asarray(v, dtype=float))

    def sigma(self, u, v) -> complex:
        """Unit-modulus cocycle exp(2*pi*i*B(u, v)); u, v in real coordinates."""
        return complex(np.exp(TWO_PI_I * self.b_form(u, v)))

    def sigma_z(self, zu, zv) -> complex:
        """sigma evaluated on points given in complex coordinates."""
        return self.sigma(self.point_from_complex(zu), self.point_from_complex(zv))

    def b_form_z(self, zu, zv) -> complex:
        """B via the scalar decomposition identity, arguments in complex coordinates.

        Agrees with :meth:`b_form` on (embedded) real points; this is the
        expression whose exponential the cocycle derivative identities
        differentiate.
        """
        zu = np.asarray(zu, dtype=complex)
        zv = np.asarray(zv, dtype=complex)
        t20 = zu @ self.b @ zv
        t11 = zu @ self.c @ zv.conj() - zv @ self.c @ zu.conj()
        return complex(t20 + np.conj(t20) + t11)

    def delta_sigma(self, lam1, lam2, v) -> complex:
        """Coboundary combination of sigma on (lattice, lattice, V); equals 1."""
        lam1 = self.embed_lattice(lam1)
        lam2 = self.embed_lattice(lam2)
        v = np.asarray(v, dtype=float)
        return (
            self.sigma(lam2, v)
            / self.sigma(lam1 + lam2, v)
            * self.sigma(lam1, lam2 + v)
            / self.sigma(lam1, lam2)
        )

    # -- derived complex data ----------------------------------------------

    def b02_coefficients(self) -> dict[tuple[int, int], complex]:
        """Blade coefficients of the (0,2) part of B.

        Returns the coefficient of dzbar_p ^ dzbar_q (p < q, 0-based) of the
        two-form dbar(omega); with the double-sum convention this is
        2*conj(b_pq).
        """
        out: dict[tuple[int, int], complex] = {}
        for p in range(self.g):
            for q in range(p + 1, self.g):
                coeff = 2.0 * np.conj(self.b[p, q])
                if coeff != 0:
                    out[(p, q)] = complex(coeff)
        return out

    def omega_at(self, v) -> np.ndarray:
        """Coefficients of the (0,1)-form omega in the dzbar_j basis.

        omega_j(z) = sum_i conj(b_ij) conj(z_i) + c_ij z_i, evaluated at the
        complex coordinates of v (v given in real coordinates).
        """
        z = self.complex_coords(v)
        return self.omega_at_z(z)

    def omega_at_z(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z.conj() @ self.b.conj() + z @ self.c

    def b_coefficient(self, w) -> np.ndarray:
        """The vector (B_1, ..., B_g) with B_j = sum_i w_i b_ij + conj(w_i c_ij).

        ``w`` is given in complex coordinates (a lattice point or any point
        of V); the map is real-linear in w.
        """
        w = np.asarray(w, dtype=complex)
        return w @ self.b + np.conj(w @ self.c)

    def b_coefficient_lattice(self, m) -> np.ndarray:
        """B_j of a lattice point given by integer coordinates m."""
        return self.b_coefficient(self.complex_coords(self.embed_lattice(m)))


def _holomorphic_frame(lattice_basis: np.ndarray, g: int) -> np.ndarray:
    """Columns f_j spanning the +i eigenspace, dual to the chart: z_i(f_j) = delta_ij."""
    frame = np.zeros((2 * g, g), dtype=complex)
    for j in range(g):
        a = np.zeros(2 * g, dtype=complex)
        a[2 * j] = 0.5
        a[2 * j + 1] = -0.5j
        frame[:, j] = lattice_basis @ a
    return frame


def build_torus(g: int, lattice_basis, B_entries, *, tol: float = 1e-12) -> TorusData:
    """Build and validate a torus configuration.

    Parameters
    ----------
    g : complex dimension (positive integer).
    lattice_basis : (2g, 2g) invertible real matrix, columns the lattice vectors.
    B_entries : (2g, 2g) real antisymmetric matrix of the two-form.
    tol : antisymmetry / reassembly tolerance.

    Raises
    ------
    ConfigurationError
        If the basis is singular, B is not antisymmetric within ``tol``, or
        the decomposition fails to reproduce B.
    """
    if g < 1 or g > 32:
        raise ConfigurationError(f"complex dimension g={g} outside supported range 1..32")
    basis = np.asarray(lattice_basis, dtype=float)
    if basis.shape != (2 * g, 2 * g):
        raise ConfigurationError(f"lattice basis must be {2*g}x{2*g}, got {basis.shape}")
    B = np.asarray(B_entries, dtype=float)
    if B.shape != (2 * g, 2 * g):
        raise ConfigurationError(f"B must be {2*g}x{2*g}, got {B.shape}")
    if np.max(np.abs(B + B.T)) > tol:
        raise ConfigurationError("B is not antisymmetric within tolerance")
    try:
        basis_inv = np.linalg.inv(basis)
    except np.linalg.LinAlgError as exc:
        raise ConfigurationError("lattice basis is singular") from exc

    frame = _holomorphic_frame(basis, g)
    # b_pq = B(f_p, f_q), c_pq = B(f_p, conj(f_q)): the unique solution of the
    # scalar decomposition identity with b skew-symmetric, c skew-Hermitian.
    b = frame.T @ B @ frame
    c = frame.T @ B @ frame.conj()
    b = 0.5 * (b - b.T)                 # enforce exact skewness against roundoff
    c = 0.5 * (c - c.conj().T)

    # J in real coordinates: conjugate multiplication-by-i through the chart.
    mult_i = np.zeros((2 * g, 2 * g))
    for j in range(g):
        mult_i[2 * j, 2 * j + 1] = -1.0
        mult_i[2 * j + 1, 2 * j] = 1.0
    j_matrix = basis @ mult_i @ basis_inv

    data = TorusData(
        g=g,
        lattice_basis=basis,
        B=B,
        b=b,
        c=c,
        projection=ComplexProjection.from_j(j_matrix),
        _basis_inv=basis_inv,
    )
    resid = reassembly_residual(data)
    if resid > max(tol, 1e-12):
        raise ConfigurationError(f"decomposition reassembly residual {resid:.3e} exceeds tolerance")
    return data


def reassembly_residual(data: TorusData) -> float:
    """Max deviation |B(e_i, e_j) - decomposition(e_i, e_j)| over basis pairs."""
    n = 2 * data.g
    worst = 0.0
    eye = np.eye(n)
    for i in range(n):
        zi = data.complex_coords(eye[i])
        for j in range(n):
            zj = data.complex_coords(eye[j])
            direct = data.b_form(eye[i], eye[j])
            rebuilt = data.b_form_z(zi, zj)
            worst = max(worst, abs(direct - rebuilt))
    return worst


def standard_torus(g: int, theta_pairs=None) -> TorusData:
    """Standard lattice Z^(2g) with B assembled from per-pair angles.

    ``theta_pairs`` maps real-direction index pairs (i, j), 0-based, to the
    value B(e_i, e_j).  ``standard_torus(1, {(0, 1): theta})`` is the
    familiar one-parameter deformation.
    """
    B = np.zeros((2 * g, 2 * g))
    for (i, j), theta in (theta_pairs or {}).items():
        B[i, j] = theta
        B[j, i] = -theta
    return build_torus(g, np.eye(2 * g), B)
