"""Finite exterior algebra on three anticommuting generator families.

Generators, for complex dimension g, in the fixed global order

    dzeta_1 < ... < dzeta_g < dzbar_1 < ... < dzbar_g < dtau_1 < ... < dtau_g

are encoded as bits 0..g-1 (zeta), g..2g-1 (zbar) and 2g..3g-1 (tau) of an
integer mask, so every blade is stored sorted with sign +1.  The same sign
convention is shared by every module that wedges forms.

The degree operator L = sum_j [ dzbar_j . iota_zeta_j + iota_zbar_j . dzeta_j ]
acts on the (zeta, zbar) factors and is diagonal in the plus/minus blade
basis built from e_j^pm = dzbar_j +- i dzeta_j, with eigenvalue (k - l) i on
a product of k plus-generators and l minus-generators.
"""

from __future__ import annotations

import itertools

FAMILIES = ("zeta", "zbar", "tau")


class DimensionError(ValueError):
    pass


def family_offset(family: str, g: int) -> int:
    try:
        return FAMILIES.index(family) * g
    except ValueError:
        raise DimensionError(f"unknown generator family {family!r}") from None


def generator_bit(family: str, j: int, g: int) -> int:
    """Bit position of generator j (1-based) of the given family."""
    if not 1 <= j <= g:
        raise DimensionError(f"generator index {j} out of range 1..{g}")
    return family_offset(family, g) + (j - 1)


def blade_degree(mask: int) -> int:
    return bin(mask).count("1")


def wedge_sign(a: int, b: int) -> int:
    """Sign of merging sorted blade words a and b; 0 if they share a generator."""
    if a & b:
        return 0
    sign = 1
    rest = a
    while rest:
        low = rest & -rest
        # generators of b strictly above this generator of a must hop over it
        if bin(b & ~(low | (low - 1))).count("1") & 1:
            sign = -sign
        rest ^= low
    return sign


def blade_wedge(a: int, b: int) -> tuple[int, int]:
    """(sign, mask) of the wedge of two blades; sign 0 means the product is zero."""
    s = wedge_sign(a, b)
    return s, (a | b if s else 0)


class GradedValue:
    """Finitely supported map blade-mask -> complex coefficient.

    Normalized: zero coefficients are dropped.  Values are immutable by
    convention; all operations return fresh objects.
    """

    __slots__ = ("g", "coeffs")

    def __init__(self, g: int, coeffs: dict[int, complex] | None = None):
        self.g = g
        self.coeffs = {m: complex(c) for m, c in (coeffs or {}).items() if c != 0}

    # -- constructors --------------------------------------------------------

    @classmethod
    def scalar(cls, g: int, value: complex = 1.0) -> "GradedValue":
        return cls(g, {0: value})

    @classmethod
    def generator(cls, g: int, family: str, j: int, coeff: complex = 1.0) -> "GradedValue":
        return cls(g, {1 << generator_bit(family, j, g): coeff})

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "GradedValue") -> "GradedValue":
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return GradedValue(self.g, out)

    def __sub__(self, other: "GradedValue") -> "GradedValue":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "GradedValue":
        return GradedValue(self.g, {m: c * factor for m, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedValue) and self.g == other.g and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"GradedValue(g={self.g}, {self.coeffs!r})"

    def norm(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def distance(self, other: "GradedValue") -> float:
        return (self - other).norm()

    def degrees(self) -> set[int]:
        return {blade_degree(m) for m in self.coeffs}

    def _check(self, other: "GradedValue") -> None:
        if self.g != other.g:
            raise DimensionError(f"mixed dimensions g={self.g} and g={other.g}")


def wedge(a: GradedValue, b: GradedValue) -> GradedValue:
    """Bilinear associative graded-anticommutative product."""
    a._check(b)
    out: dict[int, complex] = {}
    for ma, ca in a.coeffs.items():
        for mb, cb in b.coeffs.items():
            s, m = blade_wedge(ma, mb)
            if s:
                out[m] = out.get(m, 0.0) + s * ca * cb
    return GradedValue(a.g, out)


def contract(family: str, j: int, a: GradedValue) -> GradedValue:
    """Contraction with the vector dual to generator j of the family.

    A graded anti-derivation of degree -1; squares to zero.
    """
    bit = generator_bit(family, j, a.g)
    flag = 1 << bit
    below = flag - 1
    out: dict[int, complex] = {}
    for m, c in a.coeffs.items():
        if m & flag:
            sign = -1 if bin(m & below).count("1") & 1 else 1
            out[m ^ flag] = out.get(m ^ flag, 0.0) + sign * c
    return GradedValue(a.g, out)


def wedge_generator(family: str, j: int, a: GradedValue, coeff: complex = 1.0) -> GradedValue:
    """Left-wedge a single generator into a; cheaper than building a GradedValue."""
    bit = generator_bit(family, j, a.g)
    flag = 1 << bit
    below = flag - 1
    out: dict[int, complex] = {}
    for m, c in a.coeffs.items():
        if m & flag:
            continue
        sign = -1 if bin(m & below).count("1") & 1 else 1
        out[m | flag] = out.get(m | flag, 0.0) + sign * c * coeff
    return GradedValue(a.g, out)


def L_apply(a: GradedValue) -> GradedValue:
    """Apply L = sum_j [dzbar_j o iota_zeta_j + iota_zbar_j o dzeta_j]."""
    total = GradedValue(a.g)
    for j in range(1, a.g + 1):
        total = total + wedge_generator("zbar", j, contract("zeta", j, a))
        total = total + contract("zbar", j, wedge_generator("zeta", j, a))
    return total


# -- plus/minus eigenbasis ----------------------------------------------------
#
# In the pm encoding, the zeta bit of slot j stands for e_j^+ and the zbar bit
# for e_j^-, so pm words read  e^+_1 .. e^+_g  e^-_1 .. e^-_g  (tau unchanged),
# matching the ordering of products e^+_I ^ e^-_J.


def _substitute(a: GradedValue, images: dict[int, GradedValue]) -> GradedValue:
    """Extend a generator substitution to the whole algebra multiplicatively."""
    total = GradedValue(a.g)
    for m, c in a.coeffs.items():
        word = GradedValue.scalar(a.g, c)
        rest = m
        while rest:
            low = rest & -rest
            word = wedge(word, images[low.bit_length() - 1])
            rest ^= low
        total = total + word
    return total


def _pm_images(g: int, to_pm: bool) -> dict[int, GradedValue]:
    images: dict[int, GradedValue] = {}
    for j in range(1, g + 1):
        zeta_bit = generator_bit("zeta", j, g)
        zbar_bit = generator_bit("zbar", j, g)
        tau_bit = generator_bit("tau", j, g)
        if to_pm:
            # dzbar_j = (e+ + e-)/2, dzeta_j = (e+ - e-)/(2i)
            images[zbar_bit] = GradedValue(g, {1 << zeta_bit: 0.5, 1 << zbar_bit: 0.5})
            images[zeta_bit] = GradedValue(g, {1 << zeta_bit: -0.5j, 1 << zbar_bit: 0.5j})
        else:
            # e_j^+ = dzbar_j + i dzeta_j, e_j^- = dzbar_j - i dzeta_j
            images[zeta_bit] = GradedValue(g, {1 << zbar_bit: 1.0, 1 << zeta_bit: 1.0j})
            images[zbar_bit] = GradedValue(g, {1 << zbar_bit: 1.0, 1 << zeta_bit: -1.0j})
        images[tau_bit] = GradedValue(g, {1 << tau_bit: 1.0})
    return images


def to_pm_basis(a: GradedValue) -> GradedValue:
    """Re-express a (zeta, zbar) word in the e^+/e^- blade encoding."""
    return _substitute(a, _pm_images(a.g, to_pm=True))


def from_pm_basis(a: GradedValue) -> GradedValue:
    """Inverse of :func:`to_pm_basis`."""
    return _substitute(a, _pm_images(a.g, to_pm=False))


def pm_sector(mask: int, g: int) -> tuple[int, int]:
    """(k, l) = (number of e^+ factors, number of e^- factors) of a pm blade."""
    zeta_block = mask & ((1 << g) - 1)
    zbar_block = (mask >> g) & ((1 << g) - 1)
    return blade_degree(zeta_block), blade_degree(zbar_block)


def all_blades(g: int, families: tuple[str, ...] = FAMILIES):
    """Iterate over all blade masks supported on the given families."""
    bits = [generator_bit(f, j, g) for f in families for j in range(1, g + 1)]
    for r in range(len(bits) + 1):
        for combo in itertools.combinations(bits, r):
            yield sum(1 << b for b in combo)
