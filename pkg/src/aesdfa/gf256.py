"""Arithmetic in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.

Field elements are plain ints in ``range(256)``; bit ``i`` is the
coefficient of ``x**i``.  Besides the field operations this module builds
the AES S-box from its algebraic definition and provides the subspace
machinery used by the fault analysis: the image ``E1`` of ``t -> t^2 + t``,
its scaled copies ``lam * E1`` and a table-driven solver for
``t^2 + t = theta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

MODULUS = 0x11B
SBOX_CONSTANT = 0x63


def hexbyte(x: int) -> str:
    """Two uppercase hex digits, e.g. ``hexbyte(212) == 'D4'``."""
    return f"{x:02X}"


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    """Carry-less multiply with reduction by the AES modulus."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= MODULUS
    return result


def gf_pow(a: int, n: int) -> int:
    result = 1
    while n:
        if n & 1:
            result = gf_mul(result, a)
        a = gf_mul(a, a)
        n >>= 1
    return result


def gf_inv(a: int) -> int:
    """Multiplicative inverse, computed as ``a**254``.

    Raises:
        ZeroDivisionError: if ``a`` is zero.
    """
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return gf_pow(a, 254)


# --- GF(2)-linear maps on a byte -------------------------------------------

BitMatrix8 = Tuple[int, int, int, int, int, int, int, int]
"""Eight row masks; bit ``j`` of row ``i`` is the matrix entry (i, j).

The matrix acts on a byte viewed as the column vector (b0, ..., b7), so
output bit ``i`` is the parity of ``row[i] & x``.
"""


def _rows_from_bits(rows: Sequence[str]) -> BitMatrix8:
    # rows are written left to right as columns 0..7
    return tuple(int(r[::-1], 2) for r in rows)  # type: ignore[return-value]


AFFINE_MATRIX: BitMatrix8 = _rows_from_bits([
    "10001111",
    "11000111",
    "11100011",
    "11110001",
    "11111000",
    "01111100",
    "00111110",
    "00011111",
])


def apply_linear(m: BitMatrix8, x: int) -> int:
    out = 0
    for i, row in enumerate(m):
        out |= (bin(row & x).count("1") & 1) << i
    return out


def bitmatrix_mul(m: BitMatrix8, n: BitMatrix8) -> BitMatrix8:
    """Matrix product ``m * n`` over GF(2)."""
    cols = [apply_linear(n, 1 << j) for j in range(8)]
    prod_cols = [apply_linear(m, c) for c in cols]
    return tuple(
        sum(((prod_cols[j] >> i) & 1) << j for j in range(8)) for i in range(8)
    )  # type: ignore[return-value]


def bitmatrix_inverse(m: BitMatrix8) -> BitMatrix8:
    """Gauss-Jordan inversion over GF(2).

    Raises:
        ValueError: if ``m`` is singular.
    """
    rows = [(m[i], 1 << i) for i in range(8)]
    for col in range(8):
        pivot = next((r for r in range(col, 8) if (rows[r][0] >> col) & 1), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(2)")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(8):
            if r != col and (rows[r][0] >> col) & 1:
                rows[r] = (rows[r][0] ^ rows[col][0], rows[r][1] ^ rows[col][1])
    return tuple(r[1] for r in rows)  # type: ignore[return-value]


IDENTITY_MATRIX: BitMatrix8 = tuple(1 << i for i in range(8))  # type: ignore[assignment]
AFFINE_MATRIX_INV: BitMatrix8 = bitmatrix_inverse(AFFINE_MATRIX)


# --- S-box -------------------------------------------------------------------

def _sbox_value(x: int) -> int:
    if x == 0:
        return SBOX_CONSTANT
    return apply_linear(AFFINE_MATRIX, gf_inv(x)) ^ SBOX_CONSTANT


INV: Tuple[int, ...] = (0,) + tuple(gf_inv(x) for x in range(1, 256))
SBOX: Tuple[int, ...] = tuple(_sbox_value(x) for x in range(256))
INV_SBOX: Tuple[int, ...] = tuple(sorted(range(256), key=SBOX.__getitem__))
# a^{-1} * y for every byte y; the fault analysis applies it to each output difference
AFFINE_INV_TABLE: Tuple[int, ...] = tuple(
    apply_linear(AFFINE_MATRIX_INV, y) for y in range(256)
)


def sbox(x: int) -> int:
    return SBOX[x]


def inv_sbox(y: int) -> int:
    return INV_SBOX[y]


# --- E1 and the quadratic t^2 + t = theta ------------------------------------

def in_E1(x: int) -> bool:
    """Whether ``x`` lies in the image of ``t -> t^2 + t`` (bit 7 equals bit 5)."""
    return ((x >> 7) ^ (x >> 5)) & 1 == 0


E1: frozenset = frozenset(x for x in range(256) if in_E1(x))
E1_NONZERO: Tuple[int, ...] = tuple(sorted(E1 - {0}))


def _build_root_table() -> Tuple[Optional[int], ...]:
    table: list = [None] * 256
    for t in range(256):
        theta = gf_mul(t, t) ^ t
        if table[theta] is None:
            table[theta] = t
    return tuple(table)


# theta -> smallest root of t^2 + t = theta, or None off E1
QUADRATIC_ROOT: Tuple[Optional[int], ...] = _build_root_table()


def solve_quadratic(theta: int) -> Optional[Tuple[int, int]]:
    """Roots ``(alpha, alpha ^ 1)`` of ``t^2 + t = theta``, or None if there are none."""
    alpha = QUADRATIC_ROOT[theta]
    if alpha is None:
        return None
    return alpha, alpha ^ 1


# --- subspaces lam * E1 -------------------------------------------------------

@dataclass(frozen=True)
class GFSubspace:
    """A GF(2)-subspace of GF(2^8) given by its members and a basis."""

    members: frozenset
    basis: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def from_members(cls, members: Iterable[int]) -> "GFSubspace":
        members = frozenset(members)
        return cls(members, tuple(gf2_basis(members)))

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __and__(self, other: "GFSubspace") -> "GFSubspace":
        return GFSubspace.from_members(self.members & other.members)


def gf2_basis(vectors: Iterable[int]) -> list:
    """Echelon basis of the GF(2) span of ``vectors``."""
    pivots: dict = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                break
            v ^= pivots[top]
    return [pivots[k] for k in sorted(pivots, reverse=True)]


def gf2_rank(vectors: Iterable[int]) -> int:
    return len(gf2_basis(vectors))


def scaled_E1(lam: int) -> GFSubspace:
    """``E_lam = lam * E1``."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    return GFSubspace.from_members(gf_mul(lam, e) for e in E1)


def _e_lambda_functional(lam: int) -> int:
    # E1 is the kernel of x -> bit7(x) ^ bit5(x); E_lam is the kernel of that
    # functional composed with multiplication by lam^{-1}.  Return its row vector.
    mu = INV[lam]
    row = 0
    for j in range(8):
        y = gf_mul(mu, 1 << j)
        row |= (((y >> 7) ^ (y >> 5)) & 1) << j
    return row


def subspace_dim(lambdas: Sequence[int]) -> int:
    """Dimension over GF(2) of the intersection of ``lam * E1`` for ``lam`` in ``lambdas``.

    Each ``lam * E1`` is a hyperplane, so the intersection has dimension
    ``8 - rank`` of the stacked defining functionals.
    """
    if not 1 <= len(lambdas) <= 4:
        raise ValueError("expected between 1 and 4 lambdas")
    if any(lam == 0 for lam in lambdas):
        raise ValueError("lambda must be nonzero")
    return 8 - gf2_rank(_e_lambda_functional(lam) for lam in lambdas)
