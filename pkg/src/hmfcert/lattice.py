"""Exact lattice linear algebra over the integers with p-local readouts.

Integer matrices are tuples of tuples of ints, row vectors spanning the
lattice.  Rational inputs (for subspace data) use fractions.Fraction.
The Bareiss fraction-free determinant kernel defined here is shared with
the number-field module, which clears denominators and calls it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class DegenerateSplit(Exception):
    pass


class FusionMismatch(Exception):
    """The three congruence-module quotients disagree; indicates a bug."""


class NotCommuting(Exception):
    pass


class NotStable(Exception):
    pass


class SupportViolation(Exception):
    pass


IntMatrix = tuple[tuple[int, ...], ...]


def _as_matrix(rows) -> tuple[tuple, ...]:
    return tuple(tuple(r) for r in rows)


def _identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(a, b):
    bt = list(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def bareiss_det(m) -> int:
    """Determinant of a square integer matrix, fraction-free (Bareiss)."""
    a = [list(row) for row in m]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def det_rational(m) -> Fraction:
    """Determinant of a rational matrix via row scaling + Bareiss."""
    scale = Fraction(1)
    rows = []
    for row in m:
        row = [Fraction(x) for x in row]
        lcm = 1
        for x in row:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        scale *= lcm
        rows.append([int(x * lcm) for x in row])
    return Fraction(bareiss_det(rows), 1) / scale


def hnf(m) -> IntMatrix:
    """Row-style Hermite normal form with positive pivots.

    Returns the nonzero rows: a canonical basis of the integer row span.
    Pivots are positive, entries above a pivot are reduced into [0, pivot).
    """
    a = [list(map(int, row)) for row in m]
    if not a:
        return ()
    ncols = len(a[0])
    pivot_row = 0
    for col in range(ncols):
        # find a row at or below pivot_row with nonzero entry in col
        piv = None
        for i in range(pivot_row, len(a)):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[pivot_row], a[piv] = a[piv], a[pivot_row]
        # eliminate below via gcd steps
        for i in range(pivot_row + 1, len(a)):
            while a[i][col] != 0:
                q = a[pivot_row][col] // a[i][col]
                for j in range(ncols):
                    a[pivot_row][j] -= q * a[i][j]
                a[pivot_row], a[i] = a[i], a[pivot_row]
        if a[pivot_row][col] < 0:
            a[pivot_row] = [-x for x in a[pivot_row]]
        # reduce entries above the pivot
        p = a[pivot_row][col]
        for i in range(pivot_row):
            q = a[i][col] // p
            if q:
                for j in range(ncols):
                    a[i][j] -= q * a[pivot_row][j]
        pivot_row += 1
        if pivot_row == len(a):
            break
    return _as_matrix(row for row in a[:pivot_row])


def hnf_with_transform(m) -> tuple[IntMatrix, IntMatrix]:
    """(H, U) with U unimodular, U*M = [H; 0] (H the nonzero HNF rows)."""
    a = [list(map(int, row)) for row in m]
    nrows = len(a)
    u = [list(row) for row in _identity(nrows)]
    ncols = len(a[0]) if a else 0
    pivot_row = 0
    for col in range(ncols):
        piv = None
        for i in range(pivot_row, nrows):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[pivot_row], a[piv] = a[piv], a[pivot_row]
        u[pivot_row], u[piv] = u[piv], u[pivot_row]
        for i in range(pivot_row + 1, nrows):
            while a[i][col] != 0:
                q = a[pivot_row][col] // a[i][col]
                for j in range(ncols):
                    a[pivot_row][j] -= q * a[i][j]
                for j in range(nrows):
                    u[pivot_row][j] -= q * u[i][j]
                a[pivot_row], a[i] = a[i], a[pivot_row]
                u[pivot_row], u[i] = u[i], u[pivot_row]
        if a[pivot_row][col] < 0:
            a[pivot_row] = [-x for x in a[pivot_row]]
            u[pivot_row] = [-x for x in u[pivot_row]]
        p = a[pivot_row][col]
        for i in range(pivot_row):
            q = a[i][col] // p
            if q:
                for j in range(ncols):
                    a[i][j] -= q * a[pivot_row][j]
                for j in range(nrows):
                    u[i][j] -= q * u[pivot_row][j]
        pivot_row += 1
        if pivot_row == nrows:
            break
    h = _as_matrix(a[:pivot_row])
    return h, _as_matrix(u)


def snf(m) -> tuple[int, ...]:
    """Smith invariant factors d1 | d2 | ... of an integer matrix.

    Returns min(nrows, ncols) entries; trailing zeros mark rank deficiency.
    """
    a = [list(map(int, row)) for row in m]
    if not a or not a[0]:
        return ()
    nr, nc = len(a), len(a[0])
    k = 0
    size = min(nr, nc)
    result = []
    while k < size:
        # find a nonzero pivot in the trailing block
        piv = None
        for i in range(k, nr):
            for j in range(k, nc):
                if a[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        i0, j0 = piv
        a[k], a[i0] = a[i0], a[k]
        for row in a:
            row[k], row[j0] = row[j0], row[k]
        while True:
            # clear column k: reduce entries modulo the pivot; a nonzero
            # remainder becomes the new (strictly smaller) pivot
            restart = False
            for i in range(k + 1, nr):
                if a[i][k] == 0:
                    continue
                q = a[i][k] // a[k][k]
                for j in range(k, nc):
                    a[i][j] -= q * a[k][j]
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    restart = True
                    break
            if restart:
                continue
            # clear row k with column operations, same discipline
            for j in range(k + 1, nc):
                if a[k][j] == 0:
                    continue
                q = a[k][j] // a[k][k]
                for row in a:
                    row[j] -= q * row[k]
                if a[k][j] != 0:
                    for row in a:
                        row[k], row[j] = row[j], row[k]
                    restart = True
                    break
            if restart:
                continue
            # pivot must divide the trailing block; if not, fold the
            # offending row in and reduce again
            offender = None
            p = a[k][k]
            for i in range(k + 1, nr):
                for j in range(k + 1, nc):
                    if a[i][j] % p != 0:
                        offender = i
                        break
                if offender:
                    break
            if offender is None:
                break
            for j in range(k, nc):
                a[k][j] += a[offender][j]
        result.append(abs(a[k][k]))
        k += 1
    result += [0] * (size - len(result))
    # normalize: each entry divides the next (guaranteed by construction)
    return tuple(result)


def snf_minors_oracle(m) -> tuple[int, ...]:
    """Independent Smith-form oracle via gcds of k x k minors (small only)."""
    from itertools import combinations

    a = _as_matrix(m)
    nr, nc = len(a), len(a[0])
    size = min(nr, nc)
    dets_prev = 1
    out = []
    for k in range(1, size + 1):
        g = 0
        for rows in combinations(range(nr), k):
            for cols in combinations(range(nc), k):
                sub = [[a[i][j] for j in cols] for i in rows]
                g = math.gcd(g, bareiss_det(sub))
        if g == 0:
            out += [0] * (size - len(out))
            break
        out.append(g // dets_prev)
        dets_prev = g
    out += [0] * (size - len(out))
    return tuple(out)


def left_kernel(m) -> IntMatrix:
    """Basis of {y integer row : y*M = 0}; saturated by construction."""
    h, u = hnf_with_transform(m)
    rank = len(h)
    return _as_matrix(u[rank:])


def in_row_span(vec, basis) -> bool:
    """Integer membership of vec in the lattice spanned by basis rows."""
    h = hnf(basis)
    v = list(map(int, vec))
    ncols = len(v)
    for row in h:
        col = next(j for j in range(ncols) if row[j] != 0)
        if v[col] % row[col] != 0:
            return False
        q = v[col] // row[col]
        for j in range(ncols):
            v[j] -= q * row[j]
    return all(x == 0 for x in v)


@dataclass(frozen=True)
class Lattice:
    """Full set of integer row vectors spanning L inside Q^n."""

    basis: IntMatrix
    ambient_dim: int

    def __post_init__(self):
        object.__setattr__(self, "basis", _as_matrix(self.basis))
        for row in self.basis:
            if len(row) != self.ambient_dim:
                raise ValueError("row length does not match ambient dimension")
        if len(hnf(self.basis)) != len(self.basis):
            raise ValueError("basis rows are linearly dependent")

    @property
    def rank(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class Split:
    """Complementary rational subspaces V1, V2 of Q^n, given by row bases."""

    v1_basis: tuple[tuple[Fraction, ...], ...]
    v2_basis: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "v1_basis", tuple(tuple(Fraction(x) for x in r) for r in self.v1_basis)
        )
        object.__setattr__(
            self, "v2_basis", tuple(tuple(Fraction(x) for x in r) for r in self.v2_basis)
        )
        n = len(self.v1_basis[0]) if self.v1_basis else len(self.v2_basis[0])
        if len(self.v1_basis) + len(self.v2_basis) != n:
            raise DegenerateSplit("dim V1 + dim V2 != ambient dimension")
        if det_rational(self.v1_basis + self.v2_basis) == 0:
            raise DegenerateSplit("V1 and V2 do not span complementary subspaces")

    @property
    def dim1(self) -> int:
        return len(self.v1_basis)

    @property
    def dim2(self) -> int:
        return len(self.v2_basis)

    @property
    def ambient_dim(self) -> int:
        return len(self.v1_basis[0]) if self.v1_basis else len(self.v2_basis[0])


def coordinate_split(n: int, d1: int) -> Split:
    """Split of Q^n into the first d1 and the last n-d1 coordinates."""
    e = _identity(n)
    return Split(tuple(e[:d1]), tuple(e[d1:]))


def _mat_inverse(m):
    """Inverse of a square rational matrix (Gauss-Jordan over Fraction)."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col]:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def _scale_to_int(rows) -> tuple[IntMatrix, int]:
    """(integer matrix, common denominator) with int_matrix = denom * rows."""
    denom = 1
    for row in rows:
        for x in row:
            f = Fraction(x)
            denom = denom * f.denominator // math.gcd(denom, f.denominator)
    out = _as_matrix(tuple(int(Fraction(x) * denom) for x in row) for row in rows)
    return out, denom


@dataclass(frozen=True)
class SplitPieces:
    """The four lattices of a split: L_j = L ∩ V_j, L^j = projection to V_j.

    Each piece is stored as an integer row basis in V_j-coordinates together
    with a common denominator: lattice = {rows} / denom in coordinates
    relative to the V_j basis.
    """

    l1: IntMatrix
    l1_denom: int
    l2: IntMatrix
    l2_denom: int
    l1_proj: IntMatrix
    l1_proj_denom: int
    l2_proj: IntMatrix
    l2_proj_denom: int


def split_lattice(lat: Lattice, s: Split) -> SplitPieces:
    """Intersections and projections of L along V1 ⊕ V2."""
    n = lat.ambient_dim
    if s.ambient_dim != n:
        raise DegenerateSplit("split ambient dimension mismatch")
    if lat.rank != n:
        raise DegenerateSplit("lattice is not full rank in V1 ⊕ V2")
    p = s.v1_basis + s.v2_basis
    pinv = _mat_inverse(p)
    # coords[i] = coordinates of basis row i in the (V1, V2) basis
    coords = mat_mul([[Fraction(x) for x in row] for row in lat.basis], pinv)
    d1 = s.dim1

    def intersection(keep: slice, kill: slice):
        kill_block = [row[kill] for row in coords]
        kill_int, _ = _scale_to_int(kill_block)
        ker = left_kernel(kill_int)
        inter_coords = mat_mul(ker, [row[keep] for row in coords])
        m, denom = _scale_to_int(inter_coords)
        return hnf(m), denom

    def projection(keep: slice):
        block = [row[keep] for row in coords]
        m, denom = _scale_to_int(block)
        return hnf(m), denom

    l1, l1_den = intersection(slice(0, d1), slice(d1, n))
    l2, l2_den = intersection(slice(d1, n), slice(0, d1))
    p1, p1_den = projection(slice(0, d1))
    p2, p2_den = projection(slice(d1, n))
    if len(p1) != d1 or len(p2) != n - d1:
        raise DegenerateSplit("projection of L is not full rank in V_j")
    return SplitPieces(l1, l1_den, l2, l2_den, p1, p1_den, p2, p2_den)


def _quotient_invariants(sub: IntMatrix, sub_den: int, amb: IntMatrix, amb_den: int):
    """Invariant factors of (amb/amb_den) / (sub/sub_den), both full rank."""
    # rescale to a common denominator so both are integer lattices
    lcm = sub_den * amb_den // math.gcd(sub_den, amb_den)
    sub_i = [[x * (lcm // sub_den) for x in row] for row in sub]
    amb_i = [[x * (lcm // amb_den) for x in row] for row in amb]
    inv = _mat_inverse(amb_i)
    m = mat_mul([[Fraction(x) for x in r] for r in sub_i], inv)
    rows = []
    for row in m:
        irow = []
        for x in row:
            if Fraction(x).denominator != 1:
                raise ValueError("sublattice is not contained in ambient lattice")
            irow.append(int(x))
        rows.append(irow)
    return snf(rows)


def _p_part(n: int, p: int) -> int:
    if n == 0:
        return 0
    out = 1
    while n % p == 0:
        out *= p
        n //= p
    return out


@dataclass(frozen=True)
class CongruenceModule:
    """p-parts of the invariant factors of the three fused quotients."""

    p: int
    invariant_factors: tuple[int, ...]
    three_way: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    @property
    def is_trivial(self) -> bool:
        return all(f == 1 for f in self.invariant_factors)

    @property
    def order(self) -> int:
        out = 1
        for f in self.invariant_factors:
            out *= f
        return out


def congruence_module(lat: Lattice, s: Split, p: int) -> CongruenceModule:
    """The finite module measuring failure of L to split along V1 ⊕ V2.

    Computes all three quotients L^1/L_1, L/(L_1 ⊕ L_2), L^2/L_2 and
    asserts their p-local invariant factors agree.
    """
    pieces = split_lattice(lat, s)
    q1 = _quotient_invariants(pieces.l1, pieces.l1_denom,
                              pieces.l1_proj, pieces.l1_proj_denom)
    q2 = _quotient_invariants(pieces.l2, pieces.l2_denom,
                              pieces.l2_proj, pieces.l2_proj_denom)
    # middle quotient L / (L1 ⊕ L2), in ambient coordinates
    n = lat.ambient_dim
    d1 = s.dim1
    p_mat = s.v1_basis + s.v2_basis
    sub_rows = []
    for row in pieces.l1:
        amb = [sum(Fraction(row[j], pieces.l1_denom) * p_mat[j][c] for j in range(d1))
               for c in range(n)]
        sub_rows.append(amb)
    for row in pieces.l2:
        amb = [sum(Fraction(row[j], pieces.l2_denom) * p_mat[d1 + j][c]
                   for j in range(n - d1)) for c in range(n)]
        sub_rows.append(amb)
    sub_i, sub_den = _scale_to_int(sub_rows)
    qm = _quotient_invariants(sub_i, sub_den, lat.basis, 1)

    locals_ = tuple(tuple(_p_part(f, p) for f in q if _p_part(f, p) != 1)
                    for q in (q1, qm, q2))
    if not (locals_[0] == locals_[1] == locals_[2]):
        raise FusionMismatch(f"three-way quotients disagree at p={p}: {locals_}")
    return CongruenceModule(p=p, invariant_factors=locals_[0], three_way=locals_)


def split_indices(lat: Lattice, s: Split) -> tuple[int, int]:
    """Indices [L : L_1 ⊕ L_2] and [L^1 ⊕ L^2 : L]."""
    pieces = split_lattice(lat, s)
    n = lat.ambient_dim
    d1 = s.dim1
    p_mat = s.v1_basis + s.v2_basis

    def vol(rows_den_pairs):
        # rows of the two blocks embedded in ambient, as one n x n matrix
        rows = []
        for block, den, offset, dim in rows_den_pairs:
            for row in block:
                amb = [sum(Fraction(row[j], den) * p_mat[offset + j][c]
                           for j in range(dim)) for c in range(n)]
                rows.append(amb)
        return abs(det_rational(rows))

    vol_l = abs(det_rational(lat.basis))
    vol_inner = vol([(pieces.l1, pieces.l1_denom, 0, d1),
                     (pieces.l2, pieces.l2_denom, d1, n - d1)])
    vol_outer = vol([(pieces.l1_proj, pieces.l1_proj_denom, 0, d1),
                     (pieces.l2_proj, pieces.l2_proj_denom, d1, n - d1)])
    idx_inner = vol_inner / vol_l
    idx_outer = vol_l / vol_outer
    assert idx_inner.denominator == 1 and idx_outer.denominator == 1
    return int(idx_inner), int(idx_outer)


@dataclass(frozen=True)
class DiscPairing:
    determinant: Fraction
    pair_product: Fraction
    pairs: tuple[tuple[int, int, Fraction, Fraction], ...]


def disc_pairing(gram, d: int) -> DiscPairing:
    """Discriminant of a pairing supported on complementary subset pairs.

    gram is a 2^d x 2^d rational matrix indexed by subsets of {0..d-1} as
    bitmasks; entry (J, J') must vanish unless J' is the complement of J.
    Returns det(gram) and checks it equals the product over complementary
    pairs {J, J^c} (J containing index 0) of -g[J][Jc] * g[Jc][J].
    """
    size = 1 << d
    g = [[Fraction(x) for x in row] for row in gram]
    if len(g) != size or any(len(r) != size for r in g):
        raise ValueError("gram matrix has wrong shape")
    full = size - 1
    for j in range(size):
        for jp in range(size):
            if jp != full ^ j and g[j][jp] != 0:
                raise SupportViolation(f"nonzero entry at non-complementary ({j},{jp})")
    det = det_rational(g)
    prod = Fraction(1)
    pairs = []
    for j in range(size):
        jc = full ^ j
        if not (j & 1):  # enumerate pairs by the subset containing index 0
            continue
        prod *= -g[j][jc] * g[jc][j]
        pairs.append((j, jc, g[j][jc], g[jc][j]))
    if det != prod:
        raise FusionMismatch(f"determinant {det} != pair product {prod}")
    return DiscPairing(det, prod, tuple(pairs))


# ---------------------------------------------------------------------------
# eigensystems and congruence detection


class ExtensionNeeded(Exception):
    pass


def _charpoly(m) -> list[Fraction]:
    """Characteristic polynomial det(xI - M), low degree first, exact.

    Evaluated at n+1 integer points and Lagrange-interpolated; each
    evaluation is a fraction-free determinant.
    """
    n = len(m)
    xs = list(range(n + 1))
    ys = []
    for x in xs:
        a = [[(Fraction(x) if i == j else Fraction(0)) - Fraction(m[i][j])
              for j in range(n)] for i in range(n)]
        ys.append(det_rational(a))
    coeffs = [Fraction(0)] * (n + 1)
    for i, xi in enumerate(xs):
        poly = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            new = [Fraction(0)] * (len(poly) + 1)
            for k, c in enumerate(poly):
                new[k + 1] += c
                new[k] -= xj * c
            poly = new
            denom *= xi - xj
        w = ys[i] / denom
        for k, c in enumerate(poly):
            coeffs[k] += w * c
    return coeffs


def _integer_roots(coeffs: list[Fraction]) -> list[int]:
    """All integer roots (with multiplicity ignored) of a rational poly."""
    # clear denominators
    denom = 1
    for c in coeffs:
        denom = denom * c.denominator // math.gcd(denom, c.denominator)
    ic = [int(c * denom) for c in coeffs]
    while ic and ic[-1] == 0:
        ic.pop()
    if not ic:
        return []
    roots = []
    shift = 0
    while ic[0] == 0:
        shift = 1
        ic = ic[1:]
    if shift:
        roots.append(0)
    if not ic or len(ic) == 1:
        return roots
    c0 = abs(ic[0])
    cands = set()
    for f in range(1, int(math.isqrt(c0)) + 1):
        if c0 % f == 0:
            cands.update((f, -f, c0 // f, -(c0 // f)))
    for r in sorted(cands):
        if sum(c * r**k for k, c in enumerate(ic)) == 0:
            roots.append(r)
    return sorted(roots)


def _restrict(op, basis):
    """Matrix of the operator on span(basis) in that basis (rows act right)."""
    imgs = mat_mul([[Fraction(x) for x in row] for row in basis],
                   [[Fraction(x) for x in r] for r in op])
    # solve img = C * basis for C
    bt = [[Fraction(x) for x in row] for row in basis]
    # least-structure solve: basis has full row rank; use pseudo-solve via
    # augmenting to square with independent completion is overkill; instead
    # solve the linear system row by row with Gaussian elimination.
    rows = len(bt)
    cols = len(bt[0])
    out = []
    for img in imgs:
        # solve y * basis = img
        a = [[bt[i][j] for j in range(cols)] for i in range(rows)]
        aug = [list(col) + [img[j]] for j, col in enumerate(zip(*a))]
        # aug is cols x (rows+1): solve basis^T y^T = img^T
        y = _solve_exact(aug, rows)
        if y is None:
            raise NotStable("operator does not preserve the subspace")
        out.append(tuple(y))
    return tuple(out)


def _solve_exact(aug, nvars):
    """Solve an overdetermined exact linear system in row echelon fashion.

    aug has rows [a_1 ... a_nvars | b]; returns solution list or None.
    """
    rows = [list(r) for r in aug]
    m = len(rows)
    piv_cols = []
    r = 0
    for c in range(nvars):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / Fraction(rows[r][c])
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    # consistency
    for i in range(r, m):
        if rows[i][nvars] != 0:
            return None
    sol = [Fraction(0)] * nvars
    for i, c in enumerate(piv_cols):
        sol[c] = rows[i][nvars]
    return sol


def _nullspace(m):
    """Basis of the right nullspace {v : M v = 0} of a rational matrix."""
    if not m:
        return []
    rows = [list(map(Fraction, r)) for r in m]
    ncols = len(rows[0])
    r = 0
    piv_cols = []
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in piv_cols]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


@dataclass(frozen=True)
class Eigensystem:
    """Integer eigenvalue vector (one entry per operator) on a subspace."""

    values: tuple[int, ...]
    dim: int


@dataclass(frozen=True)
class CongruenceSearch:
    side1: tuple[Eigensystem, ...]
    side2: tuple[Eigensystem, ...]
    extension_needed1: int  # total dimension not split by integer eigenvalues
    extension_needed2: int
    pairs: tuple[tuple[Eigensystem, Eigensystem], ...]
    module: CongruenceModule


def _split_eigensystems(ops_restricted, dim):
    """Common integer eigensystems of commuting rational matrices.

    Returns (systems, extension_dim) where extension_dim counts dimensions
    lost to eigenvalues outside the rational integers.
    """
    spaces = [([tuple(Fraction(int(i == j)) for j in range(dim))
                for i in range(dim)], ())]
    ext_dim = 0
    for op in ops_restricted:
        new_spaces = []
        for basis, vals in spaces:
            sub = _restrict(op, basis)
            roots = _integer_roots(_charpoly(sub))
            covered = 0
            for lam in roots:
                shifted = [[sub[i][j] - (lam if i == j else 0)
                            for j in range(len(sub))] for i in range(len(sub))]
                # vectors are rows, so take the nullspace of the transpose
                ns = _nullspace(list(map(list, zip(*shifted))))
                if not ns:
                    continue
                eig_basis = mat_mul([list(v) for v in ns],
                                    [list(map(Fraction, row)) for row in basis])
                new_spaces.append(([tuple(r) for r in eig_basis], vals + (lam,)))
                covered += len(ns)
            ext_dim += len(basis) - covered
        spaces = new_spaces
    systems = tuple(Eigensystem(values=vals, dim=len(basis))
                    for basis, vals in spaces)
    return systems, ext_dim


def find_congruences(ops, lat: Lattice, s: Split, p: int) -> CongruenceSearch:
    """Congruent integer eigensystem pairs across a stable split, mod p.

    Each operator must preserve the lattice and both subspaces, and the
    operators must commute pairwise.  Eigensystems whose eigenvalues are
    not rational integers are counted in extension_needed rather than
    enumerated.
    """
    ops = [_as_matrix(op) for op in ops]
    n = lat.ambient_dim
    for a in ops:
        for b in ops:
            if mat_mul(a, b) != mat_mul(b, a):
                raise NotCommuting("operators do not commute")
    for op in ops:
        for row in lat.basis:
            img = mat_mul((row,), op)[0]
            if not in_row_span(img, lat.basis):
                raise NotStable("operator does not preserve the lattice")

    def eigensystems(vbasis):
        restricted = [_restrict(op, vbasis) for op in ops]
        return _split_eigensystems(restricted, len(vbasis))

    side1, ext1 = eigensystems(s.v1_basis)
    side2, ext2 = eigensystems(s.v2_basis)
    pairs = []
    for e1 in side1:
        for e2 in side2:
            if all((a - b) % p == 0 for a, b in zip(e1.values, e2.values)):
                pairs.append((e1, e2))
    module = congruence_module(lat, s, p)
    return CongruenceSearch(side1, side2, ext1, ext2, tuple(pairs), module)


def localized_module_nonzero(ops, lat: Lattice, s: Split, p: int,
                             theta: tuple[int, ...]) -> bool:
    """Whether the congruence module has a nonzero generalized theta-eigenspace
    mod p for the induced operator action (desk-scale oracle for tests)."""
    pieces = split_lattice(lat, s)
    # present L^1/L_1 with the induced action: work in V1 coordinates
    amb = pieces.l1_proj
    den_a = pieces.l1_proj_denom
    sub = pieces.l1
    den_s = pieces.l1_denom
    d1 = s.dim1
    # operator on V1 in the basis of L^1
    ops_v1 = []
    for op in ops:
        r = _restrict(op, s.v1_basis)  # in V1-basis coordinates
        # change to the L^1 basis
        amb_q = [[Fraction(x, den_a) for x in row] for row in amb]
        m = mat_mul(mat_mul(amb_q, r), _mat_inverse(amb_q))
        ops_v1.append(m)
    # relation matrix of L1 in terms of the basis of L^1
    lcm = den_s * den_a // math.gcd(den_s, den_a)
    sub_i = [[x * (lcm // den_s) for x in row] for row in sub]
    amb_i = [[x * (lcm // den_a) for x in row] for row in amb]
    rel = mat_mul([[Fraction(x) for x in r] for r in sub_i], _mat_inverse(amb_i))
    rel = [[int(x) for x in row] for row in rel]
    # quotient Z^d1 / rel with operator action ops_v1 (integer in this basis)
    # mod p: vector space (Z^d1 / rel + pZ^d1); compute its F_p dimension and
    # the action, then test a common generalized eigenspace for theta.
    rows = [[x % p for x in row] for row in rel] + \
           [[p if i == j else 0 for j in range(d1)] for i in range(d1)]
    # basis of the quotient: F_p-cokernel of rows
    # cokernel = F_p^d1 / rowspan(rows mod p)
    span = _fp_row_space(rows, p)
    quot_proj, quot_dim = _fp_cokernel_projection(span, d1, p)
    if quot_dim == 0:
        return False
    # induced operators on the quotient
    mats = []
    for op in ops_v1:
        opm = [[int(Fraction(x)) % p for x in row] for row in op]
        mats.append(_fp_quotient_operator(opm, quot_proj, span, d1, p))
    # intersect generalized eigenspaces
    space = [[1 if i == j else 0 for j in range(quot_dim)] for i in range(quot_dim)]
    for m, lam in zip(mats, theta):
        shifted = [[(m[i][j] - (lam % p if i == j else 0)) % p
                    for j in range(quot_dim)] for i in range(quot_dim)]
        power = shifted
        for _ in range(quot_dim - 1):
            power = _fp_matmul(power, shifted, p)
        ker = _fp_nullspace(power, p)
        if not ker:
            return False
        # restrict the ambient space to this kernel: intersect
        space = _fp_intersect(space, ker, p)
        if not space:
            return False
    return True


# --- tiny F_p linear algebra used by the localized-module oracle -----------


def _fp_matmul(a, b, p):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) % p for col in bt] for row in a]


def _fp_row_space(rows, p):
    m = [[x % p for x in row] for row in rows]
    ncols = len(m[0]) if m else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] % p != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        r += 1
    return m[:r]


def _fp_cokernel_projection(span, n, p):
    """Projection data for F_p^n / rowspan: free coordinates of the quotient."""
    piv_cols = []
    for row in span:
        piv_cols.append(next(c for c in range(n) if row[c] != 0))
    free = [c for c in range(n) if c not in piv_cols]
    return (piv_cols, free), len(free)


def _fp_reduce(vec, span, p):
    v = [x % p for x in vec]
    for row in span:
        c = next(cc for cc in range(len(row)) if row[cc] != 0)
        if v[c]:
            f = v[c]
            v = [(x - f * y) % p for x, y in zip(v, row)]
    return v


def _fp_quotient_operator(opm, proj, span, n, p):
    piv_cols, free = proj
    out = []
    for c in free:
        e = [0] * n
        e[c] = 1
        img = [sum(e[i] * opm[i][j] for i in range(n)) % p for j in range(n)]
        img = _fp_reduce(img, span, p)
        out.append([img[f] for f in free])
    return out


def _fp_nullspace(m, p):
    n = len(m)
    if n == 0:
        return []
    # vectors are rows: solve v * m = 0  <=> m^T v^T = 0
    mt = [[m[i][j] for i in range(n)] for j in range(n)]
    rows = [list(r) for r in mt]
    r = 0
    piv_cols = []
    for c in range(n):
        piv = next((i for i in range(r, n) if rows[i][c] % p != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(n) if c not in piv_cols]
    basis = []
    for fc in free:
        v = [0] * n
        v[fc] = 1
        for i, pc in enumerate(piv_cols):
            v[pc] = (-rows[i][fc]) % p
        basis.append(v)
    return basis


def _fp_intersect(a_rows, b_rows, p):
    """Intersection of two F_p row spaces (Zassenhaus-style via kernels)."""
    if not a_rows or not b_rows:
        return []
    n = len(a_rows[0])
    # x in span(a) ∩ span(b): x = u*A = v*B; solve [A^T | -B^T] kernel
    stacked = a_rows + [[-x % p for x in row] for row in b_rows]
    mt = [[stacked[i][j] for i in range(len(stacked))] for j in range(n)]
    ker = _fp_nullspace_rect(mt, p, len(stacked))
    out = []
    for w in ker:
        u = w[: len(a_rows)]
        x = [sum(u[i] * a_rows[i][j] for i in range(len(a_rows))) % p
             for j in range(n)]
        if any(x):
            out.append(x)
    return _fp_row_space(out, p)


def _fp_nullspace_rect(m, p, nvars):
    """Kernel vectors v (length nvars) with m @ v = 0, m is rows x nvars."""
    rows = [[x % p for x in r] for r in m]
    nrows = len(rows)
    r = 0
    piv_cols = []
    for c in range(nvars):
        piv = next((i for i in range(r, nrows) if rows[i][c] % p != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(nvars) if c not in piv_cols]
    basis = []
    for fc in free:
        v = [0] * nvars
        v[fc] = 1
        for i, pc in enumerate(piv_cols):
            v[pc] = (-rows[i][fc]) % p
        basis.append(v)
    return basis
