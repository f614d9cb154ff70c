"""Integer cellular chain complexes and their homology.

A complex stores named cells per degree and one integer boundary matrix
per positive degree (rows = cells one degree down, columns = cells of the
degree).  d(d) = 0 is checked at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import StructuralError
from .snf import smith_normal_form


def _zero_matrix(nrows, ncols):
    return [[0] * ncols for _ in range(nrows)]


def _matmul(a, b):
    if not a or not b:
        return []
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = _zero_matrix(n, m)
    for i in range(n):
        row = a[i]
        for t in range(k):
            v = row[t]
            if v:
                bt = b[t]
                oi = out[i]
                for j in range(m):
                    if bt[j]:
                        oi[j] += v * bt[j]
    return out


class ChainComplex:
    """cells: degree -> tuple of cell names; boundaries: degree -> matrix."""

    def __init__(self, cells, boundaries):
        self.cells = {d: tuple(names) for d, names in cells.items() if names}
        self.boundaries = {}
        top = max(self.cells, default=0)
        for d in range(1, top + 1):
            nrows = len(self.cells.get(d - 1, ()))
            ncols = len(self.cells.get(d, ()))
            mat = boundaries.get(d)
            if mat is None:
                mat = _zero_matrix(nrows, ncols)
            if len(mat) != nrows or any(len(r) != ncols for r in mat):
                raise StructuralError(
                    f"boundary matrix in degree {d} has shape "
                    f"{len(mat)}x{len(mat[0]) if mat else 0}, expected {nrows}x{ncols}"
                )
            self.boundaries[d] = [list(r) for r in mat]
        self._check_dd_zero()

    @property
    def top_degree(self) -> int:
        return max(self.cells, default=0)

    def cell_count(self, d) -> int:
        return len(self.cells.get(d, ()))

    def boundary(self, d):
        mat = self.boundaries.get(d)
        if mat is None:
            return _zero_matrix(self.cell_count(d - 1), self.cell_count(d))
        return mat

    def _check_dd_zero(self):
        for d in range(2, self.top_degree + 1):
            prod = _matmul(self.boundary(d - 1), self.boundary(d))
            if any(any(v for v in row) for row in prod):
                raise StructuralError(f"boundary of boundary is nonzero in degree {d}")

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(names) for d, names in self.cells.items())


@dataclass(frozen=True)
class HomologyProfile:
    """(degree, free rank, invariant factors > 1) per degree 0..top."""

    entries: tuple[tuple[int, int, tuple[int, ...]], ...]

    def rank(self, degree) -> int:
        for d, r, _ in self.entries:
            if d == degree:
                return r
        return 0

    def torsion(self, degree) -> tuple[int, ...]:
        for d, _, t in self.entries:
            if d == degree:
                return t
        return ()

    @property
    def has_torsion(self) -> bool:
        return any(t for _, _, t in self.entries)

    def to_json(self):
        return [
            {"degree": d, "rank": r, "torsion": list(t)} for d, r, t in self.entries
        ]

    def nonzero(self):
        return [(d, r) for d, r, _ in self.entries if r]


def homology(complex: ChainComplex) -> HomologyProfile:
    """Integer homology via Smith normal form, degree by degree."""
    entries = []
    snf_cache: dict[int, tuple[tuple[int, ...], int]] = {}

    def snf_of(d):
        if d not in snf_cache:
            snf_cache[d] = smith_normal_form(complex.boundary(d))
        return snf_cache[d]

    for d in range(complex.top_degree + 1):
        n = complex.cell_count(d)
        rank_d = snf_of(d)[1] if d >= 1 and n else 0
        if d + 1 <= complex.top_degree and complex.cell_count(d + 1):
            factors_up, rank_up = snf_of(d + 1)
        else:
            factors_up, rank_up = (), 0
        free = n - rank_d - rank_up
        torsion = tuple(f for f in factors_up if f > 1)
        entries.append((d, free, torsion))
    return HomologyProfile(tuple(entries))


def sphere_complex(n: int) -> ChainComplex:
    """Minimal CW model of S^n (for n = 0: two points)."""
    if n == 0:
        return ChainComplex({0: ("p", "q")}, {})
    cells = {0: ("p",), n: ("top",)}
    return ChainComplex(cells, {})


def wedge_of_spheres_complex(n: int, k: int) -> ChainComplex:
    """Minimal CW model of a wedge of k copies of S^n (n >= 1)."""
    if n < 1:
        raise StructuralError("wedge model needs n >= 1")
    cells = {0: ("p",)}
    if k:
        cells[n] = tuple(f"s{i}" for i in range(k))
    boundaries = {}
    if n == 1 and k:
        boundaries[1] = [[0] * k]
    return ChainComplex(cells, boundaries)
