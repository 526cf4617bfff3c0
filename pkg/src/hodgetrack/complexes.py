"""Filtered simplicial complexes, sublevel slices, and boundary operators.

Simplices are tuples of ascending vertex ids. Within each dimension the
simplex list is kept in lexicographic order and a parallel float array holds
the filtration values, so a sublevel slice is just an index array per
dimension. All orientation bookkeeping uses the ascending-vertex convention,
which makes inclusion maps between slices sign-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    ClosureError,
    DimensionError,
    InputError,
    LineageError,
    MonotonicityError,
    ParseError,
)

Simplex = tuple[int, ...]


class FilteredComplex:
    """A finite simplicial complex with one filtration value per simplex.

    Invariants enforced at construction: closed under faces, filtration value
    of a simplex is at least the value of every face, vertices carry value 0,
    simplex lists are duplicate-free and lexicographically sorted.
    """

    def __init__(
        self,
        simplices_by_dim: dict[int, list[Simplex]],
        values_by_dim: dict[int, np.ndarray],
        points: np.ndarray | None = None,
        validate: bool = True,
    ):
        self._simplices = simplices_by_dim
        self._values = values_by_dim
        self.points = points
        if validate:
            self._validate()

    # -- construction ------------------------------------------------------

    @classmethod
    def from_simplices(
        cls,
        simplices: Iterable[Sequence[int]],
        values: Iterable[float],
        points: np.ndarray | None = None,
    ) -> "FilteredComplex":
        """Build a complex from parallel simplex/value sequences.

        Vertices may be omitted; any vertex referenced by a higher simplex is
        implied with filtration value 0.
        """
        by_dim: dict[int, list[Simplex]] = {}
        val_by_dim: dict[int, list[float]] = {}
        seen: dict[Simplex, float] = {}
        for raw, v in zip(simplices, values):
            simplex = tuple(int(x) for x in raw)
            if len(simplex) == 0:
                raise ParseError("empty simplex in input")
            if any(simplex[i] >= simplex[i + 1] for i in range(len(simplex) - 1)):
                raise ParseError(
                    f"simplex {list(simplex)} is not a strictly ascending vertex list"
                )
            if simplex in seen:
                raise InputError(f"duplicate simplex {list(simplex)} in input")
            seen[simplex] = float(v)
            by_dim.setdefault(len(simplex) - 1, []).append(simplex)
            val_by_dim.setdefault(len(simplex) - 1, []).append(float(v))

        # Imply any vertex mentioned only as part of a higher simplex.
        implied = set()
        for k, simps in by_dim.items():
            if k == 0:
                continue
            for s in simps:
                implied.update(s)
        present = {s[0] for s in by_dim.get(0, [])}
        for vid in sorted(implied - present):
            by_dim.setdefault(0, []).append((vid,))
            val_by_dim.setdefault(0, []).append(0.0)

        out_s: dict[int, list[Simplex]] = {}
        out_v: dict[int, np.ndarray] = {}
        for k in sorted(by_dim):
            order = sorted(range(len(by_dim[k])), key=lambda i: by_dim[k][i])
            out_s[k] = [by_dim[k][i] for i in order]
            out_v[k] = np.asarray([val_by_dim[k][i] for i in order], dtype=float)
        return cls(out_s, out_v, points=points, validate=True)

    def _validate(self) -> None:
        for k in self._simplices:
            simps = self._simplices[k]
            vals = self._values[k]
            if len(simps) != len(vals):
                raise InputError(f"dimension {k}: {len(simps)} simplices but {len(vals)} values")
            for i in range(len(simps) - 1):
                if simps[i] >= simps[i + 1]:
                    raise InputError(f"dimension {k}: simplex list not sorted/duplicate-free")
        if 0 in self._values and len(self._values[0]) and np.any(self._values[0] != 0.0):
            bad = int(np.argmax(self._values[0] != 0.0))
            raise MonotonicityError(
                f"vertex {self._simplices[0][bad][0]} carries nonzero filtration value "
                f"{self._values[0][bad]}"
            )
        lookup = {
            s: self._values[k][i]
            for k in self._simplices
            for i, s in enumerate(self._simplices[k])
        }
        for k in sorted(self._simplices):
            if k == 0:
                continue
            for i, s in enumerate(self._simplices[k]):
                fv = self._values[k][i]
                for j in range(len(s)):
                    face = s[:j] + s[j + 1 :]
                    if face not in lookup:
                        raise ClosureError(
                            f"simplex {list(s)} present but its face {list(face)} is missing"
                        )
                    if lookup[face] > fv:
                        raise MonotonicityError(
                            f"simplex {list(s)} has value {fv} but its face "
                            f"{list(face)} has larger value {lookup[face]}"
                        )

    # -- queries -----------------------------------------------------------

    @property
    def dim(self) -> int:
        """Largest simplex dimension present."""
        return max(self._simplices) if self._simplices else -1

    def dims(self) -> list[int]:
        return sorted(self._simplices)

    def simplices(self, k: int) -> list[Simplex]:
        return self._simplices.get(k, [])

    def values(self, k: int) -> np.ndarray:
        return self._values.get(k, np.zeros(0))

    def n_simplices(self, k: int) -> int:
        return len(self._simplices.get(k, ()))

    @property
    def max_value(self) -> float:
        vals = [v.max() for v in self._values.values() if len(v)]
        return float(max(vals)) if vals else 0.0

    def distinct_values(self) -> np.ndarray:
        """All distinct filtration values, ascending."""
        if not self._values:
            return np.zeros(0)
        return np.unique(np.concatenate([v for v in self._values.values()]))

    def sublevel(self, t: float) -> "ComplexSlice":
        return sublevel(self, t)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        simplices = []
        values = []
        for k in sorted(self._simplices):
            for s, v in zip(self._simplices[k], self._values[k]):
                simplices.append(list(s))
                values.append(float(v))
        out = {"simplices": simplices, "values": values}
        if self.points is not None:
            out["points"] = [[float(c) for c in row] for row in self.points]
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, FilteredComplex):
            return NotImplemented
        if self.dims() != other.dims():
            return False
        return all(
            self._simplices[k] == other._simplices[k]
            and np.array_equal(self._values[k], other._values[k])
            for k in self._simplices
        )


def sublevel(fc: FilteredComplex, t: float) -> "ComplexSlice":
    """All simplices with filtration value <= t, as a slice of the parent.

    Face-closure of the slice is inherited from filtration monotonicity.
    """
    t = float(t)
    if not np.isfinite(t):
        raise InputError(f"threshold must be finite, got {t}")
    indices = {
        k: np.flatnonzero(fc.values(k) <= t) for k in fc.dims()
    }
    return ComplexSlice(parent=fc, t=t, indices=indices)


@dataclass
class ComplexSlice:
    """A sublevel set of a parent complex, stored as per-dimension index
    arrays into the parent's simplex lists (parent order preserved)."""

    parent: FilteredComplex
    t: float
    indices: dict[int, np.ndarray]
    _pos: dict[int, dict[Simplex, int]] = field(default_factory=dict, repr=False)

    def n_simplices(self, k: int) -> int:
        return len(self.indices.get(k, ()))

    def simplices(self, k: int) -> list[Simplex]:
        par = self.parent.simplices(k)
        return [par[i] for i in self.indices.get(k, ())]

    def values(self, k: int) -> np.ndarray:
        return self.parent.values(k)[self.indices.get(k, np.zeros(0, dtype=int))]

    def position(self, k: int, simplex: Simplex) -> int:
        """Local index of a simplex within this slice's dimension-k list."""
        if k not in self._pos:
            self._pos[k] = {s: i for i, s in enumerate(self.simplices(k))}
        return self._pos[k][simplex]

    def boundary_matrix(self, k: int) -> "SparseSignMatrix":
        return boundary_matrix(self, k)


@dataclass(frozen=True)
class SparseSignMatrix:
    """Signed incidence matrix in coordinate form, entries sorted by column
    then row. Values are exactly +1/-1; arithmetic stays in integers."""

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    signs: np.ndarray

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.int64)
        out[self.rows, self.cols] = self.signs
        return out

    def to_csc(self) -> sp.csc_matrix:
        return sp.csc_matrix(
            (self.signs.astype(np.int64), (self.rows, self.cols)),
            shape=(self.n_rows, self.n_cols),
        )

    @property
    def nnz(self) -> int:
        return len(self.signs)

    def write_csv(self, path) -> None:
        """Coordinate triplets as row,col,sign with a header line."""
        lines = ["row,col,sign"]
        for r, c, s in zip(self.rows, self.cols, self.signs):
            lines.append(f"{int(r)},{int(c)},{int(s)}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def boundary_matrix(sl: ComplexSlice, k: int) -> SparseSignMatrix:
    """Boundary operator from dimension-k chains to (k-1)-chains.

    Column j holds the faces of the j-th k-simplex [v0 < ... < vk]; the face
    omitting v_i gets sign (-1)^i. k = 0 yields the empty matrix with zero
    rows, matching the convention that vertex boundaries vanish.
    """
    if k < 0 or k > max(sl.parent.dim, 0):
        raise DimensionError(
            f"boundary dimension {k} outside range 0..{max(sl.parent.dim, 0)}"
        )
    n_cols = sl.n_simplices(k)
    if k == 0:
        return SparseSignMatrix(
            n_rows=0,
            n_cols=n_cols,
            rows=np.zeros(0, dtype=np.int64),
            cols=np.zeros(0, dtype=np.int64),
            signs=np.zeros(0, dtype=np.int64),
        )
    n_rows = sl.n_simplices(k - 1)
    rows: list[int] = []
    cols: list[int] = []
    signs: list[int] = []
    for j, s in enumerate(sl.simplices(k)):
        entries = []
        for i in range(len(s)):
            face = s[:i] + s[i + 1 :]
            try:
                r = sl.position(k - 1, face)
            except KeyError:
                raise ClosureError(
                    f"simplex {list(s)} in slice but its face {list(face)} is not"
                ) from None
            entries.append((r, -1 if i % 2 else 1))
        entries.sort()
        for r, sgn in entries:
            rows.append(r)
            cols.append(j)
            signs.append(sgn)
    return SparseSignMatrix(
        n_rows=n_rows,
        n_cols=n_cols,
        rows=np.asarray(rows, dtype=np.int64),
        cols=np.asarray(cols, dtype=np.int64),
        signs=np.asarray(signs, dtype=np.int64),
    )


@dataclass(frozen=True)
class IndexMap:
    """Index translation for dimension-k simplices from a smaller slice into
    a larger one; realizes the inclusion by zero padding."""

    k: int
    src_size: int
    dst_size: int
    idx: np.ndarray

    def extend(self, v: np.ndarray) -> np.ndarray:
        """Zero-pad a chain on the source slice to the destination slice."""
        v = np.asarray(v)
        if v.shape[0] != self.src_size:
            raise DimensionError(
                f"vector of length {v.shape[0]} does not match source size {self.src_size}"
            )
        out = np.zeros((self.dst_size,) + v.shape[1:], dtype=float)
        out[self.idx] = v
        return out

    def compose(self, outer: "IndexMap") -> "IndexMap":
        """outer after self: source of self into destination of outer."""
        if self.dst_size != outer.src_size or self.k != outer.k:
            raise LineageError("index maps do not compose")
        return IndexMap(
            k=self.k,
            src_size=self.src_size,
            dst_size=outer.dst_size,
            idx=outer.idx[self.idx],
        )


def inclusion_map(small: ComplexSlice, large: ComplexSlice, k: int) -> IndexMap:
    """Positions of the smaller slice's k-simplices inside the larger slice.

    Both slices must come from the same parent complex with t <= t'; the map
    is strictly increasing because both slices preserve parent order.
    """
    if small.parent is not large.parent:
        raise LineageError("slices do not share a parent complex")
    if small.t > large.t:
        raise LineageError(
            f"inclusion requires source threshold <= destination ({small.t} > {large.t})"
        )
    a = small.indices.get(k, np.zeros(0, dtype=int))
    b = large.indices.get(k, np.zeros(0, dtype=int))
    pos = np.searchsorted(b, a)
    if np.any(pos >= len(b)) or (len(a) and np.any(b[pos] != a)):
        raise LineageError("source slice contains simplices missing from destination")
    return IndexMap(k=k, src_size=len(a), dst_size=len(b), idx=pos.astype(np.int64))


# -- JSON import/export ----------------------------------------------------


def write_complex_json(fc: FilteredComplex, path) -> None:
    with open(path, "w") as fh:
        json.dump(fc.to_json_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_complex_json(path) -> FilteredComplex:
    """Parse a complex from JSON; validates closure and monotonicity."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror or e}") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(data, dict) or "simplices" not in data or "values" not in data:
        raise ParseError(f"{path}: expected an object with 'simplices' and 'values'")
    simplices = data["simplices"]
    values = data["values"]
    if len(simplices) != len(values):
        raise ParseError(
            f"{path}: {len(simplices)} simplices but {len(values)} values"
        )
    points = None
    if data.get("points") is not None:
        points = np.asarray(data["points"], dtype=float)
        if points.ndim != 2:
            raise ParseError(f"{path}: 'points' must be a list of coordinate rows")
    return FilteredComplex.from_simplices(simplices, values, points=points)
