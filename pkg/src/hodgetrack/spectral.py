"""Hodge Laplacians and typed eigendecompositions of complex slices.

For chains of dimension k the operator is L_k = B_k^T B_k + B_{k+1} B_{k+1}^T
with the signed boundary matrices assembled exactly in integers. Every
eigenvector is attributed to exactly one of the three orthogonal subspaces of
the chain space: the kernel of L_k (harmonic), the image of B_k^T (gradient),
or the image of B_{k+1} (curl). Attribution uses the boundary residuals
r_down = |B_k v| and r_up = |B_{k+1}^T v|; a unit eigenvector satisfies
lambda = r_down^2 + r_up^2, so exactly one residual vanishes for eigenvectors
that lie in a single subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complexes import ComplexSlice, FilteredComplex, SparseSignMatrix, boundary_matrix, sublevel
from .errors import ClassificationError, DimensionError, SolverError

HARMONIC = "harmonic"
GRADIENT = "gradient"
CURL = "curl"
KINDS = (HARMONIC, GRADIENT, CURL)

ZERO_TOL_COEFF = 1e-9  # harmonic cutoff, relative to max(1, lambda_max)
TYPE_TOL_COEFF = 1e-7  # residual cutoff for gradient/curl attribution
RESIDUAL_COEFF = 1e-8  # accepted eigenpair backward error
CLUSTER_COEFF = 1e-8  # eigenvalue gap below which eigenspaces are merged
SPLIT_SV_CUT = 1e-3  # singular value cut when splitting a degenerate eigenspace
DENSE_LIMIT = 3000  # largest operator handled by the dense solver


@dataclass
class HodgeOperators:
    """Boundary matrices and Laplacian pieces for one slice and dimension."""

    k: int
    n: int
    b_down: SparseSignMatrix
    b_up: SparseSignMatrix
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def l_down(self) -> sp.csr_matrix:
        if "l_down" not in self._cache:
            b = self.b_down.to_csc()
            self._cache["l_down"] = (b.T @ b).tocsr()
        return self._cache["l_down"]

    @property
    def l_up(self) -> sp.csr_matrix:
        if "l_up" not in self._cache:
            b = self.b_up.to_csc()
            self._cache["l_up"] = (b @ b.T).tocsr()
        return self._cache["l_up"]

    @property
    def laplacian(self) -> sp.csr_matrix:
        if "l" not in self._cache:
            self._cache["l"] = (self.l_down + self.l_up).tocsr()
        return self._cache["l"]

    def dense(self) -> np.ndarray:
        if "dense" not in self._cache:
            self._cache["dense"] = self.laplacian.toarray().astype(float)
        return self._cache["dense"]

    def lambda_max_bound(self) -> float:
        """Gershgorin upper bound for the largest eigenvalue."""
        if self.n == 0:
            return 0.0
        m = self.laplacian
        return float(np.max(np.abs(m).sum(axis=1)))


def hodge_operators(sl: ComplexSlice, k: int) -> HodgeOperators:
    """Assemble B_k and B_{k+1} for a slice and bundle the Laplacian pieces."""
    if k < 0 or k > max(sl.parent.dim, 0):
        raise DimensionError(
            f"operator dimension {k} outside range 0..{max(sl.parent.dim, 0)}"
        )
    b_down = boundary_matrix(sl, k)
    if k + 1 <= sl.parent.dim:
        b_up = boundary_matrix(sl, k + 1)
    else:
        b_up = SparseSignMatrix(
            n_rows=sl.n_simplices(k),
            n_cols=0,
            rows=np.zeros(0, dtype=np.int64),
            cols=np.zeros(0, dtype=np.int64),
            signs=np.zeros(0, dtype=np.int64),
        )
    return HodgeOperators(k=k, n=sl.n_simplices(k), b_down=b_down, b_up=b_up)


def _cluster_closure(vals: np.ndarray, m: int, tol: float) -> int:
    """Smallest cut index >= m that does not slice through an eigenvalue
    cluster (consecutive values within tol); len(vals) when none is found."""
    j = m
    while j < len(vals) and vals[j] - vals[j - 1] <= tol:
        j += 1
    return j


def eigendecompose(ops: HodgeOperators, m: int | None = None):
    """Smallest eigenpairs of the Laplacian, ascending.

    Returns (values, vectors, lambda_max). At least m pairs come back, but a
    budget falling inside a near-degenerate eigenvalue cluster is widened to
    the end of that cluster: a truncated cluster spans no invariant subspace
    and could not be attributed to the Hodge subspaces. Dense solves are used
    up to DENSE_LIMIT rows and compute the full spectrum, so lambda_max is
    exact there; the iterative path estimates it separately. Every returned
    pair is checked against the backward-error bound |Lv - lambda v| <=
    1e-8 * max(1, lambda_max).
    """
    n = ops.n
    if n == 0:
        return np.zeros(0), np.zeros((0, 0)), 0.0
    m_eff = n if m is None else min(int(m), n)
    if m_eff <= 0:
        raise SolverError(f"requested {m} eigenpairs")

    if n <= DENSE_LIMIT:
        try:
            vals, vecs = scipy.linalg.eigh(ops.dense())
        except scipy.linalg.LinAlgError as e:
            raise SolverError(f"dense eigensolver failed: {e}") from None
        lam_max = float(vals[-1])
        cut = _cluster_closure(vals, m_eff, CLUSTER_COEFF * max(1.0, lam_max))
        vals = vals[:cut]
        vecs = vecs[:, :cut]
    else:
        if m_eff >= n:
            raise SolverError(
                f"iterative path cannot return all {n} eigenpairs; "
                f"request a budget below the chain dimension"
            )
        mat = ops.laplacian.astype(float)
        v0 = np.full(n, 1.0 / np.sqrt(n))
        try:
            top = spla.eigsh(mat, k=1, which="LA", v0=v0, tol=1e-9)[0]
        except spla.ArpackNoConvergence as e:
            raise SolverError(f"iterative eigensolver did not converge: {e}") from None
        lam_max = float(top[0])
        tol_cluster = CLUSTER_COEFF * max(1.0, lam_max)
        sigma = -1e-3 * max(1.0, lam_max)
        k = m_eff
        while True:
            k_try = min(k + 8, n - 1)
            try:
                vals, vecs = spla.eigsh(mat, k=k_try, sigma=sigma, which="LM", v0=v0)
            except spla.ArpackNoConvergence as e:
                raise SolverError(
                    f"iterative eigensolver did not converge: {e}"
                ) from None
            order = np.argsort(vals)
            vals = vals[order]
            vecs = vecs[:, order]
            cut = _cluster_closure(vals, m_eff, tol_cluster)
            if cut < len(vals) or k_try == n - 1:
                vals = vals[:cut]
                vecs = vecs[:, :cut]
                break
            k = k_try

    scale = max(1.0, lam_max)
    resid = ops.laplacian @ vecs - vecs * vals[None, :]
    worst = float(np.max(np.linalg.norm(resid, axis=0))) if m_eff else 0.0
    if worst > RESIDUAL_COEFF * scale:
        raise SolverError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_COEFF * scale:.3e}"
        )
    if np.any(vals < -ZERO_TOL_COEFF * scale):
        raise SolverError(f"negative eigenvalue {vals.min():.3e} from a PSD operator")
    vals = np.maximum(vals, 0.0)
    return vals, vecs, lam_max


def residuals(v: np.ndarray, ops: HodgeOperators) -> tuple[float, float]:
    """(r_up, r_down) = (|B_{k+1}^T v|, |B_k v|)."""
    v = np.asarray(v, dtype=float)
    r_up = float(np.linalg.norm(ops.b_up.to_csc().T @ v)) if ops.b_up.n_cols else 0.0
    r_down = float(np.linalg.norm(ops.b_down.to_csc() @ v)) if ops.b_down.n_rows else 0.0
    return r_up, r_down


def classify(
    value: float,
    vector: np.ndarray,
    ops: HodgeOperators,
    lam_max: float | None = None,
) -> str:
    """Attribute one eigenpair to harmonic, gradient, or curl.

    Raises ClassificationError when both residuals are large, meaning the
    vector straddles subspaces; for a degenerate eigenspace the caller should
    first rotate the basis (see split_eigenspace).
    """
    scale = max(1.0, ops.lambda_max_bound() if lam_max is None else lam_max)
    tol_zero = ZERO_TOL_COEFF * scale
    tol_type = TYPE_TOL_COEFF * scale
    if value <= tol_zero:
        return HARMONIC
    r_up, r_down = residuals(vector, ops)
    if r_up <= tol_type and r_down > tol_type:
        return GRADIENT
    if r_down <= tol_type and r_up > tol_type:
        return CURL
    raise ClassificationError(
        f"eigenvector at lambda={value:.6e} has residuals r_up={r_up:.3e}, "
        f"r_down={r_down:.3e}; it does not lie in a single subspace"
    )


def hodge_project(v: np.ndarray, ops: HodgeOperators):
    """Orthogonal decomposition of a chain into (gradient, curl, harmonic).

    The gradient and curl parts are least-squares projections onto the images
    of B_k^T and B_{k+1}; the harmonic part is the remainder.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    cols = v[:, None] if single else v
    if cols.shape[0] != ops.n:
        raise DimensionError(f"vector length {cols.shape[0]} != chain dim {ops.n}")

    if ops.b_down.n_rows:
        bdt = ops.b_down.to_dense().T.astype(float)
        y, *_ = np.linalg.lstsq(bdt, cols, rcond=None)
        grad = bdt @ y
    else:
        grad = np.zeros_like(cols)
    if ops.b_up.n_cols:
        bu = ops.b_up.to_dense().astype(float)
        z, *_ = np.linalg.lstsq(bu, cols, rcond=None)
        curl = bu @ z
    else:
        curl = np.zeros_like(cols)
    harm = cols - grad - curl
    if single:
        return grad[:, 0], curl[:, 0], harm[:, 0]
    return grad, curl, harm


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip so the largest-magnitude entry is positive; first index on ties."""
    if len(v) == 0:
        return v
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


@dataclass
class TypedEigenpair:
    value: float
    vector: np.ndarray
    kind: str
    residual_up: float
    residual_down: float


@dataclass
class TypedSpectrum:
    """Classified eigenpairs of one slice/dimension, ascending eigenvalue."""

    k: int
    t: float
    pairs: list[TypedEigenpair]
    lam_max: float
    n_chain: int

    def __len__(self) -> int:
        return len(self.pairs)

    def values(self) -> np.ndarray:
        return np.asarray([p.value for p in self.pairs])

    def vectors(self) -> np.ndarray:
        if not self.pairs:
            return np.zeros((self.n_chain, 0))
        return np.column_stack([p.vector for p in self.pairs])

    def kinds(self) -> list[str]:
        return [p.kind for p in self.pairs]

    def counts(self) -> dict[str, int]:
        out = {kind: 0 for kind in KINDS}
        for p in self.pairs:
            out[p.kind] += 1
        return out

    def select(self, kind: str) -> list[TypedEigenpair]:
        return [p for p in self.pairs if p.kind == kind]

    def to_json_dict(self, include_vectors: bool = False) -> dict:
        pairs = []
        for p in self.pairs:
            rec = {
                "lambda": float(p.value),
                "type": p.kind,
                "residual_up": float(p.residual_up),
                "residual_down": float(p.residual_down),
            }
            if include_vectors:
                rec["vector"] = [float(x) for x in p.vector]
            pairs.append(rec)
        return {"t": float(self.t), "dim": int(self.k), "n_chain": int(self.n_chain), "pairs": pairs}


def split_eigenspace(vecs: np.ndarray, ops: HodgeOperators) -> tuple[np.ndarray, int, int]:
    """Rotate an orthonormal basis of a degenerate positive eigenspace so
    every column lies in a single subspace.

    A Laplacian eigenspace at lambda > 0 splits orthogonally into its
    gradient and curl intersections, so projecting the basis onto each image
    and reorthonormalizing recovers pure vectors. Returns (new_basis, n_grad,
    n_curl) with gradient columns first.
    """
    size = vecs.shape[1]
    grad, curl, _ = hodge_project(vecs, ops)
    parts = []
    dims = []
    for block in (grad, curl):
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        r = int(np.sum(s > SPLIT_SV_CUT))
        dims.append(r)
        parts.append(u[:, :r])
    if dims[0] + dims[1] != size:
        raise ClassificationError(
            f"degenerate eigenspace of dimension {size} split into "
            f"{dims[0]} gradient + {dims[1]} curl directions"
        )
    basis = np.column_stack([p for p in parts if p.shape[1]]) if size else vecs
    return basis, dims[0], dims[1]


def assign_types(vals: np.ndarray, vecs: np.ndarray, ops: HodgeOperators, lam_max: float) -> list[TypedEigenpair]:
    """Classify every eigenpair, rotating degenerate eigenspaces as needed."""
    scale = max(1.0, lam_max)
    tol_zero = ZERO_TOL_COEFF * scale
    tol_type = TYPE_TOL_COEFF * scale
    m = len(vals)
    if m == 0:
        return []

    if ops.b_up.n_cols:
        ru = np.linalg.norm(ops.b_up.to_csc().T @ vecs, axis=0)
    else:
        ru = np.zeros(m)
    if ops.b_down.n_rows:
        rd = np.linalg.norm(ops.b_down.to_csc() @ vecs, axis=0)
    else:
        rd = np.zeros(m)

    kinds: list[str | None] = []
    for i in range(m):
        if vals[i] <= tol_zero:
            kinds.append(HARMONIC)
        elif ru[i] <= tol_type and rd[i] > tol_type:
            kinds.append(GRADIENT)
        elif rd[i] <= tol_type and ru[i] > tol_type:
            kinds.append(CURL)
        else:
            kinds.append(None)

    if any(kind is None for kind in kinds):
        # Group positive eigenvalues into clusters separated by gaps larger
        # than the degeneracy tolerance, then rotate clusters with mixing.
        tol_cluster = CLUSTER_COEFF * scale
        clusters: list[list[int]] = []
        for i in range(m):
            if vals[i] <= tol_zero:
                continue
            if clusters and vals[i] - vals[clusters[-1][-1]] <= tol_cluster:
                clusters[-1].append(i)
            else:
                clusters.append([i])
        for cluster in clusters:
            if not any(kinds[i] is None for i in cluster):
                continue
            if len(cluster) == 1:
                i = cluster[0]
                raise ClassificationError(
                    f"eigenvector at lambda={vals[i]:.6e} has residuals "
                    f"r_up={ru[i]:.3e}, r_down={rd[i]:.3e} on a 1-dimensional "
                    f"eigenspace"
                )
            basis, n_grad, n_curl = split_eigenspace(vecs[:, cluster], ops)
            vecs[:, cluster] = basis
            for pos, i in enumerate(cluster):
                kinds[i] = GRADIENT if pos < n_grad else CURL
            if ops.b_up.n_cols:
                ru[cluster] = np.linalg.norm(ops.b_up.to_csc().T @ basis, axis=0)
            else:
                ru[cluster] = 0.0
            if ops.b_down.n_rows:
                rd[cluster] = np.linalg.norm(ops.b_down.to_csc() @ basis, axis=0)
            else:
                rd[cluster] = 0.0

    pairs = []
    for i in range(m):
        kind = kinds[i]
        if kind is None:
            raise ClassificationError(
                f"eigenvector at lambda={vals[i]:.6e} left unclassified"
            )
        v = canonical_sign(vecs[:, i].copy())
        pairs.append(
            TypedEigenpair(
                value=float(vals[i]),
                vector=v,
                kind=kind,
                residual_up=float(ru[i]),
                residual_down=float(rd[i]),
            )
        )
    return pairs


def rank_of(mat: SparseSignMatrix) -> int:
    """Numerical rank of a signed incidence matrix."""
    if mat.n_rows == 0 or mat.n_cols == 0:
        return 0
    return int(np.linalg.matrix_rank(mat.to_dense().astype(float)))


def harmonic_dimension(ops: HodgeOperators) -> int:
    """Kernel dimension of L_k by the rank identity |S_k| - rk B_k - rk B_{k+1}."""
    return ops.n - rank_of(ops.b_down) - rank_of(ops.b_up)


def spectrum_at(
    fc: FilteredComplex,
    t: float,
    k: int,
    m: int | None = None,
    validate: bool = True,
) -> TypedSpectrum:
    """Typed spectrum of the dimension-k Laplacian of the sublevel slice at t.

    With validate=True the harmonic count is cross-checked against the rank
    identity; a mismatch raises SolverError.
    """
    sl = sublevel(fc, t)
    return spectrum_of_slice(sl, k, m=m, validate=validate)


def spectrum_of_slice(
    sl: ComplexSlice,
    k: int,
    m: int | None = None,
    validate: bool = True,
) -> TypedSpectrum:
    ops = hodge_operators(sl, k)
    if ops.n == 0:
        return TypedSpectrum(k=k, t=sl.t, pairs=[], lam_max=0.0, n_chain=0)
    vals, vecs, lam_max = eigendecompose(ops, m=m)
    pairs = assign_types(vals, vecs, ops, lam_max)
    if m is not None and len(pairs) > m:
        # the solver widens a budget that lands inside an eigenvalue cluster;
        # rotation has made every vector pure, so cutting back is safe now
        pairs = pairs[:m]
    if validate:
        expected = harmonic_dimension(ops)
        observed = sum(1 for p in pairs if p.kind == HARMONIC)
        if observed != min(expected, len(pairs)):
            raise SolverError(
                f"harmonic count {observed} disagrees with rank identity "
                f"{expected} (m={len(pairs)}, n={ops.n})"
            )
    return TypedSpectrum(k=k, t=sl.t, pairs=pairs, lam_max=lam_max, n_chain=ops.n)
