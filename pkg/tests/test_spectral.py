import numpy as np
import pytest

import hodgetrack.spectral as spectral
from hodgetrack import (
    ClassificationError,
    FilteredComplex,
    SolverError,
    classify,
    eigendecompose,
    harmonic_dimension,
    hodge_operators,
    hodge_project,
    spectrum_at,
    spectrum_of_slice,
    sublevel,
)
from hodgetrack.spectral import canonical_sign, split_eigenspace

from conftest import cycle_complex, filled_triangle, hollow_triangle, path_complex
from oracles import cycle_spectrum, integer_rank


def ops_at(fc, t, k):
    return hodge_operators(sublevel(fc, t), k)


# -- operators ----------------------------------------------------------------


def test_graph_laplacian_of_path():
    ops = ops_at(path_complex(3), 1.0, 0)
    expected = np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
    assert np.array_equal(ops.laplacian.toarray(), expected)


def test_l1_of_hollow_triangle():
    ops = ops_at(hollow_triangle(), 1.0, 1)
    # B1^T B1 only; diagonal 2, off-diagonal signs from shared endpoints
    expected = np.array([[2.0, 1.0, -1.0], [1.0, 2.0, 1.0], [-1.0, 1.0, 2.0]])
    assert np.array_equal(ops.laplacian.toarray(), expected)


def test_filled_triangle_adds_curl_block():
    ops = ops_at(filled_triangle(), 1.0, 1)
    up = ops.l_up.toarray()
    b2 = np.array([[1.0], [-1.0], [1.0]])
    assert np.array_equal(up, b2 @ b2.T)
    assert np.array_equal(ops.laplacian.toarray(), 3.0 * np.eye(3))


def test_lambda_max_bound_dominates():
    ops = ops_at(cycle_complex(8), 1.0, 1)
    vals, _, lam_max = eigendecompose(ops)
    assert ops.lambda_max_bound() >= lam_max - 1e-12


# -- analytic spectra ----------------------------------------------------------


def test_hollow_triangle_spectrum():
    spec = spectrum_at(hollow_triangle(), 1.0, 1)
    np.testing.assert_allclose(spec.values(), [0.0, 3.0, 3.0], atol=1e-9)
    assert spec.kinds() == ["harmonic", "gradient", "gradient"]
    h = spec.pairs[0].vector
    target = np.array([1.0, -1.0, 1.0]) / np.sqrt(3)
    assert np.allclose(h, target, atol=1e-9) or np.allclose(h, -target, atol=1e-9)


def test_filled_triangle_spectrum():
    spec = spectrum_at(filled_triangle(), 1.0, 1)
    np.testing.assert_allclose(spec.values(), [3.0, 3.0, 3.0], atol=1e-9)
    assert spec.counts() == {"harmonic": 0, "gradient": 2, "curl": 1}
    curl = spec.select("curl")[0].vector
    target = np.array([1.0, -1.0, 1.0]) / np.sqrt(3)
    assert np.allclose(np.abs(curl), np.abs(target), atol=1e-9)


def test_cycle_spectrum_matches_formula():
    spec = spectrum_at(cycle_complex(8), 1.0, 1)
    np.testing.assert_allclose(spec.values(), cycle_spectrum(8), atol=1e-8)
    assert spec.counts()["harmonic"] == 1


def test_two_loops_two_harmonics():
    # two hollow triangles sharing one vertex
    simplices = [(i,) for i in range(5)]
    simplices += [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]
    values = [0.0] * 5 + [1.0] * 6
    fc = FilteredComplex.from_simplices(simplices, values)
    spec = spectrum_at(fc, 1.0, 1)
    assert spec.counts()["harmonic"] == 2


# -- classification -------------------------------------------------------------


def test_classify_pure_vectors():
    ops = ops_at(hollow_triangle(), 1.0, 1)
    harm = np.array([1.0, -1.0, 1.0]) / np.sqrt(3)
    assert classify(0.0, harm, ops) == "harmonic"
    grad = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)  # B1 applied to it is nonzero
    # eigenvector of L1 at 3: (1,1,0)/sqrt2? L1 @ (1,1,0) = (3,3,0) yes
    assert classify(3.0, grad, ops) == "gradient"


def test_classify_rejects_mixture():
    ops = ops_at(filled_triangle(), 1.0, 1)
    mix = np.array([1.0, 0.0, 0.0])  # equal parts gradient and curl at lambda 3
    with pytest.raises(ClassificationError):
        classify(3.0, mix, ops)


def test_curl_classified():
    ops = ops_at(filled_triangle(), 1.0, 1)
    curl = np.array([1.0, -1.0, 1.0]) / np.sqrt(3)
    assert classify(3.0, curl, ops) == "curl"


def test_split_degenerate_eigenspace():
    ops = ops_at(filled_triangle(), 1.0, 1)
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))  # random rotation of the lambda=3 space
    basis, n_grad, n_curl = split_eigenspace(q, ops)
    assert (n_grad, n_curl) == (2, 1)
    # columns orthonormal and pure
    assert np.allclose(basis.T @ basis, np.eye(3), atol=1e-9)
    for i in range(2):
        assert classify(3.0, basis[:, i], ops) == "gradient"
    assert classify(3.0, basis[:, 2], ops) == "curl"


def test_classification_total_on_random_complexes(rng):
    from hodgetrack import PointCloud, delaunay_2d, filtration_values

    for trial in range(5):
        pts = rng.uniform(-1, 1, size=(40, 2))
        fc = filtration_values(delaunay_2d(PointCloud(pts)))
        for t in np.quantile(fc.distinct_values(), [0.3, 0.6, 1.0]):
            spec = spectrum_at(fc, float(t), 1)  # validate=True checks ranks
            assert all(p.kind in ("harmonic", "gradient", "curl") for p in spec.pairs)


# -- Hodge projection -----------------------------------------------------------


def test_hodge_project_reconstructs(rng):
    ops = ops_at(cycle_complex(6), 1.0, 1)
    for _ in range(20):
        v = rng.normal(size=6)
        g, c, h = hodge_project(v, ops)
        assert np.linalg.norm(g + c + h - v) <= 1e-9
        assert abs(g @ c) <= 1e-9 and abs(g @ h) <= 1e-9 and abs(c @ h) <= 1e-9


def test_hodge_project_pure_parts():
    ops = ops_at(filled_triangle(), 1.0, 1)
    curl = np.array([1.0, -1.0, 1.0])
    g, c, h = hodge_project(curl, ops)
    assert np.linalg.norm(g) <= 1e-12 and np.linalg.norm(h) <= 1e-12
    assert np.allclose(c, curl, atol=1e-12)


def test_harmonic_dimension_matches_integer_oracle(rng):
    for _ in range(8):
        n = 7
        edges = sorted(
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.5
        )
        edge_set = set(edges)
        tris = sorted(
            (i, j, k)
            for i in range(n)
            for j in range(i + 1, n)
            for k in range(j + 1, n)
            if {(i, j), (i, k), (j, k)} <= edge_set
        )
        fc = FilteredComplex.from_simplices(
            [(i,) for i in range(n)] + edges + tris,
            [0.0] * n + [1.0] * (len(edges) + len(tris)),
        )
        ops = ops_at(fc, 1.0, 1)
        b1 = ops.b_down.to_dense()
        b2 = ops.b_up.to_dense()
        oracle = ops.n - integer_rank(b1) - integer_rank(b2)
        assert harmonic_dimension(ops) == oracle
        spec = spectrum_of_slice(sublevel(fc, 1.0), 1)
        assert spec.counts()["harmonic"] == oracle


# -- solver paths ----------------------------------------------------------------


def test_budget_limits_pairs():
    spec = spectrum_at(cycle_complex(10), 1.0, 1, m=4)
    assert len(spec) == 4
    full = spectrum_at(cycle_complex(10), 1.0, 1)
    np.testing.assert_allclose(spec.values(), full.values()[:4], atol=1e-10)


def test_empty_slice_spectrum():
    spec = spectrum_at(hollow_triangle(), 0.5, 1)
    assert len(spec) == 0 and spec.n_chain == 0


def test_iterative_path_matches_dense(monkeypatch):
    fc = cycle_complex(24)
    dense = spectrum_at(fc, 1.0, 1, m=6)
    monkeypatch.setattr(spectral, "DENSE_LIMIT", 4)
    sparse = spectrum_at(fc, 1.0, 1, m=6)
    np.testing.assert_allclose(sparse.values(), dense.values(), atol=1e-8)
    assert sparse.kinds() == dense.kinds()


def test_iterative_path_rejects_full_budget(monkeypatch):
    monkeypatch.setattr(spectral, "DENSE_LIMIT", 4)
    with pytest.raises(SolverError):
        spectrum_at(cycle_complex(12), 1.0, 1)


def test_budget_inside_repeated_eigenvalue():
    # many copies of one motif give eigenvalues with high multiplicity; a
    # budget landing inside such a cluster must not break classification
    parts = []
    for b in range(0, 24, 3):
        parts += [(b, b + 1), (b + 1, b + 2)]  # paths of two edges
    fc = FilteredComplex.from_simplices(
        [(i,) for i in range(24)] + sorted(parts),
        [0.0] * 24 + [1.0] * len(parts),
    )
    full = spectrum_at(fc, 1.0, 1)
    vals = full.values()
    # pick m so that vals[m-1] == vals[m] (inside a multiplicity block)
    m = next(i for i in range(1, len(vals)) if abs(vals[i] - vals[i - 1]) < 1e-12)
    spec = spectrum_at(fc, 1.0, 1, m=m)
    assert len(spec) == m
    np.testing.assert_allclose(spec.values(), vals[:m], atol=1e-10)


def test_budget_clipped_after_widening(monkeypatch):
    # the iterative path also widens to the cluster edge, then clips
    fc = cycle_complex(30)  # eigenvalues come in pairs, so m=3 lands mid pair
    dense = spectrum_at(fc, 1.0, 1, m=3)
    monkeypatch.setattr(spectral, "DENSE_LIMIT", 4)
    sparse = spectrum_at(fc, 1.0, 1, m=3)
    assert len(sparse) == 3 == len(dense)
    np.testing.assert_allclose(sparse.values(), dense.values(), atol=1e-8)


def test_negative_definite_rejected():
    ops = ops_at(path_complex(3), 1.0, 0)
    ops._cache["l"] = -ops.laplacian
    ops._cache.pop("dense", None)
    with pytest.raises(SolverError):
        eigendecompose(ops)


# -- canonical form ---------------------------------------------------------------


def test_canonical_sign_rules():
    assert canonical_sign(np.array([-2.0, 1.0])).tolist() == [2.0, -1.0]
    assert canonical_sign(np.array([2.0, -1.0])).tolist() == [2.0, -1.0]
    # tie on magnitude: first index wins
    assert canonical_sign(np.array([-1.0, 1.0])).tolist() == [1.0, -1.0]
    assert canonical_sign(np.zeros(0)).size == 0


def test_spectrum_vectors_sign_fixed():
    spec = spectrum_at(cycle_complex(8), 1.0, 1)
    for p in spec.pairs:
        i = int(np.argmax(np.abs(p.vector)))
        assert p.vector[i] > 0


def test_relabeling_preserves_values(rng):
    # same complex, vertices renamed by a permutation: identical eigenvalues
    n = 8
    fc = cycle_complex(n)
    perm = rng.permutation(n)
    simplices = [(int(perm[i]),) for i in range(n)]
    values = [0.0] * n
    for i in range(n):
        a, b = sorted((int(perm[i]), int(perm[(i + 1) % n])))
        simplices.append((a, b))
        values.append(1.0)
    fc2 = FilteredComplex.from_simplices(simplices, values)
    s1 = spectrum_at(fc, 1.0, 1)
    s2 = spectrum_at(fc2, 1.0, 1)
    np.testing.assert_allclose(s1.values(), s2.values(), atol=1e-9)


def test_json_dict_shape():
    spec = spectrum_at(filled_triangle(), 1.0, 1)
    d = spec.to_json_dict()
    assert d["dim"] == 1 and d["n_chain"] == 3 and len(d["pairs"]) == 3
    assert "vector" not in d["pairs"][0]
    d2 = spec.to_json_dict(include_vectors=True)
    assert len(d2["pairs"][0]["vector"]) == 3


def test_eigenvalue_equals_residual_identity(rng):
    # for a unit eigenvector, lambda = r_up^2 + r_down^2
    spec = spectrum_at(cycle_complex(9), 1.0, 1)
    for p in spec.pairs:
        assert abs(p.value - (p.residual_up**2 + p.residual_down**2)) < 1e-8
