import numpy as np
import pytest

from hodgetrack import FilteredComplex


def hollow_triangle() -> FilteredComplex:
    """Three vertices, three edges, no face. One loop."""
    return FilteredComplex.from_simplices(
        [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)],
        [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
    )


def filled_triangle() -> FilteredComplex:
    return FilteredComplex.from_simplices(
        [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)],
        [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
    )


def cycle_complex(n: int) -> FilteredComplex:
    simplices = [(i,) for i in range(n)]
    values = [0.0] * n
    for i in range(n):
        a, b = sorted((i, (i + 1) % n))
        simplices.append((a, b))
        values.append(1.0)
    return FilteredComplex.from_simplices(simplices, values)


def path_complex(n: int) -> FilteredComplex:
    simplices = [(i,) for i in range(n)] + [(i, i + 1) for i in range(n - 1)]
    values = [0.0] * n + [1.0] * (n - 1)
    return FilteredComplex.from_simplices(simplices, values)


def random_cloud(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(n, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
