"""Spectral analysis of filtered simplicial complexes built from point clouds.

The pipeline: triangulate a 2D cloud, assign each simplex the scale at which
it enters the complex, then study the combinatorial Laplacians of the growing
complex. Eigenvectors are classified into harmonic, gradient, and curl types,
followed across scales by subspace similarity, and used for simplex-level
clustering and per-edge activity summaries.
"""

__version__ = "0.1.0"

from .analysis import (
    ClusterAssignment,
    HgcResult,
    hgc_values,
    hodge_spectral_clustering,
    kmeans,
    node_clustering,
)
from .complexes import (
    ComplexSlice,
    FilteredComplex,
    IndexMap,
    SparseSignMatrix,
    boundary_matrix,
    inclusion_map,
    read_complex_json,
    sublevel,
    write_complex_json,
)
from .errors import (
    ClassificationError,
    ClosureError,
    DegeneracyError,
    DimensionError,
    DuplicatePointError,
    HodgeTrackError,
    InfeasibleClusteringError,
    InputError,
    InsufficientSpectrumError,
    LineageError,
    MonotonicityError,
    ParseError,
    SolverError,
    UndefinedSimilarityError,
    UnsupportedProjectionError,
)
from .geometry import (
    PointCloud,
    Triangulation,
    circumradius,
    delaunay_2d,
    filtration_values,
    import_complex,
    load_point_cloud,
    save_point_cloud,
)
from .persistence import (
    FiltrationGrid,
    Matching,
    Trajectory,
    TrajectorySet,
    build_grid,
    export_diagram,
    pem,
    pes,
    track,
)
from .spectral import (
    HodgeOperators,
    TypedEigenpair,
    TypedSpectrum,
    classify,
    eigendecompose,
    harmonic_dimension,
    hodge_operators,
    hodge_project,
    spectrum_at,
    spectrum_of_slice,
)
from .synthetic import annulus, four_disks, generate, two_clusters

__all__ = [
    "__version__",
    "ClusterAssignment",
    "HgcResult",
    "hgc_values",
    "hodge_spectral_clustering",
    "kmeans",
    "node_clustering",
    "ComplexSlice",
    "FilteredComplex",
    "IndexMap",
    "SparseSignMatrix",
    "boundary_matrix",
    "inclusion_map",
    "read_complex_json",
    "sublevel",
    "write_complex_json",
    "ClassificationError",
    "ClosureError",
    "DegeneracyError",
    "DimensionError",
    "DuplicatePointError",
    "HodgeTrackError",
    "InfeasibleClusteringError",
    "InputError",
    "InsufficientSpectrumError",
    "LineageError",
    "MonotonicityError",
    "ParseError",
    "SolverError",
    "UndefinedSimilarityError",
    "UnsupportedProjectionError",
    "PointCloud",
    "Triangulation",
    "circumradius",
    "delaunay_2d",
    "filtration_values",
    "import_complex",
    "load_point_cloud",
    "save_point_cloud",
    "FiltrationGrid",
    "Matching",
    "Trajectory",
    "TrajectorySet",
    "build_grid",
    "export_diagram",
    "pem",
    "pes",
    "track",
    "HodgeOperators",
    "TypedEigenpair",
    "TypedSpectrum",
    "classify",
    "eigendecompose",
    "harmonic_dimension",
    "hodge_operators",
    "hodge_project",
    "spectrum_at",
    "spectrum_of_slice",
    "annulus",
    "four_disks",
    "generate",
    "two_clusters",
]
