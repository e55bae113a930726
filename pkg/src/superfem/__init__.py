"""P1 finite elements for -div(A grad u) = f on A-equilateral parallelogram meshes."""

from .geometry import (
    Parallelogram,
    StructuredMesh,
    boundary_nodes,
    build_mesh,
    edge_lengths,
    is_uniform,
    shape_gradients,
    signed_area,
)
from .tensor import (
    SPDTensor2,
    certify_mesh,
    compatible_transforms,
    edge_energies,
    tensor_from_triangle,
    translate_triangle,
    triangle_from_tensor,
)
from .fem import apply_dirichlet, assemble, element_load, element_stiffness, solve, solve_problem
from .verification import (
    ConvergenceTable,
    ErrorReport,
    ManufacturedSolution,
    diff_norms,
    interpolate,
    observed_orders,
    run_study,
    source_term,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceTable",
    "ErrorReport",
    "ManufacturedSolution",
    "Parallelogram",
    "SPDTensor2",
    "StructuredMesh",
    "apply_dirichlet",
    "assemble",
    "boundary_nodes",
    "build_mesh",
    "certify_mesh",
    "compatible_transforms",
    "diff_norms",
    "edge_energies",
    "edge_lengths",
    "element_load",
    "element_stiffness",
    "interpolate",
    "is_uniform",
    "observed_orders",
    "run_study",
    "shape_gradients",
    "signed_area",
    "solve",
    "solve_problem",
    "source_term",
    "tensor_from_triangle",
    "translate_triangle",
    "triangle_from_tensor",
]
