"""Linear finite elements for the Poisson equation on simplicial meshes."""
from .assembly import (
    assemble,
    assemble_blockwise,
    assemble_standard_dense,
    assemble_triplets,
    local_stiffness_normals,
    local_stiffness_reference,
)
from .errors import FemError
from .mesh import (
    FaceList,
    Mesh,
    boundary_faces,
    fix_orientation,
    generate,
    new_mesh,
    read_mesh,
    set_boundary_flags,
    signed_measure,
    write_mesh,
)
from .problems import get_preset
from .quadrature import QuadRule, gauss_legendre_1d, integrate, rule, simpson_interval
from .solver import Solution, SolveOptions, cg_solve, dense_direct_solve, solve_poisson
from .sparse import CscMatrix, Triplets, accumulate, find, from_triplets, matvec, submatrix
from .system import (
    PoissonProblem,
    apply_dirichlet,
    apply_neumann,
    assemble_load,
    enforce_compatibility,
    error_norms,
    zero_average_shift,
)

__version__ = "0.1.0"
