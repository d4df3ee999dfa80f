//! Differential forms and the coframes, connections, curvatures and metrics
//! built from an equation.

pub mod fivedim;
pub mod forms;
pub mod frame;
pub mod pictures;
pub mod solution;

pub use fivedim::{five_coords, five_dim_coframe, five_dim_structure, five_dim_structure_at, mu_connection, FiveDimStructure, MuConnection};
pub use forms::{
    coords_of, exterior_d, interior, jet_coords, lie_derivative, wedge, Coords, Form, SymTensor2,
    VectorField,
};
pub use frame::{determinant, invert, structure_functions, Coframe, StructureFunctions};
pub use pictures::{
    conformal_metric, connection, coframe, cotton, curvature, omega0, plain_coframe, six_dim_metric,
    total_derivative_field, weyl_potential, Algebra, ConnectionMatrix, FormMatrix, MetricVariant,
    Picture,
};
pub use solution::{
    solution_coords, solution_residual, solution_space_metric, solution_space_potential,
    GeneralSolution,
};
