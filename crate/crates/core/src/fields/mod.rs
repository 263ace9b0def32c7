//! Charts, the scalar expression language, matrix- and group-valued
//! fields, and exterior calculus for Lie-algebra-valued forms.

mod chart;
mod expr;
mod form;
mod matrix_field;

pub use chart::{Chart, RANDOM_INTERIOR_POINTS};
pub use expr::{finite_difference, parse_expression, Expr, ExprMatrixData};
pub use form::{
    apply_linear_map, component_count, exterior_derivative, field_strength,
    maurer_cartan_pullback, pair_index, validate_group_field, wedge_bracket, LieValuedForm,
};
pub use matrix_field::{GroupValuedField, MatrixField};
