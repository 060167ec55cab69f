//! Closed-form solvers for the two game families, each paired with a
//! generic-assembler route that reaches the same coefficients independently.

pub mod growth;
pub mod major;
pub mod pn;
pub mod zero_loss;
