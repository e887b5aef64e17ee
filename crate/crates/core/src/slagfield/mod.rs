//! Sampled potentials `F` on a grid and the special Lagrangian graph of
//! `∇F`: stencil derivatives, the phase residual, and the pointwise
//! superharmonicity check for `ln *Ω`.

pub mod analysis;
pub mod field;
pub mod stencil;

pub use analysis::{
    analyze_derivatives, analyze_point, gradient_identity_residual, second_form_in_frame,
    slag_residual_stats, superharmonicity_report, surface_laplacian, FieldReport, PointAnalysis,
    PointReport, ResidualStats, Violation, ViolationKind,
};
pub use field::{
    load_field, load_field_file, parse_field_json, Builtin, FieldSource, GraphField, GridSpec,
    MAX_FIELD_DIM,
};
pub use stencil::{hessian_at, third_derivatives_at};
