use thiserror::Error;

/// Errors produced by the gl-core operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A grid or parameter value violates a precondition; names the offending field.
    #[error("invalid configuration: {field}: {message}")]
    Config { field: &'static str, message: String },

    /// Vortex centers too close to each other or to the boundary for the core size.
    #[error("vortex placement: {0}")]
    Placement(String),

    /// A descent produced a non-finite energy; the last finite iterate is attached.
    #[error("divergence after {iters} iterations (eps = {eps})")]
    Divergence {
        eps: f64,
        iters: usize,
        last: Box<crate::fields::ComplexField>,
    },

    /// A loop sample vanished, so no winding number exists.
    #[error("degree undefined: zero sample at loop index {0}")]
    DegreeUndefined(usize),

    /// A disc or ball does not fit inside the grid with the required margin.
    #[error("geometry: {0}")]
    Geometry(String),

    /// The multiset search has no feasible configuration under the given caps.
    #[error("infeasible search: {0}")]
    Infeasible(String),

    /// A ratio with vanishing denominator.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// Should not happen if grid construction is correct.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
