use thiserror::Error;

pub type Result<T, E = CornerError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
#[non_exhaustive]
pub enum CornerError {
    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("permutation degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("non-simple polytope: vertex {vertex} lies on {facets} facets, expected {dim}")]
    NonSimplePolytope {
        vertex: usize,
        facets: usize,
        dim: usize,
    },

    #[error("malformed polytope: {0}")]
    MalformedPolytope(String),

    #[error("unknown face {0}")]
    UnknownFace(usize),

    #[error("interior has no closed-face complex")]
    InteriorClosedFace,

    #[error("face {0} has codimension 0; a boundary face is required")]
    NotBoundaryFace(usize),

    #[error(
        "fibration requires trivial normal bundle (face {0} has a nontrivial structure group)"
    )]
    NontrivialNormalBundle(usize),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("transition matrix is not permutation times positive diagonal: {0}")]
    NotPermutationDiagonal(String),

    #[error("nonpositive defining function value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("partition of unity fails to sum to one (deviation {deviation:e} at {location})")]
    Partition { deviation: f64, location: String },

    #[error("singular Jacobian (|det| = {det:e}) at {location}")]
    SingularJacobian { det: f64, location: String },

    #[error("local inverse did not converge at {location} (residual {residual:e})")]
    NoConvergence { location: String, residual: f64 },

    #[error("charts disagree on the zero section by {0:e}")]
    ChartMismatch(f64),

    #[error("size mismatch: {0}")]
    Shape(String),

    #[error("operator is not shift-commuting (max commutator norm {0:e})")]
    NotShiftInvariant(f64),

    #[error("lattice model invalid: {0}")]
    Lattice(String),

    #[error("group action invalid: {0}")]
    GroupAction(String),

    #[error("the representation σ is not faithful (kernel element {0}); minimal structure group required")]
    NotFaithful(usize),

    #[error("empty node set")]
    EmptySet,

    #[error("missing face symbol for face {0}")]
    MissingFaceSymbol(usize),

    #[error("no commuting covering triangle for faces {parent} ≻ {target}")]
    NoCoveringTriangle { parent: usize, target: usize },

    #[error("global symbol disagrees across charts by {discrepancy:e} at face {face}")]
    OverlapDiscrepancy { face: usize, discrepancy: f64 },

    #[error("symbol tuple is not compatible: {0}")]
    Incompatible(String),
}
