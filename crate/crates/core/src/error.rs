use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameters ({u}, {v}) outside the domain")]
    OutOfDomain { u: f64, v: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("finite-difference jet did not stabilise (step-halving change {change:.3e})")]
    UnstableJet { change: f64 },

    #[error("degenerate tangent plane (r_u x r_v vanishes)")]
    DegenerateTangent,

    #[error("degenerate equilibrium: {0}")]
    Degenerate(String),

    #[error("n too small: {n} (need at least {min})")]
    TooCoarse { n: usize, min: usize },

    #[error("coincident consecutive vertices at k = {k}")]
    CoincidentVertices { k: usize },

    #[error("quad ({i}, {j}): {reason}")]
    Quad { i: usize, j: usize, reason: String },

    #[error("degenerate triangle {face}")]
    DegenerateTriangle { face: usize },

    #[error("point set is coplanar or collinear")]
    Coplanar,

    #[error("mesh is not manifold: {0}")]
    NonManifold(String),

    #[error("mesh is not watertight ({boundary_edges} boundary edges)")]
    NotWatertight { boundary_edges: usize },

    #[error("face {face} is oriented towards the reference point")]
    InvertedFace { face: usize },

    #[error("window of half-width {k} around ({ci}, {cj}) touches the patch boundary")]
    WindowTouchesBoundary { k: usize, ci: f64, cj: f64 },

    #[error("operation requires a closed surface")]
    NotClosed,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("byte {offset}: {msg}")]
    ParseBinary { offset: usize, msg: String },

    #[error("least-squares fit is rank deficient")]
    RankDeficient,

    #[error("n = {n}: {source}")]
    AtResolution {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
