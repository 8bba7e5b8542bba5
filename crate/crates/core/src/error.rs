use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("block count K={blocks} does not divide item count N={items}")]
    NonDivisible { items: u64, blocks: u64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("invalid target placement: {0}")]
    InvalidPlacement(String),

    #[error("N={items} exceeds the full-simulator cap of {cap}")]
    TooLarge { items: u64, cap: u64 },

    #[error("fractional global iteration count {j1} with non-zero weight {weight:e} on the parity eigenvector")]
    FractionalParity { j1: f64, weight: f64 },

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("no interior minimum bracketed for Ktilde={0}")]
    NoMinimum(f64),

    #[error("phase condition infeasible: x^2={x2:e} < (y+z)^2={yz2:e}")]
    Infeasible { x2: f64, yz2: f64 },

    #[error("phase condition singular: x=0 while z={z:e}")]
    SingularX { z: f64 },

    #[error("phase condition degenerate: z=0, non-target amplitude already cancelled")]
    DegenerateZ,

    #[error("no sure-success schedule with at most {max_total} iterations")]
    Exhausted { max_total: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
