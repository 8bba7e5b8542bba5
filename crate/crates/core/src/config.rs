//! Database geometry shared by every simulator and optimizer.
//!
//! A database of `N` items is split into `K` equal blocks of `b = N/K` items.
//! `t` of the blocks are target blocks, each holding exactly `tau` target items.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for trigonometric identity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Derived angles of a geometry, all in `(0, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    /// Global Grover angle, `sin^2 = t tau / N`.
    pub theta1: f64,
    /// In-block Grover angle, `sin^2 = tau / b`.
    pub theta2: f64,
    /// Block angle, `sin^2 = t / K`.
    pub gamma: f64,
}

impl Angles {
    fn from_ratios(global: f64, local: f64, block: f64) -> Self {
        Self {
            theta1: global.sqrt().asin(),
            theta2: local.sqrt().asin(),
            gamma: block.sqrt().asin(),
        }
    }
}

/// Immutable shape of the search problem. Construct with [`SearchGeometry::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct SearchGeometry {
    items: u64,
    blocks: u64,
    block_size: u64,
    target_blocks: u64,
    targets_per_block: u64,
    angles: Angles,
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    #[serde(rename = "N")]
    n: u64,
    #[serde(rename = "K")]
    k: u64,
    t: u64,
    tau: u64,
}

impl TryFrom<RawGeometry> for SearchGeometry {
    type Error = Error;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        SearchGeometry::new(raw.n, raw.k, raw.t, raw.tau)
    }
}

impl From<SearchGeometry> for RawGeometry {
    fn from(g: SearchGeometry) -> Self {
        RawGeometry {
            n: g.items,
            k: g.blocks,
            t: g.target_blocks,
            tau: g.targets_per_block,
        }
    }
}

impl SearchGeometry {
    /// Validates `(N, K, t, tau)` and precomputes the block size and angles.
    pub fn new(items: u64, blocks: u64, target_blocks: u64, targets_per_block: u64) -> Result<Self> {
        if items == 0 || blocks == 0 || target_blocks == 0 || targets_per_block == 0 {
            return Err(Error::Degenerate(format!(
                "all of N, K, t, tau must be positive (got N={items}, K={blocks}, t={target_blocks}, tau={targets_per_block})"
            )));
        }
        if items % blocks != 0 {
            return Err(Error::NonDivisible { items, blocks });
        }
        let block_size = items / blocks;
        if target_blocks >= blocks {
            return Err(Error::Degenerate(format!(
                "t={target_blocks} must be < K={blocks} so a non-target block exists"
            )));
        }
        if targets_per_block >= block_size {
            return Err(Error::Degenerate(format!(
                "tau={targets_per_block} must be < b={block_size} so target blocks hold non-target items"
            )));
        }
        // implied by the two checks above, kept as a guard on the product
        if target_blocks * targets_per_block >= items {
            return Err(Error::Degenerate(format!(
                "t*tau={} must be < N={items}",
                target_blocks * targets_per_block
            )));
        }

        let angles = Angles::from_ratios(
            (target_blocks * targets_per_block) as f64 / items as f64,
            targets_per_block as f64 / block_size as f64,
            target_blocks as f64 / blocks as f64,
        );
        Ok(Self {
            items,
            blocks,
            block_size,
            target_blocks,
            targets_per_block,
            angles,
        })
    }

    /// Total number of items `N`.
    pub fn n(&self) -> u64 {
        self.items
    }

    /// Number of blocks `K`.
    pub fn k(&self) -> u64 {
        self.blocks
    }

    /// Items per block `b`.
    pub fn b(&self) -> u64 {
        self.block_size
    }

    /// Number of target blocks `t`.
    pub fn t(&self) -> u64 {
        self.target_blocks
    }

    /// Target items per target block `tau`.
    pub fn tau(&self) -> u64 {
        self.targets_per_block
    }

    /// Total number of target items `z = t * tau`.
    pub fn z(&self) -> u64 {
        self.target_blocks * self.targets_per_block
    }

    pub fn angles(&self) -> Angles {
        self.angles
    }

    /// Rescaled block count `K / t`.
    pub fn k_tilde(&self) -> f64 {
        self.blocks as f64 / self.target_blocks as f64
    }

    /// Number of items in non-target blocks, `b (K - t)`.
    pub fn non_target_block_items(&self) -> u64 {
        self.block_size * (self.blocks - self.target_blocks)
    }

    /// Number of non-target items inside target blocks, `t (b - tau)`.
    pub fn non_target_in_target_blocks(&self) -> u64 {
        self.target_blocks * (self.block_size - self.targets_per_block)
    }

    /// Checks `sin^2 gamma * sin^2 theta2 = sin^2 theta1` at `tol`.
    pub fn angle_identity_holds(&self, tol: f64) -> bool {
        let a = self.angles;
        let lhs = a.gamma.sin().powi(2) * a.theta2.sin().powi(2);
        (lhs - a.theta1.sin().powi(2)).abs() <= tol
    }
}

/// Parses a plain-text `key=value` configuration with keys `N`, `K`, `t`, `tau`.
///
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_geometry_config(text: &str) -> Result<SearchGeometry> {
    let mut n = None;
    let mut k = None;
    let mut t = None;
    let mut tau = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: `{}` is not a positive integer", lineno + 1, value.trim())))?;
        let slot = match key.trim() {
            "N" => &mut n,
            "K" => &mut k,
            "t" => &mut t,
            "tau" => &mut tau,
            other => return Err(Error::Parse(format!("line {}: unknown key `{other}`", lineno + 1))),
        };
        *slot = Some(value);
    }
    let missing = |name: &str| Error::Parse(format!("missing key `{name}`"));
    SearchGeometry::new(
        n.ok_or_else(|| missing("N"))?,
        k.ok_or_else(|| missing("K"))?,
        t.ok_or_else(|| missing("t"))?,
        tau.ok_or_else(|| missing("tau"))?,
    )
}
