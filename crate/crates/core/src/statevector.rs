//! Dense simulator over all `N` amplitudes.
//!
//! Operators act directly as the abstract unitaries of the partial search
//! algorithm (oracle flip, reflection about the uniform state, in-block
//! reflection). Nothing here is optimized; the module is the reference
//! every faster path is checked against.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SearchGeometry;
use crate::error::{Error, Result};
use crate::reduced3d::ReducedState;

/// Default largest `N` the dense simulator accepts.
pub const DEFAULT_MAX_FULL_N: u64 = 1 << 20;

/// Environment variable overriding [`DEFAULT_MAX_FULL_N`].
pub const MAX_FULL_N_ENV: &str = "QPARTIAL_MAX_FULL_N";

/// Reads the dense-simulator cap from `QPARTIAL_MAX_FULL_N`, falling back to the default.
pub fn max_full_n_from_env() -> u64 {
    std::env::var(MAX_FULL_N_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_FULL_N)
}

/// Order of the two operators making up the last step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step3Ordering {
    /// Reflection about the mean, then the oracle: `-I_t I_s1`. Leaves the
    /// target block in the canonical `sin w |mu> + cos w |ntt>` form.
    ReflectionThenOracle,
    /// Oracle, then reflection about the mean: `-I_s1 I_t`, a plain global iteration.
    OracleThenReflection,
}

impl Step3Ordering {
    pub fn flips_target_first(self) -> bool {
        matches!(self, Step3Ordering::OracleThenReflection)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Step3Ordering::ReflectionThenOracle => "reflection-then-oracle",
            Step3Ordering::OracleThenReflection => "oracle-then-reflection",
        }
    }
}

impl std::str::FromStr for Step3Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflection-then-oracle" | "A" => Ok(Step3Ordering::ReflectionThenOracle),
            "oracle-then-reflection" | "B" => Ok(Step3Ordering::OracleThenReflection),
            other => Err(Error::Parse(format!("unknown ordering `{other}`"))),
        }
    }
}

/// Which items are targets. Targets span exactly `t` blocks with `tau` items each.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPlacement {
    geometry: SearchGeometry,
    is_target: Vec<bool>,
    is_target_block: Vec<bool>,
}

impl TargetPlacement {
    /// Targets are the first `tau` items of the first `t` blocks.
    pub fn canonical(geometry: &SearchGeometry) -> Self {
        let pairs = (0..geometry.t()).flat_map(|blk| (0..geometry.tau()).map(move |item| (blk, item)));
        Self::from_pairs(geometry, pairs).expect("canonical placement is always valid")
    }

    /// Uniformly random target blocks and in-block positions, driven by `seed`.
    pub fn random(geometry: &SearchGeometry, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = rand::seq::index::sample(&mut rng, geometry.k() as usize, geometry.t() as usize);
        let mut pairs = Vec::with_capacity(geometry.z() as usize);
        for blk in blocks.iter() {
            let items = rand::seq::index::sample(&mut rng, geometry.b() as usize, geometry.tau() as usize);
            pairs.extend(items.iter().map(|it| (blk as u64, it as u64)));
        }
        Self::from_pairs(geometry, pairs).expect("sampled placement is always valid")
    }

    /// Builds a placement from `(block, item-in-block)` pairs, validating the shape.
    pub fn from_pairs(geometry: &SearchGeometry, pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let (k, b) = (geometry.k(), geometry.b());
        let mut is_target = vec![false; geometry.n() as usize];
        let mut per_block = vec![0u64; k as usize];
        for (blk, item) in pairs {
            if blk >= k || item >= b {
                return Err(Error::InvalidPlacement(format!("({blk}, {item}) outside {k} blocks of {b}")));
            }
            let idx = (blk * b + item) as usize;
            if std::mem::replace(&mut is_target[idx], true) {
                return Err(Error::InvalidPlacement(format!("duplicate target ({blk}, {item})")));
            }
            per_block[blk as usize] += 1;
        }
        let occupied = per_block.iter().filter(|&&c| c > 0).count() as u64;
        if occupied != geometry.t() {
            return Err(Error::InvalidPlacement(format!(
                "targets span {occupied} blocks, expected t={}",
                geometry.t()
            )));
        }
        if let Some(c) = per_block.iter().find(|&&c| c > 0 && c != geometry.tau()) {
            return Err(Error::InvalidPlacement(format!(
                "a target block holds {c} targets, expected tau={}",
                geometry.tau()
            )));
        }
        Ok(Self {
            geometry: *geometry,
            is_target,
            is_target_block: per_block.iter().map(|&c| c > 0).collect(),
        })
    }

    pub fn geometry(&self) -> &SearchGeometry {
        &self.geometry
    }

    pub fn is_target(&self, index: usize) -> bool {
        self.is_target[index]
    }

    pub fn is_target_block(&self, block: usize) -> bool {
        self.is_target_block[block]
    }

    pub fn target_blocks(&self) -> impl Iterator<Item = usize> + '_ {
        self.is_target_block.iter().enumerate().filter(|(_, &t)| t).map(|(i, _)| i)
    }

    pub fn block_of(&self, index: usize) -> usize {
        index / self.geometry.b() as usize
    }
}

/// All `N` amplitudes plus the target placement and an oracle-query counter.
#[derive(Debug, Clone)]
pub struct FullState {
    amplitudes: Vec<Complex64>,
    placement: Arc<TargetPlacement>,
    queries: u64,
}

fn check_cap(geometry: &SearchGeometry, cap: u64) -> Result<()> {
    if geometry.n() > cap {
        return Err(Error::TooLarge { items: geometry.n(), cap });
    }
    Ok(())
}

impl FullState {
    /// Uniform superposition `|s1>`, refusing `N` above [`DEFAULT_MAX_FULL_N`].
    pub fn uniform(placement: TargetPlacement) -> Result<Self> {
        Self::uniform_with_cap(placement, DEFAULT_MAX_FULL_N)
    }

    pub fn uniform_with_cap(placement: TargetPlacement, cap: u64) -> Result<Self> {
        check_cap(placement.geometry(), cap)?;
        let n = placement.geometry().n() as usize;
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Ok(Self {
            amplitudes: vec![amp; n],
            placement: Arc::new(placement),
            queries: 0,
        })
    }

    /// Wraps arbitrary amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(placement: TargetPlacement, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() as u64 != placement.geometry().n() {
            return Err(Error::InvalidPlacement(format!(
                "{} amplitudes for N={}",
                amplitudes.len(),
                placement.geometry().n()
            )));
        }
        Ok(Self {
            amplitudes,
            placement: Arc::new(placement),
            queries: 0,
        })
    }

    /// Spreads a reduced state uniformly over the three item classes.
    pub fn from_reduced(placement: TargetPlacement, reduced: &ReducedState) -> Result<Self> {
        let g = *placement.geometry();
        check_cap(&g, DEFAULT_MAX_FULL_N)?;
        let m = reduced.a_m / (g.z() as f64).sqrt();
        let ntt = reduced.a_ntt / (g.non_target_in_target_blocks() as f64).sqrt();
        let u = reduced.a_u / (g.non_target_block_items() as f64).sqrt();
        let amplitudes = (0..g.n() as usize)
            .map(|i| {
                if placement.is_target(i) {
                    m
                } else if placement.is_target_block(placement.block_of(i)) {
                    ntt
                } else {
                    u
                }
            })
            .collect();
        Ok(Self {
            amplitudes,
            placement: Arc::new(placement),
            queries: 0,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn placement(&self) -> &TargetPlacement {
        &self.placement
    }

    pub fn geometry(&self) -> &SearchGeometry {
        self.placement.geometry()
    }

    /// Cumulative oracle queries applied to this state.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mean(&self) -> Complex64 {
        self.amplitudes.iter().sum::<Complex64>() / self.amplitudes.len() as f64
    }

    /// Oracle `I_t`: negates every target amplitude. One query.
    pub fn apply_target_flip(self) -> Self {
        self.scale_targets(Complex64::new(-1.0, 0.0))
    }

    /// Generalized oracle multiplying every target amplitude by `e^{i phase}`. One query.
    pub fn apply_target_phase(self, phase: f64) -> Self {
        self.scale_targets(Complex64::from_polar(1.0, phase))
    }

    fn scale_targets(mut self, factor: Complex64) -> Self {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if self.placement.is_target(i) {
                *a *= factor;
            }
        }
        self.queries += 1;
        self
    }

    /// `-I_s1`: inversion about the global mean, `a -> 2 mean - a`.
    pub fn apply_global_reflection(self) -> Self {
        self.reflect_with(Complex64::new(2.0, 0.0))
    }

    /// `-[1 - (1 - e^{2 i theta}) |s1><s1|]`: `a -> p mean - a` with `p = 1 - e^{2 i theta}`.
    pub fn apply_phase_reflection(self, theta: f64) -> Self {
        self.reflect_with(Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * theta))
    }

    fn reflect_with(mut self, p: Complex64) -> Self {
        let shift = p * self.mean();
        for a in &mut self.amplitudes {
            *a = shift - *a;
        }
        self
    }

    /// One global Grover iteration `G1 = -I_s1 I_t`.
    pub fn apply_global_iteration(self) -> Self {
        self.apply_target_flip().apply_global_reflection()
    }

    pub fn apply_global_iterations(self, j1: u64) -> Self {
        (0..j1).fold(self, |s, _| s.apply_global_iteration())
    }

    /// `j2` simultaneous in-block Grover iterations `-I_s2 I_t` on every block.
    /// Each iteration is one oracle query.
    pub fn apply_local_iterations(mut self, j2: u64) -> Self {
        let b = self.geometry().b() as usize;
        for _ in 0..j2 {
            self = self.apply_target_flip();
            for block in self.amplitudes.chunks_mut(b) {
                let twice_mean = block.iter().sum::<Complex64>() * (2.0 / b as f64);
                for a in block.iter_mut() {
                    *a = twice_mean - *a;
                }
            }
        }
        self
    }

    /// Last step: the oracle and a global reflection in the chosen order. One query.
    pub fn apply_step3(self, ordering: Step3Ordering) -> Self {
        match ordering {
            Step3Ordering::ReflectionThenOracle => self.apply_global_reflection().apply_target_flip(),
            Step3Ordering::OracleThenReflection => self.apply_global_iteration(),
        }
    }

    /// Phase-generalized final operator
    /// `-[1 - (1 - e^{2 i theta})|s1><s1|] [1 - (1 - e^{i(phi - theta)})|M><M|]`. One query.
    pub fn apply_phased_final(self, theta: f64, phi: f64) -> Self {
        self.apply_target_phase(phi - theta).apply_phase_reflection(theta)
    }

    /// Probability of measuring each block.
    pub fn block_marginals(&self) -> Vec<f64> {
        self.amplitudes
            .chunks(self.geometry().b() as usize)
            .map(|blk| blk.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    /// Draws a block index from [`Self::block_marginals`] with a seeded generator.
    pub fn sample_block(&self, seed: u64) -> usize {
        sample_from_marginals(&self.block_marginals(), &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Draws `count` block indices from one seeded stream.
    pub fn sample_blocks(&self, seed: u64, count: usize) -> Vec<usize> {
        let marginals = self.block_marginals();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| sample_from_marginals(&marginals, &mut rng)).collect()
    }

    /// Largest amplitude magnitude over items in non-target blocks.
    pub fn non_target_residual(&self) -> f64 {
        let b = self.geometry().b() as usize;
        self.amplitudes
            .chunks(b)
            .enumerate()
            .filter(|(blk, _)| !self.placement.is_target_block(*blk))
            .flat_map(|(_, chunk)| chunk.iter())
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }

    /// Total probability on target blocks.
    pub fn target_mass(&self) -> f64 {
        self.block_marginals()
            .iter()
            .enumerate()
            .filter(|(blk, _)| self.placement.is_target_block(*blk))
            .map(|(_, p)| p)
            .sum()
    }

    /// Projects onto the normalized class vectors `|M>`, `|NTT>`, `|u>`.
    pub fn class_amplitudes(&self) -> ReducedState {
        let g = self.geometry();
        let (m, ntt, u) = self.class_sums();
        ReducedState {
            a_m: m / (g.z() as f64).sqrt(),
            a_ntt: ntt / (g.non_target_in_target_blocks() as f64).sqrt(),
            a_u: u / (g.non_target_block_items() as f64).sqrt(),
            queries: self.queries,
        }
    }

    fn class_sums(&self) -> (Complex64, Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        self.amplitudes
            .iter()
            .enumerate()
            .fold((zero, zero, zero), |(m, ntt, u), (i, &a)| {
                if self.placement.is_target(i) {
                    (m + a, ntt, u)
                } else if self.placement.is_target_block(self.placement.block_of(i)) {
                    (m, ntt + a, u)
                } else {
                    (m, ntt, u + a)
                }
            })
    }

    /// Largest deviation of any amplitude from its class mean. Zero means the
    /// state lies in the span of `|M>`, `|NTT>`, `|u>`.
    pub fn class_spread(&self) -> f64 {
        let g = self.geometry();
        let (m, ntt, u) = self.class_sums();
        let means = (
            m / g.z() as f64,
            ntt / g.non_target_in_target_blocks() as f64,
            u / g.non_target_block_items() as f64,
        );
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mean = if self.placement.is_target(i) {
                    means.0
                } else if self.placement.is_target_block(self.placement.block_of(i)) {
                    means.1
                } else {
                    means.2
                };
                (a - mean).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Debug dump as a JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.amplitudes.iter().map(|a| [a.re, a.im]).collect();
        serde_json::to_string(&pairs).expect("float pairs always serialize")
    }
}

pub(crate) fn sample_from_marginals<R: Rng>(marginals: &[f64], rng: &mut R) -> usize {
    let total: f64 = marginals.iter().sum();
    let mut draw = rng.random::<f64>() * total;
    for (i, &p) in marginals.iter().enumerate() {
        if draw < p {
            return i;
        }
        draw -= p;
    }
    // rounding left the draw past the end; fall back to the last block with mass
    marginals.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
