//! Sure-success last step for finite blocks.
//!
//! The plain last step only annihilates non-target blocks when the cancellation
//! equation holds, which integer `(j1, j2)` almost never satisfy. Replacing it by
//!
//! ```text
//! -[1 - (1 - e^{2 i theta}) |s1><s1|] [1 - (1 - e^{i(phi - theta)}) |M><M|]
//! ```
//!
//! and choosing `(theta, phi)` from the phase condition
//! `e^{i(phi - theta)} p x + p y + 2 z = 0` (with `p = 1 - e^{2 i theta}`)
//! sends the `|u>` amplitude to exactly zero, whenever `x^2 >= (y + z)^2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::full_search_queries;
use crate::config::SearchGeometry;
use crate::error::{Error, Result};
use crate::record::Engine;
use crate::reduced3d::{PhaseIntermediates, ReducedState};
use crate::statevector::{FullState, TargetPlacement};

/// Largest verified non-target amplitude accepted as sure success.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Tolerance for algebraic identities such as the phase condition itself.
pub const ALGEBRAIC_TOLERANCE: f64 = 1e-11;
/// Largest `N` verified on the dense simulator; above it the reduced model is used.
pub const FULL_VERIFY_MAX_N: u64 = 1 << 12;

const ZERO_Z: f64 = 1e-15;
const ZERO_X: f64 = 1e-15;

/// Phases of the modified last step for one schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSolution {
    pub theta: f64,
    pub phi: f64,
    pub j1: u64,
    pub j2: u64,
    /// Largest non-target-block amplitude after the modified last step.
    pub residual: f64,
    pub feasible: bool,
}

impl PhaseSolution {
    /// `j1 + j2` iterations plus one query for the last step.
    pub fn total_queries(&self) -> u64 {
        self.j1 + self.j2 + 1
    }

    /// Interchange record `{N, K, t, tau, j1, j2, theta, phi, total_queries, residual}`.
    pub fn to_record(&self, g: &SearchGeometry) -> SolutionRecord {
        SolutionRecord {
            n: g.n(),
            k: g.k(),
            t: g.t(),
            tau: g.tau(),
            j1: self.j1,
            j2: self.j2,
            theta: self.theta,
            phi: self.phi,
            total_queries: self.total_queries(),
            residual: self.residual,
        }
    }
}

/// JSON shape of a solved schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "K")]
    pub k: u64,
    pub t: u64,
    pub tau: u64,
    pub j1: u64,
    pub j2: u64,
    pub theta: f64,
    pub phi: f64,
    pub total_queries: u64,
    pub residual: f64,
}

/// Evaluates the phase-condition coefficients from their closed forms.
pub fn phase_condition_coefficients(g: &SearchGeometry, j1: u64, j2: u64) -> PhaseIntermediates {
    let ang = g.angles();
    let (s1, c1) = ang.theta1.sin_cos();
    let (s2, c2) = ang.theta2.sin_cos();
    let (sg, cg) = ang.gamma.sin_cos();
    let (s_glob, c_glob) = (2.0 * j1 as f64 * ang.theta1).sin_cos();
    let (s_loc, c_loc) = (2.0 * j2 as f64 * ang.theta2).sin_cos();

    let m = c2 * c2 * sg * sg + cg * cg;
    let k = s_glob * m + c_glob * c1 * s1;
    let l = c_glob * m - s_glob * c1 * s1;
    let norm = 1.0 / (c1 * c1);
    let a = norm * (c_loc * c1 * k + s_loc * c2 * sg * l);
    let b = norm * (-s_loc * c1 * k + c_loc * c2 * sg * l);
    let c = norm * cg * l;

    let f = sg * s2 * cg;
    let gg = sg * cg * c2;
    PhaseIntermediates {
        geometry: *g,
        j1,
        j2,
        nontarget_weight: m,
        target_proj: k,
        nontarget_proj: l,
        a,
        b,
        c,
        x: a * f,
        y: b * gg + c * cg * cg,
        z: -c / 2.0,
    }
}

/// Left side of `e^{i(phi - theta)} p x + p y + 2 z = 0`.
pub fn phase_condition_lhs(im: &PhaseIntermediates, theta: f64, phi: f64) -> Complex64 {
    let p = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * theta);
    Complex64::from_polar(1.0, phi - theta) * p * im.x + p * im.y + 2.0 * im.z
}

fn reduced_residual(im: &PhaseIntermediates, theta: f64, phi: f64) -> f64 {
    let g = &im.geometry;
    im.reduced_state().apply_final(g, theta, phi).non_target_residual(g)
}

/// Solves the phase condition for `(theta, phi)`.
///
/// `sin^2 theta = z^2 / (x^2 - y^2 - 2yz)`, then `cos phi = -(y/x) cos theta`
/// and `sin phi = -(y/x) sin theta - z / (x sin theta)`. Both signs of
/// `sin theta` are tried; the one leaving the smaller non-target amplitude in
/// the reduced model is returned.
pub fn solve_phases(im: &PhaseIntermediates) -> Result<PhaseSolution> {
    let (x, y, z) = (im.x, im.y, im.z);
    if z.abs() <= ZERO_Z {
        return Err(Error::DegenerateZ);
    }
    if x.abs() <= ZERO_X {
        return Err(Error::SingularX { z });
    }
    let (x2, yz2) = (x * x, (y + z) * (y + z));
    if x2 < yz2 {
        return Err(Error::Infeasible { x2, yz2 });
    }
    let sin2 = z * z / (x2 - y * y - 2.0 * y * z);
    if !(0.0..=1.0 + 1e-15).contains(&sin2) {
        return Err(Error::Infeasible { x2, yz2 });
    }
    let base = sin2.min(1.0).sqrt().asin();

    let candidate = |theta: f64| -> Option<(f64, f64, f64)> {
        let (st, ct) = theta.sin_cos();
        let cos_phi = -(y / x) * ct;
        let sin_phi = -(y / x) * st - z / (x * st);
        if cos_phi.abs() > 1.0 + 1e-9 || sin_phi.abs() > 1.0 + 1e-9 {
            return None;
        }
        let phi = sin_phi.atan2(cos_phi);
        Some((theta, phi, reduced_residual(im, theta, phi)))
    };
    let (theta, phi, residual) = [candidate(base), candidate(-base)]
        .into_iter()
        .flatten()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or(Error::Infeasible { x2, yz2 })?;
    Ok(PhaseSolution {
        theta,
        phi,
        j1: im.j1,
        j2: im.j2,
        residual,
        feasible: residual <= FEASIBILITY_TOLERANCE,
    })
}

/// Outcome of running a solution through a simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub residual: f64,
    pub marginals: Vec<f64>,
    pub target_mass: f64,
    pub engine: Engine,
}

/// Runs `j1` global, `j2` local and the phased last step; dense simulation for
/// `N <= 2^12`, the reduced model otherwise.
pub fn verify_sure_success(g: &SearchGeometry, solution: &PhaseSolution) -> Verification {
    if g.n() <= FULL_VERIFY_MAX_N {
        verify_with_placement(TargetPlacement::canonical(g), solution)
    } else {
        verify_reduced(g, solution)
    }
}

/// Dense verification with an explicit target placement.
pub fn verify_with_placement(placement: TargetPlacement, solution: &PhaseSolution) -> Verification {
    let state = FullState::uniform_with_cap(placement, u64::MAX)
        .expect("cap disabled")
        .apply_global_iterations(solution.j1)
        .apply_local_iterations(solution.j2)
        .apply_phased_final(solution.theta, solution.phi);
    Verification {
        residual: state.non_target_residual(),
        marginals: state.block_marginals(),
        target_mass: state.target_mass(),
        engine: Engine::Full,
    }
}

/// Verification in the reduced model (canonical block labels).
pub fn verify_reduced(g: &SearchGeometry, solution: &PhaseSolution) -> Verification {
    let state = ReducedState::initial(g)
        .evolve_global(g, solution.j1)
        .evolve_local(g, solution.j2 as f64)
        .apply_final(g, solution.theta, solution.phi);
    Verification {
        residual: state.non_target_residual(g),
        marginals: state.block_marginals(g),
        target_mass: state.target_mass(),
        engine: Engine::Reduced,
    }
}

/// One `(j1, j2)` tried by the schedule search.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub j1: u64,
    pub j2: u64,
    pub outcome: Result<PhaseSolution>,
}

fn solve_split(g: &SearchGeometry, j1: u64, j2: u64) -> Result<PhaseSolution> {
    let im = phase_condition_coefficients(g, j1, j2);
    match solve_phases(&im) {
        // the |u> amplitude is already zero; p = 0 leaves it there
        Err(Error::DegenerateZ) => {
            let residual = reduced_residual(&im, 0.0, 0.0);
            Ok(PhaseSolution {
                theta: 0.0,
                phi: 0.0,
                j1,
                j2,
                residual,
                feasible: residual <= FEASIBILITY_TOLERANCE,
            })
        }
        other => other,
    }
}

/// Search bound on `j1 + j2`: `ceil(2 * full_search_queries)`.
pub fn schedule_search_bound(g: &SearchGeometry) -> u64 {
    (2.0 * full_search_queries(g)).ceil() as u64
}

/// Like [`minimal_schedule`], also returning every split tried.
pub fn minimal_schedule_with_trace(g: &SearchGeometry) -> (Result<PhaseSolution>, Vec<ScanEntry>) {
    let max_total = schedule_search_bound(g);
    let mut trace = Vec::new();
    for total in 0..=max_total {
        let row: Vec<ScanEntry> = (0..=total)
            .into_par_iter()
            .map(|i| {
                let j1 = total - i;
                let j2 = i;
                ScanEntry {
                    j1,
                    j2,
                    outcome: solve_split(g, j1, j2),
                }
            })
            .collect();
        for entry in row {
            let accepted = match &entry.outcome {
                Ok(sol) if sol.feasible => {
                    let check = verify_sure_success(g, sol);
                    (check.residual <= FEASIBILITY_TOLERANCE).then_some(PhaseSolution {
                        residual: check.residual,
                        ..*sol
                    })
                }
                _ => None,
            };
            trace.push(entry);
            if let Some(sol) = accepted {
                return (Ok(sol), trace);
            }
        }
    }
    (Err(Error::Exhausted { max_total }), trace)
}

/// Smallest `j1 + j2` admitting sure-success phases, ties broken toward larger `j1`.
/// The returned residual comes from an independent simulation.
pub fn minimal_schedule(g: &SearchGeometry) -> Result<PhaseSolution> {
    minimal_schedule_with_trace(g).0
}
