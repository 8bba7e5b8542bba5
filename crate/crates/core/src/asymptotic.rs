//! Large-block query optimization.
//!
//! As `b -> inf` the schedule is `j1 = (pi/4) sqrt(N/(t tau)) - eta sqrt(b)`,
//! `j2 = alpha sqrt(b)`. After rescaling `Ktilde = K/t`,
//! `alpha~ = alpha sqrt(tau)`, `eta~ = eta sqrt(tau)` the annihilation
//! constraint and the optimum depend on `Ktilde` alone.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::config::SearchGeometry;
use crate::error::{Error, Result};
use crate::statevector::Step3Ordering;

/// Smallest `Ktilde` at which the closed-form optimum is real (`3 Ktilde - 4 >= 0`).
pub const MIN_K_TILDE: f64 = 4.0 / 3.0;

/// Full Grover search cost `(pi/4) sqrt(N / (t tau))`.
pub fn full_search_queries(g: &SearchGeometry) -> f64 {
    FRAC_PI_4 * (g.n() as f64 / g.z() as f64).sqrt()
}

/// Optimal large-block schedule for one `Ktilde`.
///
/// Query counts are expressed in units of `scale`: `scale = 1` gives the bare
/// coefficients of `sqrt(b / tau)`, [`Optimum::scaled`] multiplies in a geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub k_tilde: f64,
    pub eta_tilde: f64,
    pub alpha_tilde: f64,
    /// Target-block angle after the last step; equals `alpha_tilde` at the optimum.
    pub omega: f64,
    pub scale: f64,
    pub j1_real: f64,
    pub j2_real: f64,
    /// `j1_real + j2_real`, i.e. full search minus the saved `(eta~ - alpha~) scale`.
    pub total_real: f64,
    pub full_search_real: f64,
}

impl Optimum {
    fn new(k_tilde: f64, eta_tilde: f64, alpha_tilde: f64, scale: f64) -> Self {
        let full = FRAC_PI_4 * k_tilde.sqrt();
        let j1 = (full - eta_tilde) * scale;
        let j2 = alpha_tilde * scale;
        Self {
            k_tilde,
            eta_tilde,
            alpha_tilde,
            omega: alpha_tilde,
            scale,
            j1_real: j1,
            j2_real: j2,
            total_real: j1 + j2,
            full_search_real: full * scale,
        }
    }

    /// Re-expresses the counts for a concrete geometry, `scale = sqrt(b / tau)`.
    pub fn scaled(self, g: &SearchGeometry) -> Self {
        Self::new(
            self.k_tilde,
            self.eta_tilde,
            self.alpha_tilde,
            (g.b() as f64 / g.tau() as f64).sqrt(),
        )
    }

    /// Coefficient of `sqrt(b/tau)` saved relative to full search.
    pub fn saved_coefficient(&self) -> f64 {
        self.eta_tilde - self.alpha_tilde
    }

    /// Queries saved relative to full search, in units of `scale`.
    pub fn saved(&self) -> f64 {
        self.full_search_real - self.total_real
    }

    /// Counts the one oracle call of the last step on top of `total_real`.
    pub fn total_with_final(&self) -> f64 {
        self.total_real + 1.0
    }

    /// Normalized residual of the annihilation constraint at this point.
    pub fn constraint_residual(&self) -> f64 {
        constraint_residual(self.k_tilde, self.eta_tilde, self.alpha_tilde)
    }
}

/// Column order of optimum tables.
pub const OPTIMUM_CSV_HEADER: &str = "Ktilde,eta_tilde,alpha_tilde,omega,j1,j2,total,full,saved";

impl Optimum {
    /// One table row. With `include_final_query` the `total` column counts the
    /// last step's oracle call on top of `j1 + j2`.
    pub fn csv_row(&self, include_final_query: bool) -> String {
        let total = if include_final_query { self.total_with_final() } else { self.total_real };
        format!(
            "{},{:.12},{:.12},{:.12},{:.9},{:.9},{:.9},{:.9},{:.9}",
            self.k_tilde,
            self.eta_tilde,
            self.alpha_tilde,
            self.omega,
            self.j1_real,
            self.j2_real,
            total,
            self.full_search_real,
            self.full_search_real - total,
        )
    }
}

fn check_k_tilde(k_tilde: f64) -> Result<()> {
    if !(k_tilde > 1.0) || !k_tilde.is_finite() {
        return Err(Error::OutOfDomain(format!("Ktilde={k_tilde} must be a finite ratio > 1")));
    }
    Ok(())
}

/// `eta~` solving `tan(2 eta~ / sqrt(K~)) = 2 sqrt(K~) sin(2 alpha~) / (K~ - 4 sin^2 alpha~)`.
///
/// The arctangent is taken in `(0, pi)` so `eta~` stays positive and
/// continuous through `K~ = 4 sin^2 alpha~`.
pub fn constraint_eta_of_alpha(k_tilde: f64, alpha_tilde: f64) -> Result<f64> {
    check_k_tilde(k_tilde)?;
    if !(alpha_tilde > 0.0 && alpha_tilde < FRAC_PI_2) {
        return Err(Error::OutOfDomain(format!("alpha~={alpha_tilde} must lie in (0, pi/2)")));
    }
    Ok(eta_of_alpha(k_tilde, alpha_tilde))
}

fn eta_of_alpha(k_tilde: f64, alpha_tilde: f64) -> f64 {
    let rk = k_tilde.sqrt();
    let num = 2.0 * rk * (2.0 * alpha_tilde).sin();
    let den = k_tilde - 4.0 * alpha_tilde.sin().powi(2);
    0.5 * rk * num.atan2(den)
}

/// `sin` of the angle between `2 eta~/sqrt(K~)` and the constraint's
/// right-hand-side direction; zero iff the constraint holds (mod pi).
pub fn constraint_residual(k_tilde: f64, eta_tilde: f64, alpha_tilde: f64) -> f64 {
    let rk = k_tilde.sqrt();
    let num = 2.0 * rk * (2.0 * alpha_tilde).sin();
    let den = k_tilde - 4.0 * alpha_tilde.sin().powi(2);
    let (s, c) = (2.0 * eta_tilde / rk).sin_cos();
    (s * den - c * num) / num.hypot(den)
}

/// Closed-form optimum: `cos 2 alpha~ = (K~ - 2) / (2 (K~ - 1))` and
/// `tan(2 eta~ / sqrt K~) = sqrt(3 K~ - 4) / (K~ - 2)`.
pub fn optimum_closed_form(k_tilde: f64) -> Result<Optimum> {
    check_k_tilde(k_tilde)?;
    if k_tilde < MIN_K_TILDE {
        return Err(Error::OutOfDomain(format!(
            "Ktilde={k_tilde} below {MIN_K_TILDE} where 3 Ktilde - 4 < 0"
        )));
    }
    let cos2a = ((k_tilde - 2.0) / (2.0 * (k_tilde - 1.0))).clamp(-1.0, 1.0);
    let alpha = 0.5 * cos2a.acos();
    let eta = 0.5 * k_tilde.sqrt() * (3.0 * k_tilde - 4.0).max(0.0).sqrt().atan2(k_tilde - 2.0);
    Ok(Optimum::new(k_tilde, eta, alpha, 1.0))
}

/// Closed-form optimum scaled to a geometry.
pub fn optimum_for_geometry(g: &SearchGeometry) -> Result<Optimum> {
    Ok(optimum_closed_form(g.k_tilde())?.scaled(g))
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut x1 = hi - INV_GOLDEN * (hi - lo);
    let mut x2 = lo + INV_GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Numerical optimum: minimizes `alpha~ - eta~(alpha~)` along the constraint by
/// a grid bracket followed by golden-section search.
///
/// The bracket is the first interior local minimum in increasing `alpha~`.
/// Toward `alpha~ = pi/2` the objective can fall again, but only where
/// `eta~ > (pi/4) sqrt(K~)`, i.e. at negative `j1`.
pub fn optimum_numeric(k_tilde: f64) -> Result<Optimum> {
    check_k_tilde(k_tilde)?;
    if k_tilde <= MIN_K_TILDE {
        return Err(Error::OutOfDomain(format!("Ktilde={k_tilde} must exceed {MIN_K_TILDE}")));
    }
    let objective = |a: f64| a - eta_of_alpha(k_tilde, a);

    let n = 4096;
    let h = FRAC_PI_2 / n as f64;
    let values: Vec<f64> = (1..n).map(|i| objective(i as f64 * h)).collect();
    let best = values
        .windows(3)
        .position(|w| w[1] < w[0] && w[1] <= w[2])
        .map(|i| i + 2)
        .ok_or(Error::NoMinimum(k_tilde))?;
    let coarse = golden_section(objective, (best - 1) as f64 * h, (best + 1) as f64 * h, 1e-12);
    let alpha = polish_stationary_point(objective, coarse, 1e-6);
    Ok(Optimum::new(k_tilde, eta_of_alpha(k_tilde, alpha), alpha, 1.0))
}

/// Near a flat minimum, comparisons of `f` stop resolving `x` at about
/// `sqrt(eps)`. Refines by bisection on a central-difference slope inside
/// `[x - radius, x + radius]`; returns `x` unchanged when that bracket does
/// not straddle a sign change.
fn polish_stationary_point<F: Fn(f64) -> f64>(f: F, x: f64, radius: f64) -> f64 {
    let h = 1e-5;
    let slope = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let (mut lo, mut hi) = (x - radius, x + radius);
    let (slo, shi) = (slope(lo), slope(hi));
    if slo.signum() == shi.signum() {
        return x;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if slope(mid).signum() == slo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integer query counts for one run of the algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuerySchedule {
    pub j1: u64,
    pub j2: u64,
    pub ordering: Step3Ordering,
    /// Sure-success phases `(theta, phi)` for the last step, if any.
    pub phases: Option<(f64, f64)>,
    /// `j1 - j1_real` and `j2 - j2_real` left by rounding.
    pub rounding: (f64, f64),
}

impl QuerySchedule {
    pub fn new(j1: u64, j2: u64, ordering: Step3Ordering) -> Self {
        Self {
            j1,
            j2,
            ordering,
            phases: None,
            rounding: (0.0, 0.0),
        }
    }

    /// `j1 + j2 + 1`: both steps plus the oracle call of the last step.
    pub fn total_queries(&self) -> u64 {
        self.j1 + self.j2 + 1
    }
}

fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor().max(0.0) as u64
}

/// Rounds the closed-form optimum for `g` to nearest integers (ties upward),
/// clamped at zero.
pub fn integer_schedule(g: &SearchGeometry) -> Result<QuerySchedule> {
    let opt = optimum_for_geometry(g)?;
    let j1 = round_half_up(opt.j1_real);
    let j2 = round_half_up(opt.j2_real);
    Ok(QuerySchedule {
        rounding: (j1 as f64 - opt.j1_real, j2 as f64 - opt.j2_real),
        ..QuerySchedule::new(j1, j2, Step3Ordering::ReflectionThenOracle)
    })
}
