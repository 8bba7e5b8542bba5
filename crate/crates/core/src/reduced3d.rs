//! Exact simulation inside the three-dimensional invariant subspace spanned by
//! `|M>` (all targets), `|NTT>` (non-targets in target blocks) and `|u>`
//! (items of non-target blocks). Cost is independent of `N`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SearchGeometry;
use crate::error::{Error, Result};
use crate::statevector::Step3Ordering;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Weight on the parity eigenvector above which fractional `j1` is refused.
pub const PARITY_TOLERANCE: f64 = 1e-12;

/// Amplitudes on `|M>`, `|NTT>`, `|u>` plus an oracle-query counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub a_m: Complex64,
    pub a_ntt: Complex64,
    pub a_u: Complex64,
    pub queries: u64,
}

/// Dense complex 3x3 matrix acting on `(a_m, a_ntt, a_u)` columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[Complex64; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Self {
        Self::from_real([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows.map(|r| r.map(|x| Complex64::new(x, 0.0))))
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = [[ZERO; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[j][i].conj();
            }
        }
        Mat3(out)
    }

    pub fn apply(&self, v: [Complex64; 3]) -> [Complex64; 3] {
        self.0.map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
    }

    /// Largest entrywise distance to `other`.
    pub fn max_diff(&self, other: &Mat3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.conj_transpose() * *self).max_diff(&Mat3::identity()) <= tol
    }
}

impl Mul for Mat3 {
    type Output = Mat3;

    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[ZERO; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

/// Coefficients of `|s1>` on the three basis vectors.
fn uniform_components(g: &SearchGeometry) -> [f64; 3] {
    let a = g.angles();
    let (sg, cg) = a.gamma.sin_cos();
    let (s2, c2) = a.theta2.sin_cos();
    [sg * s2, sg * c2, cg]
}

/// Involutive change of basis taking `(M, NTT, u)` to the global Grover
/// plane `(M, non-targets)` plus the orthogonal parity direction.
pub fn transfer_matrix(g: &SearchGeometry) -> Mat3 {
    let a = g.angles();
    let c1 = a.theta1.cos();
    let (sg, cg) = a.gamma.sin_cos();
    let c2 = a.theta2.cos();
    Mat3::from_real([
        [1.0, 0.0, 0.0],
        [0.0, c2 * sg / c1, cg / c1],
        [0.0, cg / c1, -c2 * sg / c1],
    ])
}

/// Rotation by `2 j1 theta1` in the Grover plane with `(-1)^j1` on the parity axis.
/// `parity` overrides the third diagonal entry.
fn global_rotation_with_parity(g: &SearchGeometry, j1: f64, parity: f64) -> Mat3 {
    let (s, c) = (2.0 * j1 * g.angles().theta1).sin_cos();
    Mat3::from_real([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, parity]])
}

/// `M_{j1}` for integer `j1`.
pub fn global_rotation(g: &SearchGeometry, j1: u64) -> Mat3 {
    global_rotation_with_parity(g, j1 as f64, if j1 % 2 == 0 { 1.0 } else { -1.0 })
}

/// `G1^{j1} = T M_{j1} T`.
pub fn global_power(g: &SearchGeometry, j1: u64) -> Mat3 {
    let t = transfer_matrix(g);
    t * global_rotation(g, j1) * t
}

/// `G2^{j2}`: rotation by `2 j2 theta2` in the `(M, NTT)` plane. Accepts fractional `j2`.
pub fn local_power(g: &SearchGeometry, j2: f64) -> Mat3 {
    let (s, c) = (2.0 * j2 * g.angles().theta2).sin_cos();
    Mat3::from_real([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Phase-generalized last operator, written entry by entry with
/// `p = 1 - e^{2 i theta}`, `f = sin(gamma) sin(theta2) cos(gamma)`,
/// `g = sin(gamma) cos(gamma) cos(theta2)` and oracle phase `e^{i(phi - theta)}`.
pub fn final_operator(geometry: &SearchGeometry, theta: f64, phi: f64) -> Mat3 {
    let a = geometry.angles();
    let (sg, cg) = a.gamma.sin_cos();
    let (s2, c2) = a.theta2.sin_cos();
    let p = ONE - Complex64::from_polar(1.0, 2.0 * theta);
    let w = Complex64::from_polar(1.0, phi - theta);
    let f = sg * s2 * cg;
    let gg = sg * cg * c2;
    let sg2 = sg * sg;
    Mat3([
        [-w * (ONE - p * sg2 * s2 * s2), p * sg2 * s2 * c2, p * f],
        [w * p * sg2 * s2 * c2, p * sg2 * c2 * c2 - ONE, p * gg],
        [w * p * f, p * gg, p * cg * cg - ONE],
    ])
}

/// Phase pair that turns [`final_operator`] into the plain `-I_s1 I_t`.
pub const STANDARD_PHASES: (f64, f64) = (FRAC_PI_2, 3.0 * FRAC_PI_2);

/// Numbers feeding the sure-success phase condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseIntermediates {
    pub geometry: SearchGeometry,
    pub j1: u64,
    pub j2: u64,
    /// `cos^2(theta2) sin^2(gamma) + cos^2(gamma)`.
    pub nontarget_weight: f64,
    /// `s_g m + c_g cos(theta1) sin(theta1)` with `s_g, c_g` of `2 j1 theta1`.
    pub target_proj: f64,
    /// `c_g m - s_g cos(theta1) sin(theta1)`.
    pub nontarget_proj: f64,
    /// Pre-final amplitude on `|M>`.
    pub a: f64,
    /// Pre-final amplitude on `|NTT>`.
    pub b: f64,
    /// Pre-final amplitude on `|u>`.
    pub c: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PhaseIntermediates {
    pub fn reduced_state(&self) -> ReducedState {
        ReducedState {
            a_m: Complex64::new(self.a, 0.0),
            a_ntt: Complex64::new(self.b, 0.0),
            a_u: Complex64::new(self.c, 0.0),
            queries: self.j1 + self.j2,
        }
    }

    /// Unit-norm consistency of the post-global coefficients.
    pub fn post_global_norm(&self) -> f64 {
        let c1 = self.geometry.angles().theta1.cos();
        (self.target_proj / c1).powi(2) + self.nontarget_weight * (self.nontarget_proj / (c1 * c1)).powi(2)
    }
}

impl ReducedState {
    /// `|s1>` in the three-basis.
    pub fn initial(g: &SearchGeometry) -> Self {
        let [m, ntt, u] = uniform_components(g);
        Self {
            a_m: Complex64::new(m, 0.0),
            a_ntt: Complex64::new(ntt, 0.0),
            a_u: Complex64::new(u, 0.0),
            queries: 0,
        }
    }

    pub fn components(&self) -> [Complex64; 3] {
        [self.a_m, self.a_ntt, self.a_u]
    }

    fn with_components(self, [a_m, a_ntt, a_u]: [Complex64; 3], extra_queries: u64) -> Self {
        Self {
            a_m,
            a_ntt,
            a_u,
            queries: self.queries + extra_queries,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components().iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest componentwise distance to `other`.
    pub fn max_diff(&self, other: &ReducedState) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `j1` global iterations via `T M_{j1} T`.
    pub fn evolve_global(self, g: &SearchGeometry, j1: u64) -> Self {
        let v = global_power(g, j1).apply(self.components());
        self.with_components(v, j1)
    }

    /// Continuous relaxation of [`Self::evolve_global`] used for root-finding.
    /// Non-integer `j1` is only defined when the state has no weight on the
    /// parity eigenvector of the global iteration.
    pub fn evolve_global_fractional(self, g: &SearchGeometry, j1: f64) -> Result<Self> {
        if !(j1 >= 0.0) {
            return Err(Error::OutOfDomain(format!("j1={j1} must be non-negative")));
        }
        if j1.fract() == 0.0 {
            return Ok(self.evolve_global(g, j1 as u64));
        }
        let t = transfer_matrix(g);
        let plane = t.apply(self.components());
        let weight = plane[2].norm();
        if weight > PARITY_TOLERANCE {
            return Err(Error::FractionalParity { j1, weight });
        }
        let v = (t * global_rotation_with_parity(g, j1, 1.0) * t).apply(self.components());
        Ok(self.with_components(v, j1.ceil() as u64))
    }

    /// `j2` local iterations. Fractional `j2` is a continuous rotation.
    pub fn evolve_local(self, g: &SearchGeometry, j2: f64) -> Self {
        let v = local_power(g, j2).apply(self.components());
        self.with_components(v, j2.ceil().max(0.0) as u64)
    }

    /// Applies the phase-generalized last operator. One query.
    pub fn apply_final(self, g: &SearchGeometry, theta: f64, phi: f64) -> Self {
        let v = final_operator(g, theta, phi).apply(self.components());
        self.with_components(v, 1)
    }

    /// Plain last step. One query.
    pub fn apply_step3(self, g: &SearchGeometry, ordering: Step3Ordering) -> Self {
        let s = uniform_components(g);
        let reflect = |v: [Complex64; 3]| {
            let overlap: Complex64 = v.iter().zip(s).map(|(a, si)| a * si).sum();
            [0, 1, 2].map(|i| overlap * (2.0 * s[i]) - v[i])
        };
        let [m, ntt, u] = self.components();
        let v = match ordering {
            Step3Ordering::ReflectionThenOracle => {
                let [m, ntt, u] = reflect([m, ntt, u]);
                [-m, ntt, u]
            }
            Step3Ordering::OracleThenReflection => reflect([-m, ntt, u]),
        };
        self.with_components(v, 1)
    }

    /// Block probabilities with target blocks listed first (canonical labels).
    pub fn block_marginals(&self, g: &SearchGeometry) -> Vec<f64> {
        let t = g.t() as usize;
        let k = g.k() as usize;
        let per_target = (self.a_m.norm_sqr() + self.a_ntt.norm_sqr()) / t as f64;
        let per_other = self.a_u.norm_sqr() / (k - t) as f64;
        (0..k).map(|blk| if blk < t { per_target } else { per_other }).collect()
    }

    pub fn target_mass(&self) -> f64 {
        self.a_m.norm_sqr() + self.a_ntt.norm_sqr()
    }

    /// Amplitude magnitude of any single item in a non-target block.
    pub fn non_target_residual(&self, g: &SearchGeometry) -> f64 {
        self.a_u.norm() / (g.non_target_block_items() as f64).sqrt()
    }

    /// Angle `w` of the target-block state `sin w |mu> + cos w |ntt>`.
    pub fn canonical_angle(&self) -> f64 {
        self.a_m.norm().atan2(self.a_ntt.norm())
    }
}

/// Left minus right side of the five-term cancellation equation. A zero means
/// the last reflection annihilates every non-target block. The oracle-first
/// ordering flips the sign of the target-amplitude terms.
pub fn cancellation_residual(g: &SearchGeometry, j1: f64, j2: f64, ordering: Step3Ordering) -> f64 {
    let a = g.angles();
    let (k, b, t, tau) = (g.k() as f64, g.b() as f64, g.t() as f64, g.tau() as f64);
    let rest = (g.n() - g.z()) as f64;
    let (sx, cx) = ((2.0 * j1 + 1.0) * a.theta1).sin_cos();
    let (sy, cy) = (2.0 * j2 * a.theta2).sin_cos();
    let sign = if ordering.flips_target_first() { -1.0 } else { 1.0 };

    let lhs = b * (t - k / 2.0) / rest.sqrt() * cx;
    let rhs = sign * (t * tau).sqrt() * cy * sx + sign * t * (tau * (b - tau) / rest).sqrt() * sy * cx
        - (t * (b - tau)).sqrt() * sy * sx
        + t * (b - tau) / rest.sqrt() * cy * cx;
    lhs - rhs
}

/// Smallest `j2 >= 0` zeroing [`cancellation_residual`] at fixed `j1`, searched
/// over one period `pi / theta2` by scan and bisection.
pub fn solve_cancellation_j2(g: &SearchGeometry, j1: f64, ordering: Step3Ordering) -> Option<f64> {
    let period = PI / g.angles().theta2;
    let f = |j2: f64| cancellation_residual(g, j1, j2, ordering);
    let steps = 4096;
    let h = period / steps as f64;
    let mut lo = 0.0;
    let mut flo = f(lo);
    if flo == 0.0 {
        return Some(0.0);
    }
    for i in 1..=steps {
        let hi = i as f64 * h;
        let fhi = f(hi);
        if fhi == 0.0 {
            return Some(hi);
        }
        if flo.signum() != fhi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, flo);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm == 0.0 || b - a < 1e-15 * period {
                    return Some(mid);
                }
                if fa.signum() == fm.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return Some(0.5 * (a + b));
        }
        lo = hi;
        flo = fhi;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{FullState, TargetPlacement};

    fn geom(n: u64, k: u64, t: u64, tau: u64) -> SearchGeometry {
        SearchGeometry::new(n, k, t, tau).unwrap()
    }

    fn full(g: &SearchGeometry) -> FullState {
        FullState::uniform(TargetPlacement::canonical(g)).unwrap()
    }

    #[test]
    fn initial_components() {
        let s = ReducedState::initial(&geom(64, 4, 2, 4));
        assert!((s.a_m.re - 0.125f64.sqrt()).abs() < 1e-15);
        assert!((s.a_ntt.re - 0.375f64.sqrt()).abs() < 1e-15);
        assert!((s.a_u.re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initial_matches_projection_of_full_uniform() {
        let g = geom(64, 4, 2, 4);
        let projected = full(&g).class_amplitudes();
        assert!(projected.max_diff(&ReducedState::initial(&g)) < 1e-14);
    }

    #[test]
    fn transfer_is_involution_and_matrices_unitary() {
        for g in [geom(64, 4, 1, 1), geom(256, 8, 2, 2), geom(1024, 16, 3, 7)] {
            let t = transfer_matrix(&g);
            assert!((t * t).max_diff(&Mat3::identity()) < 1e-12);
            for j in 0..20 {
                assert!(global_rotation(&g, j).is_unitary(1e-12));
                assert!(local_power(&g, j as f64 * 0.7).is_unitary(1e-12));
            }
        }
    }

    #[test]
    fn global_rotation_composes() {
        let g = geom(256, 8, 2, 2);
        for a in 0..6 {
            for b in 0..6 {
                let lhs = global_rotation(&g, a) * global_rotation(&g, b);
                assert!(lhs.max_diff(&global_rotation(&g, a + b)) < 1e-12);
            }
        }
    }

    #[test]
    fn zero_iterations_are_identity() {
        let g = geom(256, 8, 2, 2);
        assert!(global_power(&g, 0).max_diff(&Mat3::identity()) < 1e-15);
        assert_eq!(local_power(&g, 0.0), Mat3::identity());
    }

    #[test]
    fn global_and_local_match_full_simulator() {
        let g = geom(256, 8, 2, 2);
        for j in 1..=12u64 {
            let reduced = ReducedState::initial(&g).evolve_global(&g, j);
            let exact = full(&g).apply_global_iterations(j).class_amplitudes();
            assert!(reduced.max_diff(&exact) < 1e-12, "global j={j}");

            let reduced = ReducedState::initial(&g).evolve_local(&g, j as f64);
            let exact = full(&g).apply_local_iterations(j).class_amplitudes();
            assert!(reduced.max_diff(&exact) < 1e-12, "local j={j}");
            assert_eq!(reduced.a_u, ReducedState::initial(&g).a_u);
        }
    }

    #[test]
    fn post_global_matches_compact_form() {
        // a pseudo-random family of geometries
        let mut seed = 12345u64;
        let mut next = |m: u64| {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) % m
        };
        for _ in 0..20 {
            let k = 2 + next(30);
            let b = 2 + next(200);
            let t = 1 + next(k - 1);
            let tau = 1 + next(b - 1);
            let j1 = next(15);
            let g = geom(k * b, k, t, tau);
            let a = g.angles();
            let (s1, c1) = a.theta1.sin_cos();
            let (sg, cg) = a.gamma.sin_cos();
            let c2 = a.theta2.cos();
            let (sgj, cgj) = (2.0 * j1 as f64 * a.theta1).sin_cos();
            let m = c2 * c2 * sg * sg + cg * cg;
            let kk = sgj * m + cgj * c1 * s1;
            let l = cgj * m - sgj * c1 * s1;
            let want = [c1 * kk, c2 * sg * l, cg * l].map(|v| v / (c1 * c1));
            let got = ReducedState::initial(&g).evolve_global(&g, j1).components();
            for (w, g) in want.iter().zip(got) {
                assert!((g.re - w).abs() < 1e-12 && g.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fractional_global_requires_zero_parity_weight() {
        let g = geom(1024, 4, 1, 1);
        let s = ReducedState::initial(&g);
        let half = s.evolve_global_fractional(&g, 2.5).unwrap();
        assert!((half.norm_sqr() - 1.0).abs() < 1e-12);
        let x = 6.0 * g.angles().theta1;
        assert!((half.a_m.re - x.sin()).abs() < 1e-12);

        let skewed = ReducedState {
            a_m: ZERO,
            a_ntt: ONE,
            a_u: ZERO,
            queries: 0,
        };
        assert!(matches!(
            skewed.evolve_global_fractional(&g, 0.5),
            Err(Error::FractionalParity { .. })
        ));
        assert!(skewed.evolve_global_fractional(&g, 3.0).is_ok());
    }

    #[test]
    fn final_operator_limits() {
        let g = geom(64, 4, 1, 1);
        let minus_identity = Mat3::from_real([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        assert!(final_operator(&g, 0.0, 0.0).max_diff(&minus_identity) < 1e-15);

        // standard phases reproduce -I_s1 I_t
        let (th, ph) = STANDARD_PHASES;
        let pre = ReducedState::initial(&g).evolve_global(&g, 3).evolve_local(&g, 2.0);
        let a = pre.apply_final(&g, th, ph);
        let b = pre.apply_step3(&g, Step3Ordering::OracleThenReflection);
        assert!(a.max_diff(&b) < 1e-12);
    }

    #[test]
    fn final_operator_is_product_of_reflections() {
        let g = geom(256, 8, 2, 2);
        let s = uniform_components(&g);
        let mut seed = 7u64;
        for _ in 0..100 {
            seed = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            let theta = (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * PI;
            let phi = (seed.rotate_left(17) >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * PI;
            let op = final_operator(&g, theta, phi);
            assert!(op.is_unitary(1e-12));

            let p = ONE - Complex64::from_polar(1.0, 2.0 * theta);
            let mut refl = Mat3::identity();
            for i in 0..3 {
                for j in 0..3 {
                    refl.0[i][j] = p * (s[i] * s[j]) - refl.0[i][j];
                }
            }
            let mut oracle = Mat3::identity();
            oracle.0[0][0] = Complex64::from_polar(1.0, phi - theta);
            assert!(op.max_diff(&(refl * oracle)) < 1e-14);
        }
    }

    #[test]
    fn final_matches_full_simulator() {
        let g = geom(256, 8, 2, 2);
        for (theta, phi) in [(0.3, 1.1), (1.2, -0.4), STANDARD_PHASES] {
            let reduced = ReducedState::initial(&g)
                .evolve_global(&g, 4)
                .evolve_local(&g, 3.0)
                .apply_final(&g, theta, phi);
            let exact = full(&g)
                .apply_global_iterations(4)
                .apply_local_iterations(3)
                .apply_phased_final(theta, phi);
            assert!(exact.class_spread() < 1e-12);
            assert!(reduced.max_diff(&exact.class_amplitudes()) < 1e-12);
            assert_eq!(reduced.queries, exact.queries());
        }
    }

    #[test]
    fn step3_matches_full_simulator() {
        let g = geom(256, 8, 2, 2);
        for ord in [Step3Ordering::ReflectionThenOracle, Step3Ordering::OracleThenReflection] {
            let reduced = ReducedState::initial(&g)
                .evolve_global(&g, 5)
                .evolve_local(&g, 2.0)
                .apply_step3(&g, ord);
            let exact = full(&g).apply_global_iterations(5).apply_local_iterations(2).apply_step3(ord);
            assert!(reduced.max_diff(&exact.class_amplitudes()) < 1e-12);
            let rm = reduced.block_marginals(&g);
            let em = exact.block_marginals();
            assert!(rm.iter().zip(&em).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    /// Same equation, built from the intermediate amplitudes instead of the
    /// expanded five-term form.
    fn residual_from_amplitudes(g: &SearchGeometry, j1: f64, j2: f64, ordering: Step3Ordering) -> f64 {
        let a = g.angles();
        let (k, b, t, tau) = (g.k() as f64, g.b() as f64, g.t() as f64, g.tau() as f64);
        let rest = (g.n() - g.z()) as f64;
        let x = (2.0 * j1 + 1.0) * a.theta1;
        let y = 2.0 * j2 * a.theta2;
        let a_nt = x.cos() / rest.sqrt();
        let ratio = ((b - tau) / rest).sqrt();
        let mut a_t = y.cos() * x.sin() / t.sqrt() + ratio * y.sin() * x.cos();
        let a_ntt = -y.sin() * x.sin() / t.sqrt() + ratio * y.cos() * x.cos();
        if ordering.flips_target_first() {
            a_t = -a_t;
        }
        b * (t - k / 2.0) * a_nt - (t * tau.sqrt() * a_t + t * (b - tau).sqrt() * a_ntt)
    }

    #[test]
    fn cancellation_residual_two_codings_agree() {
        for g in [geom(64, 4, 1, 1), geom(1024, 16, 2, 4), geom(256, 8, 3, 5)] {
            for ord in [Step3Ordering::ReflectionThenOracle, Step3Ordering::OracleThenReflection] {
                for (j1, j2) in [(0.0, 0.0), (1.0, 2.0), (3.5, 0.25), (7.0, 9.0)] {
                    let a = cancellation_residual(&g, j1, j2, ord);
                    let b = residual_from_amplitudes(&g, j1, j2, ord);
                    assert!((a - b).abs() < 1e-14, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn cancellation_residual_periodic_in_j2() {
        let g = geom(1024, 4, 1, 1);
        let period = PI / g.angles().theta2;
        for j2 in [0.0, 1.3, 4.0, 9.9] {
            let a = cancellation_residual(&g, 3.0, j2, Step3Ordering::ReflectionThenOracle);
            let b = cancellation_residual(&g, 3.0, j2 + 2.0 * period, Step3Ordering::ReflectionThenOracle);
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn cancellation_root_annihilates_non_target_blocks() {
        let g = geom(1024, 4, 1, 1);
        for ord in [Step3Ordering::ReflectionThenOracle, Step3Ordering::OracleThenReflection] {
            for j1 in [6.0, 8.0, 10.0] {
                let j2 = solve_cancellation_j2(&g, j1, ord).expect("root exists");
                assert!(cancellation_residual(&g, j1, j2, ord).abs() < 1e-11);
                let pre = ReducedState::initial(&g).evolve_global(&g, j1 as u64).evolve_local(&g, j2);
                let post = pre.apply_step3(&g, ord);
                assert!(post.non_target_residual(&g) < 1e-12, "j1={j1} j2={j2}");
                let exact = FullState::from_reduced(TargetPlacement::canonical(&g), &pre)
                    .unwrap()
                    .apply_step3(ord);
                assert!(exact.non_target_residual() < 1e-12);
            }
        }
    }
}
