//! Run records: one simulation or solve, in the shape the CLI and sweeps emit.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::asymptotic::{full_search_queries, integer_schedule, QuerySchedule};
use crate::config::SearchGeometry;
use crate::error::{Error, Result};
use crate::reduced3d::ReducedState;
use crate::statevector::{max_full_n_from_env, FullState, Step3Ordering, TargetPlacement};
use crate::surephase::{minimal_schedule, verify_sure_success, PhaseSolution};
use crate::VERSION;

/// Above this `N`, [`Engine::Auto`] picks the reduced model.
pub const AUTO_REDUCED_ABOVE: u64 = 1 << 16;

/// Simulation back end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Full,
    Reduced,
    Auto,
}

impl Engine {
    /// Resolves `Auto` for a given `N`.
    pub fn resolve(self, n: u64) -> Engine {
        match self {
            Engine::Auto if n > AUTO_REDUCED_ABOVE => Engine::Reduced,
            Engine::Auto => Engine::Full,
            other => other,
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Engine::Full),
            "reduced" => Ok(Engine::Reduced),
            "auto" => Ok(Engine::Auto),
            other => Err(Error::Parse(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Rounded large-block schedule with the plain last step.
    Asymptotic,
    /// Caller-supplied schedule with the plain last step.
    Exact,
    /// Minimal schedule with phase-matched last step.
    SureSuccess,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Asymptotic => "asymptotic",
            Mode::Exact => "exact",
            Mode::SureSuccess => "sure-success",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(Mode::Asymptotic),
            "exact" => Ok(Mode::Exact),
            "sure-success" | "surephase" => Ok(Mode::SureSuccess),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// Header of the run-record CSV.
pub const CSV_HEADER: &str = "mode,N,K,b,t,tau,j1,j2,theta,phi,total_queries,full_queries,residual,target_mass";

/// Result of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub mode: Mode,
    pub geometry: SearchGeometry,
    pub schedule: QuerySchedule,
    pub engine: Engine,
    pub marginals: Vec<f64>,
    pub total_queries: u64,
    pub full_queries: f64,
    pub residual: f64,
    pub target_mass: f64,
    pub seed: Option<u64>,
    pub sampled_block: Option<usize>,
    pub wall_time_s: f64,
}

impl RunRecord {
    /// One CSV line matching [`CSV_HEADER`]. Deterministic: no timing or version.
    pub fn csv_row(&self) -> String {
        let g = &self.geometry;
        let (theta, phi) = match self.schedule.phases {
            Some((th, ph)) => (format!("{th:.17e}"), format!("{ph:.17e}")),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.17e},{:.6e},{:.17e}",
            self.mode.as_str(),
            g.n(),
            g.k(),
            g.b(),
            g.t(),
            g.tau(),
            self.schedule.j1,
            self.schedule.j2,
            theta,
            phi,
            self.total_queries,
            self.full_queries,
            self.residual,
            self.target_mass,
        )
    }

    /// Whitespace-separated variant of [`Self::csv_row`] for plotting tools;
    /// missing phases print as `nan`.
    pub fn gnuplot_row(&self) -> String {
        self.csv_row()
            .split(',')
            .map(|f| if f.is_empty() { "nan" } else { f })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Runs `schedule` with the plain or phased last step on the chosen engine.
pub fn run_schedule(
    g: &SearchGeometry,
    schedule: &QuerySchedule,
    engine: Engine,
    mode: Mode,
    seed: Option<u64>,
) -> Result<RunRecord> {
    let start = Instant::now();
    let engine = engine.resolve(g.n());
    let (marginals, residual, target_mass) = match engine {
        Engine::Full => {
            let cap = max_full_n_from_env();
            let state = FullState::uniform_with_cap(TargetPlacement::canonical(g), cap)?
                .apply_global_iterations(schedule.j1)
                .apply_local_iterations(schedule.j2);
            let state = match schedule.phases {
                Some((th, ph)) => state.apply_phased_final(th, ph),
                None => state.apply_step3(schedule.ordering),
            };
            (state.block_marginals(), state.non_target_residual(), state.target_mass())
        }
        _ => {
            let state = ReducedState::initial(g)
                .evolve_global(g, schedule.j1)
                .evolve_local(g, schedule.j2 as f64);
            let state = match schedule.phases {
                Some((th, ph)) => state.apply_final(g, th, ph),
                None => state.apply_step3(g, schedule.ordering),
            };
            (state.block_marginals(g), state.non_target_residual(g), state.target_mass())
        }
    };
    let sampled_block = seed.map(|s| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
        crate::statevector::sample_from_marginals(&marginals, &mut rng)
    });
    Ok(RunRecord {
        version: VERSION.to_string(),
        mode,
        geometry: *g,
        schedule: *schedule,
        engine,
        marginals,
        total_queries: schedule.total_queries(),
        full_queries: full_search_queries(g),
        residual,
        target_mass,
        seed,
        sampled_block,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Steps 1-3 with the plain last step for a given `(j1, j2)`.
pub fn simulate(
    g: &SearchGeometry,
    j1: u64,
    j2: u64,
    ordering: Step3Ordering,
    engine: Engine,
    seed: Option<u64>,
) -> Result<RunRecord> {
    run_schedule(g, &QuerySchedule::new(j1, j2, ordering), engine, Mode::Exact, seed)
}

/// The rounded large-block schedule, simulated.
pub fn run_asymptotic(g: &SearchGeometry, engine: Engine) -> Result<RunRecord> {
    run_schedule(g, &integer_schedule(g)?, engine, Mode::Asymptotic, None)
}

/// Minimal sure-success schedule and its solution.
pub fn run_surephase(g: &SearchGeometry) -> Result<(RunRecord, PhaseSolution)> {
    let start = Instant::now();
    let sol = minimal_schedule(g)?;
    let check = verify_sure_success(g, &sol);
    let schedule = QuerySchedule {
        phases: Some((sol.theta, sol.phi)),
        ..QuerySchedule::new(sol.j1, sol.j2, Step3Ordering::OracleThenReflection)
    };
    let record = RunRecord {
        version: VERSION.to_string(),
        mode: Mode::SureSuccess,
        geometry: *g,
        schedule,
        engine: check.engine,
        marginals: check.marginals,
        total_queries: sol.total_queries(),
        full_queries: full_search_queries(g),
        residual: check.residual,
        target_mass: check.target_mass,
        seed: None,
        sampled_block: None,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((record, sol))
}
