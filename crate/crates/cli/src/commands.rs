// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use spinbath::lindblad::{evolve_with, jump_operators, JumpKind, Lindbladian, Propagator};
use spinbath::model::{build_hs, product_gibbs, BathSpec, ChainParams, LindbladModel};
use spinbath::operators::{
    herm_eig, hermitian_part, identity, scale_real, trace, trace_norm, ChainOperator,
};
use spinbath::rqi::{convergence_probe, ConvergenceTable, MAX_RQI_SITES};
use spinbath::sampling::{random_density, rng_for};
use spinbath::steady::{
    compare_closed_form, compare_local_states, local_states, stationary_kernel, stationary_state,
    uniqueness_certificate, ClosedFormComparison, LocalStateComparison, StationaryReport,
};
use spinbath::thermo::{
    detailed_balance_certificate, entropy_production_closed, entropy_production_def,
    relative_entropy, DetailedBalanceReport, EntropyReport,
};
use spinbath::EvolveMethod;

use crate::config::{self, InitialState, Loaded};
use crate::report::{matrix_json, write_csv, write_json, Envelope};
use crate::{Args, CliError, CommandKind};

/// Largest `|Tr ρ(t) − Tr ρ(0)|` tolerated at the end of an evolution.
pub const TRACE_DRIFT_BOUND: f64 = 1e-8;
/// Chains up to this length have proven local-state formulas.
const PROVEN_LOCAL_STATE_SITES: usize = 4;

type Matrix = Vec<Vec<[f64; 2]>>;

struct Ctx {
    loaded: Loaded,
    seed: u64,
    tol: f64,
    out: Option<PathBuf>,
    omit_timing: bool,
    kind: CommandKind,
    start: Instant,
}

impl Ctx {
    fn model(&self) -> &LindbladModel {
        &self.loaded.model
    }

    fn emit<T: Serialize>(&self, body: T) -> Result<(), CliError> {
        let report = Envelope {
            command: self.kind.name(),
            config_digest: &self.loaded.digest,
            wall_time_s: (!self.omit_timing).then(|| self.start.elapsed().as_secs_f64()),
            body,
        };
        write_json(self.out.as_deref(), &report)
    }
}

pub fn run(kind: CommandKind, args: &Args) -> Result<(), CliError> {
    let start = Instant::now();
    let bytes = std::fs::read(&args.config)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", args.config.display())))?;
    let loaded = config::parse(&bytes)?;
    let tol = args.tol.unwrap_or(loaded.tol());
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Validation(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let ctx = Ctx {
        seed: args.seed.unwrap_or(loaded.seed()),
        tol,
        out: args
            .out
            .clone()
            .or_else(|| loaded.config.analysis.output.clone()),
        omit_timing: args.omit_timing,
        kind,
        start,
        loaded,
    };
    match kind {
        CommandKind::Build => build(&ctx),
        CommandKind::Evolve => evolve(&ctx),
        CommandKind::Stationary => stationary(&ctx),
        CommandKind::Entropy => entropy(&ctx),
        CommandKind::DetailedBalance => detailed_balance(&ctx),
        CommandKind::LocalStates => local_states_cmd(&ctx),
        CommandKind::RqiConverge => rqi_converge(&ctx),
    }
}

fn unique_state(model: &LindbladModel) -> Result<ChainOperator, CliError> {
    let k = stationary_kernel(model)?;
    k.state.ok_or_else(|| {
        CliError::Contract(format!(
            "stationary state is not unique (kernel dimension {})",
            k.dimension
        ))
    })
}

/// `(β, β')` when the model is the end-driven chain with unit couplings and `B = 1`.
fn end_driven(model: &LindbladModel) -> Option<(f64, f64)> {
    let n = model.n_sites();
    if n < 2 || model.baths.len() != 2 || model.params != ChainParams::paper_default(n) {
        return None;
    }
    let at = |s: usize| model.baths.iter().find(|b| b.site == s).map(|b| b.beta);
    Some((at(1)?, at(n)?))
}

/// Product Gibbs state at a common temperature, else the stationary state.
fn reference_state(model: &LindbladModel) -> Result<(&'static str, ChainOperator), CliError> {
    match model.common_beta() {
        Some(b) => Ok(("product-gibbs", product_gibbs(b, model.n_sites())?)),
        None => Ok(("stationary", unique_state(model)?)),
    }
}

#[derive(Serialize)]
struct JumpRow {
    label: String,
    bath_index: usize,
    site: usize,
    kind: JumpKind,
    coefficient: f64,
}

#[derive(Serialize)]
struct BuildBody {
    n_sites: usize,
    dim: usize,
    params: ChainParams,
    baths: Vec<BathSpec>,
    hamiltonian_spectrum: Vec<f64>,
    jump_operators: Vec<JumpRow>,
    hamiltonian: Matrix,
}

fn build(ctx: &Ctx) -> Result<(), CliError> {
    let m = ctx.model();
    let hs = build_hs(&m.params)?;
    let jumps = jump_operators(m)?
        .iter()
        .map(|j| JumpRow {
            label: j.label.clone(),
            bath_index: j.bath_index,
            site: j.site,
            kind: j.kind,
            coefficient: j.coefficient,
        })
        .collect();
    ctx.emit(BuildBody {
        n_sites: m.n_sites(),
        dim: m.dim(),
        params: m.params,
        baths: m.baths.clone(),
        hamiltonian_spectrum: herm_eig(hs.matrix())?.eigenvalues,
        jump_operators: jumps,
        hamiltonian: matrix_json(hs.matrix()),
    })
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    trace_distance: f64,
    relative_entropy: f64,
    min_eigenvalue: f64,
    trace_drift: f64,
}

fn evolve(ctx: &Ctx) -> Result<(), CliError> {
    let m = ctx.model();
    let opts = &ctx.loaded.config.analysis.evolve;
    let n = m.n_sites();
    let d = m.dim();
    let rho_inf = unique_state(m)?;
    let (_, reference) = reference_state(m)?;
    let rho0 = match opts.initial {
        InitialState::Random => random_density(d, &mut rng_for(ctx.seed, 0)),
        InitialState::MaximallyMixed => scale_real(&identity(d), 1.0 / d as f64),
        InitialState::AllUp => {
            let mut e = scale_real(&identity(d), 0.0);
            e[(0, 0)].re = 1.0;
            e
        }
    };
    let rho0 = ChainOperator::new(n, rho0)?;
    let tr0 = trace(rho0.matrix()).re;
    let gen = Lindbladian::new(m)?;
    let dt = opts.t_max / opts.steps as f64;
    let prop = match opts.method {
        EvolveMethod::ExactExpm => Some(Propagator::new(&gen, dt)?),
        EvolveMethod::RkAdaptive => None,
    };
    let row = |k: usize, rho: &ChainOperator| -> Result<EvolveRow, CliError> {
        Ok(EvolveRow {
            t: k as f64 * dt,
            trace_distance: trace_norm(&(rho.matrix() - rho_inf.matrix()))?,
            relative_entropy: relative_entropy(rho, &reference)?,
            min_eigenvalue: herm_eig(&hermitian_part(rho.matrix()))?.min_eigenvalue(),
            trace_drift: (trace(rho.matrix()).re - tr0).abs(),
        })
    };
    let mut rows = Vec::with_capacity(opts.steps + 1);
    let mut rho = rho0;
    rows.push(row(0, &rho)?);
    for k in 1..=opts.steps {
        rho = match &prop {
            Some(p) => p.apply(&rho)?,
            None => evolve_with(&gen, &rho, dt, EvolveMethod::RkAdaptive, opts.rk_tol)?.state,
        };
        rows.push(row(k, &rho)?);
    }
    write_csv(ctx.out.as_deref(), &rows)?;
    let drift = rows.last().map_or(0.0, |r| r.trace_drift);
    if drift > TRACE_DRIFT_BOUND {
        return Err(CliError::Contract(format!(
            "final trace drift {drift:e} exceeds {TRACE_DRIFT_BOUND:e}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct StationaryBody {
    #[serde(flatten)]
    report: StationaryReport,
    tolerance: f64,
    state: Option<Matrix>,
    commutant_dimension: usize,
    commutant_generators: Vec<String>,
    jump_span_self_adjoint: bool,
    closed_form: Option<ClosedFormComparison>,
}

fn stationary(ctx: &Ctx) -> Result<(), CliError> {
    let m = ctx.model();
    let report = stationary_state(m)?;
    let cert = uniqueness_certificate(m)?;
    let closed_form = match (end_driven(m), &report.state) {
        (Some((b, bp)), Some(s)) if (2..=4).contains(&m.n_sites()) => {
            Some(compare_closed_form(b, bp, s, ctx.tol)?)
        }
        _ => None,
    };
    let residual = report.residual;
    ctx.emit(StationaryBody {
        state: report.state.as_ref().map(|s| matrix_json(s.matrix())),
        report,
        tolerance: ctx.tol,
        commutant_dimension: cert.commutant.commutant_dimension,
        commutant_generators: cert.commutant.generator_labels,
        jump_span_self_adjoint: cert.span_self_adjoint,
        closed_form,
    })?;
    if residual > ctx.tol {
        return Err(CliError::Contract(format!(
            "stationary residual {residual:e} exceeds {:e}",
            ctx.tol
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct EntropyRow {
    label: String,
    definition: EntropyReport,
    closed_form: Option<EntropyReport>,
    /// `|σ_definition − σ_closed|`.
    agreement: Option<f64>,
}

#[derive(Serialize)]
struct EntropyBody {
    seed: u64,
    tolerance: f64,
    reference: &'static str,
    states: Vec<EntropyRow>,
}

fn entropy(ctx: &Ctx) -> Result<(), CliError> {
    let m = ctx.model();
    let n = m.n_sites();
    let (reference_kind, reference) = reference_state(m)?;
    let eval = |label: String, rho: &ChainOperator| -> Result<EntropyRow, CliError> {
        let definition = entropy_production_def(m, rho, &reference)?;
        let closed_form = match m.common_beta() {
            Some(_) => Some(entropy_production_closed(m, rho)?),
            None => None,
        };
        let agreement = closed_form
            .as_ref()
            .map(|c| (c.sigma_total - definition.sigma_total).abs());
        Ok(EntropyRow {
            label,
            definition,
            closed_form,
            agreement,
        })
    };
    let mut states = vec![eval("stationary".into(), &unique_state(m)?)?];
    let samples: Vec<EntropyRow> = (0..ctx.loaded.config.analysis.entropy.samples)
        .into_par_iter()
        .map(|i| {
            let rho = ChainOperator::new(
                n,
                random_density(m.dim(), &mut rng_for(ctx.seed, 1 + i as u64)),
            )?;
            eval(format!("random-{i}"), &rho)
        })
        .collect::<Result<_, _>>()?;
    states.extend(samples);
    let worst_gap = states
        .iter()
        .filter_map(|s| s.agreement)
        .fold(0.0, f64::max);
    let min_sigma = states
        .iter()
        .map(|s| s.definition.sigma_total)
        .fold(f64::INFINITY, f64::min);
    ctx.emit(EntropyBody {
        seed: ctx.seed,
        tolerance: ctx.tol,
        reference: reference_kind,
        states,
    })?;
    if worst_gap > ctx.tol || min_sigma < -ctx.tol {
        return Err(CliError::Contract(format!(
            "definition and closed form differ by {worst_gap:e}, min production {min_sigma:e}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct BalanceBody {
    reference: &'static str,
    tolerance: f64,
    #[serde(flatten)]
    report: DetailedBalanceReport,
}

fn detailed_balance(ctx: &Ctx) -> Result<(), CliError> {
    let m = ctx.model();
    let (reference, rho) = reference_state(m)?;
    let report = detailed_balance_certificate(m, &rho)?;
    let expected = m.common_beta().is_some();
    let worst = report.commutation_residual.max(report.symmetry_residual);
    ctx.emit(BalanceBody {
        reference,
        tolerance: ctx.tol,
        report,
    })?;
    if expected && worst > ctx.tol {
        return Err(CliError::Contract(format!(
            "equal-temperature residual {worst:e} exceeds {:e}",
            ctx.tol
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct LocalStatesBody {
    tolerance: f64,
    sites: Vec<Matrix>,
    conjecture: Option<LocalStateComparison>,
}

fn local_states_cmd(ctx: &Ctx) -> Result<(), CliError> {
    let m = ctx.model();
    let rho = unique_state(m)?;
    let sites = local_states(&rho)?.iter().map(matrix_json).collect();
    let conjecture = match end_driven(m) {
        Some((b, bp)) => Some(compare_local_states(b, bp, &rho)?),
        None => None,
    };
    let worst = conjecture.as_ref().map_or(0.0, |c| c.max_deviation);
    ctx.emit(LocalStatesBody {
        tolerance: ctx.tol,
        sites,
        conjecture,
    })?;
    if m.n_sites() <= PROVEN_LOCAL_STATE_SITES && worst > ctx.tol {
        return Err(CliError::Contract(format!(
            "local states deviate from the closed form by {worst:e}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ObservableTable {
    observable: String,
    #[serde(flatten)]
    table: ConvergenceTable,
}

#[derive(Serialize)]
struct RqiBody {
    h_grid: Vec<f64>,
    passed: bool,
    observables: Vec<ObservableTable>,
}

fn rqi_converge(ctx: &Ctx) -> Result<(), CliError> {
    let m = ctx.model();
    if m.n_sites() > MAX_RQI_SITES {
        return Err(spinbath::Error::SizeGuard {
            what: "repeated-interaction probe",
            n_sites: m.n_sites(),
            max: MAX_RQI_SITES,
        }
        .into());
    }
    let h_grid = ctx.loaded.h_grid();
    let observables = ctx
        .loaded
        .observables()?
        .into_iter()
        .map(|(observable, x)| {
            Ok(ObservableTable {
                observable,
                table: convergence_probe(&m.params, &m.baths, &h_grid, &x)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let failed: Vec<String> = observables
        .iter()
        .filter(|o| !o.table.passed)
        .map(|o| o.observable.clone())
        .collect();
    ctx.emit(RqiBody {
        h_grid,
        passed: failed.is_empty(),
        observables,
    })?;
    if !failed.is_empty() {
        return Err(CliError::Contract(format!(
            "convergence probe failed for {}",
            failed.join(", ")
        )));
    }
    Ok(())
}
