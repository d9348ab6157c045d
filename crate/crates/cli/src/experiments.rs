//! The five experiment kinds. Each is validated into a plan before any
//! computation starts; only the plan's `execute` does numerical work.

use num_complex::Complex64;
use rayon::prelude::*;
use weakdwell_core::bath::{fit_decay, integrate_bath_with, BathModel, IntegrationOptions, STABILITY_LIMIT};
use weakdwell_core::dwell::{dwell_time, DwellRequest, DwellTimeReport};
use weakdwell_core::pointer::{gaussian_pointer, weak_measure, PointerGrid, PointerWavefunction, SUPPORT_WIDTHS};
use weakdwell_core::qcore::{weak_value, Operator2, SpinState};
use weakdwell_core::weakvalue::{weak_dwell_quadrature, weak_dwell_tanh, PostSelectionKind, PostSelectionSpec};

use crate::config::{Experiment, Params, Scale, SweepSpec};
use crate::error::{CliError, Result};
use crate::output::{Cell, Table};

/// Rows plus experiment-level scalars destined for the metadata block.
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<(String, Cell)>,
}

pub enum Plan {
    BathSim(BathPlan),
    PointerSim(PointerPlan),
    Survival(SurvivalPlan),
    Dwell(DwellRequest),
    Sweep(SweepPlan),
}

impl Plan {
    pub fn build(experiment: Experiment, params: &Params) -> Result<Self> {
        Ok(match experiment {
            Experiment::BathSim => Plan::BathSim(BathPlan::build(params)?),
            Experiment::PointerSim => Plan::PointerSim(PointerPlan::build(params)?),
            Experiment::Survival => Plan::Survival(SurvivalPlan::build(params)?),
            Experiment::Dwell => {
                params.restrict_to(&["omega", "omega_prime", "T"])?;
                Plan::Dwell(dwell_request(params.f64("omega")?, params.f64("omega_prime")?, params.f64("T")?)?)
            }
            Experiment::Sweep => Plan::Sweep(SweepPlan::build(params)?),
        })
    }

    pub fn execute(&self, workers: usize) -> Result<Outcome> {
        match self {
            Plan::BathSim(p) => p.execute(),
            Plan::PointerSim(p) => p.execute(),
            Plan::Survival(p) => p.execute(),
            Plan::Dwell(r) => dwell_record(r),
            Plan::Sweep(p) => p.execute(workers),
        }
    }
}

/// Turns a core validation error into a config error. Core domain errors
/// already name the offending parameter; others fall back to `key`.
fn invalid(err: weakdwell_core::Error, key: &str) -> CliError {
    match err {
        weakdwell_core::Error::DomainError { what, detail } => CliError::config(what, detail),
        other => CliError::config(key, other.to_string()),
    }
}

fn positive(params: &Params, key: &str) -> Result<f64> {
    let v = params.f64(key)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(key, format!("must be positive, got {v}")))
    }
}

pub struct BathPlan {
    model: BathModel,
    t_max: f64,
    dt: f64,
    opts: IntegrationOptions,
    fit_window: Option<(f64, f64)>,
}

impl BathPlan {
    const KEYS: &'static [&'static str] = &[
        "n_levels",
        "delta_e",
        "coupling",
        "t_max",
        "dt",
        "stride",
        "force",
        "norm_tolerance",
        "fit_start",
        "fit_end",
    ];

    fn build(params: &Params) -> Result<Self> {
        params.restrict_to(Self::KEYS)?;
        let model = BathModel::new(params.usize("n_levels")?, params.f64("delta_e")?, params.f64("coupling")?)
            .map_err(|e| invalid(e, "n_levels"))?;
        let t_max = positive(params, "t_max")?;
        let dt = positive(params, "dt")?;
        let opts = IntegrationOptions {
            stride: params.usize_or("stride", 1)?,
            force: params.bool_or("force", false)?,
            norm_tolerance: params.f64_or("norm_tolerance", IntegrationOptions::default().norm_tolerance)?,
        };
        if opts.stride == 0 {
            return Err(CliError::config("stride", "must be at least 1"));
        }
        if !(opts.norm_tolerance > 0.0) {
            return Err(CliError::config("norm_tolerance", "must be positive"));
        }
        let measure = dt * model.stiffness();
        if !opts.force && measure >= STABILITY_LIMIT {
            return Err(CliError::config(
                "dt",
                format!("dt*(N*dE + H*sqrt(N)) = {measure} >= {STABILITY_LIMIT}; reduce dt or set force = true"),
            ));
        }
        let fit_window = match (params.f64_opt("fit_start")?, params.f64_opt("fit_end")?) {
            (None, None) => None,
            (Some(a), Some(b)) => {
                if !(0.0 <= a && a < b && b <= t_max) {
                    return Err(CliError::config(
                        "fit_start",
                        format!("need 0 <= fit_start < fit_end <= t_max, got [{a}, {b}]"),
                    ));
                }
                Some((a, b))
            }
            (Some(_), None) => return Err(CliError::config("fit_end", "required when fit_start is given")),
            (None, Some(_)) => return Err(CliError::config("fit_start", "required when fit_end is given")),
        };
        Ok(Self { model, t_max, dt, opts, fit_window })
    }

    fn execute(&self) -> Result<Outcome> {
        let traj = integrate_bath_with(&self.model, self.t_max, self.dt, self.opts)?;
        let mut table = Table::new(["t", "re_a0", "im_a0", "abs_a0", "norm_total"]);
        for ((&t, a), &n) in traj.times().iter().zip(traj.a0()).zip(traj.norms()) {
            table.push(vec![t.into(), a.re.into(), a.im.into(), a.norm().into(), n.into()]);
        }
        let mut summary = vec![
            ("golden_rule_rate".to_string(), Cell::Num(self.model.golden_rule_rate())),
            ("max_norm_drift".to_string(), Cell::Num(traj.max_norm_drift())),
        ];
        if let Some(window) = self.fit_window {
            let fit = fit_decay(&traj, window)?;
            summary.push(("gamma_fit".into(), Cell::Num(fit.gamma)));
            summary.push(("fit_residual".into(), Cell::Num(fit.residual)));
            summary.push(("fit_samples".into(), Cell::Int(fit.samples as i64)));
        }
        Ok(Outcome { table, summary })
    }
}

pub struct PointerPlan {
    pre: SpinState,
    post: SpinState,
    operator: Operator2,
    coupling: f64,
    pointer: PointerWavefunction,
}

fn named_state(key: &str, name: &str) -> Result<SpinState> {
    Ok(match name {
        "z+" => SpinState::z_plus(),
        "z-" => SpinState::z_minus(),
        "x+" => SpinState::x_plus(),
        "x-" => SpinState::x_minus(),
        "y+" => SpinState::y_plus(),
        "y-" => SpinState::y_minus(),
        _ => return Err(CliError::config(key, format!("`{name}` is not one of z+, z-, x+, x-, y+, y-"))),
    })
}

/// Either `<prefix> = x+` style, or `<prefix>_theta` / `<prefix>_phi` for
/// `cos θ|z+⟩ + e^{iφ} sin θ|z-⟩`.
fn spin_state(params: &Params, prefix: &str) -> Result<SpinState> {
    let theta_key = format!("{prefix}_theta");
    let phi_key = format!("{prefix}_phi");
    match params.get(prefix) {
        Some(name) => {
            if params.contains(&theta_key) || params.contains(&phi_key) {
                return Err(CliError::config(
                    prefix,
                    format!("give either {prefix} or {theta_key}/{phi_key}, not both"),
                ));
            }
            named_state(prefix, name)
        }
        None => {
            let theta = params
                .f64_opt(&theta_key)?
                .ok_or_else(|| CliError::config(prefix, format!("required: {prefix} or {theta_key}")))?;
            let phi = params.f64_or(&phi_key, 0.0)?;
            SpinState::superposition(theta, phi).map_err(|e| invalid(e, &theta_key))
        }
    }
}

impl PointerPlan {
    const KEYS: &'static [&'static str] = &[
        "pre",
        "pre_theta",
        "pre_phi",
        "post",
        "post_theta",
        "post_phi",
        "operator",
        "coupling",
        "delta",
        "q_min",
        "q_max",
        "n_points",
    ];

    fn build(params: &Params) -> Result<Self> {
        params.restrict_to(Self::KEYS)?;
        let pre = spin_state(params, "pre")?;
        let post = spin_state(params, "post")?;
        let operator = match params.choice_or("operator", &["sigma_x", "sigma_y", "sigma_z"], "sigma_z")? {
            "sigma_x" => Operator2::pauli_x(),
            "sigma_y" => Operator2::pauli_y(),
            _ => Operator2::pauli_z(),
        };
        let coupling = params.f64("coupling")?;
        let delta = params.f64_or("delta", 1.0)?;
        if !(delta > 0.0) {
            return Err(CliError::config("delta", "pointer width must be positive"));
        }
        // Pauli eigenvalues are ±1, so the branches sit at ±g.
        let half = SUPPORT_WIDTHS * delta + coupling.abs() + 2.0 * delta;
        let q_min = params.f64_or("q_min", -half)?;
        let q_max = params.f64_or("q_max", half)?;
        let n_points = params.usize_or("n_points", 2048)?;
        let grid = PointerGrid::new(q_min, q_max, n_points).map_err(|e| invalid(e, "n_points"))?;
        let pointer = gaussian_pointer(grid, delta).map_err(|e| invalid(e, "q_min"))?;
        if q_min > -SUPPORT_WIDTHS * delta - coupling.abs() || q_max < SUPPORT_WIDTHS * delta + coupling.abs() {
            return Err(CliError::config("q_min", "grid does not cover the shifted pointer branches"));
        }
        Ok(Self { pre, post, operator, coupling, pointer })
    }

    fn execute(&self) -> Result<Outcome> {
        let aw = weak_value(&self.pre, &self.post, &self.operator)?;
        let outcome = weak_measure(&self.pre, &self.post, &self.operator, self.coupling, &self.pointer)?;
        let pointer = outcome.renormalized_pointer()?;
        let mut table = Table::new(["q", "re", "im", "prob"]);
        for (q, a) in pointer.samples() {
            table.push(vec![q.into(), a.re.into(), a.im.into(), a.norm_sqr().into()]);
        }
        let mut summary = vec![
            ("weak_value_re".to_string(), Cell::Num(aw.re)),
            ("weak_value_im".to_string(), Cell::Num(aw.im)),
            ("mean_q".to_string(), Cell::Num(outcome.mean_q)),
            ("mean_p".to_string(), Cell::Num(outcome.mean_p)),
            ("post_selection_probability".to_string(), Cell::Num(outcome.post_selection_probability)),
        ];
        if self.coupling != 0.0 {
            let d2 = self.pointer.delta() * self.pointer.delta();
            summary.push(("re_estimate".into(), Cell::Num(outcome.mean_q / self.coupling)));
            summary.push(("im_estimate".into(), Cell::Num(outcome.mean_p * d2 / self.coupling)));
        }
        Ok(Outcome { table, summary })
    }
}

pub struct SurvivalPlan {
    spec: PostSelectionSpec,
    points: usize,
}

impl SurvivalPlan {
    const KEYS: &'static [&'static str] = &["gamma", "t_i", "t_f", "kind", "k", "delta_e", "points"];

    fn build(params: &Params) -> Result<Self> {
        params.restrict_to(Self::KEYS)?;
        let gamma = params.f64("gamma")?;
        let t_i = params.f64_or("t_i", 0.0)?;
        let t_f = params.f64("t_f")?;
        let kind = params.choice_or("kind", &["finite_time", "asymptotic"], "finite_time")?;
        let spec = if kind == "asymptotic" {
            PostSelectionSpec::asymptotic(params.i64_or("k", 0)?, params.f64_or("delta_e", 0.0)?, gamma, t_i, t_f)
        } else {
            if params.contains("k") || params.contains("delta_e") {
                return Err(CliError::config("kind", "k and delta_e apply to kind = asymptotic only"));
            }
            PostSelectionSpec::finite_time(gamma, t_i, t_f)
        }
        .map_err(|e| invalid(e, "gamma"))?;
        let points = params.usize_or("points", 201)?;
        if points < 2 {
            return Err(CliError::config("points", "need at least 2"));
        }
        Ok(Self { spec, points })
    }

    fn execute(&self) -> Result<Outcome> {
        let grid = SweepSpec::new("t", self.spec.t_i(), self.spec.t_f(), self.points, Scale::Linear)?;
        let mut table = Table::new(["t", "re_pw", "im_pw"]);
        for t in grid.values() {
            let w: Complex64 = self.spec.survival(t)?.value;
            table.push(vec![t.into(), w.re.into(), w.im.into()]);
        }
        let mut summary = Vec::new();
        if self.spec.kind() == PostSelectionKind::FiniteTime {
            summary.push(("tau_quadrature".to_string(), Cell::Num(weak_dwell_quadrature(&self.spec)?)));
            summary.push(("tau_tanh".to_string(), Cell::Num(weak_dwell_tanh(self.spec.gamma(), self.spec.window()))));
        }
        Ok(Outcome { table, summary })
    }
}

fn dwell_request(omega: f64, omega_prime: f64, window: f64) -> Result<DwellRequest> {
    DwellRequest::new(omega, omega_prime, window).map_err(|e| invalid(e, "omega"))
}

const DWELL_COLUMNS: [&str; 11] = [
    "omega",
    "omega_prime",
    "T",
    "gamma",
    "delta",
    "tau_quadrature",
    "tau_tanh",
    "tau_coth_paper",
    "relative_discrepancy",
    "asymptotic_limit",
    "coth_exceeds_window",
];

fn dwell_row(r: &DwellTimeReport) -> Vec<Cell> {
    vec![
        r.omega.into(),
        r.omega_prime.into(),
        r.window.into(),
        r.gamma.into(),
        r.delta.into(),
        r.tau_quadrature.into(),
        r.tau_tanh.into(),
        r.tau_coth_paper.into(),
        r.relative_discrepancy.into(),
        r.asymptotic_limit.into(),
        r.coth_exceeds_window.into(),
    ]
}

fn dwell_record(request: &DwellRequest) -> Result<Outcome> {
    let report = dwell_time(request)?;
    let mut table = Table::new(DWELL_COLUMNS);
    table.push(dwell_row(&report));
    table.single_record = true;
    Ok(Outcome { table, summary: Vec::new() })
}

pub struct SweepPlan {
    sweep: SweepSpec,
    requests: Vec<DwellRequest>,
}

impl SweepPlan {
    const KEYS: &'static [&'static str] = &["variable", "start", "stop", "steps", "scale", "omega", "omega_prime", "T"];

    fn build(params: &Params) -> Result<Self> {
        params.restrict_to(Self::KEYS)?;
        let variable = params.choice_or("variable", &["T", "omega", "omega_prime"], "T")?;
        if params.contains(variable) {
            return Err(CliError::config(variable, "is the sweep variable and must not be fixed"));
        }
        let scale = match params.choice_or("scale", &["linear", "log"], "linear")? {
            "log" => Scale::Log,
            _ => Scale::Linear,
        };
        let sweep = SweepSpec::new(variable, params.f64("start")?, params.f64("stop")?, params.usize("steps")?, scale)?;
        let fixed = |key: &str, value: f64| if key == variable { Ok(value) } else { params.f64(key) };
        let requests = sweep
            .values()
            .into_iter()
            .map(|v| dwell_request(fixed("omega", v)?, fixed("omega_prime", v)?, fixed("T", v)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { sweep, requests })
    }

    fn execute(&self, workers: usize) -> Result<Outcome> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::config("workers", e.to_string()))?;
        // Indexed collect keeps sweep order whatever the completion order.
        let reports =
            pool.install(|| self.requests.par_iter().map(dwell_time).collect::<weakdwell_core::Result<Vec<_>>>())?;

        let variable = self.sweep.variable.as_str();
        let mut columns = Vec::new();
        if variable != "T" {
            columns.push(variable);
        }
        columns.extend(["T", "gamma", "tau_quadrature", "tau_tanh", "tau_coth_paper"]);
        let mut table = Table::new(columns);
        for (req, r) in self.requests.iter().zip(&reports) {
            let mut row: Vec<Cell> = Vec::new();
            match variable {
                "omega" => row.push(req.omega.into()),
                "omega_prime" => row.push(req.omega_prime.into()),
                _ => {}
            }
            row.extend([r.window, r.gamma, r.tau_quadrature, r.tau_tanh, r.tau_coth_paper].map(Cell::Num));
            table.push(row);
        }
        Ok(Outcome { table, summary: Vec::new() })
    }
}
