//! Dispatch from a validated [`RunConfig`] to the library, producing a
//! [`Report`] that the output layer renders as JSON or CSV.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use phirg_core::correlator::{
    physical_mass_first_order, two_point_beta0, vertex_finite, vertex_series, Kinematics,
};
use phirg_core::dimreg::{alpha_table, bubble_table, xi_series, TheoryConfig};
use phirg_core::rgflow::{
    coupling_closed_log, integrate_mass_flow_on_grid, lambda_coefficients, lambda_table_from_s,
    mass_flow_l4_closed,
};
use phirg_core::statespace::{factorize, project_nondiagonal, RootChoice};
use phirg_core::validity::{to_distance, validity_intervals, validity_l4_bound, validity_l6_qv};
use phirg_core::LaurentSeries;

use crate::config::{Command, RunConfig, Sweep, Task};
use crate::error::{num, CliError};

/// One rendered result: a JSON value block plus its CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub quantity: &'static str,
    pub inputs: Map<String, Value>,
    pub values: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub formulas: Vec<&'static str>,
}

/// A run that failed after producing usable partial output.
#[derive(Debug)]
pub struct Failure {
    pub error: CliError,
    pub partial: Option<Box<Report>>,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Failure {
            error,
            partial: None,
        }
    }
}

impl From<phirg_core::Error> for Failure {
    fn from(e: phirg_core::Error) -> Self {
        CliError::from(e).into()
    }
}

/// Shortest round-trip decimal; `inf`, `-inf` and `nan` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    match serde_json::Number::from_f64(x) {
        Some(n) => n.to_string(),
        None if x.is_nan() => "nan".into(),
        None if x > 0.0 => "inf".into(),
        None => "-inf".into(),
    }
}

fn series_json(s: &LaurentSeries) -> Value {
    json!({
        "min_order": s.min_order(),
        "max_reliable_order": s.max_reliable_order(),
        "coeffs": s.coeffs().iter().map(|c| num(*c)).collect::<Vec<_>>(),
    })
}

fn series_rows(name: &str, s: &LaurentSeries, rows: &mut Vec<Vec<String>>) {
    for (k, c) in s.iter() {
        rows.push(vec![format!("{name}_{k}"), fmt_f64(c)]);
    }
}

fn list_rows(name: &str, v: &[f64], rows: &mut Vec<Vec<String>>) {
    for (i, c) in v.iter().enumerate() {
        rows.push(vec![format!("{name}_{i}"), fmt_f64(*c)]);
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn sweep_inputs(s: &Sweep) -> Value {
    json!({
        "mu-start": num(s.start),
        "mu-end": num(s.end),
        "points": s.points,
        "scale": s.scale.name(),
    })
}

pub fn run(cfg: &RunConfig) -> Result<Report, Failure> {
    match &cfg.task {
        Task::Coeffs { l, m0sq } => coeffs(*l, *m0sq),
        Task::Beta0 {
            l,
            m0sq,
            mu,
            lambda0,
        } => beta0(*l, *m0sq, *mu, *lambda0),
        Task::Vertex {
            l,
            m0sq,
            mu,
            channels,
        } => vertex(*l, *m0sq, *mu, channels.as_deref()),
        Task::Factorize { beta, gauge } => factorization(beta, *gauge),
        Task::MassFlow {
            l,
            m0sq_init,
            lambda0,
            mu_s,
            sweep,
            tol,
        } => mass_flow(*l, *m0sq_init, *lambda0, *mu_s, sweep, *tol),
        Task::CouplingFlow {
            l,
            m0sq,
            lambda_s,
            mu_s,
            sweep,
        } => coupling_flow(*l, *m0sq, *lambda_s, *mu_s, sweep),
        Task::Validity {
            l,
            m0sq,
            lambda_s,
            mu_s,
            as_distance,
        } => validity(*l, *m0sq, *lambda_s, *mu_s, *as_distance),
    }
}

fn coeffs(l: u32, m0sq: f64) -> Result<Report, Failure> {
    let cfg = TheoryConfig::new(l, m0sq)?;
    let alpha = alpha_table(m0sq)?.series();
    let eta = bubble_table(m0sq)?.series();
    let power = cfg.half_minus_one();
    let xi = xi_series(m0sq, power)?;
    let s = phirg_core::correlator::s_table(&cfg)?;
    let lambda = lambda_table_from_s(&s);

    let mut rows = Vec::new();
    series_rows("alpha", &alpha, &mut rows);
    series_rows("eta", &eta, &mut rows);
    series_rows("xi", &xi, &mut rows);
    list_rows("S", &s, &mut rows);
    list_rows("Lambda", &lambda, &mut rows);

    let mut xi_json = obj(series_json(&xi));
    xi_json.insert("power".into(), json!(power));
    Ok(Report {
        command: Command::Coeffs,
        quantity: "coefficient_tables",
        inputs: obj(json!({ "l": l, "m0sq": num(m0sq) })),
        values: json!({
            "alpha": series_json(&alpha),
            "eta": series_json(&eta),
            "xi": Value::Object(xi_json),
            "S": nums(&s),
            "Lambda": nums(&lambda),
        }),
        header: vec!["name", "value"],
        rows,
        formulas: vec![
            "one-loop tadpole expansion alpha_j(m0sq)",
            "one-loop bubble expansion eta_i(m0sq)",
            "tadpole power xi = alpha^(l/2-1)",
            "S_n: convolution of xi^(l-2) with eta",
            "Lambda_k = S_(l/2-2-k) (-2)^k / (k+1)!",
        ],
    })
}

fn beta0(l: u32, m0sq: f64, mu: f64, lambda0: Option<f64>) -> Result<Report, Failure> {
    let cfg = TheoryConfig::new(l, m0sq)?.with_mu(mu)?;
    let mc = two_point_beta0(&cfg)?;
    let mut rows = vec![vec!["beta0".to_string(), fmt_f64(mc.beta0)]];
    series_rows("trace", &mc.series, &mut rows);
    let mut values = obj(json!({
        "beta0": num(mc.beta0),
        "trace_series": series_json(&mc.series),
    }));
    let mut inputs = obj(json!({ "l": l, "m0sq": num(m0sq), "mu": num(mu) }));
    let mut formulas = vec![
        "two-point trace: -lambda0 mu^(-eps) [tadpole]^(l/2-1)",
        "beta0 = -sum_k (-ln mu)^k / k! xi_(-k), cross-checked against the series",
    ];
    if let Some(lam) = lambda0 {
        let m2 = physical_mass_first_order(&cfg.with_coupling(lam)?)?;
        values.insert("physical_mass_sq".into(), num(m2));
        inputs.insert("lambda0".into(), num(lam));
        rows.push(vec!["physical_mass_sq".into(), fmt_f64(m2)]);
        formulas.push("first-order physical mass m^2 = m0sq - lambda0 beta0");
    }
    Ok(Report {
        command: Command::Beta0,
        quantity: "two_point_beta0",
        inputs,
        values: Value::Object(values),
        header: vec!["name", "value"],
        rows,
        formulas,
    })
}

fn vertex(l: u32, m0sq: f64, mu: f64, channels: Option<&[f64]>) -> Result<Report, Failure> {
    let cfg = TheoryConfig::new(l, m0sq)?.with_mu(mu)?;
    let kin = channels.map(|c| Kinematics::new(c.to_vec())).transpose()?;
    let v = vertex_finite(&cfg, kin.as_ref())?;
    let series = vertex_series(&cfg)?;

    let mut rows = vec![
        vec!["beta0".to_string(), fmt_f64(v.beta0)],
        vec!["constant_part".to_string(), fmt_f64(v.constant_part)],
    ];
    if let Some(f0) = v.f0 {
        rows.push(vec!["f0".into(), fmt_f64(f0)]);
    }
    rows.push(vec!["f0_included".into(), v.f0_included().to_string()]);
    list_rows("S", &v.s_table, &mut rows);
    series_rows("series", &series, &mut rows);

    let mut inputs = obj(json!({ "l": l, "m0sq": num(m0sq), "mu": num(mu) }));
    if let Some(c) = channels {
        inputs.insert("s".into(), num(c[0]));
        inputs.insert("t".into(), num(c[1]));
        inputs.insert("u".into(), num(c[2]));
    }
    let mut formulas = vec![
        "vertex pole block mu^(-2 eps) eps^(-(l/2-1)) sum_n S_n eps^n",
        "finite part sum_k (-2 ln mu)^k / k! S_(l/2-1-k), cross-checked against the series",
    ];
    if v.f0_included() {
        formulas.push("kinematic part f0 = sum over channels of the bubble finite part R0");
    }
    Ok(Report {
        command: Command::Vertex,
        quantity: "vertex_beta0",
        inputs,
        values: json!({
            "beta0": num(v.beta0),
            "constant_part": num(v.constant_part),
            "f0": v.f0.map_or(Value::Null, num),
            "f0_included": v.f0_included(),
            "S": nums(&v.s_table),
            "series": series_json(&series),
        }),
        header: vec!["name", "value"],
        rows,
        formulas,
    })
}

fn factorization(beta: &[f64], gauge: f64) -> Result<Report, Failure> {
    let loops = beta.len() - 1;
    let series = LaurentSeries::new(-(loops as i32), beta.to_vec())?;
    let f = factorize(&series, loops, gauge, RootChoice::Smaller)?;
    let projected = project_nondiagonal(&f);

    let mut rows = Vec::new();
    let mut loop_json = Vec::new();
    for (i, w) in f.loops().iter().enumerate() {
        rows.push(vec![format!("rho_d_{}", i + 1), fmt_f64(w.rho_d)]);
        rows.push(vec![format!("rho_nd_{}", i + 1), fmt_f64(w.rho_nd)]);
        loop_json.push(json!({ "rho_d": num(w.rho_d), "rho_nd": num(w.rho_nd) }));
    }
    rows.push(vec!["projected".into(), fmt_f64(projected)]);

    let names = ["beta-2", "beta-1", "beta-0"];
    let mut inputs = Map::new();
    for (name, b) in names[3 - beta.len()..].iter().zip(beta) {
        inputs.insert((*name).into(), num(*b));
    }
    inputs.insert("gauge".into(), num(gauge));
    let mut values = obj(json!({
        "loops": loop_json,
        "projected": num(projected),
    }));
    if loops == 2 {
        values.insert("root".into(), json!("smaller"));
        values.insert(
            "discriminant".into(),
            num(beta[1] * beta[1] - 4.0 * beta[0] * beta[2]),
        );
    }
    Ok(Report {
        command: Command::Factorize,
        quantity: "loop_factorization",
        inputs,
        values: Value::Object(values),
        header: vec!["name", "value"],
        rows,
        formulas: vec![
            "trace over internal states prod_i (rho_D^i / eps + rho_ND^i)",
            "observable-state projection prod_i rho_ND^i",
        ],
    })
}

fn sample_rows(samples: &[(f64, f64)]) -> (Vec<Vec<String>>, Value) {
    let rows = samples
        .iter()
        .map(|(mu, v)| vec![fmt_f64(*mu), fmt_f64(*v)])
        .collect();
    let json = samples
        .iter()
        .map(|(mu, v)| json!({ "mu": num(*mu), "value": num(*v) }))
        .collect();
    (rows, Value::Array(json))
}

fn mass_flow(
    l: u32,
    m_init: f64,
    lambda0: f64,
    mu_s: f64,
    sweep: &Sweep,
    tol: f64,
) -> Result<Report, Failure> {
    let cfg = TheoryConfig::new(l, m_init)?
        .with_coupling(lambda0)?
        .with_mu_s(mu_s)?;
    let grid = sweep.grid();
    let mut inputs = obj(sweep_inputs(sweep));
    inputs.extend(obj(json!({
        "l": l,
        "m0sq-init": num(m_init),
        "lambda0": num(lambda0),
        "mu-s": num(mu_s),
        "tol": num(tol),
    })));
    let build = |samples: Vec<(f64, f64)>, extra: Map<String, Value>| {
        let (rows, json_samples) = sample_rows(&samples);
        let mut values = obj(json!({ "method": "rk_adaptive", "samples": json_samples }));
        values.extend(extra);
        Report {
            command: Command::MassFlow,
            quantity: "mass_sq",
            inputs: inputs.clone(),
            values: Value::Object(values),
            header: vec!["mu", "value"],
            rows,
            formulas: vec![
                "mass flow dm0sq/dmu = (lambda0/mu) sum_k (-1)^(k+1) (ln mu)^k / k! xi_(-(k+1))",
                "Dormand-Prince 5(4) in ln mu with continuous extension",
            ],
        }
    };
    match integrate_mass_flow_on_grid(&cfg, m_init, &grid, tol) {
        Ok(traj) => {
            let samples: Vec<(f64, f64)> = traj.samples().iter().map(|s| (s.mu, s.value)).collect();
            let mut extra = obj(json!({
                "steps": { "accepted": traj.stats.accepted, "rejected": traj.stats.rejected },
            }));
            if l == 4 {
                let closed: Vec<f64> = samples
                    .iter()
                    .map(|(mu, _)| mass_flow_l4_closed(m_init, lambda0, *mu, mu_s))
                    .collect::<Result<_, _>>()?;
                extra.insert("closed_form".into(), nums(&closed));
            }
            Ok(build(samples, extra))
        }
        Err(fail) => {
            let samples = fail.partial.iter().map(|s| (s.mu, s.value)).collect();
            let extra = obj(json!({ "partial": true }));
            Err(Failure {
                error: fail.error.into(),
                partial: Some(Box::new(build(samples, extra))),
            })
        }
    }
}

fn coupling_flow(
    l: u32,
    m0sq: f64,
    lambda_s: f64,
    mu_s: f64,
    sweep: &Sweep,
) -> Result<Report, Failure> {
    let cfg = TheoryConfig::new(l, m0sq)?
        .with_coupling(lambda_s)?
        .with_mu_s(mu_s)?;
    let params = lambda_coefficients(&cfg)?;
    let (lo, hi) = params.safe_log_window();

    // (ln μ, flagged) in ascending order.
    let mut points: Vec<(f64, bool)> = Vec::with_capacity(sweep.points + 2);
    let grid_ln: Vec<f64> = sweep.grid().iter().map(|m| m.ln()).collect();
    if grid_ln[0] < lo {
        points.push((lo, true));
    }
    points.extend(
        grid_ln
            .iter()
            .filter(|&&x| x >= lo && x <= hi)
            .map(|&x| (x, false)),
    );
    if grid_ln[grid_ln.len() - 1] > hi {
        points.push((hi, true));
    }
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(x, _)| coupling_closed_log(&params, l, x))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(points.len());
    let mut samples = Vec::with_capacity(points.len());
    for (&(x, flagged), &v) in points.iter().zip(&values) {
        let mu = x.exp();
        let flag = if flagged { "pole_ahead" } else { "" };
        rows.push(vec![fmt_f64(mu), fmt_f64(v), flag.to_string()]);
        let mut s = obj(json!({ "mu": num(mu), "value": num(v) }));
        if flagged {
            s.insert("flag".into(), json!(flag));
        }
        samples.push(Value::Object(s));
    }
    let mut inputs = obj(sweep_inputs(sweep));
    inputs.extend(obj(json!({
        "l": l,
        "m0sq": num(m0sq),
        "lambda-s": num(lambda_s),
        "mu-s": num(mu_s),
    })));
    Ok(Report {
        command: Command::CouplingFlow,
        quantity: "coupling",
        inputs,
        values: json!({
            "method": "closed_form",
            "Lambda": nums(params.lambda_table()),
            "landau_poles_ln_mu": nums(&params.landau_poles()),
            "samples": samples,
        }),
        header: vec!["mu", "value", "flag"],
        rows,
        formulas: vec![
            "running coupling lambda_S / (1 + lambda_S sum_k Lambda_k (ln^(k+1) mu - ln^(k+1) mu_S))",
            "Lambda_k = S_(l/2-2-k) (-2)^k / (k+1)!",
            "sweep stops 1% (in ln mu) short of a Landau pole",
        ],
    })
}

fn validity(
    l: u32,
    m0sq: f64,
    lambda_s: f64,
    mu_s: f64,
    as_distance: bool,
) -> Result<Report, Failure> {
    let cfg = TheoryConfig::new(l, m0sq)?
        .with_coupling(lambda_s)?
        .with_mu_s(mu_s)?;
    let params = lambda_coefficients(&cfg)?;
    let mut dom = validity_intervals(&params, l)?;
    if as_distance {
        dom = to_distance(&dom);
    }
    let mut rows = Vec::new();
    let mut intervals = Vec::new();
    for iv in &dom.intervals {
        rows.push(vec![fmt_f64(iv.lo()), fmt_f64(iv.hi())]);
        intervals.push(json!({
            "lo": num(iv.lo()),
            "hi": num(iv.hi()),
            "ln_lo": num(iv.ln_lo),
            "ln_hi": num(iv.ln_hi),
        }));
    }
    let closed = match l {
        4 => validity_l4_bound(&params)
            .ok()
            .map(|b| json!({ "ln_mu_bound": num(b) })),
        6 => validity_l6_qv(&params)
            .ok()
            .map(|(q, v)| json!({ "q": num(q), "v": num(v) })),
        _ => None,
    };
    let mut formulas = vec![
        "validity |lambda0(mu)| < 1 as P(ln mu) = 1/lambda_S - 1 + sum_k Lambda_k ln^(k+1) mu > 0",
        "real roots of P isolated by derivative recursion and bisection",
    ];
    if as_distance {
        formulas.push("distance scale d = 1/mu");
    }
    Ok(Report {
        command: Command::Validity,
        quantity: "validity_domain",
        inputs: obj(json!({
            "l": l,
            "m0sq": num(m0sq),
            "lambda-s": num(lambda_s),
            "mu-s": num(mu_s),
            "as-distance": as_distance,
        })),
        values: json!({
            "variable": dom.variable.name(),
            "intervals": intervals,
            "closed_form": closed.unwrap_or(Value::Null),
        }),
        header: vec!["lo", "hi"],
        rows,
        formulas,
    })
}
