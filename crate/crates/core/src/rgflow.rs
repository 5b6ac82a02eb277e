//! Renormalization-group flows of the bare mass and the bare coupling.
//!
//! Flows are integrated in `t = ln μ`. The mass flow is nonlinear for
//! `l = 6` because its right-hand side depends on `m₀²` through the tadpole
//! coefficients; the coupling flow is separable and also has a closed form.

use std::f64::consts::PI;

use crate::correlator::s_table;
use crate::dimreg::{xi_series, TheoryConfig, EULER_GAMMA};
use crate::error::{check_positive, Error, Result};
use crate::ode::{self, StepControl, StepStats};
use crate::poly::Polynomial;

/// Fraction of the distance (in ln μ) from `μ_S` to a Landau pole that a
/// flow may cover before it stops.
pub const POLE_MARGIN: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowQuantity {
    MassSq,
    Coupling,
}

impl FlowQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            FlowQuantity::MassSq => "mass_sq",
            FlowQuantity::Coupling => "coupling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    ClosedForm,
    RkAdaptive,
}

impl FlowMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FlowMethod::ClosedForm => "closed_form",
            FlowMethod::RkAdaptive => "rk_adaptive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub mu: f64,
    pub value: f64,
}

/// A sampled RG curve, ordered by strictly increasing μ.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    samples: Vec<FlowSample>,
    pub quantity: FlowQuantity,
    pub method: FlowMethod,
    /// Requested local tolerance (0 for closed forms).
    pub tol: f64,
    pub stats: StepStats,
}

impl FlowTrajectory {
    fn new(
        mut samples: Vec<FlowSample>,
        quantity: FlowQuantity,
        method: FlowMethod,
        tol: f64,
        stats: StepStats,
    ) -> Result<Self> {
        samples.sort_by(|a, b| a.mu.total_cmp(&b.mu));
        if samples.is_empty() {
            return Err(Error::Degenerate("a trajectory needs at least one sample"));
        }
        if samples.windows(2).any(|w| w[1].mu <= w[0].mu) {
            return Err(Error::Degenerate("sample scales must be distinct"));
        }
        if let Some(s) = samples.iter().find(|s| !s.value.is_finite()) {
            return Err(Error::NumericalFailure {
                mu: s.mu,
                value: s.value,
                reason: "non-finite sample".into(),
            });
        }
        Ok(Self {
            samples,
            quantity,
            method,
            tol,
            stats,
        })
    }

    pub fn samples(&self) -> &[FlowSample] {
        &self.samples
    }
}

/// A flow that stopped early, with the samples reached before the stop.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowFailure {
    pub error: Error,
    pub partial: Vec<FlowSample>,
}

impl From<FlowFailure> for Error {
    fn from(f: FlowFailure) -> Self {
        f.error
    }
}

fn require_supported(l: u32) -> Result<()> {
    if l == 4 || l == 6 {
        Ok(())
    } else {
        Err(Error::Capability(format!(
            "RG flows are available for l = 4 and l = 6 (got l = {l})"
        )))
    }
}

/// `n` points from `a` to `b` inclusive, evenly spaced in `ln μ`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    check_positive("grid start", a)?;
    check_positive("grid end", b)?;
    if n < 2 {
        return Ok(vec![a]);
    }
    let (la, lb) = (a.ln(), b.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => a,
            i if i == n - 1 => b,
            i => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

// μ · dm₀²/dμ as a function of (ln μ, m₀²).
fn mass_log_rhs(l: u32, lambda0: f64, m0sq: f64, log_mu: f64) -> Result<f64> {
    let xi = xi_series(m0sq, l / 2 - 1)?;
    let mut sum = 0.0;
    let mut pow_over_fact = 1.0;
    for k in 0..=(l / 2 - 2) as i32 {
        if k > 0 {
            pow_over_fact *= log_mu / k as f64;
        }
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        sum += sign * pow_over_fact * xi.coeff_at(-(k + 1))?;
    }
    Ok(lambda0 * sum)
}

/// `dm₀²/dμ = (λ₀/μ) Σ_{k=0}^{l/2−2} (−1)^{k+1} (ln μ)^k / k! · ξ_{−(k+1)}(m₀²)`
/// with `λ₀ = cfg.coupling()`, evaluated at `(cfg.m0sq(), cfg.mu())`.
pub fn mass_rhs(cfg: &TheoryConfig) -> Result<f64> {
    require_supported(cfg.l())?;
    Ok(mass_log_rhs(cfg.l(), cfg.coupling(), cfg.m0sq(), cfg.mu().ln())? / cfg.mu())
}

/// `m₀²(μ) = m_S² (μ/μ_S)^{λ₀/8π²}`, the exact `l = 4` mass flow.
pub fn mass_flow_l4_closed(m_s_sq: f64, lambda0: f64, mu: f64, mu_s: f64) -> Result<f64> {
    check_positive("m_s_sq", m_s_sq)?;
    check_positive("mu", mu)?;
    check_positive("mu_s", mu_s)?;
    Ok(m_s_sq * (lambda0 / (8.0 * PI * PI) * (mu / mu_s).ln()).exp())
}

// Failure of a two-sided integration: the ODE failure plus the ln-grid
// points actually reached and their values.
struct Partial {
    failure: ode::OdeFailure,
    reached_ln: Vec<f64>,
    values: Vec<f64>,
}

// Integrates dy/dt = rhs(t, y) from (t0, y0) to every point of an ascending
// ln-grid, splitting it into a backward and a forward leg around t0.
fn integrate_both_ways<F>(
    rhs: F,
    t0: f64,
    y0: f64,
    grid_ln: &[f64],
    tol: f64,
) -> std::result::Result<(Vec<f64>, StepStats), Box<Partial>>
where
    F: Fn(f64, f64) -> std::result::Result<f64, String>,
{
    let split = grid_ln.partition_point(|&t| t < t0);
    let ctrl = StepControl::new(tol);
    let below: Vec<f64> = grid_ln[..split].iter().rev().copied().collect();
    let (mut values, mut stats) = match ode::integrate(&rhs, t0, y0, &below, &ctrl) {
        Ok(sol) => (sol.values.into_iter().rev().collect::<Vec<_>>(), sol.stats),
        Err(f) => {
            let reached = f.values.len();
            return Err(Box::new(Partial {
                reached_ln: grid_ln[split - reached..split].to_vec(),
                values: f.values.iter().rev().copied().collect(),
                failure: f,
            }));
        }
    };
    match ode::integrate(&rhs, t0, y0, &grid_ln[split..], &ctrl) {
        Ok(sol) => {
            stats.accepted += sol.stats.accepted;
            stats.rejected += sol.stats.rejected;
            values.extend(sol.values);
            Ok((values, stats))
        }
        Err(f) => {
            values.extend(&f.values);
            Err(Box::new(Partial {
                reached_ln: grid_ln[..split + f.values.len()].to_vec(),
                values,
                failure: f,
            }))
        }
    }
}

fn to_samples(grid: &[f64], values: &[f64]) -> Vec<FlowSample> {
    grid.iter()
        .zip(values)
        .map(|(&mu, &value)| FlowSample { mu, value })
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::Degenerate("empty sample grid"));
    }
    let mut ln = Vec::with_capacity(grid.len());
    for &mu in grid {
        ln.push(check_positive("mu", mu)?.ln());
    }
    if ln.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Degenerate("sample grid must be strictly increasing"));
    }
    Ok(ln)
}

fn failure_from_partial(p: Partial) -> FlowFailure {
    let grid: Vec<f64> = p.reached_ln.iter().map(|t| t.exp()).collect();
    FlowFailure {
        error: Error::NumericalFailure {
            mu: p.failure.t.exp(),
            value: p.failure.y,
            reason: p.failure.reason,
        },
        partial: to_samples(&grid, &p.values),
    }
}

/// Integrates the mass flow from `(cfg.mu_s(), m_s_sq)` to every point of an
/// ascending `grid`, with `λ₀ = cfg.coupling()`.
pub fn integrate_mass_flow_on_grid(
    cfg: &TheoryConfig,
    m_s_sq: f64,
    grid: &[f64],
    tol: f64,
) -> std::result::Result<FlowTrajectory, FlowFailure> {
    let wrap = |error: Error| FlowFailure {
        error,
        partial: Vec::new(),
    };
    require_supported(cfg.l()).map_err(wrap)?;
    check_positive("m_s_sq", m_s_sq).map_err(wrap)?;
    check_positive("tol", tol).map_err(wrap)?;
    let grid_ln = check_grid(grid).map_err(wrap)?;
    let (l, lambda0) = (cfg.l(), cfg.coupling());
    let rhs = |t: f64, y: f64| -> std::result::Result<f64, String> {
        if !(y > 0.0 && y < 1e300) {
            return Err(format!("bare mass squared left (0, 1e300): {y}"));
        }
        mass_log_rhs(l, lambda0, y, t).map_err(|e| e.to_string())
    };
    match integrate_both_ways(rhs, cfg.mu_s().ln(), m_s_sq, &grid_ln, tol) {
        Ok((values, stats)) => FlowTrajectory::new(
            to_samples(grid, &values),
            FlowQuantity::MassSq,
            FlowMethod::RkAdaptive,
            tol,
            stats,
        )
        .map_err(wrap),
        Err(p) => Err(failure_from_partial(*p)),
    }
}

/// Adaptive integration of the mass flow from `(cfg.mu_s(), m_s_sq)` to
/// `mu_end`, sampled at `n_samples` log-spaced scales.
pub fn integrate_mass_flow(
    cfg: &TheoryConfig,
    m_s_sq: f64,
    mu_end: f64,
    tol: f64,
    n_samples: usize,
) -> Result<FlowTrajectory> {
    let (a, b) = (cfg.mu_s(), mu_end);
    let mut grid = log_grid(a.min(b), a.max(b), n_samples.max(2))?;
    grid.dedup();
    Ok(integrate_mass_flow_on_grid(cfg, m_s_sq, &grid, tol)?)
}

/// `z = ln m₀²` and `r = ln(a μ)` with `a = 4π c₀`, `ln c₀ = γ − 1`.
pub fn zr_coordinates(mu: f64, m0sq: f64) -> Result<(f64, f64)> {
    check_positive("mu", mu)?;
    check_positive("m0sq", m0sq)?;
    let a = 4.0 * PI * (EULER_GAMMA - 1.0).exp();
    Ok((m0sq.ln(), (a * mu).ln()))
}

/// Compact `l = 6` mass flow: `dz/dr = (λ₀/64π⁴) e^z (r − z)`.
pub fn mass_rhs_l6_zr(z: f64, r: f64, lambda0: f64) -> f64 {
    lambda0 / (64.0 * PI.powi(4)) * z.exp() * (r - z)
}

/// Coupling-flow data: `λ_S` at `μ_S` and `Λ_0 .. Λ_{l/2−2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFlowParams {
    lambda_s: f64,
    mu_s: f64,
    lambda_table: Vec<f64>,
}

impl CouplingFlowParams {
    pub fn new(lambda_s: f64, mu_s: f64, lambda_table: Vec<f64>) -> Result<Self> {
        if !(lambda_s.is_finite() && lambda_s != 0.0) {
            return Err(Error::Domain {
                name: "lambda_s",
                value: lambda_s,
                reason: "must be finite and nonzero",
            });
        }
        check_positive("mu_s", mu_s)?;
        if lambda_table.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if let Some(c) = lambda_table.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain {
                name: "Lambda coefficient",
                value: *c,
                reason: "must be finite",
            });
        }
        Ok(Self {
            lambda_s,
            mu_s,
            lambda_table,
        })
    }

    pub fn lambda_s(&self) -> f64 {
        self.lambda_s
    }
    pub fn mu_s(&self) -> f64 {
        self.mu_s
    }
    pub fn lambda_table(&self) -> &[f64] {
        &self.lambda_table
    }

    /// Interaction power implied by the table length (`l/2 − 1` entries).
    pub fn l(&self) -> u32 {
        2 * (self.lambda_table.len() as u32 + 1)
    }

    fn check_l(&self, l: u32) -> Result<()> {
        if l == self.l() {
            Ok(())
        } else {
            Err(Error::Domain {
                name: "l",
                value: l as f64,
                reason: "does not match the length of the Lambda table",
            })
        }
    }

    /// `D(x) = 1 + λ_S Σ Λ_k (x^{k+1} − x_S^{k+1})` as a polynomial in `x = ln μ`.
    pub fn denominator(&self) -> Polynomial {
        let xs = self.mu_s.ln();
        let mut c = vec![0.0; self.lambda_table.len() + 1];
        c[0] = 1.0;
        for (k, lam) in self.lambda_table.iter().enumerate() {
            c[k + 1] = self.lambda_s * lam;
            c[0] -= self.lambda_s * lam * xs.powi(k as i32 + 1);
        }
        Polynomial::new(c)
    }

    /// Landau poles: real roots in `ln μ` of the closed-form denominator.
    pub fn landau_poles(&self) -> Vec<f64> {
        self.denominator().real_roots()
    }

    /// Range of `ln μ` around `ln μ_S` that flows may cover:
    /// [`POLE_MARGIN`] of the way to the nearest pole on each side.
    pub fn safe_log_window(&self) -> (f64, f64) {
        let xs = self.mu_s.ln();
        let poles = self.landau_poles();
        let lo = poles
            .iter()
            .filter(|&&p| p < xs)
            .map(|&p| xs + POLE_MARGIN * (p - xs))
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = poles
            .iter()
            .filter(|&&p| p > xs)
            .map(|&p| xs + POLE_MARGIN * (p - xs))
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }
}

/// `Λ_k = S_{l/2−2−k} (−2)^k / (k+1)!`, with `λ_S = cfg.coupling()` at
/// `μ_S = cfg.mu_s()`.
pub fn lambda_coefficients(cfg: &TheoryConfig) -> Result<CouplingFlowParams> {
    require_supported(cfg.l())?;
    let table = lambda_table_from_s(&s_table(cfg)?);
    CouplingFlowParams::new(cfg.coupling(), cfg.mu_s(), table)
}

/// `Λ_0 .. Λ_{l/2−2}` from `S_0 .. S_{l/2−1}`.
pub fn lambda_table_from_s(s: &[f64]) -> Vec<f64> {
    let top = s.len().saturating_sub(2);
    let mut fact = 1.0;
    (0..s.len().saturating_sub(1))
        .map(|k| {
            fact *= (k + 1) as f64;
            s[top - k] * (-2.0f64).powi(k as i32) / fact
        })
        .collect()
}

/// `λ₀(μ) = λ_S / (1 + λ_S Σ_k Λ_k (ln^{k+1} μ − ln^{k+1} μ_S))`.
pub fn coupling_closed(params: &CouplingFlowParams, l: u32, mu: f64) -> Result<f64> {
    coupling_closed_log(params, l, check_positive("mu", mu)?.ln())
}

/// [`coupling_closed`] at `ln μ = x`, for scales beyond the range of `f64`.
pub fn coupling_closed_log(params: &CouplingFlowParams, l: u32, x: f64) -> Result<f64> {
    params.check_l(l)?;
    if !x.is_finite() {
        return Err(Error::Domain {
            name: "ln_mu",
            value: x,
            reason: "must be finite",
        });
    }
    let den = params.denominator().eval(x);
    if den.abs() < 1e-12 {
        let ln_mu = params
            .landau_poles()
            .into_iter()
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
            .unwrap_or(x);
        return Err(Error::LandauPole { ln_mu });
    }
    Ok(params.lambda_s / den)
}

// μ · dλ₀/dμ in terms of t = ln μ, given the S table.
fn coupling_log_rhs(s: &[f64], lambda0: f64, log_mu: f64) -> f64 {
    let top = s.len() - 2;
    let mut sum = 0.0;
    let mut pow_over_fact = 1.0;
    for k in 0..=top {
        if k > 0 {
            pow_over_fact *= -2.0 * log_mu / k as f64;
        }
        sum += pow_over_fact * s[top - k];
    }
    -lambda0 * lambda0 * sum
}

/// `dλ₀/dμ = −λ₀² (1/μ) Σ_{k=0}^{l/2−2} (−2 ln μ)^k / k! · S_{l/2−2−k}`,
/// at `μ = cfg.mu()`.
pub fn coupling_rhs(cfg: &TheoryConfig, lambda0: f64) -> Result<f64> {
    require_supported(cfg.l())?;
    let s = s_table(cfg)?;
    Ok(coupling_log_rhs(&s, lambda0, cfg.mu().ln()) / cfg.mu())
}

/// Closed-form coupling on an ascending grid, stopped short of Landau poles.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSweep {
    pub trajectory: FlowTrajectory,
    /// Scales where the sweep stopped because a pole lies just beyond;
    /// the trajectory includes a sample at each of them.
    pub stops: Vec<f64>,
}

pub fn coupling_flow_closed(params: &CouplingFlowParams, grid: &[f64]) -> Result<CouplingSweep> {
    let grid_ln = check_grid(grid)?;
    let (lo, hi) = params.safe_log_window();
    let l = params.l();
    let mut samples = Vec::with_capacity(grid.len() + 2);
    let mut stops = Vec::new();
    if grid_ln[0] < lo {
        let mu = lo.exp();
        stops.push(mu);
        samples.push(FlowSample {
            mu,
            value: coupling_closed(params, l, mu)?,
        });
    }
    for (&mu, &x) in grid.iter().zip(&grid_ln) {
        if x >= lo && x <= hi {
            samples.push(FlowSample {
                mu,
                value: coupling_closed(params, l, mu)?,
            });
        }
    }
    if grid_ln[grid_ln.len() - 1] > hi {
        let mu = hi.exp();
        stops.push(mu);
        samples.push(FlowSample {
            mu,
            value: coupling_closed(params, l, mu)?,
        });
    }
    samples.dedup_by(|a, b| a.mu == b.mu);
    let trajectory = FlowTrajectory::new(
        samples,
        FlowQuantity::Coupling,
        FlowMethod::ClosedForm,
        0.0,
        StepStats::default(),
    )?;
    Ok(CouplingSweep { trajectory, stops })
}

/// Adaptive integration of the coupling flow from `(cfg.mu_s(), cfg.coupling())`
/// with the S table of `cfg`. Stops with a Landau-pole error, keeping the
/// samples already computed, if the grid reaches past the safe window.
pub fn integrate_coupling_flow(
    cfg: &TheoryConfig,
    grid: &[f64],
    tol: f64,
) -> std::result::Result<FlowTrajectory, FlowFailure> {
    let wrap = |error: Error| FlowFailure {
        error,
        partial: Vec::new(),
    };
    let params = lambda_coefficients(cfg).map_err(wrap)?;
    let s = s_table(cfg).map_err(wrap)?;
    check_positive("tol", tol).map_err(wrap)?;
    let grid_ln = check_grid(grid).map_err(wrap)?;
    let (lo, hi) = params.safe_log_window();
    let first = grid_ln.partition_point(|&x| x < lo);
    let last = grid_ln.partition_point(|&x| x <= hi);
    let rhs =
        |t: f64, y: f64| -> std::result::Result<f64, String> { Ok(coupling_log_rhs(&s, y, t)) };
    let solved = integrate_both_ways(
        rhs,
        cfg.mu_s().ln(),
        cfg.coupling(),
        &grid_ln[first..last],
        tol,
    );
    match solved {
        Ok((values, stats)) => {
            let samples = to_samples(&grid[first..last], &values);
            if first > 0 || last < grid.len() {
                let pole = params
                    .landau_poles()
                    .into_iter()
                    .find(|&p| (first > 0 && p < lo) || (last < grid.len() && p > hi))
                    .unwrap_or(f64::NAN);
                return Err(FlowFailure {
                    error: Error::LandauPole { ln_mu: pole },
                    partial: samples,
                });
            }
            FlowTrajectory::new(
                samples,
                FlowQuantity::Coupling,
                FlowMethod::RkAdaptive,
                tol,
                stats,
            )
            .map_err(wrap)
        }
        Err(p) => Err(failure_from_partial(*p)),
    }
}
