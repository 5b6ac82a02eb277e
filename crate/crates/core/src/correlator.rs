//! Correlator coefficient series and their projected finite parts.
//!
//! β coefficients are read off the traces at unit coupling; the coupling
//! itself enters only where a physical quantity is assembled
//! ([`physical_mass_first_order`] and the flows in [`crate::rgflow`]).

use crate::dimreg::{bubble_finite_r0, xi_series_from, CoefficientTables, TheoryConfig};
use crate::error::{Error, Result};
use crate::laurent::{mu_power_factor, LaurentSeries};

/// Channel invariants (Mandelstam `s, t, u`, or a single combined `r²`).
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    channels: Vec<f64>,
}

impl Kinematics {
    pub fn new(channels: Vec<f64>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Degenerate("kinematics needs at least one channel"));
        }
        if let Some(z) = channels.iter().find(|z| !z.is_finite()) {
            return Err(Error::Domain {
                name: "channel",
                value: *z,
                reason: "must be finite",
            });
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[f64] {
        &self.channels
    }
}

/// First-order two-point correction.
#[derive(Debug, Clone, PartialEq)]
pub struct MassCorrection {
    /// Projected finite coefficient `β₀^(l,2,1)`.
    pub beta0: f64,
    /// Trace series at unit coupling, poles included.
    pub series: LaurentSeries,
    pub l: u32,
    pub m0sq: f64,
    pub mu: f64,
}

/// Second-order l-point vertex, projected onto its finite part.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCorrection {
    /// `S_0 .. S_{l/2-1}`.
    pub s_table: Vec<f64>,
    /// μ-dependent constant part of the ε⁰ coefficient.
    pub constant_part: f64,
    /// Kinematic finite part, only available for `l = 4`.
    pub f0: Option<f64>,
    /// `constant_part + f0` (the latter when present).
    pub beta0: f64,
}

impl VertexCorrection {
    pub fn f0_included(&self) -> bool {
        self.f0.is_some()
    }
}

fn factorials(n: usize) -> impl Iterator<Item = f64> {
    (0..n).scan(1.0, |acc, k| {
        if k > 0 {
            *acc *= k as f64;
        }
        Some(*acc)
    })
}

fn require_order(series: &LaurentSeries, k: i32, l: u32, what: &str) -> Result<f64> {
    series.coeff_at(k).map_err(|_| {
        Error::Capability(format!(
            "{what} for l = {l} needs ε^{k}, but the coefficient tables are only reliable through ε^{}",
            series.max_reliable_order()
        ))
    })
}

fn check_close(what: &'static str, left: f64, right: f64, scale: f64, tol: f64) -> Result<()> {
    if (left - right).abs() <= tol * scale.max(f64::MIN_POSITIVE) {
        Ok(())
    } else {
        Err(Error::InternalConsistency { what, left, right })
    }
}

/// `Tr ρ_int` of the first-order two-point function:
/// `−λ₀ μ^{−ε} [Δ(0)]^{l/2−1}`.
pub fn two_point_trace_series(cfg: &TheoryConfig, lambda0: f64) -> Result<LaurentSeries> {
    two_point_trace_series_with(cfg, lambda0, &CoefficientTables::standard(cfg.m0sq())?)
}

pub fn two_point_trace_series_with(
    cfg: &TheoryConfig,
    lambda0: f64,
    tables: &CoefficientTables,
) -> Result<LaurentSeries> {
    let power = cfg.half_minus_one();
    let xi = xi_series_from(&tables.alpha, power);
    let order = (xi.max_reliable_order() + power as i32).max(0) as u32;
    let mu_factor = mu_power_factor(cfg.mu(), 1, order)?;
    let series = mu_factor.mul(&xi).scale(-lambda0);
    require_order(&series, 0, cfg.l(), "two-point trace")?;
    Ok(series)
}

/// `β₀^(l,2,1) = −Σ_{k=0}^{l/2−1} (−ln μ)^k / k! · ξ_{−k}`, cross-checked
/// against the ε⁰ coefficient of the trace series at unit coupling.
pub fn two_point_beta0(cfg: &TheoryConfig) -> Result<MassCorrection> {
    two_point_beta0_with(cfg, &CoefficientTables::standard(cfg.m0sq())?)
}

pub fn two_point_beta0_with(
    cfg: &TheoryConfig,
    tables: &CoefficientTables,
) -> Result<MassCorrection> {
    let series = two_point_trace_series_with(cfg, 1.0, tables)?;
    let xi = xi_series_from(&tables.alpha, cfg.half_minus_one());
    let log_mu = cfg.mu().ln();
    let n = cfg.half_minus_one() as usize + 1;
    let mut closed = 0.0;
    let mut scale = 0.0;
    for (k, fact) in factorials(n).enumerate() {
        let xi_k = require_order(&xi, -(k as i32), cfg.l(), "two-point beta0")?;
        let term = (-log_mu).powi(k as i32) / fact * xi_k;
        closed -= term;
        scale += term.abs();
    }
    let from_series = series.finite_part()?;
    check_close("two-point beta0", closed, from_series, scale, 1e-10)?;
    Ok(MassCorrection {
        beta0: closed,
        series,
        l: cfg.l(),
        m0sq: cfg.m0sq(),
        mu: cfg.mu(),
    })
}

/// `S_n = Σ_{k=0}^{n} ξ^{(l−2)}_{k−(l/2−2)} η_{n−k−1}` for `n = 0..l/2−1`.
pub fn s_table(cfg: &TheoryConfig) -> Result<Vec<f64>> {
    s_table_with(cfg, &CoefficientTables::standard(cfg.m0sq())?)
}

pub fn s_table_with(cfg: &TheoryConfig, tables: &CoefficientTables) -> Result<Vec<f64>> {
    let inner = cfg.half_minus_one() - 1;
    let xi = xi_series_from(&tables.alpha, inner);
    let shift = inner as i32;
    (0..=cfg.half_minus_one() as i32)
        .map(|n| {
            (0..=n).try_fold(0.0, |acc, k| {
                let x = require_order(&xi, k - shift, cfg.l(), "S table")?;
                let eta = tables.bubble.get(n - k - 1).ok_or_else(|| {
                    Error::Capability(format!(
                        "S table for l = {} needs η_{}, beyond the bubble table",
                        cfg.l(),
                        n - k - 1
                    ))
                })?;
                Ok(acc + x * eta)
            })
        })
        .collect()
}

/// Pole and finite block of the second-order l-point vertex, without the
/// kinematic `f` terms: `μ^{−2ε} ε^{−(l/2−1)} Σ_n S_n ε^n`.
pub fn vertex_series(cfg: &TheoryConfig) -> Result<LaurentSeries> {
    vertex_series_with(cfg, &CoefficientTables::standard(cfg.m0sq())?)
}

pub fn vertex_series_with(cfg: &TheoryConfig, tables: &CoefficientTables) -> Result<LaurentSeries> {
    let s = s_table_with(cfg, tables)?;
    let n = cfg.half_minus_one();
    let s_series = LaurentSeries::new(-(n as i32), s)?;
    let mu_factor = mu_power_factor(cfg.mu(), 2, n)?;
    Ok(mu_factor.mul(&s_series))
}

/// Finite part of the vertex: `Σ_{k=0}^{l/2−1} (−2 ln μ)^k / k! · S_{l/2−1−k}`
/// plus, for `l = 4` with kinematics, `f₀ = Σ_channels R₀(z)`.
pub fn vertex_finite(cfg: &TheoryConfig, kin: Option<&Kinematics>) -> Result<VertexCorrection> {
    vertex_finite_with(cfg, kin, &CoefficientTables::standard(cfg.m0sq())?)
}

pub fn vertex_finite_with(
    cfg: &TheoryConfig,
    kin: Option<&Kinematics>,
    tables: &CoefficientTables,
) -> Result<VertexCorrection> {
    let f0 = match (cfg.l(), kin) {
        (_, None) => None,
        (4, Some(k)) => Some(
            k.channels()
                .iter()
                .map(|z| bubble_finite_r0(*z, cfg.m0sq()))
                .sum::<Result<f64>>()?,
        ),
        (l, Some(_)) => {
            return Err(Error::Capability(format!(
                "kinematic finite part f0 is only available for l = 4 (got l = {l})"
            )))
        }
    };
    let s = s_table_with(cfg, tables)?;
    let top = cfg.half_minus_one() as usize;
    let x = -2.0 * cfg.mu().ln();
    let mut constant = 0.0;
    let mut scale = 0.0;
    for (k, fact) in factorials(top + 1).enumerate() {
        let term = x.powi(k as i32) / fact * s[top - k];
        constant += term;
        scale += term.abs();
    }
    let from_series = vertex_series_with(cfg, tables)?.finite_part()?;
    check_close("vertex finite part", constant, from_series, scale, 1e-10)?;
    Ok(VertexCorrection {
        s_table: s,
        constant_part: constant,
        f0,
        beta0: constant + f0.unwrap_or(0.0),
    })
}

/// `m² = m₀² − λ₀ β₀^(l,2,1)` at first order, with `λ₀ = cfg.coupling()`.
pub fn physical_mass_first_order(cfg: &TheoryConfig) -> Result<f64> {
    Ok(cfg.m0sq() - cfg.coupling() * two_point_beta0(cfg)?.beta0)
}
