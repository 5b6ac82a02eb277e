//! Dimensional-regularization coefficient tables: the tadpole `Δ(0)`, its
//! integer powers, and the one-loop bubble.

use std::f64::consts::PI;

use crate::error::{check_positive, Error, Result};
use crate::laurent::LaurentSeries;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Physical parameters shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConfig {
    l: u32,
    m0sq: f64,
    mu: f64,
    mu_s: f64,
    coupling: f64,
}

impl TheoryConfig {
    /// φ^l theory with bare mass² `m0sq`; `mu = mu_s = 1`, zero coupling.
    pub fn new(l: u32, m0sq: f64) -> Result<Self> {
        if l < 4 || !l.is_multiple_of(2) {
            return Err(Error::Domain {
                name: "l",
                value: l as f64,
                reason: "must be even and >= 4",
            });
        }
        Ok(Self {
            l,
            m0sq: check_positive("m0sq", m0sq)?,
            mu: 1.0,
            mu_s: 1.0,
            coupling: 0.0,
        })
    }

    pub fn with_m0sq(mut self, m0sq: f64) -> Result<Self> {
        self.m0sq = check_positive("m0sq", m0sq)?;
        Ok(self)
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        self.mu = check_positive("mu", mu)?;
        Ok(self)
    }

    pub fn with_mu_s(mut self, mu_s: f64) -> Result<Self> {
        self.mu_s = check_positive("mu_s", mu_s)?;
        Ok(self)
    }

    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::Domain {
                name: "coupling",
                value: coupling,
                reason: "must be finite",
            });
        }
        self.coupling = coupling;
        Ok(self)
    }

    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn m0sq(&self) -> f64 {
        self.m0sq
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn mu_s(&self) -> f64 {
        self.mu_s
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// `l/2 - 1`: tadpole power of the first-order two-point function and the
    /// loop count of the second-order l-point vertex.
    pub fn half_minus_one(&self) -> u32 {
        self.l / 2 - 1
    }
}

/// Tadpole expansion coefficients `α_j`, stored from `j = -1` upward.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    coeffs: Vec<f64>,
}

impl AlphaTable {
    /// User-supplied table `[α_-1, α_0, α_1, ...]`. Supplying more orders than
    /// [`alpha_table`] provides unlocks finite parts for larger `l`.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        validate_table(&coeffs)?;
        Ok(Self { coeffs })
    }

    /// `α_j`, or `None` if the table does not reach order `j`.
    pub fn get(&self, j: i32) -> Option<f64> {
        usize::try_from(j + 1)
            .ok()
            .and_then(|i| self.coeffs.get(i))
            .copied()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `Δ(0) = Σ α_j ε^j`, reliable through the last tabulated order.
    pub fn series(&self) -> LaurentSeries {
        LaurentSeries::new(-1, self.coeffs.clone()).expect("validated table")
    }
}

/// Bubble constants `η_i`, stored from `i = -1` upward.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleTable {
    eta: Vec<f64>,
}

impl BubbleTable {
    pub fn from_coeffs(eta: Vec<f64>) -> Result<Self> {
        validate_table(&eta)?;
        Ok(Self { eta })
    }

    pub fn get(&self, i: i32) -> Option<f64> {
        usize::try_from(i + 1)
            .ok()
            .and_then(|k| self.eta.get(k))
            .copied()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.eta
    }

    pub fn series(&self) -> LaurentSeries {
        LaurentSeries::new(-1, self.eta.clone()).expect("validated table")
    }
}

fn validate_table(coeffs: &[f64]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::EmptyCoefficients);
    }
    for (i, c) in coeffs.iter().enumerate() {
        if !c.is_finite() {
            return Err(Error::NonFinite {
                order: i as i32 - 1,
                value: *c,
            });
        }
    }
    Ok(())
}

/// The coefficient tables every correlator formula draws from.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTables {
    pub alpha: AlphaTable,
    pub bubble: BubbleTable,
}

impl CoefficientTables {
    /// Tabulated one-loop values (`α_j`, `η_i` for `j, i ≤ 1`).
    pub fn standard(m0sq: f64) -> Result<Self> {
        Ok(Self {
            alpha: alpha_table(m0sq)?,
            bubble: bubble_table(m0sq)?,
        })
    }
}

/// `α_-1, α_0, α_1` of the dimensionally regularized tadpole.
pub fn alpha_table(m0sq: f64) -> Result<AlphaTable> {
    let m = check_positive("m0sq", m0sq)?;
    let g = EULER_GAMMA;
    let pi2 = PI * PI;
    let log_ratio = (m / (4.0 * PI)).ln();
    let a_m1 = -m / (8.0 * pi2);
    let a_0 = m / (16.0 * pi2) * (1.0 - g - log_ratio);
    let a_1 = m / (384.0 * pi2)
        * (6.0 * log_ratio * (2.0 * g - 2.0 + log_ratio) + pi2 + 6.0 * g * g - 12.0 * g + 12.0);
    AlphaTable::from_coeffs(vec![a_m1, a_0, a_1])
}

/// `Δ(0)` as a Laurent series: min order −1, reliable through ε¹.
pub fn tadpole_series(m0sq: f64) -> Result<LaurentSeries> {
    Ok(alpha_table(m0sq)?.series())
}

/// `[Δ(0)]^power`, whose coefficients are the `ξ` of the φ^(2 power + 2) theory.
pub fn xi_series(m0sq: f64, power: u32) -> Result<LaurentSeries> {
    Ok(xi_series_from(&alpha_table(m0sq)?, power))
}

pub fn xi_series_from(alpha: &AlphaTable, power: u32) -> LaurentSeries {
    alpha.series().pow_int(power)
}

/// `η_-1, η_0, η_1` of the one-loop bubble.
pub fn bubble_table(m0sq: f64) -> Result<BubbleTable> {
    let m = check_positive("m0sq", m0sq)?;
    let g = EULER_GAMMA;
    let pi2 = PI * PI;
    let eta_m1 = -3.0 / (16.0 * pi2);
    let eta_0 = eta_m1 * ((4.0 * PI / m).ln() - g);
    let shift = g / 2.0 - (2.0 * PI.sqrt()).ln();
    let eta_1 = 1.0 / 768.0 + shift * shift / (32.0 * pi2);
    BubbleTable::from_coeffs(vec![eta_m1, eta_0, eta_1])
}

/// Finite kinematic part `R_0` of the bubble for a spacelike-continued channel
/// invariant `rsq > 0`.
///
/// Grows like `ln(rsq / m0sq) / 32π²` for large `rsq`.
pub fn bubble_finite_r0(rsq: f64, m0sq: f64) -> Result<f64> {
    let m = check_positive("m0sq", m0sq)?;
    if !(rsq.is_finite() && rsq > 0.0) {
        return Err(Error::Kinematic { rsq });
    }
    let x = 4.0 * m / rsq;
    let root = (1.0 + x).sqrt();
    // (root + 1)/(root - 1) = (root + 1)^2 / x, avoiding cancellation in root - 1.
    let log = 2.0 * (root + 1.0).ln() - x.ln();
    Ok(root * log / (32.0 * PI * PI))
}

/// Loop count `L(n, p) = p − n/2 + 1` of an n-point function at order p.
pub fn loop_count(n: u32, p: u32) -> Result<u32> {
    if !n.is_multiple_of(2) {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            reason: "number of external points must be even",
        });
    }
    let loops = p as i64 - (n / 2) as i64 + 1;
    u32::try_from(loops).map_err(|_| {
        Error::Capability(format!(
            "n = {n} at order p = {p} gives a negative loop count"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // 50-digit reference values (mpmath).
    const ALPHA_M1: f64 = -0.012_665_147_955_292_221_43;
    const ALPHA_0: f64 = 0.018_705_211_361_750_040_109;
    const ALPHA_1: f64 = 0.018_000_213_623_510_344_71;
    const ETA_M1: f64 = -0.018_997_721_932_938_332_146;
    const ETA_0: f64 = -0.037_117_912_152_311_788_181;
    const ETA_1: f64 = 0.004_323_803_971_317_662_327_9;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn alpha_values() {
        let t = alpha_table(1.0).unwrap();
        assert!(rel(t.get(-1).unwrap(), ALPHA_M1) < 1e-14);
        assert!(rel(t.get(0).unwrap(), ALPHA_0) < 1e-13);
        assert!(rel(t.get(1).unwrap(), ALPHA_1) < 1e-13);
        assert_eq!(t.get(2), None);
        assert_eq!(t.get(-2), None);
        let t2 = alpha_table(2.0).unwrap();
        assert_eq!(t2.get(-1).unwrap(), 2.0 * t.get(-1).unwrap());
        assert!(alpha_table(0.0).is_err());
        assert!(alpha_table(-1.0).is_err());
    }

    #[test]
    fn tadpole_matches_table() {
        let s = tadpole_series(1.0).unwrap();
        let t = alpha_table(1.0).unwrap();
        assert_eq!(s.min_order(), -1);
        assert_eq!(s.max_reliable_order(), 1);
        for j in -1..=1 {
            assert_eq!(s.coeff_at(j).unwrap(), t.get(j).unwrap());
        }
        assert_eq!(s.coeff_at(2).unwrap_err().kind(), "out_of_range");
    }

    #[test]
    fn xi_power_two() {
        let x = xi_series(1.0, 2).unwrap();
        assert_eq!(x.min_order(), -2);
        assert_eq!(x.max_reliable_order(), 0);
        let lead = 1.0 / (64.0 * PI.powi(4));
        assert!(rel(x.coeff_at(-2).unwrap(), lead) < 1e-14);
        assert!(rel(x.coeff_at(-1).unwrap(), 2.0 * ALPHA_M1 * ALPHA_0) < 1e-13);
        let xi0 = 2.0 * ALPHA_M1 * ALPHA_1 + ALPHA_0 * ALPHA_0;
        assert!(rel(x.coeff_at(0).unwrap(), xi0) < 1e-12);
        assert!(x.coeff_at(1).is_err());
    }

    #[test]
    fn xi_power_one_and_zero() {
        assert_eq!(xi_series(1.3, 1).unwrap(), tadpole_series(1.3).unwrap());
        let one = xi_series(0.7, 0).unwrap();
        assert_eq!(one.min_order(), 0);
        assert_eq!(one.coeff_at(0).unwrap(), 1.0);
        assert_eq!(one.coeff_at(1).unwrap(), 0.0);
    }

    #[test]
    fn eta_values() {
        for m in [0.1, 1.0, 2.0, 7.5, 100.0] {
            assert_eq!(
                bubble_table(m).unwrap().get(-1).unwrap(),
                -3.0 / (16.0 * PI * PI)
            );
        }
        let b = bubble_table(1.0).unwrap();
        assert!(rel(b.get(-1).unwrap(), ETA_M1) < 1e-14);
        assert!(rel(b.get(0).unwrap(), ETA_0) < 1e-13);
        assert!(rel(b.get(1).unwrap(), ETA_1) < 1e-13);
        let at_4pi = bubble_table(4.0 * PI).unwrap().get(0).unwrap();
        assert!(rel(at_4pi, 0.010_965_782_697_135_433_46) < 1e-12);
    }

    #[test]
    fn r0_values_and_domain() {
        let r = bubble_finite_r0(4.0, 1.0).unwrap();
        assert!(rel(r, 0.007_893_239_875_848_544_171_1) < 1e-13);
        let far = bubble_finite_r0(1e6, 1.0).unwrap();
        assert!(rel(far, 0.043_743_965_14) < 1e-9);
        assert_eq!(
            bubble_finite_r0(-1.0, 1.0).unwrap_err().kind(),
            "kinematic_domain"
        );
        assert!(bubble_finite_r0(0.0, 1.0).is_err());
        assert!(bubble_finite_r0(-0.5, 1.0).is_err());
    }

    #[test]
    fn r0_increases_with_rsq() {
        let vals: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|r| bubble_finite_r0(*r, 1.0).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        // large-rsq asymptote ln(rsq/m0sq)/32π²
        let big: f64 = 1e12;
        let asym = big.ln() / (32.0 * PI * PI);
        assert!((bubble_finite_r0(big, 1.0).unwrap() - asym).abs() < 1e-10);
    }

    #[test]
    fn loops() {
        assert_eq!(loop_count(2, 1).unwrap(), 1);
        assert_eq!(loop_count(4, 2).unwrap(), 1);
        assert_eq!(loop_count(2, 2).unwrap(), 2);
        assert_eq!(loop_count(6, 1).unwrap_err().kind(), "capability");
        assert!(loop_count(3, 1).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TheoryConfig::new(5, 1.0).is_err());
        assert!(TheoryConfig::new(2, 1.0).is_err());
        assert!(TheoryConfig::new(4, 0.0).is_err());
        let c = TheoryConfig::new(6, 1.0).unwrap();
        assert!(c.with_mu(-1.0).is_err());
        assert!(c.with_coupling(f64::NAN).is_err());
        assert_eq!(c.half_minus_one(), 2);
    }
}
