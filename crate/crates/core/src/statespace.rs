//! Internal-state factorization and the observable-state projection.
//!
//! Each loop carries a diagonal weight `ρ_D` (the coincident-point part, which
//! produces a `1/ε` pole) and a non-diagonal weight `ρ_ND`. The trace over the
//! internal state is `Π_i (ρ_D^i ε⁻¹ + ρ_ND^i)`; the projector discards every
//! term holding at least one diagonal factor, leaving `Π_i ρ_ND^i`.
//!
//! Weights are the integrated normalizations of the per-loop kernels, with the
//! `1/π` of the delta-function representation absorbed into `ρ_D`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::laurent::LaurentSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopWeights {
    pub rho_d: f64,
    pub rho_nd: f64,
}

impl LoopWeights {
    pub fn new(rho_d: f64, rho_nd: f64) -> Self {
        Self { rho_d, rho_nd }
    }

    /// Converts a diagonal weight written as `ρ_D / (π ε)` into the absorbed
    /// convention used here.
    pub fn from_unabsorbed(rho_d: f64, rho_nd: f64) -> Self {
        Self::new(rho_d / PI, rho_nd)
    }
}

/// Per-loop `(ρ_D, ρ_ND)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopFactorization {
    loops: Vec<LoopWeights>,
}

impl LoopFactorization {
    pub fn new(loops: Vec<LoopWeights>) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::DegenerateLoop(
                "a factorization needs at least one loop",
            ));
        }
        for w in &loops {
            for v in [w.rho_d, w.rho_nd] {
                if !v.is_finite() {
                    return Err(Error::Domain {
                        name: "loop weight",
                        value: v,
                        reason: "must be finite",
                    });
                }
            }
        }
        Ok(Self { loops })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(d, nd)| LoopWeights::new(d, nd))
                .collect(),
        )
    }

    pub fn loops(&self) -> &[LoopWeights] {
        &self.loops
    }

    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    /// The same factorization with every diagonal weight set to zero.
    pub fn without_diagonal(&self) -> Self {
        Self {
            loops: self
                .loops
                .iter()
                .map(|w| LoopWeights::new(0.0, w.rho_nd))
                .collect(),
        }
    }
}

/// Which root of the `ρ_ND¹` quadratic to take for two loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootChoice {
    #[default]
    Smaller,
    Larger,
}

/// `Π_i (ρ_D^i ε⁻¹ + ρ_ND^i)`, expanded exactly; min order `−L`, reliable
/// through ε⁰.
pub fn trace_of_factors(f: &LoopFactorization) -> LaurentSeries {
    // coeffs[j] multiplies ε^{j - L}
    let l = f.loop_count();
    let mut poly = vec![1.0];
    for w in f.loops() {
        let mut next = vec![0.0; poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j] += c * w.rho_d;
            next[j + 1] += c * w.rho_nd;
        }
        poly = next;
    }
    LaurentSeries::with_reliable_order(-(l as i32), poly, 0).expect("finite weights")
}

/// Trace after projection: `Π_i ρ_ND^i`.
pub fn project_nondiagonal(f: &LoopFactorization) -> f64 {
    f.loops().iter().map(|w| w.rho_nd).product()
}

/// Recovers per-loop weights from the coefficients `β_{-L} .. β_0` of `beta`.
///
/// One loop is fully determined. Two loops leave a one-parameter family: the
/// gauge `t > 0` fixes `ρ_D¹ = t`, `ρ_D² = β₋₂/t`, and `ρ_ND¹` solves
/// `(β₋₂/t) x² − β₋₁ x + t β₀ = 0`.
pub fn factorize(
    beta: &LaurentSeries,
    loops: usize,
    gauge: f64,
    root: RootChoice,
) -> Result<LoopFactorization> {
    let b = |k: i32| beta.coeff_at(k);
    match loops {
        1 => LoopFactorization::from_pairs(&[(b(-1)?, b(0)?)]),
        2 => {
            let (b2, b1, b0) = (b(-2)?, b(-1)?, b(0)?);
            factorize_two_loop(b2, b1, b0, gauge, root)
        }
        0 => Err(Error::DegenerateLoop("loop count must be at least 1")),
        n => Err(Error::Capability(format!(
            "factorization of {n} loops is underdetermined; only 1 and 2 are supported"
        ))),
    }
}

/// Two-loop case of [`factorize`] on explicit coefficients.
pub fn factorize_two_loop(
    b2: f64,
    b1: f64,
    b0: f64,
    gauge: f64,
    root: RootChoice,
) -> Result<LoopFactorization> {
    if !(gauge.is_finite() && gauge > 0.0) {
        return Err(Error::Gauge(gauge));
    }
    if b2 == 0.0 {
        return Err(Error::DegenerateLoop(
            "beta_-2 = 0 leaves no double pole for a two-loop factorization",
        ));
    }
    let disc = b1 * b1 - 4.0 * b2 * b0;
    if disc < 0.0 {
        return Err(Error::NoRealFactorization { discriminant: disc });
    }
    // The two roots are t·u/(2 β₋₂) with u ∈ {β₋₁ ± √disc}; u₊u₋ = 4 β₋₂ β₀.
    let sq = disc.sqrt();
    let u_big = b1 + if b1 >= 0.0 { sq } else { -sq };
    let u_small = if u_big == 0.0 {
        0.0
    } else {
        4.0 * b2 * b0 / u_big
    };
    let t = gauge;
    // (ρ_ND¹, ρ_ND²) for each choice of u; ρ_ND² takes the complementary root.
    let cand = |u: f64, other: f64| (t * u / (2.0 * b2), other / (2.0 * t));
    let a = cand(u_big, u_small);
    let c = cand(u_small, u_big);
    let (lo, hi) = if a.0 <= c.0 { (a, c) } else { (c, a) };
    let (nd1, nd2) = match root {
        RootChoice::Smaller => lo,
        RootChoice::Larger => hi,
    };
    LoopFactorization::from_pairs(&[(t, nd1), (b2 / t, nd2)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(c: &[f64]) -> LaurentSeries {
        LaurentSeries::new(-(c.len() as i32 - 1), c.to_vec()).unwrap()
    }

    #[test]
    fn trace_examples() {
        let f = LoopFactorization::from_pairs(&[(1.0, 2.0), (1.0, 1.0)]).unwrap();
        let t = trace_of_factors(&f);
        assert_eq!(t.min_order(), -2);
        assert_eq!(t.coeffs(), &[1.0, 3.0, 2.0]);

        let c = trace_of_factors(&LoopFactorization::from_pairs(&[(0.0, 4.5)]).unwrap());
        assert_eq!(c.min_order(), 0);
        assert_eq!(c.coeffs(), &[4.5]);

        let one = trace_of_factors(&LoopFactorization::from_pairs(&[(2.0, -3.0)]).unwrap());
        assert_eq!(one.min_order(), -1);
        assert_eq!(one.coeffs(), &[2.0, -3.0]);
    }

    #[test]
    fn factorize_examples() {
        let beta = series(&[1.0, 3.0, 2.0]);
        let f = factorize(&beta, 2, 1.0, RootChoice::Smaller).unwrap();
        assert_eq!(f.loops()[0], LoopWeights::new(1.0, 1.0));
        assert_eq!(f.loops()[1], LoopWeights::new(1.0, 2.0));
        assert_eq!(trace_of_factors(&f), beta);

        let g = factorize(&beta, 2, 1.0, RootChoice::Larger).unwrap();
        assert_eq!(g.loops()[0], LoopWeights::new(1.0, 2.0));
        assert_eq!(trace_of_factors(&g), beta);

        let one = factorize(&series(&[5.0, 7.0]), 1, 1.0, RootChoice::Smaller).unwrap();
        assert_eq!(one.loops(), &[LoopWeights::new(5.0, 7.0)]);

        let err = factorize(&series(&[1.0, 1.0, 1.0]), 2, 1.0, RootChoice::Smaller).unwrap_err();
        assert_eq!(err, Error::NoRealFactorization { discriminant: -3.0 });
    }

    #[test]
    fn factorize_errors() {
        assert_eq!(
            factorize_two_loop(0.0, 1.0, 1.0, 1.0, RootChoice::Smaller)
                .unwrap_err()
                .kind(),
            "degenerate_loop"
        );
        assert_eq!(
            factorize_two_loop(1.0, 3.0, 2.0, 0.0, RootChoice::Smaller)
                .unwrap_err()
                .kind(),
            "gauge"
        );
        assert!(factorize_two_loop(1.0, 3.0, 2.0, -1.0, RootChoice::Smaller).is_err());
        let beta = series(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            factorize(&beta, 3, 1.0, RootChoice::Smaller)
                .unwrap_err()
                .kind(),
            "capability"
        );
        // β₋₂ trimmed away by canonical form: two-loop request still degenerate
        let no_double = LaurentSeries::new(-2, vec![0.0, 3.0, 2.0]).unwrap();
        assert_eq!(
            factorize(&no_double, 2, 1.0, RootChoice::Smaller)
                .unwrap_err()
                .kind(),
            "degenerate_loop"
        );
    }

    #[test]
    fn projection() {
        let f = LoopFactorization::from_pairs(&[(1.0, 2.0), (1.0, 1.0)]).unwrap();
        assert_eq!(project_nondiagonal(&f), 2.0);
        let z = LoopFactorization::from_pairs(&[(3.0, 0.0), (2.0, 5.0)]).unwrap();
        assert_eq!(project_nondiagonal(&z), 0.0);
        let beta = series(&[1.0, 3.0, 2.0]);
        for t in [0.5, 1.0, 2.0] {
            let f = factorize(&beta, 2, t, RootChoice::Smaller).unwrap();
            assert!((project_nondiagonal(&f) - 2.0).abs() < 1e-15);
            assert_eq!(
                project_nondiagonal(&f),
                trace_of_factors(&f).finite_part().unwrap()
            );
        }
    }

    #[test]
    fn zeroed_diagonal_has_no_poles() {
        let f = LoopFactorization::from_pairs(&[(1.5, 2.0), (-0.5, 1.0), (3.0, 0.25)]).unwrap();
        let t = trace_of_factors(&f.without_diagonal());
        assert_eq!(t.min_order(), 0);
        assert_eq!(t.finite_part().unwrap(), 0.5);
    }

    #[test]
    fn unabsorbed_conversion() {
        let w = LoopWeights::from_unabsorbed(PI, 1.0);
        assert!((w.rho_d - 1.0).abs() < 1e-16);
    }

    #[test]
    fn rejects_non_finite_weights() {
        assert!(LoopFactorization::from_pairs(&[(f64::NAN, 1.0)]).is_err());
        assert!(LoopFactorization::new(vec![]).is_err());
    }
}
