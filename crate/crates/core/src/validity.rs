//! Where first-order perturbation theory can be trusted: the scales at which
//! the running coupling stays below one in magnitude.
//!
//! Intervals are held in `x = ln μ` (or `ln d`) so that unbounded ends are
//! exact infinities rather than overflowed exponentials.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rgflow::CouplingFlowParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleVariable {
    /// Energy scale μ.
    Energy,
    /// Distance scale `d = 1/μ` in natural units.
    Distance,
}

impl ScaleVariable {
    pub fn name(&self) -> &'static str {
        match self {
            ScaleVariable::Energy => "energy_mu",
            ScaleVariable::Distance => "distance_d",
        }
    }
}

/// Open interval `(e^{ln_lo}, e^{ln_hi})`; `ln_lo = −∞` means the interval
/// reaches down to 0, `ln_hi = +∞` means it is unbounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub ln_lo: f64,
    pub ln_hi: f64,
}

impl Interval {
    pub fn lo(&self) -> f64 {
        self.ln_lo.exp()
    }
    pub fn hi(&self) -> f64 {
        self.ln_hi.exp()
    }
    pub fn contains_ln(&self, x: f64) -> bool {
        x > self.ln_lo && x < self.ln_hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityDomain {
    pub intervals: Vec<Interval>,
    pub variable: ScaleVariable,
    pub params: CouplingFlowParams,
}

/// `D(x)/λ_S − 1`, positive exactly where `0 < λ₀ < 1` for `λ_S > 0`.
///
/// The other branch of `|λ₀| < 1`, `D/λ_S < −1`, lies past a Landau pole
/// where the coupling has changed sign; it is not part of the domain.
pub fn validity_polynomial(params: &CouplingFlowParams) -> Polynomial {
    let d = params.denominator();
    let mut c: Vec<f64> = d.coeffs().iter().map(|v| v / params.lambda_s()).collect();
    c[0] -= 1.0;
    Polynomial::new(c)
}

fn check_params(params: &CouplingFlowParams, l: u32) -> Result<()> {
    if l != params.l() {
        return Err(Error::Domain {
            name: "l",
            value: l as f64,
            reason: "does not match the length of the Lambda table",
        });
    }
    if params.lambda_s() <= 0.0 {
        return Err(Error::Domain {
            name: "lambda_s",
            value: params.lambda_s(),
            reason: "must be positive",
        });
    }
    if params.lambda_table().iter().all(|&c| c == 0.0) {
        return Err(Error::Degenerate("all Lambda coefficients vanish"));
    }
    Ok(())
}

/// All maximal intervals of `ln μ` on which `0 < λ₀(μ) < 1`.
pub fn validity_intervals(params: &CouplingFlowParams, l: u32) -> Result<ValidityDomain> {
    check_params(params, l)?;
    let p = validity_polynomial(params);
    let roots = p.real_roots();
    let mut marks = vec![f64::NEG_INFINITY];
    marks.extend(&roots);
    marks.push(f64::INFINITY);

    let mut intervals: Vec<Interval> = Vec::new();
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let probe = match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (false, true) => b - 1.0,
            (true, false) => a + 1.0,
            (false, false) => 0.0,
        };
        if p.eval(probe) > 0.0 {
            match intervals.last_mut() {
                // A tangent root splits nothing.
                Some(last) if last.ln_hi == a => last.ln_hi = b,
                _ => intervals.push(Interval { ln_lo: a, ln_hi: b }),
            }
        }
    }
    Ok(ValidityDomain {
        intervals,
        variable: ScaleVariable::Energy,
        params: params.clone(),
    })
}

fn require_unit_reference(params: &CouplingFlowParams) -> Result<()> {
    if params.mu_s() == 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "mu_s",
            value: params.mu_s(),
            reason: "closed-form bounds assume a reference scale of 1",
        })
    }
}

/// `l = 4` upper bound in `ln μ`: `(1 − λ_S) / (λ_S |Λ₀|)`, which is
/// `(1 − λ_S) 16π² / (3 λ_S)` for the standard table.
pub fn validity_l4_bound(params: &CouplingFlowParams) -> Result<f64> {
    check_params(params, 4)?;
    require_unit_reference(params)?;
    let lam0 = params.lambda_table()[0];
    if lam0 >= 0.0 {
        return Err(Error::Domain {
            name: "Lambda_0",
            value: lam0,
            reason: "the l = 4 bound needs a negative coefficient",
        });
    }
    let ls = params.lambda_s();
    Ok((1.0 - ls) / (ls * lam0.abs()))
}

/// `l = 4` bound for the standard table, `(1 − λ_S) 16π² / (3 λ_S)`.
pub fn standard_l4_bound(lambda_s: f64) -> f64 {
    (1.0 - lambda_s) * 16.0 * PI * PI / (3.0 * lambda_s)
}

/// Half-width `q` and centre `v` of the `l = 6` domain `(v − q, v + q)` in
/// `ln μ`: `v = Λ₀/2|Λ₁|`, `q = √(v² + (1 − λ_S)/(|Λ₁| λ_S))`.
pub fn validity_l6_qv(params: &CouplingFlowParams) -> Result<(f64, f64)> {
    check_params(params, 6)?;
    require_unit_reference(params)?;
    let (lam0, lam1) = (params.lambda_table()[0], params.lambda_table()[1]);
    if lam1 >= 0.0 {
        return Err(Error::Domain {
            name: "Lambda_1",
            value: lam1,
            reason: "the l = 6 bound needs a negative quadratic coefficient",
        });
    }
    let ls = params.lambda_s();
    let v = lam0 / (2.0 * lam1.abs());
    let radicand = v * v + (1.0 - ls) / (lam1.abs() * ls);
    if radicand < 0.0 {
        return Err(Error::EmptyDomain("the coupling never drops below one"));
    }
    Ok((radicand.sqrt(), v))
}

/// Re-expresses the domain in the reciprocal scale. Applying it twice
/// restores the input exactly.
pub fn to_distance(dom: &ValidityDomain) -> ValidityDomain {
    let mut intervals: Vec<Interval> = dom
        .intervals
        .iter()
        .map(|i| Interval {
            ln_lo: -i.ln_hi,
            ln_hi: -i.ln_lo,
        })
        .collect();
    intervals.reverse();
    let variable = match dom.variable {
        ScaleVariable::Energy => ScaleVariable::Distance,
        ScaleVariable::Distance => ScaleVariable::Energy,
    };
    ValidityDomain {
        intervals,
        variable,
        params: dom.params.clone(),
    }
}
