//! Real polynomials in one variable and real-root isolation.
//!
//! Roots are isolated by recursion on the derivative: between consecutive
//! critical points the polynomial is monotone, so each such piece holds at
//! most one root, which bisection then pins to full double precision.

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// Ascending coefficients; `coeffs[i]` multiplies `x^i`.
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped so the degree is exact.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Cauchy bound: every real root satisfies `|x| < bound`.
    pub fn root_bound(&self) -> f64 {
        match self.coeffs.split_last() {
            Some((lead, rest)) if !rest.is_empty() => {
                1.0 + rest.iter().map(|c| (c / lead).abs()).fold(0.0, f64::max)
            }
            _ => 1.0,
        }
    }

    /// Distinct real roots in ascending order. Even-multiplicity roots are
    /// reported only when they are hit exactly at a critical point.
    pub fn real_roots(&self) -> Vec<f64> {
        match self.degree() {
            None | Some(0) => Vec::new(),
            Some(1) => vec![-self.coeffs[0] / self.coeffs[1]],
            Some(_) => {
                let bound = self.root_bound();
                let mut marks = vec![-bound];
                marks.extend(
                    self.derivative()
                        .real_roots()
                        .into_iter()
                        .filter(|c| c.abs() < bound),
                );
                marks.push(bound);
                let mut roots: Vec<f64> = Vec::new();
                for w in marks.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (fa, fb) = (self.eval(a), self.eval(b));
                    let root = if fa == 0.0 {
                        Some(a)
                    } else if fb == 0.0 {
                        Some(b)
                    } else if fa.signum() != fb.signum() {
                        Some(self.bisect(a, b, fa))
                    } else {
                        None
                    };
                    if let Some(r) = root {
                        if roots.last() != Some(&r) {
                            roots.push(r);
                        }
                    }
                }
                roots
            }
        }
    }

    // Bisects until the bracket cannot shrink further.
    fn bisect(&self, mut a: f64, mut b: f64, fa: f64) -> f64 {
        let sa = fa.signum();
        loop {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                return if self.eval(a).abs() <= self.eval(b).abs() {
                    a
                } else {
                    b
                };
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
    }
}
