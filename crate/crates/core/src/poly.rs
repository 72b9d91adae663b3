//! Real polynomials in the monomial basis and their real roots.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Coefficients in ascending order: `coeffs[k]` multiplies `t^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    /// Index of the highest nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect() }
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        Polynomial { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Coefficients of `q(u) = p(center + half * u)`.
    fn rescaled(&self, center: f64, half: f64) -> Vec<f64> {
        // Horner-style Taylor shift, then scale.
        let n = self.coeffs.len();
        let mut c = self.coeffs.clone();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                c[k] += center * c[k + 1];
            }
        }
        let mut pow = 1.0;
        for ck in c.iter_mut() {
            *ck *= pow;
            pow *= half;
        }
        c
    }

    /// Sorted real roots in `[a, b]`, found from the companion matrix of the
    /// polynomial rescaled to `[-1, 1]` and polished by safeguarded Newton steps.
    pub fn real_roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        assert!(a < b);
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut q = self.rescaled(center, half);
        let scale = q.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return Vec::new();
        }
        for c in q.iter_mut() {
            *c /= scale;
        }
        while q.len() > 1 && q.last().is_some_and(|c| c.abs() < 1e-14) {
            q.pop();
        }
        let deg = q.len() - 1;
        if deg == 0 {
            return Vec::new();
        }
        let lead = q[deg];
        let candidates: Vec<f64> = if deg == 1 {
            vec![-q[0] / lead]
        } else {
            let mut m = DMatrix::<f64>::zeros(deg, deg);
            for i in 1..deg {
                m[(i, i - 1)] = 1.0;
            }
            for i in 0..deg {
                m[(i, deg - 1)] = -q[i] / lead;
            }
            m.complex_eigenvalues()
                .iter()
                .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()) && z.re.abs() <= 1.0 + 1e-6)
                .map(|z| z.re)
                .collect()
        };
        let unit = Polynomial::new(q);
        let mut roots: Vec<f64> = candidates
            .into_iter()
            .map(|u| center + half * unit.polish(u.clamp(-1.0, 1.0), -1.0, 1.0))
            .filter(|t| *t >= a && *t <= b)
            .collect();
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * half);
        roots
    }

    fn polish(&self, mut u: f64, lo: f64, hi: f64) -> f64 {
        for _ in 0..50 {
            let (p, dp) = self.eval_with_derivative(u);
            if p == 0.0 || dp == 0.0 {
                break;
            }
            let next = (u - p / dp).clamp(lo, hi);
            if (next - u).abs() <= 1e-16 * (1.0 + u.abs()) {
                u = next;
                break;
            }
            // Reject steps that make things worse (multiple roots, bad start).
            if self.eval(next).abs() > p.abs() {
                break;
            }
            u = next;
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivative() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0);
        let (v, dv) = p.eval_with_derivative(2.0);
        assert_eq!(v, 21.0);
        assert_eq!(dv, -2.0 + 36.0);
        assert_eq!(p.derivative().coeffs, vec![-2.0, 0.0, 9.0]);
        assert_eq!(p.degree(), Some(3));
        assert_eq!(Polynomial::new(vec![0.0, 0.0]).degree(), None);
    }

    #[test]
    fn roots_of_product_form() {
        // (t - 0.3)(t + 0.7)(t - 2.5)
        let p = Polynomial::new(vec![0.525, -1.21, -2.1, 1.0]);
        let r = p.real_roots_in(-1.0, 1.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 0.7).abs() < 1e-12);
        assert!((r[1] - 0.3).abs() < 1e-12);
        let all = p.real_roots_in(-10.0, 10.0);
        assert_eq!(all.len(), 3);
        assert!((all[2] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn no_real_roots() {
        let p = Polynomial::new(vec![1.0, 0.0, 1.0]);
        assert!(p.real_roots_in(-5.0, 5.0).is_empty());
    }

    #[test]
    fn rescale_matches_direct_evaluation() {
        let p = Polynomial::new(vec![0.5, -1.0, 2.0, 0.25, -3.0]);
        let q = Polynomial::new(p.rescaled(0.75, 0.25));
        for &u in &[-1.0, -0.3, 0.0, 0.6, 1.0] {
            assert!((q.eval(u) - p.eval(0.75 + 0.25 * u)).abs() < 1e-13);
        }
    }
}
