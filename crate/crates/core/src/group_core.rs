//! Heisenberg group arithmetic, dilations, norms and weights.

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};

/// A point `(x, y, z)` of the Heisenberg group `H^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.is_empty() {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if !(x.iter().chain(y.iter()).all(|v| v.is_finite()) && z.is_finite()) {
            return Err(Error::NonFinite("group point".into()));
        }
        Ok(Self { x, y, z })
    }

    /// Convenience constructor for `n = 1`.
    pub fn h1(x: f64, y: f64, z: f64) -> Self {
        Self {
            x: vec![x],
            y: vec![y],
            z,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
            z: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn inverse(&self) -> Self {
        Self {
            x: self.x.iter().map(|v| -v).collect(),
            y: self.y.iter().map(|v| -v).collect(),
            z: -self.z,
        }
    }

    /// Squared Euclidean norm of the horizontal part `|(x, y)|^2`.
    pub fn horizontal_norm_sq(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).map(|v| v * v).sum()
    }
}

/// Symplectic form `ω((x,y),(x',y')) = Σ x'_i y_i − x_i y'_i`.
pub fn symplectic(p: &GroupPoint, q: &GroupPoint) -> f64 {
    p.x.iter()
        .zip(&p.y)
        .zip(q.x.iter().zip(&q.y))
        .map(|((x, y), (xp, yp))| xp * y - x * yp)
        .sum()
}

pub fn multiply(p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    Ok(GroupPoint {
        x: p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect(),
        y: p.y.iter().zip(&q.y).map(|(a, b)| a + b).collect(),
        z: p.z + q.z + 2.0 * symplectic(p, q),
    })
}

/// Anisotropic dilation `δ_λ(x, y, z) = (λx, λy, λ²z)`.
pub fn dilate(lambda: f64, q: &GroupPoint) -> Result<GroupPoint> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("dilation factor must be > 0, got {lambda}")));
    }
    Ok(GroupPoint {
        x: q.x.iter().map(|v| lambda * v).collect(),
        y: q.y.iter().map(|v| lambda * v).collect(),
        z: lambda * lambda * q.z,
    })
}

/// `|q|_h = (|x|² + |y|² + |z|)^{1/2}`.
pub fn homogeneous_norm(q: &GroupPoint) -> f64 {
    homogeneous_norm_parts(q.horizontal_norm_sq(), q.z)
}

#[inline]
pub fn homogeneous_norm_parts(horizontal_sq: f64, z: f64) -> f64 {
    (horizontal_sq + z.abs()).sqrt()
}

/// Carnot–Carathéodory distance surrogate `d(p, q) = |p^{-1} q|_h`.
///
/// The exact geodesic distance is equivalent to the homogeneous norm up to a
/// constant; the surrogate uses constant 1.
pub fn cc_distance(p: &GroupPoint, q: &GroupPoint) -> Result<f64> {
    Ok(homogeneous_norm(&multiply(&p.inverse(), q)?))
}

/// `|q|_* = sqrt(1 + d(e, q)²)`.
pub fn star_norm(q: &GroupPoint) -> f64 {
    star_norm_parts(q.horizontal_norm_sq(), q.z)
}

#[inline]
pub fn star_norm_parts(horizontal_sq: f64, z: f64) -> f64 {
    (1.0 + horizontal_sq + z.abs()).sqrt()
}

/// Which of the two polynomial weight forms is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolynomialForm {
    /// `c (1 + |q|_*^b)`, the growing weight used with Bernstein estimates.
    Growing,
    /// `c |q|_*^{-b}`, the decaying member of the polynomial weight class.
    Decaying,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `e^{−ν |q|_*^η}` with `0 < η < 1`.
    Exponential { nu: f64, eta: f64 },
    Polynomial { b: f64, c: f64, form: PolynomialForm },
    /// Pointwise product of weights.
    Product { factors: Vec<Weight> },
}

impl Weight {
    pub fn unit() -> Self {
        Weight::Exponential { nu: 0.0, eta: 0.5 }
    }

    pub fn exponential(nu: f64, eta: f64) -> Result<Self> {
        let w = Weight::Exponential { nu, eta };
        w.validate()?;
        Ok(w)
    }

    pub fn polynomial(b: f64, c: f64, form: PolynomialForm) -> Result<Self> {
        let w = Weight::Polynomial { b, c, form };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Weight::Exponential { nu, eta } => {
                if !(*eta > 0.0 && *eta < 1.0) {
                    return Err(invalid("eta", format!("need 0 < eta < 1, got {eta}")));
                }
                if !nu.is_finite() {
                    return Err(invalid("nu", "must be finite"));
                }
                Ok(())
            }
            Weight::Polynomial { b, c, .. } => {
                if !(*c > 0.0) {
                    return Err(invalid("c", format!("need c > 0, got {c}")));
                }
                if !b.is_finite() {
                    return Err(invalid("b", "must be finite"));
                }
                Ok(())
            }
            Weight::Product { factors } => factors.iter().try_for_each(|w| w.validate()),
        }
    }

    /// Evaluates the weight from `|q|_*`.
    pub fn eval_star(&self, star: f64) -> f64 {
        match self {
            Weight::Exponential { nu, eta } => (-nu * star.powf(*eta)).exp(),
            Weight::Polynomial { b, c, form } => match form {
                PolynomialForm::Growing => c * (1.0 + star.powf(*b)),
                PolynomialForm::Decaying => c * star.powf(-b),
            },
            Weight::Product { factors } => factors.iter().map(|w| w.eval_star(star)).product(),
        }
    }
}

pub fn weight_eval(w: &Weight, q: &GroupPoint) -> f64 {
    w.eval_star(star_norm(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_example() {
        let p = GroupPoint::h1(1.0, 0.0, 0.0);
        let q = GroupPoint::h1(0.0, 1.0, 0.0);
        assert_eq!(multiply(&p, &q).unwrap(), GroupPoint::h1(1.0, 1.0, -2.0));
    }

    #[test]
    fn dilation_example() {
        let q = GroupPoint::h1(1.0, 1.0, -2.0);
        assert_eq!(dilate(2.0, &q).unwrap(), GroupPoint::h1(2.0, 2.0, -8.0));
        assert_eq!(dilate(1.0, &q).unwrap(), q);
        assert!(dilate(0.0, &q).is_err());
        assert!(dilate(-1.0, &q).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(homogeneous_norm(&GroupPoint::h1(1.0, 1.0, -2.0)), 2.0);
        assert_eq!(star_norm(&GroupPoint::identity(3)), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let p = GroupPoint::identity(1);
        let q = GroupPoint::identity(2);
        assert!(matches!(
            multiply(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(GroupPoint::new(vec![1.0], vec![], 0.0).is_err());
    }

    #[test]
    fn weights() {
        let e = GroupPoint::identity(1);
        let w0 = Weight::exponential(0.0, 0.5).unwrap();
        assert_eq!(weight_eval(&w0, &GroupPoint::h1(3.0, -1.0, 7.0)), 1.0);
        let w = Weight::exponential(0.7, 0.5).unwrap();
        assert!((weight_eval(&w, &e) - (-0.7f64).exp()).abs() < 1e-15);
        assert!(Weight::exponential(1.0, 1.0).is_err());
        assert!(Weight::polynomial(1.0, 0.0, PolynomialForm::Growing).is_err());
        let rho = Weight::polynomial(2.0, 1.5, PolynomialForm::Growing).unwrap();
        assert!((weight_eval(&rho, &e) - 3.0).abs() < 1e-15);
    }
}
