//! Truncated univariate power series with exact rational coefficients.
//!
//! A [`PowerSeries`] of truncation order `T` stores exactly the coefficients
//! of `x^0 .. x^T`. Coefficients beyond the truncation are *undefined*, never
//! silently zero: [`PowerSeries::coeff`] refuses to answer past the order.
//! Binary operations truncate eagerly to the smaller order of the operands.

use crate::bernoulli::beta;
use crate::rational::Rational;

/// A power series known exactly through `x^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Rational>,
    order: usize,
}

/// Raised when a coefficient beyond the truncation order is requested.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("coefficient of x^{requested} requested from a series truncated at x^{order}")]
pub struct TruncationError {
    pub requested: usize,
    pub order: usize,
}

impl PowerSeries {
    /// Builds a series from the given coefficients; the order is implied by
    /// the length (missing high coefficients are *not* assumed zero).
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least the constant term");
        let order = coeffs.len() - 1;
        PowerSeries { coeffs, order }
    }

    pub fn zero(order: usize) -> Self {
        PowerSeries { coeffs: vec![Rational::zero(); order + 1], order }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = Rational::one();
        s
    }

    /// The monomial `x`, known through `x^order`.
    pub fn x(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = Rational::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, i: usize) -> Result<&Rational, TruncationError> {
        if i > self.order {
            return Err(TruncationError { requested: i, order: self.order });
        }
        Ok(&self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order, "cannot extend a truncated series");
        PowerSeries { coeffs: self.coeffs[..=order].to_vec(), order }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let coeffs = (0..=order).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect();
        PowerSeries { coeffs, order }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let coeffs = (0..=order).map(|i| &self.coeffs[i] - &rhs.coeffs[i]).collect();
        PowerSeries { coeffs, order }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut coeffs = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        PowerSeries { coeffs, order }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            order: self.order,
        }
    }

    /// Formal derivative; the truncation order drops by one.
    pub fn derivative(&self) -> Self {
        assert!(self.order >= 1, "derivative of a series known only at order 0");
        let coeffs = (1..=self.order)
            .map(|i| Rational::from_int(i as i64) * &self.coeffs[i])
            .collect();
        PowerSeries { coeffs, order: self.order - 1 }
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        let mut s = self.clone();
        for _ in 0..n {
            s = s.derivative();
        }
        s
    }

    /// Multiplication by `x`; the truncation order grows by one.
    pub fn mul_x(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.order + 2);
        coeffs.push(Rational::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        PowerSeries { coeffs, order: self.order + 1 }
    }
}

/// `f(x) = (x/2) coth(x/2)`, the generating function of the even Bernoulli
/// numbers: coefficient of `x^{2J}` is `B_{2J}/(2J)!`, odd coefficients zero.
pub fn f_series(order: usize) -> PowerSeries {
    let coeffs = (0..=order)
        .map(|i| if i % 2 == 0 { beta(i) } else { Rational::zero() })
        .collect();
    PowerSeries::from_coeffs(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_series_low_orders() {
        assert_eq!(f_series(0), PowerSeries::from_coeffs(vec![Rational::one()]));
        assert_eq!(
            f_series(2),
            PowerSeries::from_coeffs(vec![
                Rational::one(),
                Rational::zero(),
                Rational::new(1, 12),
            ])
        );
        assert_eq!(f_series(4).coeff(4).unwrap(), &Rational::new(-1, 720));
    }

    #[test]
    fn coefficient_past_truncation_is_an_error() {
        let f = f_series(4);
        assert_eq!(
            f.coeff(5),
            Err(TruncationError { requested: 5, order: 4 })
        );
    }

    /// `x f' = f - f^2 + (x/2)^2`, the functional identity that pins the whole
    /// Bernoulli table; checked coefficientwise at order 40.
    #[test]
    fn f_satisfies_its_functional_identity() {
        let order = 40;
        let f = f_series(order);
        let lhs = f.derivative().mul_x(); // order 40 again
        let mut x2_over_4 = PowerSeries::zero(order);
        x2_over_4.coeffs[2] = Rational::new(1, 4);
        let rhs = f.sub(&f.mul(&f)).add(&x2_over_4);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn arithmetic_truncates_to_the_smaller_order() {
        let a = f_series(6);
        let b = f_series(3);
        assert_eq!(a.mul(&b).order(), 3);
        assert_eq!(a.add(&b).order(), 3);
        assert_eq!(a.derivative().order(), 5);
        assert_eq!(a.mul_x().order(), 7);
    }

    #[test]
    fn geometric_series_inverse_spot_check() {
        // (1 - x) * (1 + x + x^2 + ... ) = 1 through the truncation
        let order = 10;
        let one_minus_x = PowerSeries::one(order).sub(&PowerSeries::x(order));
        let geom = PowerSeries::from_coeffs(vec![Rational::one(); order + 1]);
        assert_eq!(one_minus_x.mul(&geom), PowerSeries::one(order));
    }
}
