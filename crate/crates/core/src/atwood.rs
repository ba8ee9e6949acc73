//! Atwood-number parameter bundle and the velocity-bound parameters.

use crate::error::{Error, Result};

/// Viscosity contrast `A` together with the constants derived from it.
///
/// * `c_plus`, `c_minus` — edge speeds of the mixing zone, `2 / (1 ∓ A)`;
/// * `mobility` — mobility quotient `B = (1 + A) / (1 - A)`;
/// * `walk_rate` — lattice exchange rate `a = (1 - |A|) / 2`;
/// * `m_star` — the bound value at which the pinch state touches the
///   remaining constraints, `sqrt(1 + 4 (1/A^2 - 1))` (infinite at `A = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtwoodParams {
    pub atwood: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub mobility: f64,
    pub walk_rate: f64,
    pub m_star: f64,
}

impl AtwoodParams {
    /// Builds the bundle. Fails for `|A| >= 1`.
    pub fn new(atwood: f64) -> Result<Self> {
        if !(atwood.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "Atwood number must satisfy |A| < 1, got {atwood}"
            )));
        }
        let m_star = if atwood == 0.0 {
            f64::INFINITY
        } else {
            (1.0 + 4.0 * (1.0 / (atwood * atwood) - 1.0)).sqrt()
        };
        Ok(Self {
            atwood,
            c_plus: 2.0 / (1.0 - atwood),
            c_minus: 2.0 / (1.0 + atwood),
            mobility: (1.0 + atwood) / (1.0 - atwood),
            walk_rate: (1.0 - atwood.abs()) / 2.0,
            m_star,
        })
    }

    /// Largest mixing-edge speed, `max(c_plus, c_minus)`.
    pub fn c_max(&self) -> f64 {
        self.c_plus.max(self.c_minus)
    }
}

/// Convenience constructor matching the operation name used elsewhere.
pub fn make_atwood(atwood: f64) -> Result<AtwoodParams> {
    AtwoodParams::new(atwood)
}

/// Velocity bound `M > 1` and the two derived ball radii
/// `M_± = sqrt((M^2 ± A) / (1 ± A))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub m: f64,
    pub m_plus: f64,
    pub m_minus: f64,
}

impl BoundParams {
    pub fn new(m: f64, p: &AtwoodParams) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::Domain(format!("bound must satisfy M > 1, got {m}")));
        }
        let a = p.atwood;
        Ok(Self {
            m,
            m_plus: ((m * m + a) / (1.0 + a)).sqrt(),
            m_minus: ((m * m - a) / (1.0 - a)).sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_case() {
        let p = make_atwood(0.0).unwrap();
        assert_eq!(p.c_plus, 2.0);
        assert_eq!(p.c_minus, 2.0);
        assert_eq!(p.mobility, 1.0);
        assert_eq!(p.walk_rate, 0.5);
        assert!(p.m_star.is_infinite());
    }

    #[test]
    fn half_atwood() {
        let p = make_atwood(0.5).unwrap();
        assert_eq!(p.c_plus, 4.0);
        assert!((p.c_minus - 4.0 / 3.0).abs() < 1e-15);
        assert!((p.mobility - 3.0).abs() < 1e-15);
        assert_eq!(p.walk_rate, 0.25);
        assert!((p.m_star - 13f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sign_flip_swaps_speeds() {
        let p = make_atwood(0.3).unwrap();
        let q = make_atwood(-0.3).unwrap();
        assert_eq!(p.c_plus, q.c_minus);
        assert_eq!(p.c_minus, q.c_plus);
        assert!((p.mobility * q.mobility - 1.0).abs() < 1e-15);
        assert_eq!(p.walk_rate, q.walk_rate);
        assert_eq!(p.m_star, q.m_star);
    }

    #[test]
    fn rejects_unit_contrast() {
        assert!(make_atwood(1.0).is_err());
        assert!(make_atwood(-1.2).is_err());
        assert!(make_atwood(f64::NAN).is_err());
    }

    #[test]
    fn bound_radii() {
        let p = make_atwood(0.0).unwrap();
        let b = BoundParams::new(2.0, &p).unwrap();
        assert_eq!(b.m_plus, 2.0);
        assert_eq!(b.m_minus, 2.0);
        assert!(BoundParams::new(1.0, &p).is_err());
    }
}
