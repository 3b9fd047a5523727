//! Built-in synthetic objectives for desk-scale experiments.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Closed-form objective functions with known geometry.
///
/// `Zdt1F1`/`Zdt1F2` are the two components of the standard ZDT1 benchmark
/// (both minimized over `[0,1]^d`; inputs are clamped into the unit box).
/// `LinearSum`/`Ripple` form a pair with a non-trivial front when the sum is
/// maximized and the ripple minimized: the ripple term vanishes on the
/// integer lattice, pulling the front toward high-coordinate integer points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinObjective {
    /// `-(|x|^2)`: maximized at the origin.
    SphereMax,
    Zdt1F1,
    Zdt1F2,
    /// `sum_i x_i`
    LinearSum,
    /// `sum_i sin^2(pi x_i)`
    Ripple,
}

impl BuiltinObjective {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BuiltinObjective::SphereMax => -x.iter().map(|v| v * v).sum::<f64>(),
            BuiltinObjective::Zdt1F1 => x.first().map_or(0.0, |v| v.clamp(0.0, 1.0)),
            BuiltinObjective::Zdt1F2 => {
                let f1 = x.first().map_or(0.0, |v| v.clamp(0.0, 1.0));
                let g = if x.len() > 1 {
                    1.0 + 9.0 * x[1..].iter().map(|v| v.clamp(0.0, 1.0)).sum::<f64>()
                        / (x.len() - 1) as f64
                } else {
                    1.0
                };
                g * (1.0 - (f1 / g).sqrt())
            }
            BuiltinObjective::LinearSum => x.iter().sum(),
            BuiltinObjective::Ripple => x.iter().map(|v| (PI * v).sin().powi(2)).sum(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinObjective::SphereMax => "sphere-max",
            BuiltinObjective::Zdt1F1 => "zdt1-f1",
            BuiltinObjective::Zdt1F2 => "zdt1-f2",
            BuiltinObjective::LinearSum => "linear-sum",
            BuiltinObjective::Ripple => "ripple",
        }
    }
}

impl FromStr for BuiltinObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "sphere-max" => Ok(BuiltinObjective::SphereMax),
            "zdt1-f1" => Ok(BuiltinObjective::Zdt1F1),
            "zdt1-f2" => Ok(BuiltinObjective::Zdt1F2),
            "linear-sum" => Ok(BuiltinObjective::LinearSum),
            "ripple" => Ok(BuiltinObjective::Ripple),
            other => Err(Error::Config(format!("unknown builtin objective `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_max_values() {
        assert_eq!(BuiltinObjective::SphereMax.eval(&[0.0, 0.0]), 0.0);
        assert_eq!(BuiltinObjective::SphereMax.eval(&[1.0, 2.0]), -5.0);
    }

    #[test]
    fn zdt1_known_values() {
        // At x = (1, 0, ..., 0): f1 = 1, g = 1, f2 = 1 - 1 = 0.
        let x = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(BuiltinObjective::Zdt1F1.eval(&x), 1.0);
        assert!(BuiltinObjective::Zdt1F2.eval(&x).abs() < 1e-15);
        // All-ones tail: g = 10, f2 = 10 * (1 - sqrt(0.1)).
        let x = [1.0, 1.0, 1.0];
        let f2 = BuiltinObjective::Zdt1F2.eval(&x);
        assert!((f2 - 10.0 * (1.0 - (0.1f64).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn zdt1_clamps_out_of_box_inputs() {
        let inside = BuiltinObjective::Zdt1F2.eval(&[0.5, 1.0]);
        let outside = BuiltinObjective::Zdt1F2.eval(&[0.5, 7.0]);
        assert_eq!(inside, outside);
    }

    #[test]
    fn ripple_vanishes_on_integers() {
        assert!(BuiltinObjective::Ripple.eval(&[0.0, 1.0, 2.0, -3.0]) < 1e-28);
        let half = BuiltinObjective::Ripple.eval(&[0.5]);
        assert!((half - 1.0).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for b in [
            BuiltinObjective::SphereMax,
            BuiltinObjective::Zdt1F1,
            BuiltinObjective::Zdt1F2,
            BuiltinObjective::LinearSum,
            BuiltinObjective::Ripple,
        ] {
            assert_eq!(b.name().parse::<BuiltinObjective>().unwrap(), b);
        }
        assert!("no-such-objective".parse::<BuiltinObjective>().is_err());
    }
}
