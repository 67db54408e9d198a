//! Far-field (Fraunhofer) intensity profiles used as an independent reference
//! for the quantized angles.
//!
//! Every profile is a function of `s = sin θ` alone, normalized to a peak
//! value of 1, even in `s`, and paired with its analytic derivative so that
//! extrema can be pinned to machine precision.

use std::f64::consts::PI;

use crate::error::{positive, Error, Result};
use crate::kinematics::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    /// `sinc²(π a s / λ)`.
    SingleSlit { a: f64 },
    /// `cos²(π c s / λ) · sinc²(π a s / λ)`.
    DoubleSlit { a: f64, c: f64 },
    /// The interference factor `cos²(π c s / λ)` on its own (two point-like
    /// slits).
    TwoSource { c: f64 },
    /// `(sin(N x) / (N sin x))²` with `x = 2π d s / λ`.
    Lattice { d: f64, planes: u32 },
}

impl ProfileShape {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileShape::SingleSlit { .. } => "single_slit",
            ProfileShape::DoubleSlit { .. } => "double_slit",
            ProfileShape::TwoSource { .. } => "two_source",
            ProfileShape::Lattice { .. } => "lattice",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityProfile {
    shape: ProfileShape,
    lambda: f64,
}

impl IntensityProfile {
    pub fn new(shape: ProfileShape, lambda: f64) -> Result<Self> {
        positive("profile.lambda", lambda)?;
        match shape {
            ProfileShape::SingleSlit { a } => {
                positive("profile.a", a)?;
            }
            ProfileShape::DoubleSlit { a, c } => {
                positive("profile.a", a)?;
                positive("profile.c", c)?;
            }
            ProfileShape::TwoSource { c } => {
                positive("profile.c", c)?;
            }
            ProfileShape::Lattice { d, planes } => {
                positive("profile.d", d)?;
                if planes < 2 {
                    return Err(Error::invalid(
                        "profile.planes",
                        format!("lattice needs at least 2 planes (got {planes})"),
                    ));
                }
            }
        }
        Ok(Self { shape, lambda })
    }

    pub fn single_slit(a: f64, lambda: f64) -> Result<Self> {
        Self::new(ProfileShape::SingleSlit { a }, lambda)
    }

    pub fn double_slit(a: f64, c: f64, lambda: f64) -> Result<Self> {
        Self::new(ProfileShape::DoubleSlit { a, c }, lambda)
    }

    pub fn two_source(c: f64, lambda: f64) -> Result<Self> {
        Self::new(ProfileShape::TwoSource { c }, lambda)
    }

    pub fn lattice(d: f64, planes: u32, lambda: f64) -> Result<Self> {
        Self::new(ProfileShape::Lattice { d, planes }, lambda)
    }

    /// The full wave-optics profile of a scenario.
    pub fn for_scenario(scenario: &Scenario, lambda: f64, lattice_planes: u32) -> Result<Self> {
        match *scenario {
            Scenario::Laue { d } => Self::lattice(d, lattice_planes, lambda),
            Scenario::Aperture { a } => Self::single_slit(a, lambda),
            Scenario::DoubleSlit { a, c } => Self::double_slit(a, c, lambda),
        }
    }

    pub fn shape(&self) -> ProfileShape {
        self.shape
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Relative intensity at `sin θ`.
    pub fn intensity(&self, sin_theta: f64) -> Result<f64> {
        if sin_theta.is_nan() || sin_theta.abs() > 1.0 {
            return Err(Error::Domain(format!(
                "sin θ must lie in [-1, 1] (got {sin_theta})"
            )));
        }
        Ok(self.eval(sin_theta))
    }

    pub(crate) fn eval(&self, s: f64) -> f64 {
        let k = PI / self.lambda;
        match self.shape {
            ProfileShape::SingleSlit { a } => sinc(k * a * s).powi(2),
            ProfileShape::DoubleSlit { a, c } => {
                (k * c * s).cos().powi(2) * sinc(k * a * s).powi(2)
            }
            ProfileShape::TwoSource { c } => (k * c * s).cos().powi(2),
            ProfileShape::Lattice { d, planes } => lattice_ratio(2.0 * k * d * s, planes).0.powi(2),
        }
    }

    /// `dI/ds`.
    pub(crate) fn derivative(&self, s: f64) -> f64 {
        let k = PI / self.lambda;
        match self.shape {
            ProfileShape::SingleSlit { a } => {
                let u = k * a * s;
                2.0 * sinc(u) * sinc_prime(u) * k * a
            }
            ProfileShape::DoubleSlit { a, c } => {
                let u = k * a * s;
                let v = k * c * s;
                let env = sinc(u).powi(2);
                let env_d = 2.0 * sinc(u) * sinc_prime(u) * k * a;
                let fringe = v.cos().powi(2);
                let fringe_d = -(2.0 * v).sin() * k * c;
                fringe_d * env + fringe * env_d
            }
            ProfileShape::TwoSource { c } => {
                let v = k * c * s;
                -(2.0 * v).sin() * k * c
            }
            ProfileShape::Lattice { d, planes } => {
                let (g, g_prime) = lattice_ratio(2.0 * k * d * s, planes);
                2.0 * g * g_prime * 2.0 * k * d
            }
        }
    }
}

/// `sin(x)/x`, with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

fn sinc_prime(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        x * (-1.0 / 3.0 + x2 / 30.0)
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// `g(x) = sin(N x) / (N sin x)` up to sign, with `g'(x)`.
///
/// `g²` has period π, so `x` is reduced to `y ∈ [-π/2, π/2]` around the
/// nearest principal peak before evaluating; near the peak the Taylor series
/// replaces the 0/0 quotient.
fn lattice_ratio(x: f64, planes: u32) -> (f64, f64) {
    let n = f64::from(planes);
    let y = x - (x / PI).round() * PI;
    if (n * y).abs() < 1e-5 {
        let c = (n * n - 1.0) / 6.0;
        return (1.0 - c * y * y, -2.0 * c * y);
    }
    let (sy, cy) = y.sin_cos();
    let (sny, cny) = (n * y).sin_cos();
    let g = sny / (n * sy);
    let g_prime = (n * cny * sy - sny * cy) / (n * sy * sy);
    (g, g_prime)
}
