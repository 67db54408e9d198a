//! Scenarios, beams and the quantized scattering branches they admit.
//!
//! All lengths share one arbitrary unit. The action constant only scales the
//! reported momenta; every angle is a ratio of lengths.

use std::cmp::Ordering;
use std::fmt;
use std::ops::RangeInclusive;

use crate::error::{positive, Error, Result};

/// Planck constant in J·s (exact SI value).
pub const PLANCK_SI: f64 = 6.626_070_15e-34;

/// The action quantum `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionConstant(f64);

impl ActionConstant {
    /// Natural units, `h = 1`.
    pub const NATURAL: Self = Self(1.0);
    /// SI units, `h = 6.62607015e-34 J·s`.
    pub const SI: Self = Self(PLANCK_SI);

    pub fn new(h: f64) -> Result<Self> {
        positive("action constant", h).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for ActionConstant {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// `λ = h / p`.
pub fn characteristic_length(momentum: f64, h: f64) -> Result<f64> {
    if !(momentum.is_finite() && momentum > 0.0) {
        return Err(Error::Domain(format!(
            "momentum must be positive and finite (got {momentum})"
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!(
            "action constant must be positive and finite (got {h})"
        )));
    }
    Ok(h / momentum)
}

/// Incident particle, described by its characteristic length.
///
/// The momentum is always derived as `h/λ`, so `p·λ = h` holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    lambda: f64,
    h: ActionConstant,
}

impl Beam {
    pub fn new(lambda: f64, h: ActionConstant) -> Result<Self> {
        let lambda = positive("beam.lambda", lambda)?;
        Ok(Self { lambda, h })
    }

    /// Beam with `h = 1`.
    pub fn natural(lambda: f64) -> Result<Self> {
        Self::new(lambda, ActionConstant::NATURAL)
    }

    pub fn from_momentum(momentum: f64, h: ActionConstant) -> Result<Self> {
        let lambda = characteristic_length(momentum, h.value())
            .map_err(|e| Error::invalid("beam.momentum", e.to_string()))?;
        Self::new(lambda, h)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn momentum(&self) -> f64 {
        self.h.value() / self.lambda
    }

    pub fn action(&self) -> ActionConstant {
        self.h
    }

    /// Same beam with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.lambda * factor, self.h)
    }
}

/// Sign of the amplitude symmetry `ψ(q + Q) = ±ψ(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantizationRule {
    /// `+`: the action over the interval is `n h`.
    Plus,
    /// `-`: the action over the interval is `(n + 1/2) h`.
    Minus,
}

impl QuantizationRule {
    /// Fractional part of the quantum number: 0 or 1/2.
    pub fn offset(self) -> f64 {
        match self {
            QuantizationRule::Plus => 0.0,
            QuantizationRule::Minus => 0.5,
        }
    }

    /// Rule obeyed by the difference of two intervals: the half-integer
    /// offsets subtract.
    pub fn difference(self, other: Self) -> Self {
        if self == other {
            QuantizationRule::Plus
        } else {
            QuantizationRule::Minus
        }
    }
}

/// Scattering geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// Crystal with identical planes spaced by `d`.
    Laue { d: f64 },
    /// Single aperture of width `a`.
    Aperture { a: f64 },
    /// Two slits of width `a`, centers separated by `c`.
    DoubleSlit { a: f64, c: f64 },
}

impl Scenario {
    pub fn laue(d: f64) -> Result<Self> {
        let s = Scenario::Laue { d };
        s.validate()?;
        Ok(s)
    }

    pub fn aperture(a: f64) -> Result<Self> {
        let s = Scenario::Aperture { a };
        s.validate()?;
        Ok(s)
    }

    pub fn double_slit(a: f64, c: f64) -> Result<Self> {
        let s = Scenario::DoubleSlit { a, c };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scenario::Laue { d } => positive("scenario.d", d).map(drop),
            Scenario::Aperture { a } => positive("scenario.a", a).map(drop),
            Scenario::DoubleSlit { a, c } => {
                positive("scenario.a", a)?;
                positive("scenario.c", c)?;
                if c <= a {
                    return Err(Error::invalid(
                        "scenario.c",
                        format!("slit separation must exceed slit width (c = {c}, a = {a})"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Same geometry with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let s = match *self {
            Scenario::Laue { d } => Scenario::Laue { d: d * factor },
            Scenario::Aperture { a } => Scenario::Aperture { a: a * factor },
            Scenario::DoubleSlit { a, c } => Scenario::DoubleSlit {
                a: a * factor,
                c: c * factor,
            },
        };
        s.validate()?;
        Ok(s)
    }

    /// How the outgoing particle exchanges momentum with the structure.
    pub fn interaction(&self) -> InteractionKind {
        match self {
            Scenario::Laue { .. } => InteractionKind::Reflection,
            _ => InteractionKind::Transmission,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Laue { .. } => "laue",
            Scenario::Aperture { .. } => "aperture",
            Scenario::DoubleSlit { .. } => "double_slit",
        }
    }
}

/// A displacement over which the amplitude repeats up to a sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryInterval {
    pub length: f64,
    pub rule: QuantizationRule,
    pub label: &'static str,
}

impl SymmetryInterval {
    /// Interval `self - inner`, obtained by subtracting the two quantization
    /// conditions that share one transverse momentum.
    ///
    /// For the double slit, `p (c + a) = (n₂ + 1/2) h` minus `p c = n₁ h`
    /// leaves `p a = (m + 1/2) h` with `m = n₂ - n₁`.
    pub fn difference(&self, inner: &SymmetryInterval) -> Result<SymmetryInterval> {
        let length = positive("symmetry interval", self.length - inner.length)?;
        Ok(SymmetryInterval {
            length,
            rule: self.rule.difference(inner.rule),
            label: "joint",
        })
    }
}

/// Symmetry intervals that quantize the transverse momentum of a scenario.
pub fn symmetry_intervals(scenario: &Scenario) -> Vec<SymmetryInterval> {
    match *scenario {
        Scenario::Laue { d } => vec![SymmetryInterval {
            length: d,
            rule: QuantizationRule::Plus,
            label: "plane period",
        }],
        Scenario::Aperture { a } => vec![SymmetryInterval {
            length: a,
            rule: QuantizationRule::Plus,
            label: "aperture edges",
        }],
        Scenario::DoubleSlit { a, c } => vec![
            SymmetryInterval {
                length: c,
                rule: QuantizationRule::Plus,
                label: "slit centers",
            },
            SymmetryInterval {
                length: c + a,
                rule: QuantizationRule::Minus,
                label: "outer edges",
            },
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteractionKind {
    /// Specular reflection: the transverse momentum flips sign.
    Reflection,
    /// Forward transmission with a transverse kick.
    Transmission,
}

/// Transverse momentum exchanged at deflection angle `theta`.
pub fn momentum_transfer(theta: f64, beam: &Beam, kind: InteractionKind) -> f64 {
    let p = beam.momentum();
    match kind {
        InteractionKind::Reflection => 2.0 * p * theta.sin(),
        InteractionKind::Transmission => p * theta.sin(),
    }
}

/// Family a scattering branch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BranchKind {
    LaueOrder,
    ApertureOrder,
    Interference,
    Envelope,
}

impl BranchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::LaueOrder => "laue_order",
            BranchKind::ApertureOrder => "aperture_order",
            BranchKind::Interference => "interference",
            BranchKind::Envelope => "envelope",
        }
    }
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One allowed discrete outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringBranch {
    pub kind: BranchKind,
    /// `n` for the integer families, `m` for the envelope.
    pub order: i64,
    pub sin_theta: f64,
    pub theta: f64,
    pub delta_pz: f64,
}

/// Admissible orders of one branch family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderRange {
    pub kind: BranchKind,
    pub orders: RangeInclusive<i64>,
}

impl OrderRange {
    pub fn len(&self) -> usize {
        if self.orders.is_empty() {
            0
        } else {
            (self.orders.end() - self.orders.start() + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }
}

/// `sin θ = (k + offset) λ / span`, for `k` no smaller than `lowest`.
struct Family {
    kind: BranchKind,
    offset: f64,
    span: f64,
    lowest: Option<i64>,
}

impl Family {
    fn sin_theta(&self, k: i64, lambda: f64) -> f64 {
        ((k as f64 + self.offset) * lambda) / self.span
    }

    fn admissible(&self, k: i64, lambda: f64, inclusive: bool) -> bool {
        let s = self.sin_theta(k, lambda).abs();
        if inclusive {
            s <= 1.0
        } else {
            s < 1.0
        }
    }

    fn range(&self, lambda: f64, inclusive: bool) -> OrderRange {
        let ok = |k: i64| self.admissible(k, lambda, inclusive);
        // Estimate from the continuous bound, then settle on the exact edge
        // with the same arithmetic used to report sin θ.
        let bound = self.span / lambda;
        let clamp = |x: f64| x.clamp(-(i64::MAX as f64) / 4.0, i64::MAX as f64 / 4.0) as i64;

        let mut hi = clamp((bound - self.offset).floor());
        while ok(hi + 1) {
            hi += 1;
        }
        while hi > i64::MIN / 4 && !ok(hi) && self.sin_theta(hi, lambda) > 0.0 {
            hi -= 1;
        }

        let mut lo = clamp((-bound - self.offset).ceil());
        while ok(lo - 1) {
            lo -= 1;
        }
        while !ok(lo) && self.sin_theta(lo, lambda) < 0.0 {
            lo += 1;
        }

        if let Some(lowest) = self.lowest {
            lo = lo.max(lowest);
        }
        if !ok(lo) || !ok(hi) {
            return OrderRange {
                kind: self.kind,
                orders: RangeInclusive::new(1, 0),
            };
        }
        OrderRange {
            kind: self.kind,
            orders: lo..=hi,
        }
    }
}

fn families(scenario: &Scenario) -> Vec<Family> {
    match *scenario {
        Scenario::Laue { d } => vec![Family {
            kind: BranchKind::LaueOrder,
            offset: 0.0,
            span: 2.0 * d,
            lowest: Some(1),
        }],
        Scenario::Aperture { a } => vec![Family {
            kind: BranchKind::ApertureOrder,
            offset: 0.0,
            span: a,
            lowest: None,
        }],
        Scenario::DoubleSlit { a, c } => vec![
            Family {
                kind: BranchKind::Interference,
                offset: 0.0,
                span: c,
                lowest: None,
            },
            Family {
                kind: BranchKind::Envelope,
                offset: 0.5,
                span: a,
                lowest: None,
            },
        ],
    }
}

/// Integer bounds of every branch family, as used by [`quantized_angles`].
pub fn order_range(scenario: &Scenario, beam: &Beam, boundary_inclusive: bool) -> Vec<OrderRange> {
    families(scenario)
        .iter()
        .map(|f| f.range(beam.lambda(), boundary_inclusive))
        .collect()
}

/// Every admissible scattering branch, sorted by `sin θ` ascending.
///
/// Admissible means `|sin θ| < 1`, or `≤ 1` with `boundary_inclusive`.
/// Coinciding interference and envelope angles are both kept; the
/// interference branch sorts first.
pub fn quantized_angles(
    scenario: &Scenario,
    beam: &Beam,
    boundary_inclusive: bool,
) -> Vec<ScatteringBranch> {
    let lambda = beam.lambda();
    let interaction = scenario.interaction();
    let mut branches: Vec<ScatteringBranch> = families(scenario)
        .iter()
        .flat_map(|family| {
            let range = family.range(lambda, boundary_inclusive);
            range.orders.map(move |k| {
                let sin_theta = family.sin_theta(k, lambda);
                let theta = sin_theta.asin();
                ScatteringBranch {
                    kind: family.kind,
                    order: k,
                    sin_theta,
                    theta,
                    delta_pz: momentum_transfer(theta, beam, interaction),
                }
            })
        })
        .collect();
    branches.sort_by(|x, y| {
        x.sin_theta
            .partial_cmp(&y.sin_theta)
            .unwrap_or(Ordering::Equal)
            .then(x.kind.cmp(&y.kind))
    });
    branches
}

/// Whether `delta_pz · Q` is an allowed quantum of `interval`: `k h` for the
/// plus rule, `(k + 1/2) h` for the minus rule, within relative `tol`.
pub fn verify_quantum(
    branch: &ScatteringBranch,
    interval: &SymmetryInterval,
    h: ActionConstant,
    tol: f64,
) -> bool {
    let h = h.value();
    let action = branch.delta_pz * interval.length;
    let quanta = action / h - interval.rule.offset();
    let nearest = quanta.round();
    let allowed = (nearest + interval.rule.offset()) * h;
    (action - allowed).abs() <= tol * action.abs().max(h)
}

/// Checks a branch against the quantization condition it was derived from.
///
/// Laue, aperture and interference branches are checked against a single
/// interval. Envelope branches satisfy the outer-edge and slit-center
/// conditions only jointly: subtracting them gives the `a`-long interval with
/// the minus rule, which is what gets checked.
pub fn verify_branch(
    branch: &ScatteringBranch,
    scenario: &Scenario,
    h: ActionConstant,
    tol: f64,
) -> bool {
    let intervals = symmetry_intervals(scenario);
    match branch.kind {
        BranchKind::LaueOrder | BranchKind::ApertureOrder | BranchKind::Interference => {
            verify_quantum(branch, &intervals[0], h, tol)
        }
        BranchKind::Envelope => match intervals.as_slice() {
            [centers, outer] => outer
                .difference(centers)
                .map(|joint| verify_quantum(branch, &joint, h, tol))
                .unwrap_or(false),
            _ => false,
        },
    }
}
