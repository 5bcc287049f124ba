//! Special-relativity kernel in 1+1 dimensions.
//!
//! Every function takes the speed of light as an explicit argument so the
//! classical limit can be probed by inflating it. Use [`SPEED_OF_LIGHT`] for
//! physical results.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, meters per second.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance used when deciding that an information speed equals `c`.
pub const LIGHTLIKE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelError {
    #[error("superluminal frame: |v| = {v} m/s is not below c = {c} m/s")]
    Superluminal { v: f64, c: f64 },
    #[error("negative duration: {0} s")]
    NegativeDuration(f64),
    #[error("negative length: {0} m")]
    NegativeLength(f64),
    #[error("negative mass: {0} kg")]
    NegativeMass(f64),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
}

/// A point (or a difference of points) in 1+1 spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    /// Coordinate time, seconds.
    pub t: f64,
    /// Position along the boost axis, meters.
    pub x: f64,
}

impl SpacetimeEvent {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    /// Squared interval `c²t² − x²`; positive for timelike separations.
    pub fn interval_squared(&self, c: f64) -> f64 {
        c * c * self.t * self.t - self.x * self.x
    }
}

/// Signed speed along the boost axis, meters per second.
///
/// Any finite value can be held; operations that boost by it reject `|v| >= c`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Velocity(pub f64);

impl Velocity {
    pub const ZERO: Velocity = Velocity(0.0);

    /// A velocity expressed as a fraction of `c`.
    pub fn from_fraction(beta: f64, c: f64) -> Self {
        Velocity(beta * c)
    }

    pub fn meters_per_second(self) -> f64 {
        self.0
    }

    /// Checks that the velocity can be used as a boost.
    pub fn validate(self, c: f64) -> Result<Self, RelError> {
        if !self.0.is_finite() {
            return Err(RelError::NonFinite("velocity"));
        }
        if self.0.abs() >= c {
            return Err(RelError::Superluminal { v: self.0, c });
        }
        Ok(self)
    }
}

impl std::ops::Neg for Velocity {
    type Output = Velocity;

    fn neg(self) -> Velocity {
        Velocity(-self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalClass {
    Timelike,
    Lightlike,
    Spacelike,
}

impl std::fmt::Display for CausalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CausalClass::Timelike => "timelike",
            CausalClass::Lightlike => "lightlike",
            CausalClass::Spacelike => "spacelike",
        };
        f.write_str(s)
    }
}

/// Causal relationship between two events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Causality {
    pub class: CausalClass,
    /// Speed information would need to connect the events, m/s. Infinite for
    /// simultaneous but separated events.
    pub v_info: f64,
}

/// Lorentz factor `1/√(1 − (v/c)²)`.
pub fn gamma(v: Velocity, c: f64) -> Result<f64, RelError> {
    let v = v.validate(c)?;
    let beta = v.0 / c;
    Ok(1.0 / (1.0 - beta * beta).sqrt())
}

/// Transforms an event (or event delta) into the frame moving at `v`.
pub fn boost(e: SpacetimeEvent, v: Velocity, c: f64) -> Result<SpacetimeEvent, RelError> {
    let g = gamma(v, c)?;
    let v = v.0;
    Ok(SpacetimeEvent {
        t: g * (e.t - v * e.x / (c * c)),
        x: g * (e.x - v * e.t),
    })
}

/// Time elapsed on a clock moving at `v` while `coordinate_dt` passes in the
/// rest frame.
pub fn proper_elapsed(coordinate_dt: f64, v: Velocity, c: f64) -> Result<f64, RelError> {
    if coordinate_dt < 0.0 {
        return Err(RelError::NegativeDuration(coordinate_dt));
    }
    Ok(coordinate_dt / gamma(v, c)?)
}

/// Length of a rod of rest length `proper_length` measured from a frame in
/// which it moves at `v`.
pub fn contracted_length(proper_length: f64, v: Velocity, c: f64) -> Result<f64, RelError> {
    if proper_length < 0.0 {
        return Err(RelError::NegativeLength(proper_length));
    }
    Ok(proper_length / gamma(v, c)?)
}

/// Relativistic kinetic energy `(γ − 1)mc²`, joules.
pub fn kinetic_energy(mass: f64, v: Velocity, c: f64) -> Result<f64, RelError> {
    if mass < 0.0 {
        return Err(RelError::NegativeMass(mass));
    }
    Ok((gamma(v, c)? - 1.0) * mass * c * c)
}

/// Classifies the separation `(delta_t, delta_x)` by the speed a signal would
/// need to travel between the two events.
pub fn classify(delta_t: f64, delta_x: f64, c: f64) -> Causality {
    let dt = delta_t.abs();
    let dx = delta_x.abs();
    let v_info = if dx == 0.0 {
        0.0
    } else if dt == 0.0 {
        f64::INFINITY
    } else {
        dx / dt
    };
    let class = if ((v_info - c) / c).abs() <= LIGHTLIKE_TOLERANCE {
        CausalClass::Lightlike
    } else if v_info < c {
        CausalClass::Timelike
    } else {
        CausalClass::Spacelike
    };
    Causality { class, v_info }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C: f64 = SPEED_OF_LIGHT;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(Velocity::ZERO, C).unwrap(), 1.0);
        let g98 = gamma(Velocity::from_fraction(0.98, C), C).unwrap();
        assert!((g98 - 5.0252).abs() < 1e-4, "{g98}");
        // 40-digit evaluation: 7.088812050083359...
        let g99 = gamma(Velocity::from_fraction(0.99, C), C).unwrap();
        assert!((g99 - 7.08881).abs() < 1e-4, "{g99}");
    }

    #[test]
    fn superluminal_rejected() {
        for v in [C, -C, 1.5 * C] {
            assert!(matches!(gamma(Velocity(v), C), Err(RelError::Superluminal { .. })));
            assert!(boost(SpacetimeEvent::new(0.0, 0.0), Velocity(v), C).is_err());
            assert!(kinetic_energy(1.0, Velocity(v), C).is_err());
        }
        assert!(gamma(Velocity(f64::NAN), C).is_err());
    }

    #[test]
    fn worked_example_boost() {
        let d = boost(
            SpacetimeEvent::new(1.10, 4.0e8),
            Velocity::from_fraction(0.98, C),
            C,
        )
        .unwrap();
        assert!(rel_close(d.t, -1.04, 0.01), "{}", d.t);
        assert!(rel_close(d.x, 3.86e8, 0.01), "{}", d.x);
    }

    #[test]
    fn identity_boost() {
        let e = SpacetimeEvent::new(12.5, -3.0e7);
        assert_eq!(boost(e, Velocity::ZERO, C).unwrap(), e);
    }

    #[test]
    fn dilation_and_contraction() {
        let yr = 365.25 * 86_400.0;
        let tau = proper_elapsed(100.0 * yr, Velocity::from_fraction(0.99, C), C).unwrap() / yr;
        assert!(rel_close(tau, 14.107, 1e-3), "{tau}");
        assert_eq!(proper_elapsed(42.0, Velocity::ZERO, C).unwrap(), 42.0);
        let t = proper_elapsed(10.0, Velocity::from_fraction(0.98, C), C).unwrap();
        assert!((t - 1.9900).abs() < 1e-3);
        assert!(matches!(
            proper_elapsed(-1.0, Velocity::ZERO, C),
            Err(RelError::NegativeDuration(_))
        ));

        assert_eq!(contracted_length(7.0, Velocity::ZERO, C).unwrap(), 7.0);
        let l98 = contracted_length(100.0, Velocity::from_fraction(0.98, C), C).unwrap();
        assert!((l98 - 19.900).abs() < 1e-2);
        let l99 = contracted_length(100.0, Velocity::from_fraction(0.99, C), C).unwrap();
        assert!((l99 - 14.107).abs() < 1e-2);
        assert!(contracted_length(-1.0, Velocity::ZERO, C).is_err());
    }

    #[test]
    fn kinetic_energy_values() {
        assert_eq!(kinetic_energy(3.0, Velocity::ZERO, C).unwrap(), 0.0);
        let ke = kinetic_energy(1.0, Velocity::from_fraction(0.98, C), C).unwrap();
        assert!(rel_close(ke, 3.6177e17, 1e-3), "{ke}");
        let mut last = 0.0;
        for i in 1..1000 {
            let e = kinetic_energy(1.0, Velocity::from_fraction(i as f64 / 1000.0, C), C).unwrap();
            assert!(e > last);
            last = e;
        }
        assert!(last > 1e18);
        assert!(kinetic_energy(-1.0, Velocity::ZERO, C).is_err());
    }

    #[test]
    fn classify_examples() {
        let k = classify(1.10, 4.0e8, C);
        assert_eq!(k.class, CausalClass::Spacelike);
        assert!(rel_close(k.v_info, 3.64e8, 5e-3));

        let k = classify(1.0, 0.0, C);
        assert_eq!(k, Causality { class: CausalClass::Timelike, v_info: 0.0 });

        assert_eq!(classify(1.0, C, C).class, CausalClass::Lightlike);
        assert_eq!(classify(-1.0, -C, C).class, CausalClass::Lightlike);

        let k = classify(0.0, 5.0, C);
        assert_eq!(k.class, CausalClass::Spacelike);
        assert!(k.v_info.is_infinite());
        assert_eq!(classify(0.0, 0.0, C).v_info, 0.0);
    }

    fn velocity() -> impl Strategy<Value = Velocity> {
        (-0.999f64..0.999).prop_map(|b| Velocity::from_fraction(b, C))
    }

    fn event() -> impl Strategy<Value = SpacetimeEvent> {
        (-1e3f64..1e3, -1e11f64..1e11).prop_map(|(t, x)| SpacetimeEvent::new(t, x))
    }

    proptest! {
        #[test]
        fn gamma_at_least_one(v in velocity()) {
            prop_assert!(gamma(v, C).unwrap() >= 1.0);
        }

        #[test]
        fn boost_round_trip(e in event(), v in velocity()) {
            let back = boost(boost(e, v, C).unwrap(), -v, C).unwrap();
            let scale = (C * e.t.abs()).max(e.x.abs()).max(1.0);
            prop_assert!((back.t - e.t).abs() * C <= 1e-9 * scale);
            prop_assert!((back.x - e.x).abs() <= 1e-9 * scale);
        }

        #[test]
        fn interval_is_invariant(e in event(), v in velocity()) {
            let b = boost(e, v, C).unwrap();
            let scale = C * C * e.t * e.t + e.x * e.x;
            let diff = (b.interval_squared(C) - e.interval_squared(C)).abs();
            prop_assert!(diff <= 1e-9 * scale);
        }

        #[test]
        fn classification_is_boost_invariant(e in event(), v in velocity()) {
            let before = classify(e.t, e.x, C).class;
            let b = boost(e, v, C).unwrap();
            let after = classify(b.t, b.x, C).class;
            prop_assert_eq!(before, after);
        }
    }
}
