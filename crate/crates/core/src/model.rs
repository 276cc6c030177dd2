//! Three-species intraguild-predation model with top-predator feeding switching.
//!
//! The prey `x`, intermediate predator `y` and top predator `z` evolve as
//!
//! ```text
//! x' = (b1 - a11 x) x - a12 x y - a13 x² z / (x + c y)
//! y' = -b2 y + a21 x y          - a23 y² z / (y + c x)
//! z' = -b3 z + a31 x² z / (x + c y) + a32 y² z / (y + c x)
//! ```
//!
//! The switching terms are written in their rational form, which equals the
//! `x z / (1 + c y / x)` form for positive densities and stays finite when only
//! one of the prey densities vanishes. On the line `x = y = 0` both switched
//! attack terms are defined as zero, so the origin is a rest point and the
//! z-axis carries pure top-predator decay.

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::scalar::Scalar;

/// Names of the eleven rate constants, in canonical order.
pub const PARAM_NAMES: [&str; 11] = [
    "b1", "b2", "b3", "c", "a11", "a12", "a13", "a21", "a23", "a31", "a32",
];

/// Rate constants of the model. All are nonnegative and `a11 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    /// Prey intrinsic growth rate.
    pub b1: T,
    /// Intermediate-predator mortality.
    pub b2: T,
    /// Top-predator mortality.
    pub b3: T,
    /// Switching intensity; `0` is plain omnivory.
    pub c: T,
    /// Prey intraspecific competition.
    pub a11: T,
    pub a12: T,
    pub a13: T,
    pub a21: T,
    pub a23: T,
    pub a31: T,
    pub a32: T,
}

impl<T: Scalar> Params<T> {
    /// The reference parameter set: a stable coexistence focus at `c = 1`,
    /// an unstable saddle focus at `c = 0`.
    pub fn reference() -> Self {
        Self {
            b1: T::lit(5.0),
            b2: T::lit(1.0),
            b3: T::lit(1.25),
            c: T::lit(1.0),
            a11: T::lit(0.4),
            a12: T::lit(1.0),
            a13: T::lit(1.5),
            a21: T::lit(1.0),
            a23: T::lit(1.0),
            a31: T::lit(0.1),
            a32: T::lit(1.0),
        }
    }

    pub fn with_c(mut self, c: T) -> Self {
        self.c = c;
        self
    }

    pub fn get(&self, name: &str) -> Option<T> {
        Some(match name {
            "b1" => self.b1,
            "b2" => self.b2,
            "b3" => self.b3,
            "c" => self.c,
            "a11" => self.a11,
            "a12" => self.a12,
            "a13" => self.a13,
            "a21" => self.a21,
            "a23" => self.a23,
            "a31" => self.a31,
            "a32" => self.a32,
            _ => return None,
        })
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut T> {
        Some(match name {
            "b1" => &mut self.b1,
            "b2" => &mut self.b2,
            "b3" => &mut self.b3,
            "c" => &mut self.c,
            "a11" => &mut self.a11,
            "a12" => &mut self.a12,
            "a13" => &mut self.a13,
            "a21" => &mut self.a21,
            "a23" => &mut self.a23,
            "a31" => &mut self.a31,
            "a32" => &mut self.a32,
            _ => return None,
        })
    }

    /// Returns a copy with the named parameter replaced.
    pub fn with(mut self, name: &str, value: T) -> Result<Self> {
        match self.get_mut(name) {
            Some(slot) => *slot = value,
            None => {
                return Err(Error::InvalidParameter {
                    name: "name",
                    reason: format!("unknown parameter `{name}`"),
                })
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for name in PARAM_NAMES {
            let v = self.get(name).expect("canonical name");
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidParameter {
                    name: canonical(name),
                    reason: format!("must be finite and nonnegative, got {v}"),
                });
            }
        }
        if self.a11 <= T::zero() {
            return Err(Error::InvalidParameter {
                name: "a11",
                reason: "must be strictly positive".into(),
            });
        }
        Ok(())
    }
}

fn canonical(name: &str) -> &'static str {
    PARAM_NAMES
        .iter()
        .copied()
        .find(|n| *n == name)
        .unwrap_or("?")
}

/// Population densities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> State<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (label, v) in [("x", self.x), ("y", self.y), ("z", self.z)] {
            if !v.is_finite() {
                return Err(Error::InvalidState(format!("{label} is not finite")));
            }
            if v < T::zero() {
                return Err(Error::InvalidState(format!("{label} = {v} is negative")));
            }
        }
        Ok(())
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.x > T::zero() && self.y > T::zero() && self.z > T::zero()
    }

    /// True on the line `x = y = 0` where both switching denominators vanish.
    pub fn on_singular_line(&self) -> bool {
        self.x == T::zero() && self.y == T::zero()
    }
}

/// Time derivative of a [`State`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Derivative<T> {
    pub dx: T,
    pub dy: T,
    pub dz: T,
}

impl<T: Scalar> Derivative<T> {
    pub fn to_array(self) -> [T; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn norm(&self) -> T {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }
}

/// Switched attack term `u² z / (u + c v)` and its partials in `(u, v, z)`.
#[derive(Debug, Clone, Copy)]
struct Switched<T> {
    value: T,
    d_u: T,
    d_v: T,
    d_z: T,
}

#[inline]
fn switched<T: Scalar>(u: T, v: T, z: T, c: T) -> Switched<T> {
    let zero = T::zero();
    if u <= zero {
        // u²/(u + c v) -> 0 as u -> 0; only when c v = 0 does it reduce to u.
        let d_u = if c * v > zero { zero } else { z };
        return Switched {
            value: zero,
            d_u,
            d_v: zero,
            d_z: zero,
        };
    }
    let den = u + c * v;
    let den2 = den * den;
    Switched {
        value: u * u * z / den,
        d_u: z * u * (u + (T::one() + T::one()) * c * v) / den2,
        d_v: -c * u * u * z / den2,
        d_z: u * u / den,
    }
}

/// Vector field without validation. Negative inputs are projected onto the
/// orthant, which the integrator relies on for trial stages.
#[inline]
pub(crate) fn rhs<T: Scalar>(s: [T; 3], p: &Params<T>) -> [T; 3] {
    let x = s[0].max(T::zero());
    let y = s[1].max(T::zero());
    let z = s[2].max(T::zero());
    let sx = switched(x, y, z, p.c).value;
    let sy = switched(y, x, z, p.c).value;
    [
        (p.b1 - p.a11 * x) * x - p.a12 * x * y - p.a13 * sx,
        -p.b2 * y + p.a21 * x * y - p.a23 * sy,
        -p.b3 * z + p.a31 * sx + p.a32 * sy,
    ]
}

/// Analytic Jacobian without validation; inputs are projected onto the orthant.
#[inline]
pub(crate) fn jac<T: Scalar>(s: [T; 3], p: &Params<T>) -> Mat3<T> {
    let two = T::one() + T::one();
    let x = s[0].max(T::zero());
    let y = s[1].max(T::zero());
    let z = s[2].max(T::zero());
    let sx = switched(x, y, z, p.c);
    // partials of y² z / (y + c x): d_u is w.r.t. y, d_v w.r.t. x
    let sy = switched(y, x, z, p.c);
    [
        [
            p.b1 - two * p.a11 * x - p.a12 * y - p.a13 * sx.d_u,
            -p.a12 * x - p.a13 * sx.d_v,
            -p.a13 * sx.d_z,
        ],
        [
            p.a21 * y - p.a23 * sy.d_v,
            -p.b2 + p.a21 * x - p.a23 * sy.d_u,
            -p.a23 * sy.d_z,
        ],
        [
            p.a31 * sx.d_u + p.a32 * sy.d_v,
            p.a31 * sx.d_v + p.a32 * sy.d_u,
            -p.b3 + p.a31 * sx.d_z + p.a32 * sy.d_z,
        ],
    ]
}

/// Right-hand side of the switched model at `s`.
pub fn vector_field<T: Scalar>(s: &State<T>, p: &Params<T>) -> Result<Derivative<T>> {
    s.validate().map_err(|e| Error::Domain(e.to_string()))?;
    let [dx, dy, dz] = rhs(s.to_array(), p);
    Ok(Derivative { dx, dy, dz })
}

/// Analytic Jacobian of [`vector_field`]. Defined everywhere on the closed
/// orthant except the line `x = y = 0`.
pub fn jacobian<T: Scalar>(s: &State<T>, p: &Params<T>) -> Result<Mat3<T>> {
    s.validate().map_err(|e| Error::Domain(e.to_string()))?;
    if s.on_singular_line() {
        return Err(Error::Domain(
            "Jacobian undefined on the singular line x = y = 0".into(),
        ));
    }
    Ok(jac(s.to_array(), p))
}
