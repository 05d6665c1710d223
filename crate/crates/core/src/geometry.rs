//! Static Apollonius-disc and capture-disc geometry.
//!
//! For a pursuer at `x_P` with unit speed and an evader at `x_E` with speed at
//! most `nu < 1`, the evader's dominance region is the closed disc
//!
//! ```text
//!   center = alpha * x_E - beta * x_P,   radius = gamma * |x_E - x_P|
//! ```
//!
//! with `alpha = 1/(1 - nu^2)`, `gamma = nu * alpha`, `beta = nu * gamma`.
//! The capture disc is the initial Apollonius disc inflated by `delta`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for geometric equality on unit-scale scenarios.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    #[inline]
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    /// Rescales to length at most `max_len`.
    pub fn clamp_norm(self, max_len: f64) -> Vec2 {
        let n = self.norm();
        if n > max_len && n > 0.0 {
            self * (max_len / n)
        } else {
            self
        }
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Unsigned angle between two nonzero vectors, in `[0, pi]`.
    pub fn angle_to(self, o: Vec2) -> f64 {
        self.cross(o).atan2(self.dot(o)).abs()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Evader-to-pursuer maximum speed ratio, `0 <= nu < 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SpeedRatio(f64);

impl SpeedRatio {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && (0.0..1.0).contains(&nu) {
            Ok(Self(nu))
        } else {
            Err(Error::SpeedRatio(nu))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SpeedRatio {
    type Error = Error;
    fn try_from(nu: f64) -> Result<Self> {
        SpeedRatio::new(nu)
    }
}

impl From<SpeedRatio> for f64 {
    fn from(nu: SpeedRatio) -> f64 {
        nu.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApolloniusCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn coefficients(nu: SpeedRatio) -> ApolloniusCoefficients {
    let nu = nu.get();
    let alpha = 1.0 / (1.0 - nu * nu);
    let gamma = nu * alpha;
    ApolloniusCoefficients {
        alpha,
        beta: nu * gamma,
        gamma,
    }
}

/// Closed disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disc {
    pub center: Vec2,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::NonFinite("disc center"));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::Domain {
                name: "radius",
                expect: ">= 0",
                value: radius,
            });
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.distance(self.center) <= self.radius + tol
    }

    /// `other` lies inside `self` up to `tol`.
    pub fn contains_disc(&self, other: &Disc, tol: f64) -> bool {
        self.center.distance(other.center) <= self.radius - other.radius + tol
    }

    /// Point on the boundary at `angle`.
    pub fn boundary_point(&self, angle: f64) -> Vec2 {
        self.center + Vec2::from_angle(angle) * self.radius
    }
}

/// Apollonius disc of an evader at `evader` against a pursuer at `pursuer`.
pub fn apollonius_disc(pursuer: Vec2, evader: Vec2, nu: SpeedRatio) -> Disc {
    let c = coefficients(nu);
    Disc {
        center: evader * c.alpha - pursuer * c.beta,
        radius: c.gamma * evader.distance(pursuer),
    }
}

/// Initial Apollonius disc inflated by `delta > 0`.
pub fn capture_disc(initial_ac: &Disc, delta: f64) -> Result<Disc> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain {
            name: "delta",
            expect: "> 0",
            value: delta,
        });
    }
    Ok(Disc {
        center: initial_ac.center,
        radius: initial_ac.radius + delta,
    })
}

/// Position of the Apollonius disc relative to the capture disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Offsets {
    /// Apollonius center minus capture center.
    pub y: Vec2,
    pub d_min: f64,
    pub d_max: f64,
    /// `d_min * d_max`; negative once the disc has left the capture disc.
    pub v: f64,
}

pub fn offsets(ac: &Disc, cap: &Disc) -> Offsets {
    let y = ac.center - cap.center;
    let ny = y.norm();
    let gap = cap.radius - ac.radius;
    Offsets {
        y,
        d_min: gap - ny,
        d_max: gap + ny,
        v: gap * gap - y.norm_sq(),
    }
}

/// Exponential lower bound on `V` under the guaranteed law:
/// `V0 * exp(nu * t / ((1 + nu) R_C))`.
pub fn lyapunov_envelope(v0: f64, nu: SpeedRatio, r_c: f64, t: f64) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(Error::Domain {
            name: "V0",
            expect: "> 0",
            value: v0,
        });
    }
    if !(r_c > 0.0) {
        return Err(Error::Domain {
            name: "R_C",
            expect: "> 0",
            value: r_c,
        });
    }
    if !(t >= 0.0) {
        return Err(Error::Domain {
            name: "t",
            expect: ">= 0",
            value: t,
        });
    }
    let nu = nu.get();
    Ok(v0 * (nu * t / ((1.0 + nu) * r_c)).exp())
}

/// Worst-case capture time `2 (1 + 1/nu) R_C ln(R_C / delta)`; infinite for `nu = 0`.
pub fn capture_time_bound(nu: SpeedRatio, r_c: f64, delta: f64) -> f64 {
    let nu = nu.get();
    if nu == 0.0 {
        return f64::INFINITY;
    }
    2.0 * (1.0 + 1.0 / nu) * r_c * (r_c / delta).ln()
}

/// Smallest possible `d_min` at capture: `R_C - sqrt(R_C^2 - delta^2)`.
pub fn delta1(r_c: f64, delta: f64) -> f64 {
    r_c - (r_c * r_c - delta * delta).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn nu(v: f64) -> SpeedRatio {
        SpeedRatio::new(v).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficients(nu(0.0));
        assert_eq!((c.alpha, c.beta, c.gamma), (1.0, 0.0, 0.0));

        let c = coefficients(nu(0.5));
        assert_abs_diff_eq!(c.alpha, 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.beta, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.gamma, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.beta, 0.5 * c.gamma, epsilon = 1e-15);
        assert_abs_diff_eq!(c.beta, 0.25 * c.alpha, epsilon = 1e-15);

        let c = coefficients(nu(0.99));
        assert_abs_diff_eq!(c.alpha, 1.0 / (1.0 - 0.9801), epsilon = 1e-9);
        assert_abs_diff_eq!(c.alpha, 50.2513, epsilon = 1e-4);
    }

    #[test]
    fn speed_ratio_rejects_out_of_range() {
        assert!(SpeedRatio::new(1.0).is_err());
        assert!(SpeedRatio::new(1.2).is_err());
        assert!(SpeedRatio::new(-0.1).is_err());
        assert!(SpeedRatio::new(f64::NAN).is_err());
        assert!(SpeedRatio::new(0.0).is_ok());
    }

    #[test]
    fn apollonius_examples() {
        let d = apollonius_disc(Vec2::ZERO, Vec2::new(0.0, 1.0), nu(0.5));
        assert_abs_diff_eq!(d.center.x, 0.0);
        assert_abs_diff_eq!(d.center.y, 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.radius, 2.0 / 3.0, epsilon = 1e-15);

        let d = apollonius_disc(Vec2::ZERO, Vec2::new(0.0, 1.0), nu(0.0));
        assert_eq!(d.center, Vec2::new(0.0, 1.0));
        assert_eq!(d.radius, 0.0);

        let d = apollonius_disc(Vec2::ZERO, Vec2::new(0.0, 0.8), nu(0.677));
        assert_abs_diff_eq!(d.center.y, 1.4769, epsilon = 1e-4);
        assert_abs_diff_eq!(d.radius, 0.9999, epsilon = 1e-4);
        for k in 0..64 {
            let b = d.boundary_point(k as f64 * std::f64::consts::TAU / 64.0);
            let ratio = b.distance(Vec2::new(0.0, 0.8)) / b.norm();
            assert_abs_diff_eq!(ratio, 0.677, epsilon = 1e-12);
        }
    }

    #[test]
    fn coincident_agents_give_point_disc() {
        let p = Vec2::new(0.3, -0.2);
        let d = apollonius_disc(p, p, nu(0.7));
        assert_abs_diff_eq!(d.center.x, p.x, epsilon = 1e-15);
        assert_abs_diff_eq!(d.center.y, p.y, epsilon = 1e-15);
        assert_eq!(d.radius, 0.0);
    }

    #[test]
    fn capture_disc_examples() {
        let ac = Disc::new(Vec2::new(0.0, 4.0 / 3.0), 2.0 / 3.0).unwrap();
        let cap = capture_disc(&ac, 0.1).unwrap();
        assert_eq!(cap.center, ac.center);
        assert_abs_diff_eq!(cap.radius, 23.0 / 30.0, epsilon = 1e-15);

        let point = Disc::new(Vec2::new(2.0, 1.0), 0.0).unwrap();
        let cap = capture_disc(&point, 0.05).unwrap();
        assert_eq!(cap.radius, 0.05);
        assert_eq!(cap.center, point.center);

        assert!(capture_disc(&ac, 0.0).is_err());
        assert!(capture_disc(&ac, -1.0).is_err());
    }

    #[test]
    fn offsets_examples() {
        let cap = Disc::new(Vec2::new(1.0, 2.0), 0.8).unwrap();
        let ac = Disc::new(cap.center, 0.7).unwrap();
        let o = offsets(&ac, &cap);
        assert_eq!(o.y, Vec2::ZERO);
        assert_abs_diff_eq!(o.d_min, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(o.d_max, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(o.v, 0.01, epsilon = 1e-15);

        let at_center = Disc::new(cap.center, 0.0).unwrap();
        let o = offsets(&at_center, &cap);
        assert_abs_diff_eq!(o.d_min, 0.8);
        assert_abs_diff_eq!(o.v, 0.64, epsilon = 1e-15);

        let touching = Disc::new(cap.center + Vec2::new(0.8, 0.0), 0.0).unwrap();
        let o = offsets(&touching, &cap);
        assert_abs_diff_eq!(o.d_min, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o.v, 0.0, epsilon = 1e-15);

        let outside = Disc::new(cap.center + Vec2::new(1.0, 0.0), 0.1).unwrap();
        assert!(offsets(&outside, &cap).v < 0.0);
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(lyapunov_envelope(0.3, nu(0.5), 1.0, 0.0).unwrap(), 0.3);
        let v = lyapunov_envelope(0.01, nu(0.5), 23.0 / 30.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, 0.01 * (0.5f64 / (1.5 * 23.0 / 30.0)).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.01545, epsilon = 1e-5);

        // The envelope reaches R_C^2 exactly at the capture-time bound.
        let (n, r_c, delta) = (nu(0.5), 23.0 / 30.0, 0.1);
        let t = capture_time_bound(n, r_c, delta);
        let v = lyapunov_envelope(delta * delta, n, r_c, t).unwrap();
        assert_abs_diff_eq!(v, r_c * r_c, epsilon = 1e-12);

        assert!(lyapunov_envelope(0.0, n, 1.0, 1.0).is_err());
        assert!(lyapunov_envelope(1.0, n, 0.0, 1.0).is_err());
    }

    #[test]
    fn capture_time_bound_example() {
        let t = capture_time_bound(nu(0.5), 23.0 / 30.0, 0.1);
        assert_abs_diff_eq!(t, 6.0 * (23.0 / 30.0) * (23.0f64 / 3.0).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(t, 9.37, epsilon = 5e-3);
    }

    #[test]
    fn delta1_example() {
        assert_abs_diff_eq!(delta1(1.0, 0.1), 1.0 - 0.99f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(delta1(1.0, 0.1), 0.005013, epsilon = 1e-6);
    }
}
