//! Target sets, payoff fields, and the game-of-kind and game-of-degree
//! answers that follow from the initial Apollonius disc.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{apollonius_disc, coefficients, Disc, SpeedRatio, Vec2};

/// One geometric piece of a target set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetPrimitive {
    Point {
        at: Vec2,
    },
    Segment {
        a: Vec2,
        b: Vec2,
    },
    Disc {
        center: Vec2,
        radius: f64,
    },
    Polyline {
        points: Vec<Vec2>,
    },
    VerticalLine {
        x: f64,
        y_range: [f64; 2],
    },
}

fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let s = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * s
}

impl TargetPrimitive {
    /// Nearest point of the primitive to `p`.
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        match self {
            Self::Point { at } => *at,
            Self::Segment { a, b } => closest_on_segment(p, *a, *b),
            Self::Disc { center, radius } => {
                let d = p - *center;
                let n = d.norm();
                if n <= *radius {
                    p
                } else {
                    *center + d * (*radius / n)
                }
            }
            Self::Polyline { points } => match points.as_slice() {
                [] => Vec2::new(f64::INFINITY, f64::INFINITY),
                [only] => *only,
                pts => pts
                    .windows(2)
                    .map(|w| closest_on_segment(p, w[0], w[1]))
                    .min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)))
                    .unwrap(),
            },
            Self::VerticalLine { x, y_range } => closest_on_segment(
                p,
                Vec2::new(*x, y_range[0]),
                Vec2::new(*x, y_range[1]),
            ),
        }
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        self.closest_point(p).distance(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            Self::Point { at } => at.is_finite(),
            Self::Segment { a, b } => a.is_finite() && b.is_finite(),
            Self::Disc { center, radius } => {
                if !(*radius >= 0.0) {
                    return Err(Error::Domain {
                        name: "target disc radius",
                        expect: ">= 0",
                        value: *radius,
                    });
                }
                center.is_finite() && radius.is_finite()
            }
            Self::Polyline { points } => {
                if points.is_empty() {
                    return Err(Error::Config("polyline target needs at least one point".into()));
                }
                points.iter().all(|p| p.is_finite())
            }
            Self::VerticalLine { x, y_range } => {
                if y_range[0] > y_range[1] {
                    return Err(Error::Config(format!(
                        "vertical line y_range [{}, {}] is reversed",
                        y_range[0], y_range[1]
                    )));
                }
                x.is_finite() && y_range[0].is_finite() && y_range[1].is_finite()
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite("target primitive"))
        }
    }

    /// Same primitive after `x -> rot(x) + shift`.
    ///
    /// A vertical line stops being vertical under a general rotation, so it
    /// comes back as a segment.
    pub fn moved(&self, angle: f64, shift: Vec2) -> Self {
        let m = |p: Vec2| p.rotated(angle) + shift;
        match self {
            Self::Point { at } => Self::Point { at: m(*at) },
            Self::Segment { a, b } => Self::Segment { a: m(*a), b: m(*b) },
            Self::Disc { center, radius } => Self::Disc {
                center: m(*center),
                radius: *radius,
            },
            Self::Polyline { points } => Self::Polyline {
                points: points.iter().map(|p| m(*p)).collect(),
            },
            Self::VerticalLine { x, y_range } => Self::Segment {
                a: m(Vec2::new(*x, y_range[0])),
                b: m(Vec2::new(*x, y_range[1])),
            },
        }
    }
}

/// A fixed collection of target primitives.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetSet {
    pub primitives: Vec<TargetPrimitive>,
}

impl TargetSet {
    pub fn new(primitives: Vec<TargetPrimitive>) -> Self {
        Self { primitives }
    }

    pub fn point(at: Vec2) -> Self {
        Self::new(vec![TargetPrimitive::Point { at }])
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// Distance from `p` to the nearest primitive; infinite for an empty set.
    pub fn distance(&self, p: Vec2) -> f64 {
        self.primitives
            .iter()
            .map(|q| q.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        self.primitives.iter().try_for_each(TargetPrimitive::validate)
    }

    pub fn moved(&self, angle: f64, shift: Vec2) -> Self {
        Self::new(self.primitives.iter().map(|p| p.moved(angle, shift)).collect())
    }
}

/// Payoff evaluated at the evader's final position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueField {
    DistanceToTarget { targets: TargetSet },
    /// `a . x + b`.
    Linear { a: Vec2, b: f64 },
    /// Distance from a point.
    Radial { center: Vec2 },
}

impl ValueField {
    pub fn eval(&self, x: Vec2) -> f64 {
        match self {
            Self::DistanceToTarget { targets } => targets.distance(x),
            Self::Linear { a, b } => a.dot(x) + b,
            Self::Radial { center } => x.distance(*center),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::DistanceToTarget { targets } => {
                if targets.is_empty() {
                    return Err(Error::Config("distance field needs a non-empty target set".into()));
                }
                targets.validate()
            }
            Self::Linear { a, b } => {
                if a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonFinite("linear field"))
                }
            }
            Self::Radial { center } => {
                if center.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonFinite("radial field"))
                }
            }
        }
    }

    pub fn moved(&self, angle: f64, shift: Vec2) -> Self {
        match self {
            Self::DistanceToTarget { targets } => Self::DistanceToTarget {
                targets: targets.moved(angle, shift),
            },
            // a . R^T (x - s) + b
            Self::Linear { a, b } => {
                let a2 = a.rotated(angle);
                Self::Linear {
                    a: a2,
                    b: b - a2.dot(shift),
                }
            }
            Self::Radial { center } => Self::Radial {
                center: center.rotated(angle) + shift,
            },
        }
    }
}

/// Most minimizers reported by [`phi_star`].
pub const MAX_MINIMIZERS: usize = 8;

/// Minimum of a field over a disc, plus where it is attained.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMinimum {
    pub value: f64,
    /// Up to [`MAX_MINIMIZERS`] minimizing points.
    pub minimizers: Vec<Vec2>,
}

/// Exact minimum of `field` over the closed disc `disc`.
pub fn phi_star(field: &ValueField, disc: &Disc) -> FieldMinimum {
    let c = disc.center;
    let r = disc.radius;
    match field {
        ValueField::DistanceToTarget { targets } => {
            let per: Vec<(f64, Vec2)> = targets
                .primitives
                .iter()
                .map(|p| {
                    let q = p.closest_point(c);
                    let d = q.distance(c);
                    if d <= r {
                        (0.0, q)
                    } else {
                        (d - r, c + (q - c) * (r / d))
                    }
                })
                .collect();
            let value = per.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let mut minimizers: Vec<Vec2> = per
                .iter()
                .filter(|p| p.0 == value)
                .map(|p| p.1)
                .collect();
            minimizers.sort_by(|a, b| {
                let ang = |v: Vec2| (v - c).y.atan2((v - c).x);
                ang(*a).total_cmp(&ang(*b))
            });
            minimizers.dedup();
            minimizers.truncate(MAX_MINIMIZERS);
            FieldMinimum { value, minimizers }
        }
        ValueField::Linear { a, b } => {
            let dir = a.normalized().unwrap_or(Vec2::ZERO);
            let x = c - dir * r;
            FieldMinimum {
                value: a.dot(c) + b - a.norm() * r,
                minimizers: vec![x],
            }
        }
        ValueField::Radial { center } => {
            let d = center.distance(c);
            let x = if d <= r {
                *center
            } else {
                c + (*center - c) * (r / d)
            };
            FieldMinimum {
                value: (d - r).max(0.0),
                minimizers: vec![x],
            }
        }
    }
}

/// Approximate minimum of an arbitrary continuous field over a disc: a polar
/// grid search followed by golden-section refinement in angle and radius
/// around the best grid point.
pub fn phi_star_sampled<F: Fn(Vec2) -> f64>(
    field: F,
    disc: &Disc,
    angles: usize,
    radii: usize,
) -> FieldMinimum {
    let angles = angles.max(1);
    let radii = radii.max(1);
    let polar = |rho: f64, th: f64| disc.center + Vec2::from_angle(th) * rho;
    let mut best = (field(disc.center), 0.0, 0.0);
    for j in 1..=radii {
        let rho = disc.radius * j as f64 / radii as f64;
        for i in 0..angles {
            let th = std::f64::consts::TAU * i as f64 / angles as f64;
            let v = field(polar(rho, th));
            if v < best.0 {
                best = (v, rho, th);
            }
        }
    }
    let (_, mut rho, mut th) = best;
    let dth = std::f64::consts::TAU / angles as f64;
    let drho = disc.radius / radii as f64;
    for _ in 0..4 {
        th = golden_min(|a| field(polar(rho, a)), th - dth, th + dth, 40);
        rho = golden_min(
            |q| field(polar(q, th)),
            (rho - drho).max(0.0),
            (rho + drho).min(disc.radius),
            40,
        );
    }
    let x = polar(rho, th);
    let v = field(x);
    if v <= best.0 {
        FieldMinimum {
            value: v,
            minimizers: vec![x],
        }
    } else {
        FieldMinimum {
            value: best.0,
            minimizers: vec![polar(best.1, best.2)],
        }
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Pursuer,
    Evader,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameVerdict {
    pub phi_star: f64,
    pub minimizers: Vec<Vec2>,
    pub winner: Winner,
    /// Margin for the capture disc when the pursuer wins, zero otherwise.
    pub delta_selected: f64,
    pub value: f64,
}

/// Tolerance scale for a pair of positions: `max(|r|, 1)`.
pub fn scale(pursuer: Vec2, evader: Vec2) -> f64 {
    pursuer.distance(evader).max(1.0)
}

/// Relative tolerance for "the disc touches the target".
pub const TOUCH_TOL: f64 = 1e-9;

/// Who wins the target-guarding game of kind. Ties go to the evader.
pub fn guarding_verdict(
    pursuer: Vec2,
    evader: Vec2,
    nu: SpeedRatio,
    targets: &TargetSet,
) -> Result<GameVerdict> {
    if targets.is_empty() {
        return Err(Error::Config("guarding game needs a non-empty target set".into()));
    }
    targets.validate()?;
    let ac = apollonius_disc(pursuer, evader, nu);
    let field = ValueField::DistanceToTarget {
        targets: targets.clone(),
    };
    let m = phi_star(&field, &ac);
    let evader_wins = m.value <= TOUCH_TOL * scale(pursuer, evader);
    Ok(GameVerdict {
        phi_star: m.value,
        minimizers: m.minimizers,
        winner: if evader_wins {
            Winner::Evader
        } else {
            Winner::Pursuer
        },
        delta_selected: if evader_wins { 0.0 } else { 0.5 * m.value },
        value: m.value,
    })
}

/// Result of the critical-speed search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CriticalSpeed {
    Found(f64),
    /// The disc does not reach the target even at `lower_bound`, the largest
    /// ratio tried.
    Unreachable { lower_bound: f64 },
}

impl CriticalSpeed {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Found(v) => Some(v),
            Self::Unreachable { .. } => None,
        }
    }
}

/// Smallest speed ratio at which the initial Apollonius disc touches the
/// target set, by bisection to absolute tolerance `tol`.
pub fn critical_speed(
    pursuer: Vec2,
    evader: Vec2,
    targets: &TargetSet,
    tol: f64,
) -> Result<CriticalSpeed> {
    if targets.is_empty() {
        return Err(Error::Config("critical speed needs a non-empty target set".into()));
    }
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::Domain {
            name: "tol",
            expect: "in (0, 0.5)",
            value: tol,
        });
    }
    let touch = TOUCH_TOL * scale(pursuer, evader);
    let reaches = |nu: f64| -> bool {
        let ac = apollonius_disc(pursuer, evader, SpeedRatio::new(nu).expect("nu in [0, 1)"));
        let field = ValueField::DistanceToTarget {
            targets: targets.clone(),
        };
        phi_star(&field, &ac).value <= touch
    };
    if reaches(0.0) {
        return Ok(CriticalSpeed::Found(0.0));
    }
    let mut hi = 1.0 - tol;
    if !reaches(hi) {
        return Ok(CriticalSpeed::Unreachable { lower_bound: hi });
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalSpeed::Found(0.5 * (lo + hi)))
}

/// Capture-disc margin that makes the disc built from `nu_tilde` coincide
/// with the initial Apollonius disc at `nu_crit`.
pub fn delta_for_margin(nu_crit: f64, nu_tilde: f64, r0: f64) -> Result<f64> {
    let crit = SpeedRatio::new(nu_crit)?;
    let tilde = SpeedRatio::new(nu_tilde)?;
    if nu_tilde > nu_crit {
        return Err(Error::Domain {
            name: "nu_tilde",
            expect: "<= nu_crit",
            value: nu_tilde,
        });
    }
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(Error::Domain {
            name: "r0",
            expect: "finite and >= 0",
            value: r0,
        });
    }
    Ok((coefficients(crit).gamma - coefficients(tilde).gamma) * r0)
}

/// Whether `x` lies in every pursuer's initial Apollonius disc.
pub fn multi_pursuer_membership(x: Vec2, pursuers: &[(Vec2, SpeedRatio)], evader: Vec2) -> bool {
    pursuers.iter().all(|&(p, nu)| {
        let ac = apollonius_disc(p, evader, nu);
        x.distance(ac.center) <= ac.radius * (1.0 + 1e-12) + 1e-15
    })
}

/// Minimum of `field` over the intersection of the pursuers' initial discs,
/// estimated by rejection sampling inside the smallest disc.
pub fn team_value<R: Rng>(
    field: &ValueField,
    pursuers: &[(Vec2, SpeedRatio)],
    evader: Vec2,
    samples: usize,
    rng: &mut R,
) -> Option<FieldMinimum> {
    let smallest = pursuers
        .iter()
        .map(|&(p, nu)| apollonius_disc(p, evader, nu))
        .min_by(|a, b| a.radius.total_cmp(&b.radius))?;
    let mut best = FieldMinimum {
        value: field.eval(evader),
        minimizers: vec![evader],
    };
    for _ in 0..samples {
        let rho = smallest.radius * rng.random::<f64>().sqrt();
        let th = rng.random::<f64>() * std::f64::consts::TAU;
        let x = smallest.center + Vec2::from_angle(th) * rho;
        if multi_pursuer_membership(x, pursuers, evader) {
            let v = field.eval(x);
            if v < best.value {
                best = FieldMinimum {
                    value: v,
                    minimizers: vec![x],
                };
            }
        }
    }
    Some(best)
}

/// Value of the game of final location: the field's minimum over the
/// initial Apollonius disc.
pub fn final_location_value(pursuer: Vec2, evader: Vec2, nu: SpeedRatio, field: &ValueField) -> f64 {
    phi_star(field, &apollonius_disc(pursuer, evader, nu)).value
}
