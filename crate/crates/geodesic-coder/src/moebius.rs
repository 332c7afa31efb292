//! Möbius transformations of the unit disk and cyclic-arc arithmetic on its
//! boundary circle.
//!
//! A disk-preserving Möbius map is stored as the matrix `[[a, b], [conj(b),
//! conj(a)]]` with `|a|^2 - |b|^2 = 1`; the group operations renormalize the
//! determinant after every product. Boundary points are angles in
//! `[0, 2*pi)` and "forward" always means counterclockwise, so arcs are
//! measured with [`fwd_len`] and membership is tested with [`in_fwd`].

use num_complex::Complex64;

use crate::{angular_tolerance, Error, Result, EPS_MAT};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Normalize an angle to `[0, 2*pi)`.
pub fn wrap(a: f64) -> f64 {
    a.rem_euclid(TWO_PI)
}

/// Arc length going counterclockwise from `a` to `b`.
pub fn fwd_len(a: f64, b: f64) -> f64 {
    (b - a).rem_euclid(TWO_PI)
}

/// Is `x` on the counterclockwise arc from `a` to `b`? Endpoint membership
/// follows the `closed_lo` / `closed_hi` flags and triggers only on exact
/// angular equality after reduction mod `2*pi`.
pub fn in_fwd(a: f64, b: f64, x: f64, closed_lo: bool, closed_hi: bool) -> bool {
    let la = fwd_len(a, b);
    let lx = fwd_len(a, x);
    if lx == 0.0 {
        return closed_lo;
    }
    if lx == la {
        return closed_hi;
    }
    lx < la
}

/// Distance between two angles along the circle (shorter way around).
pub fn cdist(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

/// Overlap length of the arcs `[a0, a0+alen]` and `[b0, b0+blen]`.
pub fn arc_overlap(a0: f64, alen: f64, b0: f64, blen: f64) -> f64 {
    let t = fwd_len(b0, a0);
    let mut total = 0.0;
    for s in [t, t - TWO_PI] {
        total += (blen.min(s + alen) - s.max(0.0)).max(0.0);
    }
    total
}

pub fn circle_point(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceClass {
    Hyperbolic,
    Elliptic,
    Parabolic,
    Identity,
}

/// Fixed boundary points of a hyperbolic map, labeled by the modulus of the
/// derivative there ( < 1 at `attracting`, > 1 at `repelling`).
#[derive(Clone, Copy, Debug)]
pub struct FixedPointPair {
    pub attracting: f64,
    pub repelling: f64,
    pub trace_class: TraceClass,
}

/// An oriented geodesic by its backward (`u`) and forward (`w`) endpoints.
#[derive(Clone, Copy, Debug)]
pub struct Geodesic {
    pub u: f64,
    pub w: f64,
}

impl Geodesic {
    pub fn new(u: f64, w: f64) -> Result<Self> {
        let (u, w) = (wrap(u), wrap(w));
        if cdist(u, w) <= angular_tolerance() {
            return Err(Error::NumericallySingular("geodesic endpoints coincide".into()));
        }
        Ok(Geodesic { u, w })
    }
}

/// Disk-preserving Möbius map `z -> (a z + b) / (conj(b) z + conj(a))`.
#[derive(Clone, Copy, Debug)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        MoebiusMap { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    pub fn rotation(alpha: f64) -> Self {
        MoebiusMap {
            a: Complex64::from_polar(1.0, alpha / 2.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Build from raw entries, renormalizing `|a|^2 - |b|^2` to 1.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if det <= EPS_MAT {
            return Err(Error::DegenerateMap);
        }
        let s = det.sqrt();
        Ok(MoebiusMap { a: a / s, b: b / s })
    }

    /// Matrix product `self * other` (apply `other` first). No
    /// renormalization: the product of unit-determinant matrices has unit
    /// determinant, while recomputing `|a|^2 - |b|^2` for a long
    /// hyperbolic product cancels catastrophically.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        MoebiusMap { a, b }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { a: self.a.conj(), b: -self.b }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// Image of the boundary point `e^{i theta}`, as an angle. The argument
    /// is taken of `numerator * conj(denominator)`, which keeps the result
    /// exact on the circle without a division.
    pub fn apply_angle(&self, theta: f64) -> f64 {
        let z = circle_point(theta);
        let num = self.a * z + self.b;
        let den = self.b.conj() * z + self.a.conj();
        wrap((num * den.conj()).arg())
    }

    /// `|m'(e^{i theta})| = 1 / |conj(b) e^{i theta} + conj(a)|^2`.
    pub fn derivative_modulus(&self, theta: f64) -> f64 {
        let z = circle_point(theta);
        1.0 / (self.b.conj() * z + self.a.conj()).norm_sqr()
    }

    /// Trace of the matrix; real because of the conjugate structure.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn trace_class(&self) -> TraceClass {
        let t = self.trace().abs();
        if (t - 2.0).abs() <= 1e-9 {
            if self.b.norm() <= 1e-9 {
                TraceClass::Identity
            } else {
                TraceClass::Parabolic
            }
        } else if t > 2.0 {
            TraceClass::Hyperbolic
        } else {
            TraceClass::Elliptic
        }
    }

    /// Boundary fixed points of a hyperbolic map.
    pub fn fixed_points(&self) -> Result<FixedPointPair> {
        let class = self.trace_class();
        if class != TraceClass::Hyperbolic {
            return Err(Error::NotHyperbolic(class));
        }
        // Fixed points of [[a, b], [conj(b), conj(a)]] solve
        // conj(b) z^2 + (conj(a) - a) z - b = 0; for |trace| > 2 the
        // discriminant |b|^2 - Im(a)^2 = Re(a)^2 - 1 is positive and both
        // roots land on the unit circle. At the root
        // z = (i Im(a) +- disc) / conj(b) the derivative denominator
        // conj(b) z + conj(a) equals Re(a) +- disc exactly, so the root whose
        // sign matches Re(a) is the attracting one; deciding by evaluating
        // the derivative at the computed angle instead cancels
        // catastrophically once |trace| is large.
        let disc = (self.a.re * self.a.re - 1.0).sqrt().copysign(self.a.re);
        let bc = self.b.conj();
        let za = Complex64::new(disc, self.a.im) / bc;
        let zr = Complex64::new(-disc, self.a.im) / bc;
        Ok(FixedPointPair {
            attracting: wrap(za.arg()),
            repelling: wrap(zr.arg()),
            trace_class: class,
        })
    }

    /// Euclidean center and radius of the isometric circle
    /// `|conj(b) z + conj(a)| = 1`.
    pub fn isometric_circle(&self) -> Result<(Complex64, f64)> {
        if self.b.norm() <= EPS_MAT {
            return Err(Error::IsRotation);
        }
        Ok((-self.a.conj() / self.b.conj(), 1.0 / self.b.norm()))
    }

    /// Projective distance: entrywise max difference after sign alignment.
    pub fn proj_dist(&self, other: &MoebiusMap) -> f64 {
        let d = |x: Complex64, y: Complex64| (x - y).norm();
        let plus = d(self.a, other.a).max(d(self.b, other.b));
        let minus = d(self.a, -other.a).max(d(self.b, -other.b));
        plus.min(minus)
    }

    /// The unique disk-preserving map sending three boundary points to three
    /// boundary points of the same cyclic orientation.
    pub fn from_boundary_triple(pairs: [(f64, f64); 3]) -> Result<MoebiusMap> {
        let [(p1, q1), (p2, q2), (p3, q3)] = pairs;
        let src_ccw = in_fwd(p1, p3, p2, false, false);
        let dst_ccw = in_fwd(q1, q3, q2, false, false);
        if src_ccw != dst_ccw {
            return Err(Error::OrientationMismatch);
        }
        // Matrix sending (z1, z2, z3) to (0, 1, infinity).
        let basis = |z1: Complex64, z2: Complex64, z3: Complex64| {
            [z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1)]
        };
        let s = basis(circle_point(p1), circle_point(p2), circle_point(p3));
        let d = basis(circle_point(q1), circle_point(q2), circle_point(q3));
        let det_d = d[0] * d[3] - d[1] * d[2];
        if det_d.norm() < 1e-12 {
            return Err(Error::NumericallySingular("degenerate target triple".into()));
        }
        // inverse(d) * s, scaled by det(d) (projectively irrelevant)
        let g = [
            d[3] * s[0] - d[1] * s[2],
            d[3] * s[1] - d[1] * s[3],
            -d[2] * s[0] + d[0] * s[2],
            -d[2] * s[1] + d[0] * s[3],
        ];
        let det = g[0] * g[3] - g[1] * g[2];
        if det.norm() < 1e-12 {
            return Err(Error::NumericallySingular("degenerate source triple".into()));
        }
        let s = det.sqrt();
        let g = [g[0] / s, g[1] / s, g[2] / s, g[3] / s];
        let sym = (g[0] - g[3].conj()).norm().max((g[1] - g[2].conj()).norm());
        if sym > 1e-6 {
            return Err(Error::NumericallySingular(format!(
                "result is not disk-preserving (asymmetry {sym:.2e})"
            )));
        }
        let m = MoebiusMap::new((g[0] + g[3].conj()) / 2.0, (g[1] + g[2].conj()) / 2.0)?;
        for (p, q) in pairs {
            if cdist(m.apply_angle(p), q) > 1e-8 {
                return Err(Error::NumericallySingular("triple verification failed".into()));
            }
        }
        Ok(m)
    }
}

/// Geodesic `u -> w` as the circle `A |z|^2 - 2 Re(conj(C) z) + A = 0`;
/// the representation stays finite at diameters (`A = 0`).
pub fn geo_coeffs(u: f64, w: f64) -> (f64, Complex64) {
    let d = fwd_len(u, w);
    let h = (d / 2.0).sin().powi(2);
    let a = (d / 2.0).cos() * (d / 2.0).sin() / h;
    let c = Complex64::new(w.sin() - u.sin(), u.cos() - w.cos()) / (2.0 * h);
    (a, c)
}

/// Euclidean center and radius of the geodesic `u -> w`; `None` for a
/// diameter.
pub fn geodesic_circle(u: f64, w: f64) -> Option<(Complex64, f64)> {
    let (a, c) = geo_coeffs(u, w);
    if a.abs() < 1e-9 {
        return None;
    }
    let center = c / a;
    Some((center, (center.norm_sqr() - 1.0).sqrt()))
}

/// Monotone order parameter of `z` along the chord from `u` to `w`.
pub fn chord_t(u: f64, w: f64, z: Complex64) -> f64 {
    let a = circle_point(u);
    let b = circle_point(w);
    ((z - a) / (b - a)).re
}

/// Intersection points of the geodesic `u -> w` with another circle
/// orthogonal to the unit circle, given as `(A, C)` coefficients. Both
/// curves are orthogonal to the unit circle, so their radical line passes
/// through the origin; the solve happens on that line.
pub fn geo_circle_intersect(u: f64, w: f64, as_: f64, cs: Complex64) -> Vec<Complex64> {
    let (ag, cg) = geo_coeffs(u, w);
    let d = as_ * cg - ag * cs;
    if d.norm() < 1e-13 {
        return vec![];
    }
    let e = Complex64::i() * d / d.norm();
    let q = (cs.conj() * e).re;
    let disc = q * q - as_ * as_;
    if disc < 0.0 {
        return vec![];
    }
    if disc == 0.0 {
        return vec![q / as_ * e];
    }
    let tb = (q + disc.sqrt().copysign(q)) / as_;
    vec![e / tb, e * tb]
}

/// Hyperbolic distance between two points of the open disk.
pub fn hyp_dist(z1: Complex64, z2: Complex64) -> f64 {
    let x = (z1 - z2).norm() / (1.0 - z1.conj() * z2).norm();
    2.0 * x.min(1.0 - 1e-16).atanh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_applies_as_shift() {
        let m = MoebiusMap::rotation(0.7);
        for k in 0..12 {
            let th = k as f64 * 0.5;
            assert!(cdist(m.apply_angle(th), wrap(th + 0.7)) < 1e-12);
        }
    }

    #[test]
    fn inverse_undoes_apply() {
        let m = MoebiusMap::new(Complex64::new(1.4, 0.3), Complex64::new(0.9, -0.5)).unwrap();
        let mi = m.inverse();
        for k in 0..20 {
            let th = k as f64 * 0.31;
            assert!(cdist(mi.apply_angle(m.apply_angle(th)), wrap(th)) < 1e-12);
        }
        assert!(m.compose(&mi).proj_dist(&MoebiusMap::identity()) < 1e-12);
    }

    #[test]
    fn derivative_product_inverts() {
        let m = MoebiusMap::new(Complex64::new(1.2, -0.4), Complex64::new(0.6, 0.2)).unwrap();
        for k in 0..20 {
            let th = k as f64 * 0.3;
            let fwd = m.derivative_modulus(th);
            let back = m.inverse().derivative_modulus(m.apply_angle(th));
            assert!((fwd * back - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_point_derivatives_classify() {
        let m = MoebiusMap::new(Complex64::new(1.6, 0.1), Complex64::new(1.1, 0.7)).unwrap();
        let fp = m.fixed_points().unwrap();
        assert!(m.derivative_modulus(fp.attracting) < 1.0);
        assert!(m.derivative_modulus(fp.repelling) > 1.0);
        assert!(cdist(m.apply_angle(fp.attracting), fp.attracting) < 1e-9);
        assert!(cdist(m.apply_angle(fp.repelling), fp.repelling) < 1e-9);
    }

    #[test]
    fn rotation_is_not_hyperbolic() {
        let m = MoebiusMap::rotation(std::f64::consts::PI / 3.0);
        assert!(matches!(m.fixed_points(), Err(Error::NotHyperbolic(TraceClass::Elliptic))));
    }

    #[test]
    fn triple_reproduces_identity_and_rotation() {
        let pts = [0.0, 1.3, 2.9];
        let id = MoebiusMap::from_boundary_triple([
            (pts[0], pts[0]),
            (pts[1], pts[1]),
            (pts[2], pts[2]),
        ])
        .unwrap();
        assert!(id.proj_dist(&MoebiusMap::identity()) < 1e-9);
        let al = 0.8;
        let rot = MoebiusMap::from_boundary_triple([
            (pts[0], pts[0] + al),
            (pts[1], pts[1] + al),
            (pts[2], pts[2] + al),
        ])
        .unwrap();
        assert!(rot.proj_dist(&MoebiusMap::rotation(al)) < 1e-9);
    }

    #[test]
    fn triple_rejects_opposite_orientation() {
        let r = MoebiusMap::from_boundary_triple([(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]);
        assert!(matches!(r, Err(Error::OrientationMismatch)));
    }

    #[test]
    fn isometric_circle_is_orthogonal() {
        let m = MoebiusMap::new(Complex64::new(1.5, 0.2), Complex64::new(1.0, 0.4)).unwrap();
        let (c, r) = m.isometric_circle().unwrap();
        assert!((c.norm_sqr() - r * r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn geodesic_circle_meets_endpoints() {
        let (u, w) = (0.4, 2.5);
        let (c, r) = geodesic_circle(u, w).unwrap();
        assert!(((circle_point(u) - c).norm() - r).abs() < 1e-12);
        assert!(((circle_point(w) - c).norm() - r).abs() < 1e-12);
        // diameter case
        assert!(geodesic_circle(1.0, 1.0 + std::f64::consts::PI).is_none());
    }

    #[test]
    fn arc_overlap_handles_wrap() {
        assert!((arc_overlap(0.2, 1.0, 0.7, 1.0) - 0.5).abs() < 1e-12);
        assert!((arc_overlap(6.0, 1.0, 0.0, 1.0) - (7.0 - TWO_PI)).abs() < 1e-12);
        assert!(arc_overlap(0.0, 0.5, 1.0, 0.5).abs() < 1e-12);
    }
}
