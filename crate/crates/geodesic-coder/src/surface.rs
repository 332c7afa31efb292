//! The regular `(8g-4)`-sided fundamental polygon, its side-pairing
//! generators, index tables, and the exit-side geometry.
//!
//! Vertices sit at Euclidean radius `tanh(R/2)` with `cosh R = cot(pi/n)`,
//! which makes all interior angles right. Side `i` joins `V_i` to `V_{i+1}`
//! counterclockwise; extending it to the boundary circle gives the points
//! `P_i` (behind `V_i`) and `Q_{i+1}` (past `V_{i+1}`), and `M_i` is the
//! midpoint of `(P_i, Q_i)`. The generator `T_i` carries side `i` to side
//! `sigma(i)` and is the inverse of `T_{sigma(i)}`.

use num_complex::Complex64;

use crate::moebius::{
    cdist, chord_t, circle_point, geo_circle_intersect, wrap, FixedPointPair, Geodesic,
    MoebiusMap, TWO_PI,
};
use crate::{angular_tolerance, Error, Result};

#[derive(Clone, Debug)]
pub struct Surface {
    pub genus: usize,
    /// Number of sides, `8 * genus - 4`.
    pub n: usize,
    /// Hyperbolic circumradius `R`.
    pub circumradius: f64,
    /// Euclidean radius of the vertex circle, `tanh(R/2)`.
    pub vertex_radius: f64,
    /// Euclidean distance from the origin to each side-circle center.
    pub side_center_dist: f64,
    /// Euclidean radius of each side circle.
    pub side_radius: f64,
    /// Angular half-width `|P_i - v_i|` of the gap between a vertex ray and
    /// the nearest side-circle endpoint.
    pub half_gap: f64,
    v: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    alpha: Vec<f64>,
    t: Vec<MoebiusMap>,
    u: Vec<MoebiusMap>,
    sigma: Vec<usize>,
    rho: Vec<usize>,
    theta: Vec<usize>,
    tau: Vec<usize>,
}

impl Surface {
    /// Build the genus-`g` surface with the default polygon orientation
    /// (for genus 2 the first vertex ray points at 255 degrees, which is the
    /// frame all worked examples in this crate use; other genera put it at
    /// angle 0).
    pub fn build(genus: usize) -> Result<Surface> {
        let v1 = if genus == 2 { 255f64.to_radians() } else { 0.0 };
        Surface::build_rotated(genus, v1)
    }

    /// Build with vertex `V_1` on the ray at angle `v1`. Everything the
    /// crate computes is covariant under this global rotation.
    pub fn build_rotated(genus: usize, v1: f64) -> Result<Surface> {
        if genus < 2 {
            return Err(Error::InvalidPattern(format!("genus must be >= 2, got {genus}")));
        }
        let n = 8 * genus - 4;
        let ni = n as i64;
        let modp = |k: i64| -> usize { (k.rem_euclid(ni) + 1) as usize };
        let idx = |k: i64| -> usize { (k - 1).rem_euclid(ni) as usize };
        let mut sigma = vec![0usize; n];
        for i in 1..=n {
            let ii = i as i64;
            sigma[i - 1] = if i % 2 == 1 {
                modp(4 * genus as i64 - ii - 1)
            } else {
                modp(2 - ii - 1)
            };
        }
        let rho: Vec<usize> = (1..=n).map(|i| modp(sigma[i - 1] as i64)).collect();
        let theta: Vec<usize> = (1..=n).map(|i| modp(sigma[i - 1] as i64 - 2)).collect();
        let tau: Vec<usize> = (1..=n).map(|i| modp(i as i64 + 4 * genus as i64 - 3)).collect();

        let cosh_r = 1.0 / (std::f64::consts::PI / n as f64).tan();
        let sinh_r = (cosh_r * cosh_r - 1.0).sqrt();
        let vertex_radius = sinh_r / (1.0 + cosh_r);
        // Inradius r_in of the polygon: tanh(r_in) = cos(pi/n) tanh(R).
        let tanh_rin = (std::f64::consts::PI / n as f64).cos() * sinh_r / cosh_r;
        let cosh_rin = 1.0 / (1.0 - tanh_rin * tanh_rin).sqrt();
        let t0 = (cosh_rin - 1.0) / (tanh_rin * cosh_rin);
        let side_center_dist = (t0 + 1.0 / t0) / 2.0;
        let side_radius = (1.0 / t0 - t0) / 2.0;
        let delta = (1.0 / side_center_dist).acos();
        let half_gap = delta - std::f64::consts::PI / n as f64;

        let step = TWO_PI / n as f64;
        let v: Vec<f64> = (0..n).map(|k| wrap(v1 + k as f64 * step)).collect();
        let p: Vec<f64> = v.iter().map(|&a| wrap(a - half_gap)).collect();
        let q: Vec<f64> = v.iter().map(|&a| wrap(a + half_gap)).collect();
        let alpha: Vec<f64> = v.iter().map(|&a| wrap(a + std::f64::consts::PI / n as f64)).collect();

        let at = |arr: &[f64], k: i64| arr[idx(k)];
        let mut t = Vec::with_capacity(n);
        for i in 1..=n {
            let ii = i as i64;
            let si = sigma[i - 1] as i64;
            let m = MoebiusMap::from_boundary_triple([
                (at(&p, ii - 1), at(&p, si + 1)),
                (at(&p, ii), at(&q, si + 1)),
                (at(&q, ii), at(&q, si + 2)),
            ])?;
            t.push(m);
        }
        let mut u = Vec::with_capacity(n);
        for i in 1..=n {
            let ii = i as i64;
            let a = &t[sigma[i - 1] - 1];
            let b = &t[tau[idx(ii - 1)] - 1];
            u.push(a.compose(b));
        }

        let s = Surface {
            genus,
            n,
            circumradius: cosh_r.acosh(),
            vertex_radius,
            side_center_dist,
            side_radius,
            half_gap,
            v,
            p,
            q,
            alpha,
            t,
            u,
            sigma,
            rho,
            theta,
            tau,
        };
        s.validate()?;
        Ok(s)
    }

    /// Check the defining relations and side-endpoint images before handing
    /// the surface out; a failure here is a construction bug.
    fn validate(&self) -> Result<()> {
        let worst = self.relation_error();
        if worst > 1e-8 {
            return Err(Error::RelationFailure(format!("worst residual {worst:.3e}")));
        }
        Ok(())
    }

    /// Largest residual over the inverse-pair relation, the vertex-cycle
    /// relations, the four-term vertex relation, and the six side-endpoint
    /// images of every generator.
    pub fn relation_error(&self) -> f64 {
        let id = MoebiusMap::identity();
        let mut worst: f64 = 0.0;
        for i in 1..=self.n {
            let ii = i as i64;
            // T_{sigma(i)} T_i = Id
            worst = worst.max(self.t(self.sigma(i)).compose(&self.t(i)).proj_dist(&id));
            // T_i V_i = V_{rho(i)}
            let tv = self.t(i).apply(self.vertex(i));
            worst = worst.max((tv - self.vertex(self.rho(i))).norm());
            // T_{rho^3(i)} T_{rho^2(i)} T_{rho(i)} T_i = Id
            let r1 = self.rho(i);
            let r2 = self.rho(r1);
            let r3 = self.rho(r2);
            let prod = self
                .t(r3)
                .compose(&self.t(r2))
                .compose(&self.t(r1))
                .compose(&self.t(i));
            worst = worst.max(prod.proj_dist(&id));
            // the six boundary-endpoint images of T_i
            let si = self.sigma(i) as i64;
            let pairs = [
                (self.p_at(ii - 1), self.p_at(si + 1)),
                (self.p_at(ii), self.q_at(si + 1)),
                (self.q_at(ii), self.q_at(si + 2)),
                (self.p_at(ii + 1), self.p_at(si - 1)),
                (self.q_at(ii + 1), self.p_at(si)),
                (self.q_at(ii + 2), self.q_at(si)),
            ];
            for (src, dst) in pairs {
                worst = worst.max(cdist(self.t(i).apply_angle(src), dst));
            }
            // U_i = T_{sigma(i-1)} T_{tau(i)}, fixes M_i and M_{tau(i)}
            let alt = self
                .t(self.sigma(self.cyc(ii - 1)))
                .compose(&self.t(self.tau(i)));
            worst = worst.max(self.u_map(i).proj_dist(&alt));
            worst = worst.max(cdist(self.u_map(i).apply_angle(self.midpoint(i)), self.midpoint(i)));
            let mt = self.midpoint(self.tau(i));
            worst = worst.max(cdist(self.u_map(i).apply_angle(mt), mt));
        }
        worst
    }

    /// Reduce any 1-based index modulo `n` back into `1..=n`.
    pub fn cyc(&self, i: i64) -> usize {
        ((i - 1).rem_euclid(self.n as i64) + 1) as usize
    }

    pub fn sigma(&self, i: usize) -> usize {
        self.sigma[i - 1]
    }

    pub fn rho(&self, i: usize) -> usize {
        self.rho[i - 1]
    }

    pub fn theta(&self, i: usize) -> usize {
        self.theta[i - 1]
    }

    pub fn tau(&self, i: usize) -> usize {
        self.tau[i - 1]
    }

    /// Checked table lookup for callers holding a table name at runtime.
    pub fn index_map(&self, which: &str, i: usize) -> Result<usize> {
        if i < 1 || i > self.n {
            return Err(Error::IndexOutOfRange(i, self.n));
        }
        match which {
            "sigma" => Ok(self.sigma(i)),
            "rho" => Ok(self.rho(i)),
            "theta" => Ok(self.theta(i)),
            "tau" => Ok(self.tau(i)),
            _ => Err(Error::InvalidPattern(format!("unknown index map {which}"))),
        }
    }

    /// Angle of the ray through vertex `V_i`.
    pub fn vertex_angle(&self, i: usize) -> f64 {
        self.v[i - 1]
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p[i - 1]
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q[i - 1]
    }

    /// Midpoint `M_i` of the arc `(P_i, Q_i)`; it lies on the vertex ray.
    pub fn midpoint(&self, i: usize) -> f64 {
        self.v[i - 1]
    }

    /// Angle of the center of the side-`i` circle.
    pub fn side_center_angle(&self, i: usize) -> f64 {
        self.alpha[i - 1]
    }

    fn p_at(&self, k: i64) -> f64 {
        self.p[self.cyc(k) - 1]
    }

    fn q_at(&self, k: i64) -> f64 {
        self.q[self.cyc(k) - 1]
    }

    pub fn t(&self, i: usize) -> MoebiusMap {
        self.t[i - 1]
    }

    /// The corner map `U_i = T_{sigma(i)} T_{tau(i-1)}`; `U_i^{-1} = U_{tau(i)}`.
    pub fn u_map(&self, i: usize) -> MoebiusMap {
        self.u[i - 1]
    }

    pub fn vertex(&self, i: usize) -> Complex64 {
        self.vertex_radius * circle_point(self.v[i - 1])
    }

    /// Product `T_{l1} T_{l2} ... T_{lk}` (leftmost letter applied last).
    pub fn word(&self, letters: &[usize]) -> MoebiusMap {
        let mut m = MoebiusMap::identity();
        for &l in letters {
            m = m.compose(&self.t(self.cyc(l as i64)));
        }
        m
    }

    /// Axis of a hyperbolic word, oriented from its repelling fixed point to
    /// its attracting one.
    pub fn axis(&self, letters: &[usize]) -> Result<Geodesic> {
        let fp: FixedPointPair = self.word(letters).fixed_points()?;
        Ok(Geodesic { u: fp.repelling, w: fp.attracting })
    }

    fn side_center(&self, i: usize) -> Complex64 {
        self.side_center_dist * circle_point(self.alpha[i - 1])
    }

    /// Is `z` on the side-`i` arc between `V_i` and `V_{i+1}`?
    fn on_side_arc(&self, i: usize, z: Complex64) -> bool {
        let c = self.side_center(i);
        let p1 = (self.vertex(i) - c).arg();
        let p2 = (self.vertex(self.cyc(i as i64 + 1)) - c).arg();
        let pz = (z - c).arg();
        let (mut lo, mut span) = (p1, (p2 - p1).rem_euclid(TWO_PI));
        if span > std::f64::consts::PI {
            lo = p2;
            span = TWO_PI - span;
        }
        let dz = (pz - lo).rem_euclid(TWO_PI);
        let slack = angular_tolerance() / self.side_radius;
        dz <= span + slack || dz >= TWO_PI - slack
    }

    /// All crossings of the geodesic `u -> w` with the polygon boundary, as
    /// `(order parameter, point, side)` sorted along the geodesic.
    pub fn crossings(&self, u: f64, w: f64) -> Vec<(f64, Complex64, usize)> {
        let side_a = 1.0 / self.side_radius;
        let mut out = Vec::new();
        for i in 1..=self.n {
            let cs = self.side_center(i) / self.side_radius;
            for z in geo_circle_intersect(u, w, side_a, cs) {
                if z.norm() < 1.0 - 1e-12 && self.on_side_arc(i, z) {
                    out.push((chord_t(u, w, z), z, i));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Does the geodesic `u -> w` intersect the closed fundamental polygon?
    pub fn meets_domain(&self, u: f64, w: f64) -> bool {
        !self.crossings(u, w).is_empty()
    }

    fn boundary_hit(&self, hit: (f64, Complex64, usize)) -> (usize, Complex64) {
        let (_, z, i) = hit;
        // a hit within tolerance of a vertex belongs to that vertex's side
        for j in 1..=self.n {
            if (z - self.vertex(j)).norm() < angular_tolerance() {
                return (j, z);
            }
        }
        (i, z)
    }

    /// Side and point where the geodesic leaves the polygon.
    pub fn exit(&self, u: f64, w: f64) -> Result<(usize, Complex64)> {
        let cr = self.crossings(u, w);
        cr.last().map(|&h| self.boundary_hit(h)).ok_or(Error::NoIntersection)
    }

    /// Side and point where the geodesic enters the polygon.
    pub fn entry(&self, u: f64, w: f64) -> Result<(usize, Complex64)> {
        let cr = self.crossings(u, w);
        cr.first().map(|&h| self.boundary_hit(h)).ok_or(Error::NoIntersection)
    }

    /// Side through which the geodesic exits, with vertex hits owned by the
    /// vertex's own side index.
    pub fn exit_side(&self, g: &Geodesic) -> Result<usize> {
        Ok(self.exit(g.u, g.w)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::in_fwd;
    use num_complex::Complex64;

    #[test]
    fn genus2_sigma_table_and_tau() {
        let s = Surface::build(2).unwrap();
        let expect = [7, 12, 5, 10, 3, 8, 1, 6, 11, 4, 9, 2];
        for i in 1..=12 {
            assert_eq!(s.sigma(i), expect[i - 1]);
        }
        assert_eq!(s.tau(1), 7);
        assert_eq!(s.tau(12), 6);
        assert_eq!(s.rho(1), 8);
        for i in 1..=12 {
            assert_eq!(s.theta(s.theta(i)), s.tau(i));
            assert_eq!(s.rho(s.rho(i)), s.tau(i));
            assert_eq!(s.sigma(s.tau(i)), s.tau(s.sigma(i)));
        }
    }

    #[test]
    fn genus2_polygon_constants() {
        let s = Surface::build(2).unwrap();
        assert!((s.circumradius.cosh() - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((s.vertex_radius - 3f64.powf(-0.25)).abs() < 1e-12);
        assert!((s.side_center_dist - 1.07457).abs() < 1e-4);
        assert!((s.side_radius - 0.39332).abs() < 1e-4);
        // side circles are orthogonal to the boundary circle
        assert!((s.side_center_dist.powi(2) - s.side_radius.powi(2) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn relations_hold_tightly_for_small_genus() {
        for genus in 2..=5 {
            let s = Surface::build(genus).unwrap();
            assert!(
                s.relation_error() < 1e-11,
                "genus {genus}: {:.3e}",
                s.relation_error()
            );
        }
    }

    #[test]
    fn generators_match_the_side_circle_form() {
        // Independent closed-form construction: T_i has the matrix
        // [[(d/r) e^{i(as - ai - pi)/2}, (1/r) e^{i(as + ai + pi)/2}], conj]
        // where ai, as are the center angles of sides i and sigma(i).
        let s = Surface::build(2).unwrap();
        for i in 1..=s.n {
            let ai = s.side_center_angle(i);
            let aj = s.side_center_angle(s.sigma(i));
            let d = s.side_center_dist;
            let r = s.side_radius;
            let a = Complex64::from_polar(d / r, (aj - ai - std::f64::consts::PI) / 2.0);
            let b = Complex64::from_polar(1.0 / r, (aj + ai + std::f64::consts::PI) / 2.0);
            let m = MoebiusMap::new(a, b).unwrap();
            assert!(s.t(i).proj_dist(&m) < 1e-10, "side {i}");
        }
    }

    #[test]
    fn isometric_circle_endpoints_are_p_and_q() {
        let s = Surface::build(2).unwrap();
        for i in 1..=s.n {
            let (c, r) = s.t(i).isometric_circle().unwrap();
            assert!((c - s.side_center(i)).norm() < 1e-9);
            assert!((r - s.side_radius).abs() < 1e-9);
            for th in [s.p(i), s.q(s.cyc(i as i64 + 1))] {
                assert!(((circle_point(th) - c).norm() - r).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn u_maps_invert_and_fix_vertices() {
        let s = Surface::build(2).unwrap();
        for i in 1..=s.n {
            let ui = s.u_map(i);
            assert!(ui.inverse().proj_dist(&s.u_map(s.tau(i))) < 1e-9);
            assert!((ui.apply(s.vertex(s.tau(i))) - s.vertex(i)).norm() < 1e-9);
        }
    }

    #[test]
    fn axis_of_corner_word_joins_opposite_midpoints() {
        let s = Surface::build(2).unwrap();
        // U_10 = T_11 T_4 (applied right to left) has axis M_4 -> M_10.
        let fp = s.u_map(10).fixed_points().unwrap();
        assert!(cdist(fp.attracting, s.midpoint(10)) < 1e-9);
        assert!(cdist(fp.repelling, s.midpoint(4)) < 1e-9);
        let g = Geodesic { u: fp.repelling, w: fp.attracting };
        assert_eq!(s.exit_side(&g).unwrap(), 10);
    }

    #[test]
    fn printed_fixed_points_of_example_word() {
        let s = Surface::build(2).unwrap();
        let fp = s.word(&[4, 5, 2]).fixed_points().unwrap();
        assert!(cdist(fp.attracting, wrap(-2.86313)) < 1e-4);
        assert!(cdist(fp.repelling, wrap(-1.07822)) < 1e-4);
    }

    #[test]
    fn example_axis_exit_side_matches_first_symbol() {
        let s = Surface::build(2).unwrap();
        let g = s.axis(&[2, 8, 5]).unwrap();
        let side = s.exit_side(&g).unwrap();
        assert_eq!(s.sigma(side), 2);
        assert_eq!(side, 12);
    }

    #[test]
    fn exit_side_is_locally_constant_off_boundaries() {
        let s = Surface::build(2).unwrap();
        let g = s.axis(&[2, 8, 5]).unwrap();
        let side = s.exit_side(&g).unwrap();
        for (du, dw) in [(1e-6, 1e-6), (-1e-6, 1e-6), (1e-6, -1e-6), (-1e-6, -1e-6)] {
            let gp = Geodesic { u: wrap(g.u + du), w: wrap(g.w + dw) };
            assert_eq!(s.exit_side(&gp).unwrap(), side);
        }
    }

    #[test]
    fn boundary_order_of_p_and_q_points() {
        let s = Surface::build(2).unwrap();
        // going counterclockwise: P_1, Q_1, P_2, Q_2, ...
        for i in 1..=s.n {
            assert!(in_fwd(s.p(i), s.q(i), s.midpoint(i), false, false));
            assert!(in_fwd(s.q(i), s.p(s.cyc(i as i64 + 1)), s.vertex_angle(i) + 0.2, false, false));
        }
    }

    #[test]
    fn rotation_covariance_of_the_frame() {
        let s0 = Surface::build_rotated(2, 0.0).unwrap();
        let s1 = Surface::build_rotated(2, 1.1).unwrap();
        for i in 1..=s0.n {
            assert!(cdist(wrap(s0.p(i) + 1.1), s1.p(i)) < 1e-12);
            let th = 0.37;
            let a0 = s0.t(i).apply_angle(th);
            let a1 = s1.t(i).apply_angle(wrap(th + 1.1));
            assert!(cdist(wrap(a0 + 1.1), a1) < 1e-9);
        }
    }

    #[test]
    fn genus1_is_rejected() {
        assert!(Surface::build(1).is_err());
    }
}
