//! Coding of geodesics: the geometric (exit-side) step, the region
//! dictionary between the geometric domain and the attractor, cross-section
//! return times, arithmetic and geometric digit sequences, and a probe of
//! how fast shared digit windows pin down a geodesic.
//!
//! The geometric domain is the set of geodesics meeting the fundamental
//! polygon; the attractor is the rectangle union of [`crate::boundary`].
//! They differ by finitely many pieces: two `bulge` families (in the
//! geometric domain, outside the attractor) and two `corner` families (the
//! reverse), swapped by the corner maps `U_i`. The conjugating map `phi`
//! is the identity on the common part and a single `U` on each bulge.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::Attractor;
use crate::moebius::{
    cdist, fwd_len, geo_coeffs, geodesic_circle, hyp_dist, in_fwd, wrap, Geodesic, MoebiusMap,
};
use crate::surface::Surface;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    /// In both the geometric domain and the attractor.
    Common,
    /// Meets the polygon but lies below the attractor's `u`-interval.
    LowerBulge(usize),
    UpperBulge(usize),
    /// In the attractor but missing the polygon; image of a bulge under a
    /// corner map.
    LowerCorner(usize),
    UpperCorner(usize),
}

/// One geometric step: apply the pairing of the exit side.
pub fn geometric_step(s: &Surface, u: f64, w: f64) -> Result<(usize, f64, f64)> {
    let (side, _) = s.exit(u, w)?;
    let t = s.t(side);
    Ok((side, t.apply_angle(u), t.apply_angle(w)))
}

fn bulge_tag(att: &Attractor, u: f64, w: f64) -> Result<RegionTag> {
    let s = att.surface();
    let (_, hi) = att.u_range(w);
    if in_fwd(hi, w, u, false, false) {
        for i in 1..=s.n {
            if in_fwd(s.p(s.cyc(i as i64 - 1)), s.p(i), u, true, false) {
                return Ok(RegionTag::UpperBulge(i));
            }
        }
    } else {
        for i in 1..=s.n {
            if in_fwd(s.q(s.cyc(i as i64 + 1)), s.q(s.cyc(i as i64 + 2)), u, true, false) {
                return Ok(RegionTag::LowerBulge(i));
            }
        }
    }
    Err(Error::Unclassifiable)
}

/// Locate `(u, w)` relative to the two domains. Points in neither are
/// errors, as are corner candidates that fail their pull-back check.
pub fn classify(att: &Attractor, u: f64, w: f64) -> Result<RegionTag> {
    let s = att.surface();
    let in_a = att.contains(u, w, 1e-12);
    let in_g = s.meets_domain(u, w);
    if in_a && in_g {
        return Ok(RegionTag::Common);
    }
    if in_g {
        return bulge_tag(att, u, w);
    }
    if !in_a {
        return Err(Error::Unclassifiable);
    }
    let mut cands = Vec::new();
    for i in 1..=s.n {
        if in_fwd(s.p(s.cyc(i as i64 - 1)), s.p(i), u, true, false) {
            cands.push(RegionTag::UpperCorner(i));
        }
        if in_fwd(s.q(s.cyc(i as i64 + 1)), s.q(s.cyc(i as i64 + 2)), u, true, false) {
            cands.push(RegionTag::LowerCorner(i));
        }
    }
    let mut good = Vec::new();
    for tag in cands {
        let (g, expect) = match tag {
            RegionTag::UpperCorner(i) => (
                s.u_map(i).inverse(),
                RegionTag::LowerBulge(s.cyc(s.tau(i) as i64 - 1)),
            ),
            RegionTag::LowerCorner(i) => {
                let ip1 = s.cyc(i as i64 + 1);
                (s.u_map(ip1).inverse(), RegionTag::UpperBulge(s.tau(ip1)))
            }
            _ => unreachable!(),
        };
        let (u2, w2) = (g.apply_angle(u), g.apply_angle(w));
        if s.meets_domain(u2, w2)
            && !att.contains(u2, w2, -1e-12)
            && bulge_tag(att, u2, w2).is_ok_and(|t| t == expect)
        {
            good.push(tag);
        }
    }
    if good.len() == 1 {
        return Ok(good[0]);
    }
    Err(Error::Unclassifiable)
}

/// The dictionary map from the geometric domain to the attractor: identity
/// on the common part, a corner map on each bulge. Returns the map and the
/// tag of the image region.
pub fn phi(att: &Attractor, u: f64, w: f64) -> Result<(MoebiusMap, RegionTag)> {
    let s = att.surface();
    match classify(att, u, w)? {
        RegionTag::Common => Ok((MoebiusMap::identity(), RegionTag::Common)),
        RegionTag::LowerBulge(i) => {
            let j = s.cyc(s.tau(i) as i64 + 1);
            Ok((s.u_map(j), RegionTag::UpperCorner(j)))
        }
        RegionTag::UpperBulge(i) => Ok((
            s.u_map(s.tau(i)),
            RegionTag::LowerCorner(s.cyc(s.tau(i) as i64 - 1)),
        )),
        _ => Err(Error::Unclassifiable),
    }
}

/// Inverse dictionary: identity on the common part, `U_i^{-1}` on an upper
/// corner, `U_{i+1}^{-1}` on a lower one. Returns the map and the tag of
/// the image region.
pub fn phi_inverse(att: &Attractor, u: f64, w: f64) -> Result<(MoebiusMap, RegionTag)> {
    let s = att.surface();
    match classify(att, u, w)? {
        RegionTag::Common => Ok((MoebiusMap::identity(), RegionTag::Common)),
        RegionTag::UpperCorner(i) => Ok((
            s.u_map(i).inverse(),
            RegionTag::LowerBulge(s.cyc(s.tau(i) as i64 - 1)),
        )),
        RegionTag::LowerCorner(i) => {
            let ip1 = s.cyc(i as i64 + 1);
            Ok((s.u_map(ip1).inverse(), RegionTag::UpperBulge(s.tau(ip1))))
        }
        _ => Err(Error::Unclassifiable),
    }
}

/// Point where a reduced geodesic crosses the section: its entry into the
/// polygon, or for a corner region, the entry of the pulled-back geodesic
/// mapped forward again.
pub fn cross_point(att: &Attractor, u: f64, w: f64) -> Result<Complex64> {
    let s = att.surface();
    if s.meets_domain(u, w) {
        return Ok(s.entry(u, w)?.1);
    }
    let j = match classify(att, u, w)? {
        RegionTag::UpperCorner(i) => i,
        RegionTag::LowerCorner(i) => s.cyc(i as i64 + 1),
        tag => {
            return Err(Error::NumericallySingular(format!(
                "cross point of a non-reduced geodesic (tag {tag:?})"
            )))
        }
    };
    let uj = s.u_map(j);
    let ginv = uj.inverse();
    let (u2, w2) = (ginv.apply_angle(u), ginv.apply_angle(w));
    let z = s.entry(u2, w2)?.1;
    Ok(uj.apply(z))
}

/// Geodesic arc length between consecutive section crossings along the
/// natural-extension orbit of `(u, w)`.
pub fn return_time(att: &Attractor, u: f64, w: f64) -> Result<f64> {
    let s = att.surface();
    let z0 = cross_point(att, u, w)?;
    let (i, u1, w1) = att.step(u, w);
    let z1 = cross_point(att, u1, w1)?;
    Ok(hyp_dist(z0, s.t(s.sigma(i)).apply(z1)))
}

/// Cross-section point and the direction angle of the geodesic there.
pub fn tangent_data(att: &Attractor, u: f64, w: f64) -> Result<(Complex64, f64)> {
    let z = cross_point(att, u, w)?;
    let t = match geodesic_circle(u, w) {
        None => {
            let d = Complex64::from_polar(1.0, w) - Complex64::from_polar(1.0, u);
            d / d.norm()
        }
        Some((c, _)) => {
            let mut t = Complex64::i() * (z - c) / (z - c).norm();
            if (t.conj() * (Complex64::from_polar(1.0, w) - z)).re < 0.0 {
                t = -t;
            }
            t
        }
    };
    Ok((z, t.arg()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFlavor {
    Arithmetic,
    Geometric,
}

/// A two-sided digit sequence. `future[k]` is the digit at time `k`;
/// `past[k]` the digit at time `-(k+1)`. Digits are generator indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodingSequence {
    pub flavor: CodeFlavor,
    pub genus: usize,
    /// Partition the arithmetic code was taken against; absent for the
    /// geometric flavor.
    pub partition_kind: Option<String>,
    pub past: Vec<usize>,
    pub future: Vec<usize>,
    /// Length of the repeating block when the orbit closes up.
    pub period: Option<usize>,
}

/// Arithmetic code of a reduced geodesic: digit `sigma(i_k)` where `i_k`
/// is the strip of `w_k` along the natural-extension orbit.
pub fn arithmetic_code(
    att: &Attractor,
    g: &Geodesic,
    n_past: usize,
    n_future: usize,
) -> Result<CodingSequence> {
    if !att.is_reduced(g) {
        return Err(Error::NotReduced);
    }
    let s = att.surface();
    let mut future = Vec::with_capacity(n_future);
    let (mut u, mut w) = (g.u, g.w);
    let mut period = None;
    for k in 0..n_future {
        let (i, u2, w2) = att.step(u, w);
        future.push(s.sigma(i));
        u = u2;
        w = w2;
        if period.is_none() && cdist(u, g.u) < 1e-8 && cdist(w, g.w) < 1e-8 {
            period = Some(k + 1);
        }
    }
    let mut past = Vec::with_capacity(n_past);
    let (mut u, mut w) = (g.u, g.w);
    for _ in 0..n_past {
        let (j, u2, w2) = att.inverse_step(u, w)?;
        past.push(s.sigma(j));
        u = u2;
        w = w2;
    }
    Ok(CodingSequence {
        flavor: CodeFlavor::Arithmetic,
        genus: s.genus,
        partition_kind: Some(att.partition().kind.to_string()),
        past,
        future,
        period,
    })
}

/// Geometric code of a geodesic meeting the polygon: digit `sigma(e_k)`
/// where `e_k` is the exit side at time `k`. One backward step pulls the
/// geodesic by the pairing of its entry side.
pub fn geometric_code(
    s: &Surface,
    g: &Geodesic,
    n_past: usize,
    n_future: usize,
) -> Result<CodingSequence> {
    if !s.meets_domain(g.u, g.w) {
        return Err(Error::NoIntersection);
    }
    let mut future = Vec::with_capacity(n_future);
    let (mut u, mut w) = (g.u, g.w);
    let mut period = None;
    for k in 0..n_future {
        let (side, u2, w2) = geometric_step(s, u, w)?;
        future.push(s.sigma(side));
        u = u2;
        w = w2;
        if period.is_none() && cdist(u, g.u) < 1e-8 && cdist(w, g.w) < 1e-8 {
            period = Some(k + 1);
        }
    }
    let mut past = Vec::with_capacity(n_past);
    let (mut u, mut w) = (g.u, g.w);
    for _ in 0..n_past {
        let (e, _) = s.entry(u, w)?;
        let t = s.t(e);
        u = t.apply_angle(u);
        w = t.apply_angle(w);
        let (x, _) = s.exit(u, w)?;
        past.push(s.sigma(x));
    }
    Ok(CodingSequence {
        flavor: CodeFlavor::Geometric,
        genus: s.genus,
        partition_kind: None,
        past,
        future,
        period,
    })
}

/// Lexicographically least rotation, the canonical form of a repeating
/// digit block.
pub fn canonical_rotation(digits: &[usize]) -> Vec<usize> {
    if digits.is_empty() {
        return Vec::new();
    }
    let n = digits.len();
    let mut best = 0usize;
    for start in 1..n {
        for k in 0..n {
            let a = digits[(start + k) % n];
            let b = digits[(best + k) % n];
            if a != b {
                if a < b {
                    best = start;
                }
                break;
            }
        }
    }
    (0..n).map(|k| digits[(best + k) % n]).collect()
}

/// Strip indices of the orbit at times `-m..=m`: `(past, future)` with
/// `past = (i_{-m}, ..., i_{-1})` and `future = (i_0, ..., i_m)`.
pub fn window_of(
    att: &Attractor,
    u: f64,
    w: f64,
    m: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let part = att.partition();
    let mut fwd = Vec::with_capacity(m + 1);
    let (mut uu, mut ww) = (u, w);
    for _ in 0..=m {
        fwd.push(part.strip_of(ww));
        let st = att.step(uu, ww);
        uu = st.1;
        ww = st.2;
    }
    let mut bwd = Vec::with_capacity(m);
    let (mut uu, mut ww) = (u, w);
    for _ in 0..m {
        let (j, u2, w2) = att.inverse_step(uu, ww)?;
        bwd.push(j);
        uu = u2;
        ww = w2;
    }
    bwd.reverse();
    Ok((bwd, fwd))
}

/// The rectangle of points sharing the digit window `-m..=m` with
/// `(u, w)`: the final strip pulled back with clipping gives the `w`-arc,
/// the rectangle `u`-interval at time `-m` pushed forward gives the
/// `u`-arc.
pub fn cylinder_cell(
    att: &Attractor,
    u: f64,
    w: f64,
    m: usize,
) -> Result<((f64, f64), (f64, f64))> {
    let s = att.surface();
    let part = att.partition();
    let mut strips = Vec::with_capacity(m + 1);
    let (mut uu, mut ww) = (u, w);
    for _ in 0..=m {
        strips.push(part.strip_of(ww));
        let st = att.step(uu, ww);
        uu = st.1;
        ww = st.2;
    }
    let last = *strips.last().unwrap();
    let mut wlo = part.point(last);
    let mut whi = part.point(s.cyc(last as i64 + 1));
    for &i in strips[..strips.len() - 1].iter().rev() {
        let tinv = s.t(s.sigma(i));
        wlo = tinv.apply_angle(wlo);
        whi = tinv.apply_angle(whi);
        let slo = part.point(i);
        let shi = part.point(s.cyc(i as i64 + 1));
        let span = fwd_len(slo, shi);
        if fwd_len(slo, wlo) > span {
            wlo = slo;
        }
        if fwd_len(slo, whi) > span {
            whi = shi;
        }
    }
    let mut back = Vec::with_capacity(m);
    let (mut uu, mut ww) = (u, w);
    for _ in 0..m {
        let (j, u2, w2) = att.inverse_step(uu, ww)?;
        back.push(j);
        uu = u2;
        ww = w2;
    }
    let (mut ulo, mut uhi) = att.u_range(ww);
    for &j in back.iter().rev() {
        let t = s.t(j);
        ulo = t.apply_angle(ulo);
        uhi = t.apply_angle(uhi);
    }
    Ok(((ulo, uhi), (wlo, whi)))
}

/// Largest cross-section distance (hyperbolic distance plus tangent-angle
/// difference) between geodesics sharing the digit window `-m..=m`, probed
/// over random bases; one entry per `m` in `2..=m_max`.
pub fn code_continuity_probe(
    att: &Attractor,
    m_max: usize,
    n_base: usize,
    n_cand: usize,
    seed: u64,
) -> Vec<(usize, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut diam = vec![0.0f64; m_max + 1];
    let mut bases = Vec::with_capacity(n_base);
    while bases.len() < n_base {
        let mut u = rng.random::<f64>() * crate::moebius::TWO_PI;
        let mut w = rng.random::<f64>() * crate::moebius::TWO_PI;
        if cdist(u, w) < 0.3 {
            continue;
        }
        for _ in 0..80 {
            let st = att.step(u, w);
            u = st.1;
            w = st.2;
        }
        if att.margin(u, w) > 1e-4 {
            bases.push((u, w));
        }
    }
    for (u, w) in bases {
        let Ok(base_win) = window_of(att, u, w, m_max) else { continue };
        let Ok((z0, th0)) = tangent_data(att, u, w) else { continue };
        for m in 2..=m_max {
            let Ok(((ulo, uhi), (wlo, whi))) = cylinder_cell(att, u, w, m) else { continue };
            let want_past = &base_win.0[base_win.0.len() - m..];
            let want_fwd = &base_win.1[..m + 1];
            for _ in 0..n_cand {
                let u2 = wrap(ulo + rng.random::<f64>() * fwd_len(ulo, uhi));
                let w2 = wrap(wlo + rng.random::<f64>() * fwd_len(wlo, whi));
                if !att.contains(u2, w2, 0.0) || att.margin(u2, w2) < 1e-6 {
                    continue;
                }
                let Ok(win2) = window_of(att, u2, w2, m) else { continue };
                if win2.0 != want_past || win2.1 != want_fwd {
                    continue;
                }
                let Ok((z1, th1)) = tangent_data(att, u2, w2) else { continue };
                let dth = (wrap(th1 - th0 + std::f64::consts::PI) - std::f64::consts::PI).abs();
                diam[m] = diam[m].max(hyp_dist(z0, z1) + dth);
            }
        }
    }
    (2..=m_max).map(|m| (m, diam[m])).collect()
}

/// Residual of `z` against the circle equation of the geodesic `u -> w`;
/// zero when `z` lies on it.
pub fn on_geodesic_residual(u: f64, w: f64, z: Complex64) -> f64 {
    let (a, c) = geo_coeffs(u, w);
    (a * z.norm_sqr() - 2.0 * (c.conj() * z).re + a).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Partition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> Attractor {
        let s = Surface::build(2).unwrap();
        let part = Partition::midpoints(&s);
        Attractor::closed_form(&s, &part).unwrap()
    }

    #[test]
    fn conjugacy_on_random_samples() {
        let att = setup();
        let s = att.surface().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        let mut m = 0;
        while m < 300 {
            let u = rng.random::<f64>() * crate::moebius::TWO_PI;
            let w = rng.random::<f64>() * crate::moebius::TWO_PI;
            if cdist(u, w) < 1e-3 || !s.meets_domain(u, w) {
                continue;
            }
            m += 1;
            let (_, ug, wg) = geometric_step(&s, u, w).unwrap();
            let (g1, _) = phi(&att, ug, wg).unwrap();
            let lhs = (g1.apply_angle(ug), g1.apply_angle(wg));
            let (g0, _) = phi(&att, u, w).unwrap();
            let (_, au, aw) = att.step(g0.apply_angle(u), g0.apply_angle(w));
            worst = worst.max(cdist(lhs.0, au)).max(cdist(lhs.1, aw));
        }
        assert!(worst < 1e-9, "worst {worst:.3e}");
    }

    #[test]
    fn phi_and_phi_inverse_are_mutual() {
        let att = setup();
        let s = att.surface().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut seen_bulge = 0;
        let mut tried = 0;
        while seen_bulge < 40 && tried < 200_000 {
            tried += 1;
            let u = rng.random::<f64>() * crate::moebius::TWO_PI;
            let w = rng.random::<f64>() * crate::moebius::TWO_PI;
            if cdist(u, w) < 1e-3 || !s.meets_domain(u, w) || att.contains(u, w, 0.0) {
                continue;
            }
            seen_bulge += 1;
            let (g, target) = phi(&att, u, w).unwrap();
            let (u2, w2) = (g.apply_angle(u), g.apply_angle(w));
            assert_eq!(classify(&att, u2, w2).unwrap(), target);
            let (ginv, back) = phi_inverse(&att, u2, w2).unwrap();
            assert_eq!(back, classify(&att, u, w).unwrap());
            assert!(cdist(ginv.apply_angle(u2), u) < 1e-9);
            assert!(cdist(ginv.apply_angle(w2), w) < 1e-9);
        }
        assert!(seen_bulge >= 40, "only {seen_bulge} bulge samples");
    }

    #[test]
    fn cross_points_lie_on_the_geodesic() {
        let att = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 100 {
            let k = rng.random_range(0..att.rects().len());
            let r = att.rects()[k];
            let u = wrap(r.u_lo + rng.random::<f64>() * r.u_len());
            let w = wrap(r.w_lo + rng.random::<f64>() * r.w_len());
            if !att.contains(u, w, 0.0) || att.margin(u, w) < 1e-6 {
                continue;
            }
            done += 1;
            let z0 = cross_point(&att, u, w).unwrap();
            assert!(on_geodesic_residual(u, w, z0) < 1e-9);
            let g = return_time(&att, u, w).unwrap();
            assert!(g > 0.0 && g < 5.0);
        }
    }

    #[test]
    fn closed_orbit_return_times_sum_to_axis_length() {
        let att = setup();
        let s = att.surface();
        let g = s.axis(&[2, 8, 5]).unwrap();
        let (mut u, mut w) = (g.u, g.w);
        let mut total = 0.0;
        let mut strips = Vec::new();
        for _ in 0..3 {
            total += return_time(&att, u, w).unwrap();
            let st = att.step(u, w);
            strips.push(st.0);
            u = st.1;
            w = st.2;
        }
        assert!(cdist(u, g.u) < 1e-9 && cdist(w, g.w) < 1e-9);
        assert_eq!(strips, vec![12, 6, 3]);
        let tr = s.word(&[2, 8, 5]).trace().abs();
        let ell = 2.0 * (tr / 2.0).acosh();
        assert!((total - ell).abs() < 1e-9, "sum {total} vs {ell}");
        assert!((ell - 9.568530051699).abs() < 1e-9);
    }

    #[test]
    fn arithmetic_and_geometric_codes_of_example_axis() {
        let att = setup();
        let s = att.surface();
        let g = s.axis(&[2, 8, 5]).unwrap();
        let ar = arithmetic_code(&att, &g, 6, 6).unwrap();
        assert_eq!(ar.future, vec![2, 8, 5, 2, 8, 5]);
        assert_eq!(ar.past, vec![5, 8, 2, 5, 8, 2]);
        assert_eq!(ar.period, Some(3));
        let ge = geometric_code(s, &g, 6, 6).unwrap();
        assert_eq!(ge.future, vec![2, 8, 5, 2, 8, 5]);
        assert_eq!(ge.past, vec![5, 8, 2, 5, 8, 2]);
        assert_eq!(ge.period, Some(3));
        assert!(ge.partition_kind.is_none());
    }

    #[test]
    fn corner_axis_codes_through_the_vertex() {
        let s = Surface::build(2).unwrap();
        let g = Geodesic { u: s.midpoint(4), w: s.midpoint(10) };
        let code = geometric_code(&s, &g, 0, 4).unwrap();
        assert_eq!(code.future, vec![4, 3, 4, 3]);
        assert_eq!(code.period, Some(2));
    }

    #[test]
    fn canonical_rotation_is_lex_least() {
        assert_eq!(canonical_rotation(&[9, 4, 2]), vec![2, 9, 4]);
        assert_eq!(canonical_rotation(&[2, 8, 5]), vec![2, 8, 5]);
        assert_eq!(canonical_rotation(&[3, 3, 3]), vec![3, 3, 3]);
        assert_eq!(canonical_rotation(&[11, 4]), vec![4, 11]);
    }

    #[test]
    fn cylinder_cell_members_share_the_window() {
        let att = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut done = 0;
        'outer: while done < 8 {
            let mut u = rng.random::<f64>() * crate::moebius::TWO_PI;
            let mut w = rng.random::<f64>() * crate::moebius::TWO_PI;
            if cdist(u, w) < 0.3 {
                continue;
            }
            for _ in 0..80 {
                let st = att.step(u, w);
                u = st.1;
                w = st.2;
            }
            if att.margin(u, w) < 1e-4 {
                continue;
            }
            let m = 4;
            let Ok(base) = window_of(&att, u, w, m) else { continue };
            let Ok(((ulo, uhi), (wlo, whi))) = cylinder_cell(&att, u, w, m) else { continue };
            for _ in 0..20 {
                let u2 = wrap(ulo + rng.random::<f64>() * fwd_len(ulo, uhi));
                let w2 = wrap(wlo + rng.random::<f64>() * fwd_len(wlo, whi));
                if !att.contains(u2, w2, 0.0) || att.margin(u2, w2) < 1e-6 {
                    continue;
                }
                let Ok(win2) = window_of(&att, u2, w2, m) else { continue 'outer };
                assert_eq!(win2, base);
            }
            done += 1;
        }
        assert!(done >= 4);
    }

    #[test]
    fn coding_sequence_round_trips_through_json() {
        let att = setup();
        let s = att.surface();
        let g = s.axis(&[2, 8, 5]).unwrap();
        let code = arithmetic_code(&att, &g, 4, 8).unwrap();
        let text = serde_json::to_string(&code).unwrap();
        assert!(text.contains("\"flavor\":\"arithmetic\""));
        assert!(text.contains("\"partition_kind\":\"midpoints\""));
        let back: CodingSequence = serde_json::from_str(&text).unwrap();
        assert_eq!(back.future, code.future);
        assert_eq!(back.period, Some(3));
    }
}
