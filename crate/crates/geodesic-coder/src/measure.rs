//! The invariant measure of the boundary map pair, entropy, and the
//! cross-section accounting that ties the two together.
//!
//! The density `du dw / (4 sin^2((u - w) / 2))` is preserved by every
//! Moebius action on endpoint pairs, so the attractor carries a finite
//! invariant measure with a closed-form rectangle mass. Phase volume on
//! the unit tangent bundle decomposes over the cross section as twice
//! this measure times arc length, which fixes the entropy constant.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::boundary::Attractor;
use crate::coding::return_time;
use crate::moebius::{arc_overlap, fwd_len, geodesic_circle, wrap, TWO_PI};
use crate::{Error, Result};

pub fn density(u: f64, w: f64) -> f64 {
    let s = (0.5 * (u - w)).sin();
    1.0 / (4.0 * s * s)
}

fn sn(x: f64) -> f64 {
    (0.5 * x).sin().abs()
}

/// Invariant mass of the rectangle `[u_lo, u_hi] x [w_lo, w_hi]`, both
/// factors read as forward arcs. Exact antiderivative; errors when the
/// rectangle reaches the diagonal, where the mass diverges.
pub fn rect_mass(u_lo: f64, u_hi: f64, w_lo: f64, w_hi: f64) -> Result<f64> {
    let du = fwd_len(u_lo, u_hi);
    let dw = fwd_len(w_lo, w_hi);
    if du < 1e-15 || dw < 1e-15 {
        return Ok(0.0);
    }
    if arc_overlap(u_lo, du, w_lo, dw) > 0.0 {
        return Err(Error::TouchesDiagonal);
    }
    let s = fwd_len(u_lo, w_lo);
    let (a, b, c, d) = (0.0, du, s, s + dw);
    let (n1, n2, d1, d2) = (sn(a - c), sn(b - d), sn(a - d), sn(b - c));
    if n1.min(n2).min(d1).min(d2) < 1e-13 {
        return Err(Error::TouchesDiagonal);
    }
    Ok((n1 * n2 / (d1 * d2)).ln())
}

/// Total invariant mass of an attractor. The same value comes out for
/// every admissible partition of a given surface.
pub fn total_mass(att: &Attractor) -> Result<f64> {
    let mut k = 0.0;
    for r in att.rects() {
        k += rect_mass(r.u_lo, r.u_hi, r.w_lo, r.w_hi)?;
    }
    Ok(k)
}

/// Entropy of the boundary map with respect to the normalized invariant
/// measure: `2 pi^2 (2g - 2) / K`. The numerator is half the unit
/// tangent bundle volume `2 pi * 2 pi (2g - 2)`; the factor two in the
/// phase-volume decomposition (see [`flow_point`] and the Jacobian test)
/// cancels it back.
pub fn entropy(att: &Attractor) -> Result<f64> {
    let g = att.surface().genus as f64;
    Ok(2.0 * PI * PI * (2.0 * g - 2.0) / total_mass(att)?)
}

/// Point at arc length `s` along the geodesic `u -> w`, measured from its
/// closest approach to the origin, together with the direction angle
/// there. Coordinates `(u, w, s)` chart the unit tangent bundle; the
/// Jacobian against hyperbolic area times angle is the constant 2.
pub fn flow_point(u: f64, w: f64, s: f64) -> (Complex64, f64) {
    let (z0, t0) = match geodesic_circle(u, w) {
        None => {
            let d = Complex64::from_polar(1.0, w) - Complex64::from_polar(1.0, u);
            (Complex64::new(0.0, 0.0), d / d.norm())
        }
        Some((c, r)) => {
            let z0 = c * (c.norm() - r) / c.norm();
            let mut t = Complex64::i() * (z0 - c) / (z0 - c).norm();
            if (t.conj() * (Complex64::from_polar(1.0, w) - z0)).re < 0.0 {
                t = -t;
            }
            (z0, t)
        }
    };
    let zeta = t0 * (0.5 * s).tanh();
    let den = 1.0 + z0.conj() * zeta;
    let z = (zeta + z0) / den;
    let psi = t0.arg() - 2.0 * den.arg();
    (z, psi)
}

/// Monte Carlo estimate of the total mass: uniform points on the torus,
/// density scored inside the attractor. Returns the estimate and its
/// standard error.
pub fn monte_carlo_mass(att: &Attractor, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n {
        let u = rng.random::<f64>() * TWO_PI;
        let w = rng.random::<f64>() * TWO_PI;
        let f = if att.contains(u, w, 0.0) { density(u, w) } else { 0.0 };
        sum += f;
        sumsq += f * f;
    }
    let nn = n as f64;
    let mean = sum / nn;
    let var = ((sumsq / nn - mean * mean) / nn).max(0.0);
    let scale = TWO_PI * TWO_PI;
    (mean * scale, var.sqrt() * scale)
}

/// Samples distributed by the normalized invariant measure: a rectangle
/// drawn by mass, then rejection against the density inside it. The
/// density is monotone in `u - w` away from the diagonal, so its maximum
/// over a rectangle sits at a corner.
pub fn nu_samples(att: &Attractor, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rects = att.rects();
    let mut cum = Vec::with_capacity(rects.len());
    let mut total = 0.0;
    let mut caps = Vec::with_capacity(rects.len());
    for r in rects {
        total += rect_mass(r.u_lo, r.u_hi, r.w_lo, r.w_hi)?;
        cum.push(total);
        let cap = density(r.u_lo, r.w_lo)
            .max(density(r.u_lo, r.w_hi))
            .max(density(r.u_hi, r.w_lo))
            .max(density(r.u_hi, r.w_hi));
        caps.push(cap * (1.0 + 1e-12));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random::<f64>() * total;
        let k = cum.partition_point(|&c| c < x).min(rects.len() - 1);
        let r = &rects[k];
        loop {
            let u = wrap(r.u_lo + rng.random::<f64>() * r.u_len());
            let w = wrap(r.w_lo + rng.random::<f64>() * r.w_len());
            if rng.random::<f64>() * caps[k] < density(u, w) {
                out.push((u, w));
                break;
            }
        }
    }
    Ok(out)
}

/// Mean first-return length over invariant-measure samples. Samples whose
/// return computation fails numerically are skipped; the count of used
/// samples is returned alongside.
pub fn mean_return(att: &Attractor, n: usize, seed: u64) -> Result<(f64, usize)> {
    let pts = nu_samples(att, n, seed)?;
    let mut sum = 0.0;
    let mut used = 0;
    for (u, w) in pts {
        if let Ok(g) = return_time(att, u, w) {
            sum += g;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::NumericallySingular("no usable return samples".into()));
    }
    Ok((sum / used as f64, used))
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub genus: usize,
    pub partition: String,
    pub mass_closed_form: f64,
    pub mass_monte_carlo: f64,
    pub monte_carlo_sigma: f64,
    pub monte_carlo_n: usize,
    pub entropy: f64,
    pub mean_return: f64,
    pub return_samples: usize,
    /// Mean return length divided by entropy; near one when the section
    /// accounting is consistent with unit-speed flow.
    pub abramov_ratio: f64,
}

pub fn entropy_report(
    att: &Attractor,
    mc_n: usize,
    ret_n: usize,
    seed: u64,
) -> Result<EntropyReport> {
    let k = total_mass(att)?;
    let h = entropy(att)?;
    let (mc, sigma) = monte_carlo_mass(att, mc_n, seed);
    let (g_mean, used) = mean_return(att, ret_n, seed.wrapping_add(1))?;
    Ok(EntropyReport {
        genus: att.surface().genus,
        partition: att.partition().kind.to_string(),
        mass_closed_form: k,
        mass_monte_carlo: mc,
        monte_carlo_sigma: sigma,
        monte_carlo_n: mc_n,
        entropy: h,
        mean_return: g_mean,
        return_samples: used,
        abramov_ratio: g_mean / h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Partition;
    use crate::surface::Surface;

    fn setup(genus: usize) -> Attractor {
        let s = Surface::build(genus).unwrap();
        let part = Partition::midpoints(&s);
        Attractor::closed_form(&s, &part).unwrap()
    }

    fn simpson_mass(u_lo: f64, u_hi: f64, w_lo: f64, w_hi: f64, m: usize) -> f64 {
        let du = fwd_len(u_lo, u_hi);
        let dw = fwd_len(w_lo, w_hi);
        let simpson_weight = |j: usize, m: usize| -> f64 {
            if j == 0 || j == m {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut total = 0.0;
        for ju in 0..=m {
            let u = u_lo + du * ju as f64 / m as f64;
            let mut row = 0.0;
            for jw in 0..=m {
                let w = w_lo + dw * jw as f64 / m as f64;
                row += simpson_weight(jw, m) * density(u, w);
            }
            total += simpson_weight(ju, m) * row * (dw / m as f64 / 3.0);
        }
        total * (du / m as f64 / 3.0)
    }

    #[test]
    fn rect_mass_matches_quadrature() {
        let att = setup(2);
        for &k in &[0usize, 7, 20] {
            let r = att.rects()[k];
            let exact = rect_mass(r.u_lo, r.u_hi, r.w_lo, r.w_hi).unwrap();
            let quad = simpson_mass(r.u_lo, r.u_hi, r.w_lo, r.w_hi, 1500);
            assert!(
                (exact - quad).abs() < 1e-9,
                "rect {k}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn total_mass_is_partition_independent() {
        let s = Surface::build(2).unwrap();
        let mid = Attractor::closed_form(&s, &Partition::midpoints(&s)).unwrap();
        let pfp = Attractor::closed_form(&s, &Partition::product_fixed_points(&s).unwrap()).unwrap();
        let mix = Attractor::closed_form(&s, &Partition::mixed(&s).unwrap()).unwrap();
        let k0 = total_mass(&mid).unwrap();
        assert!((k0 - 19.954630693).abs() < 1e-8, "K = {k0}");
        assert!((total_mass(&pfp).unwrap() - k0).abs() < 1e-9);
        assert!((total_mass(&mix).unwrap() - k0).abs() < 1e-9);
    }

    #[test]
    fn genus_three_mass_and_entropy() {
        let att = setup(3);
        let k = total_mass(&att).unwrap();
        assert!((k - 34.549735735).abs() < 1e-8, "K = {k}");
        let h = entropy(&att).unwrap();
        assert!((h - 2.285309382).abs() < 1e-8, "h = {h}");
    }

    #[test]
    fn entropy_times_mass_is_the_volume_constant() {
        for genus in [2usize, 3] {
            let att = setup(genus);
            let prod = entropy(&att).unwrap() * total_mass(&att).unwrap();
            let want = 2.0 * PI * PI * (2.0 * genus as f64 - 2.0);
            assert!((prod - want).abs() < 1e-9);
        }
        let att = setup(2);
        let h = entropy(&att).unwrap();
        assert!((h - 1.978408832).abs() < 1e-8, "h = {h}");
    }

    #[test]
    fn diagonal_rectangles_are_rejected() {
        assert!(matches!(
            rect_mass(0.1, 1.0, 0.5, 2.0),
            Err(Error::TouchesDiagonal)
        ));
        assert!(matches!(
            rect_mass(0.0, 1.0, 1.0, 2.0),
            Err(Error::TouchesDiagonal)
        ));
        assert!(rect_mass(0.0, 1.0, 1.5, 2.5).is_ok());
    }

    #[test]
    fn flow_chart_jacobian_is_two() {
        let cases = [
            (0.3, 2.5, 0.55),
            (1.2, 4.9, -0.4),
            (5.9, 2.1, 0.8),
            (0.1, 3.0, 0.0),
        ];
        let h = 1e-6;
        for &(u, w, s) in &cases {
            let wrap_diff = |a: f64, b: f64| wrap(a - b + PI) - PI;
            let mut jac = [[0.0f64; 3]; 3];
            let params = [u, w, s];
            for col in 0..3 {
                let mut hi = params;
                let mut lo = params;
                hi[col] += h;
                lo[col] -= h;
                let (zh, ph) = flow_point(hi[0], hi[1], hi[2]);
                let (zl, pl) = flow_point(lo[0], lo[1], lo[2]);
                jac[0][col] = (zh.re - zl.re) / (2.0 * h);
                jac[1][col] = (zh.im - zl.im) / (2.0 * h);
                jac[2][col] = wrap_diff(ph, pl) / (2.0 * h);
            }
            let det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
                - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
                + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
            let (z, _) = flow_point(u, w, s);
            let hyp_area_density = 4.0 / (1.0 - z.norm_sqr()).powi(2);
            let ratio = det.abs() * hyp_area_density / density(u, w);
            assert!((ratio - 2.0).abs() < 1e-5, "ratio {ratio} at ({u},{w},{s})");
        }
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form() {
        let att = setup(2);
        let k = total_mass(&att).unwrap();
        let (mc, sigma) = monte_carlo_mass(&att, 200_000, 7);
        assert!((mc - k).abs() < 4.0 * sigma, "mc {mc} vs {k} (sigma {sigma})");
        assert!(sigma < 0.2);
    }

    #[test]
    fn invariant_samples_stay_in_the_attractor() {
        let att = setup(2);
        let pts = nu_samples(&att, 2000, 5).unwrap();
        assert_eq!(pts.len(), 2000);
        for &(u, w) in &pts {
            assert!(att.contains(u, w, 1e-12));
        }
        let (g_mean, used) = mean_return(&att, 500, 5).unwrap();
        assert!(used >= 490);
        assert!(g_mean > 0.5 && g_mean < 5.0);
    }
}
