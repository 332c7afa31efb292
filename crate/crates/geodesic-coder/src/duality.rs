//! Duality between attractors: reflecting an attractor across the
//! diagonal `(u, w) -> (w, u)` yields the attractor of the backward map
//! of a (possibly different) partition. Two attractors form a dual pair
//! when the reflected rectangle set matches exactly and the reflected
//! backward step agrees with the forward step of the partner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{Attractor, Rect};
use crate::moebius::{fwd_len, in_fwd, wrap, TWO_PI};

/// Rectangles with the two circle factors exchanged. Strip indices are
/// not meaningful for the reflected set and are zeroed.
pub fn reflect_rects(rects: &[Rect]) -> Vec<Rect> {
    rects
        .iter()
        .map(|r| Rect {
            strip: 0,
            u_lo: r.w_lo,
            u_hi: r.w_hi,
            w_lo: r.u_lo,
            w_hi: r.u_hi,
        })
        .collect()
}

fn circular_cuts(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut cuts: Vec<f64> = values.map(wrap).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if cuts.len() > 1 && (TWO_PI - cuts.last().unwrap() + cuts[0]).abs() < 1e-12 {
        cuts.pop();
    }
    cuts
}

fn in_any(arcs: &[(f64, f64)], x: f64) -> bool {
    arcs.iter().any(|&(lo, hi)| in_fwd(lo, hi, x, true, false))
}

/// Length of the symmetric difference of two unions of circular arcs,
/// computed exactly by cutting at every endpoint.
fn arc_sym_diff(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> f64 {
    if xs.is_empty() && ys.is_empty() {
        return 0.0;
    }
    let cuts = circular_cuts(
        xs.iter()
            .chain(ys)
            .flat_map(|&(lo, hi)| [lo, hi].into_iter()),
    );
    let m = cuts.len();
    let mut total = 0.0;
    for k in 0..m {
        let lo = cuts[k];
        let len = if m == 1 {
            TWO_PI
        } else {
            fwd_len(lo, cuts[(k + 1) % m])
        };
        if len < 1e-12 {
            continue;
        }
        let mid = wrap(lo + 0.5 * len);
        if in_any(xs, mid) != in_any(ys, mid) {
            total += len;
        }
    }
    total
}

/// Area of the symmetric difference of two rectangle unions on the torus,
/// by sweeping bands between consecutive `w`-cuts.
pub fn sym_diff_area(a: &[Rect], b: &[Rect]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let cuts = circular_cuts(
        a.iter()
            .chain(b)
            .flat_map(|r| [r.w_lo, r.w_hi].into_iter()),
    );
    let m = cuts.len();
    let mut total = 0.0;
    for k in 0..m {
        let lo = cuts[k];
        let len = if m == 1 {
            TWO_PI
        } else {
            fwd_len(lo, cuts[(k + 1) % m])
        };
        if len < 1e-12 {
            continue;
        }
        let mid = wrap(lo + 0.5 * len);
        let ua: Vec<(f64, f64)> = a
            .iter()
            .filter(|r| in_fwd(r.w_lo, r.w_hi, mid, true, false))
            .map(|r| (r.u_lo, r.u_hi))
            .collect();
        let ub: Vec<(f64, f64)> = b
            .iter()
            .filter(|r| in_fwd(r.w_lo, r.w_hi, mid, true, false))
            .map(|r| (r.u_lo, r.u_hi))
            .collect();
        total += arc_sym_diff(&ua, &ub) * len;
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityVerdict {
    pub partition: String,
    pub partner: String,
    /// Area of the symmetric difference between the reflected attractor
    /// and the partner.
    pub reflection_gap: f64,
    pub reflection_match: bool,
    pub commutativity_failures: usize,
    pub commutativity_samples: usize,
    pub dual: bool,
}

/// Samples of the backward-step commutation test: inside `att`, a unique
/// backward branch `j` forces the partner's forward branch at the
/// reflected point to be `sigma(j)`. Returns failures and usable samples.
pub fn commutativity_failures(
    att: &Attractor,
    partner: &Attractor,
    n: usize,
    seed: u64,
) -> (usize, usize) {
    let s = att.surface();
    let part2 = partner.partition();
    let rects = att.rects();
    let mut cum = Vec::with_capacity(rects.len());
    let mut total = 0.0;
    for r in rects {
        total += r.area();
        cum.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fails = 0;
    let mut used = 0;
    let mut attempts = 0;
    while used < n && attempts < 100 * n {
        attempts += 1;
        let x = rng.random::<f64>() * total;
        let k = cum.partition_point(|&c| c < x).min(rects.len() - 1);
        let r = &rects[k];
        let u = wrap(r.u_lo + rng.random::<f64>() * r.u_len());
        let w = wrap(r.w_lo + rng.random::<f64>() * r.w_len());
        if att.margin(u, w) < 1e-6 {
            continue;
        }
        let hits = att.inverse_candidates(u, w, 1e-9);
        if hits.len() != 1 {
            continue;
        }
        used += 1;
        if part2.strip_of(u) != s.sigma(hits[0].branch) {
            fails += 1;
        }
    }
    (fails, used)
}

/// Full duality check between two attractors over the same surface.
pub fn dual_check(
    att: &Attractor,
    partner: &Attractor,
    n_samples: usize,
    seed: u64,
) -> DualityVerdict {
    assert_eq!(
        att.surface().n,
        partner.surface().n,
        "duality check needs matching surfaces"
    );
    let gap = sym_diff_area(&reflect_rects(att.rects()), partner.rects());
    let reflection_match = gap < 1e-9;
    let (fails, used) = commutativity_failures(att, partner, n_samples, seed);
    DualityVerdict {
        partition: att.partition().kind.to_string(),
        partner: partner.partition().kind.to_string(),
        reflection_gap: gap,
        reflection_match,
        commutativity_failures: fails,
        commutativity_samples: used,
        dual: reflection_match && fails == 0 && used > 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Partition;
    use crate::surface::Surface;

    fn rect(u_lo: f64, u_hi: f64, w_lo: f64, w_hi: f64) -> Rect {
        Rect { strip: 0, u_lo, u_hi, w_lo, w_hi }
    }

    #[test]
    fn sym_diff_of_hand_built_rectangles() {
        let a = vec![rect(0.0, 1.0, 2.0, 3.0)];
        assert!(sym_diff_area(&a, &a) < 1e-15);
        let b = vec![rect(0.5, 1.5, 2.0, 3.0)];
        assert!((sym_diff_area(&a, &b) - 1.0).abs() < 1e-12);
        let c = vec![rect(3.0, 4.0, 5.0, 6.0)];
        assert!((sym_diff_area(&a, &c) - 2.0).abs() < 1e-12);
        let wrapping = vec![rect(6.0, 0.5, 2.0, 3.0)];
        let split = vec![
            rect(6.0, crate::moebius::TWO_PI, 2.0, 3.0),
            rect(0.0, 0.5, 2.0, 3.0),
        ];
        assert!(sym_diff_area(&wrapping, &split) < 1e-12);
    }

    #[test]
    fn endpoint_pattern_pairs_are_dual() {
        let s = Surface::build(2).unwrap();
        let build = |pat: &str| {
            let part = Partition::endpoint_pattern(&s, pat).unwrap();
            Attractor::numeric_lattice(&s, &part, 60_000, 90, 11).unwrap()
        };
        let p = build("P");
        let q = build("Q");
        let v = dual_check(&p, &q, 400, 5);
        assert!(v.dual, "P/Q verdict: {v:?}");
        assert!(v.reflection_gap < 1e-9);
        let v2 = dual_check(&q, &p, 400, 6);
        assert!(v2.dual, "Q/P verdict: {v2:?}");
    }

    #[test]
    fn midpoint_attractor_is_not_its_own_reflection() {
        let s = Surface::build(2).unwrap();
        let att = Attractor::closed_form(&s, &Partition::midpoints(&s)).unwrap();
        let gap = sym_diff_area(&reflect_rects(att.rects()), att.rects());
        assert!(gap > 1e-3, "gap {gap:.3e}");
    }
}
