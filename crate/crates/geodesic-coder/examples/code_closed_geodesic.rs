//! Arithmetic vs geometric codes of closed geodesics.
//!
//! The axis of T2 T8 T5 gets the same repetend both ways. The axis of
//! T5 T4 T7 T6 is the interesting one: with the partition used in the
//! source figures (A_1 and A_11 moved off the midpoints) its boundary
//! orbit passes through strip 12 while the geodesic itself exits the
//! polygon through side 1, so the two codes genuinely disagree.

use geodesic_coder::boundary::{Attractor, Partition};
use geodesic_coder::coding::{arithmetic_code, geometric_code};
use geodesic_coder::surface::Surface;

fn show(att: &Attractor, word: &[usize]) {
    let s = att.surface();
    let g = s.axis(word).unwrap();
    let g = if att.is_reduced(&g) {
        g
    } else {
        att.reduce(&g, 64).unwrap().geodesic
    };
    let n = 2 * word.len() + 4;
    let ar = arithmetic_code(att, &g, 0, n).unwrap();
    let ge = geometric_code(s, &g, 0, n).unwrap();
    let p = ar.period.unwrap_or(word.len());
    let q = ge.period.unwrap_or(word.len());
    println!(
        "  axis {:?}: arithmetic <{:?}>, geometric <{:?}>",
        word,
        &ar.future[..p],
        &ge.future[..q]
    );
}

fn main() {
    let s = Surface::build(2).unwrap();

    println!("midpoint partition:");
    let att = Attractor::build(&s, &Partition::midpoints(&s)).unwrap();
    show(&att, &[2, 8, 5]);
    show(&att, &[5, 4, 7, 6]);

    println!("figure partition (A_1 -> T_7 P_9, A_11 -> fixed point of T4 T5 T2):");
    let mut pts: Vec<f64> = (1..=s.n).map(|i| s.midpoint(i)).collect();
    pts[0] = s.t(7).apply_angle(s.p(9));
    pts[10] = s.word(&[4, 5, 2]).fixed_points().unwrap().attracting;
    let att = Attractor::build(&s, &Partition::custom(&s, &pts).unwrap()).unwrap();
    show(&att, &[2, 8, 5]);
    show(&att, &[5, 4, 7, 6]);
}
