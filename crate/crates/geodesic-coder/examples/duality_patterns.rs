//! Duality between endpoint-pattern partitions: reflecting the attractor of
//! one across the diagonal gives the attractor of its partner, and the
//! backward branch of one matches the forward branch of the other.

use geodesic_coder::boundary::{Attractor, Partition};
use geodesic_coder::duality::dual_check;
use geodesic_coder::surface::Surface;

fn main() {
    let s = Surface::build(2).unwrap();
    let build = |pat: &str| {
        let part = Partition::endpoint_pattern(&s, pat).unwrap();
        Attractor::build(&s, &part).unwrap()
    };

    for (a, b) in [("P", "Q"), ("PQ", "QP"), ("PPQQ", "PPQQ"), ("QQPP", "QQPP")] {
        let aa = build(a);
        let ab = build(b);
        let v = dual_check(&aa, &ab, 400, 5);
        println!(
            "{a} vs {b}: reflection gap {:.2e}, commutativity {}/{} failed, dual {}",
            v.reflection_gap, v.commutativity_failures, v.commutativity_samples, v.dual
        );
    }

    // midpoints are not self-dual: the attractor is not reflection symmetric
    let part = Partition::midpoints(&s);
    let att = Attractor::build(&s, &part).unwrap();
    let v = dual_check(&att, &att, 400, 5);
    println!(
        "midpoints vs midpoints: reflection gap {:.2e}, dual {}",
        v.reflection_gap, v.dual
    );
}
