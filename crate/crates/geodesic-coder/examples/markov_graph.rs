//! Markov reports for the three standard partitions, plus one deliberately
//! broken partition to show what a failure looks like.

use geodesic_coder::boundary::{short_cycle_interval, Attractor, Partition};
use geodesic_coder::markov::markov_report;
use geodesic_coder::moebius::{fwd_len, wrap};
use geodesic_coder::surface::Surface;

fn main() {
    let s = Surface::build(2).unwrap();
    for spec in ["midpoints", "product-fixed-points", "mixed"] {
        let part = Partition::from_spec(&s, spec, None).unwrap();
        let att = Attractor::build(&s, &part).unwrap();
        let rep = markov_report(&att);
        println!(
            "{spec}: {} states, {} edges, endpoint misalignment {:.2e}, markov {}, irreducible {}, aperiodic {}, spectral radius {:.6}",
            rep.states,
            rep.edges.len(),
            rep.endpoint_worst,
            rep.markov,
            rep.irreducible,
            rep.aperiodic,
            rep.perron_value
        );
    }

    // shift every point 30% into its short-cycle window: cuts stop matching
    let mut pts = Vec::new();
    for i in 1..=s.n {
        let (b, a) = short_cycle_interval(&s, i);
        pts.push(wrap(b + 0.3 * fwd_len(b, a)));
    }
    let part = Partition::custom(&s, &pts).unwrap();
    let att = Attractor::build(&s, &part).unwrap();
    let rep = markov_report(&att);
    println!(
        "shifted partition: markov {}, endpoint misalignment {:.2e}, {} transition violations",
        rep.markov,
        rep.endpoint_worst,
        rep.violations.len()
    );
}
