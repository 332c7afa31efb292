//! Build the natural-extension attractor for each standard partition, then
//! cross-check the two build paths on an endpoint pattern: the seeded
//! lattice build must recover the closed-form rectangles exactly.

use geodesic_coder::boundary::{Attractor, Partition, Provenance};
use geodesic_coder::surface::Surface;

fn main() {
    let s = Surface::build(2).unwrap();
    for spec in ["midpoints", "product-fixed-points", "mixed"] {
        let part = Partition::from_spec(&s, spec, None).unwrap();
        let att = Attractor::build(&s, &part).unwrap();
        assert_eq!(att.provenance, Provenance::ClosedForm);
        println!(
            "{spec}: {} rectangles, area {:.6}",
            att.rects().len(),
            att.lebesgue_area()
        );
    }

    for pat in ["P", "PQ"] {
        let part = Partition::endpoint_pattern(&s, pat).unwrap();
        let att = Attractor::closed_form(&s, &part).unwrap();
        let lat = Attractor::numeric_lattice(&s, &part, 60_000, 90, 31).unwrap();
        let worst = att
            .rects()
            .iter()
            .zip(lat.rects())
            .map(|(a, b)| {
                (a.u_lo - b.u_lo)
                    .abs()
                    .max((a.u_hi - b.u_hi).abs())
                    .max((a.w_lo - b.w_lo).abs())
                    .max((a.w_hi - b.w_hi).abs())
            })
            .fold(0.0f64, f64::max);
        println!(
            "endpoints-{pat}: closed form {} rects, lattice {} rects, worst corner gap {worst:.2e}",
            att.rects().len(),
            lat.rects().len()
        );
    }

    let part = Partition::midpoints(&s);
    let att = Attractor::build(&s, &part).unwrap();
    println!("\nfirst rectangles of the midpoint attractor (strip, u, w):");
    for r in att.rects().iter().take(6) {
        println!(
            "  strip {:2}  u [{:.5}, {:.5})  w [{:.5}, {:.5})",
            r.strip, r.u_lo, r.u_hi, r.w_lo, r.w_hi
        );
    }
}
