use geodesic_coder::boundary::{Attractor, Partition};
use geodesic_coder::markov::markov_report;
use geodesic_coder::measure::total_mass;
use geodesic_coder::surface::Surface;

fn main() {
    for genus in [3usize, 4] {
        let s = Surface::build(genus).unwrap();
        let part = Partition::product_fixed_points(&s).unwrap();
        println!("g{genus} A_1 = {:.9}", part.point(1));
        let att = Attractor::build(&s, &part).unwrap();
        let mass = total_mass(&att).unwrap();
        let rep = markov_report(&att);
        println!(
            "g{genus} pfp: {} rects, mass {mass:.9}, markov {}, endpoint worst {:.2e}",
            att.rects().len(),
            rep.markov,
            rep.endpoint_worst
        );
    }
}
