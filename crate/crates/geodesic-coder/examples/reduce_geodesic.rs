//! Every oriented geodesic with distinct endpoints has a representative
//! inside the attractor. Drive random geodesics there and report how many
//! steps it took.

use geodesic_coder::boundary::{Attractor, Partition};
use geodesic_coder::moebius::{cdist, Geodesic, TWO_PI};
use geodesic_coder::surface::Surface;
use rand::{Rng, SeedableRng};

fn main() {
    let s = Surface::build(2).unwrap();
    let att = Attractor::build(&s, &Partition::midpoints(&s)).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);

    let mut max_steps = 0usize;
    let mut already = 0usize;
    for k in 0..2000 {
        let u = rng.random::<f64>() * TWO_PI;
        let w = rng.random::<f64>() * TWO_PI;
        if cdist(u, w) < 1e-3 {
            continue;
        }
        let out = att.reduce(&Geodesic { u, w }, 64).unwrap();
        assert!(att.is_reduced(&out.geodesic));
        if out.steps == 0 {
            already += 1;
        }
        if out.steps > max_steps {
            max_steps = out.steps;
            if k < 50 || out.steps > 6 {
                println!(
                    "({u:.4}, {w:.4}) entered after {} steps, word {:?}",
                    out.steps, out.strips
                );
            }
        }
    }
    println!("2000 draws: worst entry {max_steps} steps, {already} already inside");
}
