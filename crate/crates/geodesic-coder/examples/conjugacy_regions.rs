//! The curvilinear and rectilinear domains differ by bulges and corners,
//! and the correspondence between them is realized by specific parabolic-like
//! products. Classify sample points and check the correspondence both ways.

use geodesic_coder::boundary::{Attractor, Partition};
use geodesic_coder::coding::{classify, phi, phi_inverse, RegionTag};
use geodesic_coder::moebius::TWO_PI;
use geodesic_coder::surface::Surface;
use rand::{Rng, SeedableRng};

fn main() {
    let s = Surface::build(2).unwrap();
    let att = Attractor::build(&s, &Partition::midpoints(&s)).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);

    let mut counts = [0usize; 5];
    let mut checked = 0usize;
    for _ in 0..200_000 {
        let u = rng.random::<f64>() * TWO_PI;
        let w = rng.random::<f64>() * TWO_PI;
        let Ok(tag) = classify(&att, u, w) else {
            continue;
        };
        match tag {
            RegionTag::Common => counts[0] += 1,
            RegionTag::LowerBulge(_) => counts[1] += 1,
            RegionTag::UpperBulge(_) => counts[2] += 1,
            RegionTag::LowerCorner(_) => counts[3] += 1,
            RegionTag::UpperCorner(_) => counts[4] += 1,
        }

        // bulge -> corner -> same bulge round trip
        if matches!(tag, RegionTag::LowerBulge(_) | RegionTag::UpperBulge(_)) && checked < 500 {
            let (fwd, target) = phi(&att, u, w).unwrap();
            let (u2, w2) = (fwd.apply_angle(u), fwd.apply_angle(w));
            assert_eq!(classify(&att, u2, w2).unwrap(), target);
            let (back, back_target) = phi_inverse(&att, u2, w2).unwrap();
            assert_eq!(back_target, tag);
            let (u3, w3) = (back.apply_angle(u2), back.apply_angle(w2));
            assert!((u3 - u).abs() < 1e-9 && (w3 - w).abs() < 1e-9);
            checked += 1;
        }
    }
    println!(
        "samples: common {}, lower bulge {}, upper bulge {}, lower corner {}, upper corner {}",
        counts[0], counts[1], counts[2], counts[3], counts[4]
    );
    println!("{checked} bulge points round-tripped through their corner");
}
