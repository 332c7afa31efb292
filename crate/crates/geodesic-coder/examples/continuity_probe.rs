//! Two attractor points whose codes agree on digits -m..m sit close together,
//! and the bound tightens as m grows. Measure the worst observed
//! position-and-direction diameter per window depth.

use geodesic_coder::boundary::{Attractor, Partition};
use geodesic_coder::coding::code_continuity_probe;
use geodesic_coder::surface::Surface;

fn main() {
    let s = Surface::build(2).unwrap();
    let att = Attractor::build(&s, &Partition::midpoints(&s)).unwrap();
    let rows = code_continuity_probe(&att, 10, 160, 6, 3);
    let mut prev = None;
    println!("  m   diameter     ratio");
    for (m, d) in rows {
        match prev {
            None => println!("  {m:2}  {d:.6e}"),
            Some(p) => println!("  {m:2}  {d:.6e}  {:.4}", d / p),
        }
        prev = Some(d);
    }
}
