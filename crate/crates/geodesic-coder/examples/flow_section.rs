//! The attractor is a cross-section of the geodesic flow: each point marks
//! where its geodesic enters the fundamental polygon, with a return time to
//! the next crossing. Sample the section and summarize.

use geodesic_coder::boundary::{Attractor, Partition};
use geodesic_coder::coding::{cross_point, on_geodesic_residual, return_time, tangent_data};
use geodesic_coder::measure::nu_samples;
use geodesic_coder::surface::Surface;

fn main() {
    let s = Surface::build(2).unwrap();
    let att = Attractor::build(&s, &Partition::midpoints(&s)).unwrap();

    let pts = nu_samples(&att, 10_000, 41).unwrap();
    let mut total = 0.0;
    let mut worst_resid = 0.0f64;
    let mut shortest = f64::INFINITY;
    let mut longest = 0.0f64;
    for &(u, w) in &pts {
        let z = cross_point(&att, u, w).unwrap();
        worst_resid = worst_resid.max(on_geodesic_residual(u, w, z));
        let t = return_time(&att, u, w).unwrap();
        total += t;
        shortest = shortest.min(t);
        longest = longest.max(t);
    }
    println!(
        "10000 measure-distributed points: base points on their geodesics to {worst_resid:.2e}"
    );
    println!(
        "return times: mean {:.6}, min {:.4}, max {:.4}",
        total / pts.len() as f64,
        shortest,
        longest
    );

    let (z, psi) = tangent_data(&att, pts[0].0, pts[0].1).unwrap();
    println!(
        "first sample: crossing at ({:.4}, {:.4}), direction {:.4} rad",
        z.re, z.im, psi
    );
}
