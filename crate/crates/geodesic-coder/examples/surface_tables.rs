//! Print the fundamental polygon data for a few genera: vertex directions,
//! isometric-arc endpoints, side pairing, and the index maps that drive
//! everything else.

use geodesic_coder::surface::Surface;

fn main() {
    for genus in [2usize, 3] {
        let s = Surface::build(genus).unwrap();
        println!("genus {genus}: {} sides, circumradius {:.6}", s.n, s.circumradius);
        println!(
            "  side circles at distance {:.6}, radius {:.6}; vertex radius {:.6}",
            s.side_center_dist, s.side_radius, s.vertex_radius
        );
        println!("  relation error {:.2e}", s.relation_error());
        println!("   i     V_i       P_i       Q_i      sigma rho theta tau");
        for i in 1..=s.n {
            println!(
                "  {i:2}  {:8.5}  {:8.5}  {:8.5}   {:3} {:3} {:4} {:4}",
                s.vertex_angle(i),
                s.p(i),
                s.q(i),
                s.sigma(i),
                s.rho(i),
                s.theta(i),
                s.tau(i)
            );
        }
        println!();
    }
}
