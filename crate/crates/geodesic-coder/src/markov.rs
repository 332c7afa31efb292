//! Markov structure of the attractor: whether the partition endpoints map
//! into the cut set, the cell-to-cell transition graph, its mixing
//! properties, and a labeled presentation of the induced subshift.

use serde::Serialize;

use crate::boundary::Attractor;
use crate::moebius::{arc_overlap, cdist, fwd_len, TWO_PI};

/// Pass threshold for endpoint alignment and cell-boundary coverage.
pub const MARKOV_TOL: f64 = 1e-9;

/// Forward arc length that treats wrap-around noise at a shared endpoint
/// as zero.
fn fwdt(a: f64, b: f64) -> f64 {
    let l = fwd_len(a, b);
    if l > TWO_PI - 1e-7 {
        0.0
    } else {
        l
    }
}

/// Forward arc `[x_lo, x_hi]` contained in `[y_lo, y_hi]`, endpoints
/// allowed to coincide within `tol`.
fn arc_contained(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, tol: f64) -> bool {
    let ly = fwd_len(y_lo, y_hi);
    let p = fwdt(y_lo, x_lo);
    let q = fwdt(y_lo, x_hi);
    p <= ly + tol && q <= ly + tol && p <= q + tol
}

/// Worst distance from `U_i^{-1} A_i` to the cut set of the attractor
/// (all rectangle `w`-boundaries). The partition is Markov exactly when
/// this vanishes.
pub fn endpoint_alignment(att: &Attractor) -> f64 {
    let s = att.surface();
    let mut cuts = Vec::with_capacity(2 * att.rects().len());
    for r in att.rects() {
        cuts.push(r.w_lo);
        cuts.push(r.w_hi);
    }
    let mut worst = 0.0f64;
    for i in 1..=s.n {
        let x = s.u_map(i).inverse().apply_angle(att.partition().point(i));
        let best = cuts
            .iter()
            .map(|&c| cdist(x, c))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}

/// Cell-to-cell transitions: an edge when the image of a cell crosses the
/// target fully in `w` with its `u`-range nested. Partial `w`-coverage
/// and non-nested `u`-ranges are returned as violations.
pub fn transition_structure(
    att: &Attractor,
    tol: f64,
) -> (Vec<(usize, usize)>, Vec<String>) {
    let s = att.surface();
    let rects = att.rects();
    let mut edges = Vec::new();
    let mut violations = Vec::new();
    for (ai, a) in rects.iter().enumerate() {
        let t = s.t(a.strip);
        let iu_lo = t.apply_angle(a.u_lo);
        let iu_hi = t.apply_angle(a.u_hi);
        let iw_lo = t.apply_angle(a.w_lo);
        let iw_hi = t.apply_angle(a.w_hi);
        for (bi, b) in rects.iter().enumerate() {
            if arc_contained(b.w_lo, b.w_hi, iw_lo, iw_hi, tol) {
                edges.push((ai, bi));
                if !arc_contained(iu_lo, iu_hi, b.u_lo, b.u_hi, tol) {
                    violations.push(format!(
                        "edge {ai}->{bi}: image u-range not nested in target"
                    ));
                }
            } else {
                let ov = arc_overlap(iw_lo, fwd_len(iw_lo, iw_hi), b.w_lo, b.w_len());
                if ov > tol && ov < b.w_len() - tol {
                    violations.push(format!(
                        "{ai}->{bi}: partial w-coverage, overlap {ov:.3e}"
                    ));
                }
            }
        }
    }
    (edges, violations)
}

fn neighbor_lists(n: usize, edges: &[(usize, usize)], reversed: bool) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if reversed {
            adj[b].push(a);
        } else {
            adj[a].push(b);
        }
    }
    adj
}

fn bfs_levels(n: usize, adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; n];
    level[start] = Some(0);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if level[y].is_none() {
                level[y] = Some(level[x].unwrap() + 1);
                queue.push_back(y);
            }
        }
    }
    level
}

pub fn is_irreducible(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    let fwd = bfs_levels(n, &neighbor_lists(n, edges, false), 0);
    let bwd = bfs_levels(n, &neighbor_lists(n, edges, true), 0);
    (0..n).all(|k| fwd[k].is_some() && bwd[k].is_some())
}

/// Period of a strongly connected graph: gcd of `level(a) + 1 - level(b)`
/// over edges, with BFS levels from any node. Aperiodic means period one.
pub fn graph_period(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    if !is_irreducible(n, edges) {
        return None;
    }
    let level = bfs_levels(n, &neighbor_lists(n, edges, false), 0);
    let mut g: i64 = 0;
    let gcd = |mut a: i64, mut b: i64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    };
    for &(a, b) in edges {
        let d = level[a].unwrap() as i64 + 1 - level[b].unwrap() as i64;
        g = gcd(g, d);
    }
    if g == 0 {
        None
    } else {
        Some(g as usize)
    }
}

/// Spectral radius of the adjacency matrix by power iteration.
pub fn perron_value(n: usize, edges: &[(usize, usize)]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let adj = neighbor_lists(n, edges, false);
    let mut v = vec![1.0f64 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mut w = vec![0.0f64; n];
        for a in 0..n {
            for &b in &adj[a] {
                w[b] += v[a];
            }
        }
        let s: f64 = w.iter().sum();
        if s <= 0.0 {
            return 0.0;
        }
        lambda = s;
        for x in &mut w {
            *x /= s;
        }
        v = w;
    }
    lambda
}

/// Residuals of the index identities satisfied by the cut points: each
/// `T_i` carries `A_i, A_{i+1}, B_i, C_i` to cut points again, with
/// explicit targets. Large residuals indicate a broken table, not a
/// non-Markov partition.
pub fn image_identity_error(att: &Attractor) -> f64 {
    let s = att.surface();
    let part = att.partition();
    let mut worst = 0.0f64;
    for i in 1..=s.n {
        let t = s.t(i);
        let si = s.sigma(i);
        let m = s.tau(si);
        let mp1 = s.cyc(m as i64 + 1);
        let pairs = [
            (t.apply_angle(part.point(i)), att.b(s.cyc(si as i64 + 1))),
            (
                t.apply_angle(part.point(s.cyc(i as i64 + 1))),
                att.c(s.cyc(si as i64 - 1)),
            ),
            (
                t.apply_angle(att.c(i)),
                s.u_map(m).inverse().apply_angle(part.point(m)),
            ),
            (
                t.apply_angle(att.b(i)),
                s.u_map(mp1).inverse().apply_angle(part.point(mp1)),
            ),
        ];
        for (x, y) in pairs {
            worst = worst.max(cdist(x, y));
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovReport {
    pub partition: String,
    pub states: usize,
    /// Generator digit emitted from each state: `sigma` of its strip.
    pub labels: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub endpoint_worst: f64,
    pub violations: Vec<String>,
    pub markov: bool,
    pub irreducible: bool,
    pub aperiodic: bool,
    pub perron_value: f64,
}

pub fn markov_report(att: &Attractor) -> MarkovReport {
    let s = att.surface();
    let n = att.rects().len();
    let labels: Vec<usize> = att.rects().iter().map(|r| s.sigma(r.strip)).collect();
    let endpoint_worst = endpoint_alignment(att);
    let (edges, violations) = transition_structure(att, MARKOV_TOL);
    let irreducible = is_irreducible(n, &edges);
    let aperiodic = graph_period(n, &edges) == Some(1);
    let perron = perron_value(n, &edges);
    MarkovReport {
        partition: att.partition().kind.to_string(),
        states: n,
        labels,
        edges,
        endpoint_worst,
        markov: endpoint_worst < MARKOV_TOL && violations.is_empty(),
        violations,
        irreducible,
        aperiodic,
        perron_value: perron,
    }
}

/// Graphviz rendering of the transition graph; nodes carry `state:strip`,
/// edges the digit emitted by the source state.
pub fn report_to_dot(att: &Attractor, report: &MarkovReport) -> String {
    let mut out = String::from("digraph boundary_map {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (k, r) in att.rects().iter().enumerate() {
        out.push_str(&format!("  r{k} [label=\"{k}:{}\"];\n", r.strip));
    }
    for &(a, b) in &report.edges {
        out.push_str(&format!("  r{a} -> r{b} [label=\"{}\"];\n", report.labels[a]));
    }
    out.push_str("}\n");
    out
}
