//! Partitions of the boundary circle, the piecewise boundary map they
//! induce, its two-sided natural extension, and the attractor domain on
//! which that extension is a bijection.
//!
//! A partition picks one point `A_i` in each arc `[P_i, Q_i]`; the boundary
//! map applies `T_i` on the strip `[A_i, A_{i+1})`. When every `A_i` lies in
//! the narrower window given by [`short_cycle_interval`], the forward orbit
//! of every partition point closes up after two steps, and the attractor of
//! the natural extension is a finite union of rectangles with corners at
//! the points `A`, `B_i = T_{sigma(i-1)} A_{sigma(i-1)}`, and
//! `C_i = T_{sigma(i+1)} A_{sigma(i+1)+1}`. Partitions placed at the arc
//! endpoints `P`/`Q` fall outside every window, but their attractors are
//! still finite rectangle unions, now with corners on the `P`/`Q` lattice;
//! those are found numerically and certified exactly.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::moebius::{cdist, circle_point, fwd_len, in_fwd, wrap, Geodesic, MoebiusMap, TWO_PI};
use crate::surface::Surface;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionKind {
    Midpoints,
    /// `A_i` is the attracting fixed point of `U_i U_{i+1} ... U_{i+n-1}`.
    ProductFixedPoints,
    /// Midpoints on odd strips, `U_i(M_{i+1})` on even ones; this makes
    /// `B_i = C_i` on even strips and shrinks the attractor cell count.
    Mixed,
    /// `A_i = P_i` or `Q_i` following the pattern string cyclically.
    EndpointPattern(String),
    Custom,
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionKind::Midpoints => write!(f, "midpoints"),
            PartitionKind::ProductFixedPoints => write!(f, "product-fixed-points"),
            PartitionKind::Mixed => write!(f, "mixed"),
            PartitionKind::EndpointPattern(p) => write!(f, "endpoints-{p}"),
            PartitionKind::Custom => write!(f, "custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Partition {
    pub kind: PartitionKind,
    points: Vec<f64>,
    /// Forward offsets of every point from `A_1`, strictly increasing.
    offs: Vec<f64>,
}

impl Partition {
    fn assemble(kind: PartitionKind, points: Vec<f64>) -> Result<Partition> {
        let mut offs = vec![0.0];
        for k in 1..points.len() {
            offs.push(fwd_len(points[0], points[k]));
        }
        for k in 1..offs.len() {
            if offs[k] <= offs[k - 1] {
                return Err(Error::InvalidPattern(format!(
                    "partition points not in cyclic order at index {}",
                    k + 1
                )));
            }
        }
        Ok(Partition { kind, points, offs })
    }

    pub fn midpoints(s: &Surface) -> Partition {
        let points = (1..=s.n).map(|i| s.midpoint(i)).collect();
        Partition::assemble(PartitionKind::Midpoints, points).expect("midpoints are ordered")
    }

    pub fn product_fixed_points(s: &Surface) -> Result<Partition> {
        let mut points = Vec::with_capacity(s.n);
        for i in 1..=s.n {
            let mut m = MoebiusMap::identity();
            for k in 0..s.n {
                m = m.compose(&s.u_map(s.cyc((i + k) as i64)));
            }
            let fp = m.fixed_points().map_err(|_| Error::FixedPointNotInInterval(i))?;
            points.push(fp.attracting);
        }
        Partition::assemble(PartitionKind::ProductFixedPoints, points)
    }

    pub fn mixed(s: &Surface) -> Result<Partition> {
        let points = (1..=s.n)
            .map(|i| {
                if i % 2 == 1 {
                    s.midpoint(i)
                } else {
                    s.u_map(i).apply_angle(s.midpoint(s.cyc(i as i64 + 1)))
                }
            })
            .collect();
        Partition::assemble(PartitionKind::Mixed, points)
    }

    pub fn endpoint_pattern(s: &Surface, pattern: &str) -> Result<Partition> {
        if pattern.is_empty() || !pattern.chars().all(|c| c == 'P' || c == 'Q') {
            return Err(Error::InvalidPattern(format!(
                "pattern must be a nonempty string over P and Q, got {pattern:?}"
            )));
        }
        let chars: Vec<char> = pattern.chars().collect();
        let points = (1..=s.n)
            .map(|i| {
                if chars[(i - 1) % chars.len()] == 'P' {
                    s.p(i)
                } else {
                    s.q(i)
                }
            })
            .collect();
        Partition::assemble(PartitionKind::EndpointPattern(pattern.to_string()), points)
    }

    /// Arbitrary points, one per strip; each must lie in the closed arc
    /// `[P_i, Q_i]`.
    pub fn custom(s: &Surface, points: &[f64]) -> Result<Partition> {
        if points.len() != s.n {
            return Err(Error::InvalidPattern(format!(
                "expected {} points, got {}",
                s.n,
                points.len()
            )));
        }
        let tol = crate::angular_tolerance();
        let pts: Vec<f64> = points.iter().map(|&x| wrap(x)).collect();
        for (k, &x) in pts.iter().enumerate() {
            let i = k + 1;
            if fwd_len(s.p(i), x) > fwd_len(s.p(i), s.q(i)) + tol {
                return Err(Error::InvalidPattern(format!(
                    "A_{i} = {x:.6} outside [P_{i}, Q_{i}]"
                )));
            }
        }
        Partition::assemble(PartitionKind::Custom, pts)
    }

    /// Parse a partition description as used by the command line:
    /// `midpoints`, `product-fixed-points`, `mixed`, `endpoints-<pattern>`,
    /// or `custom` (which requires the point list).
    pub fn from_spec(s: &Surface, spec: &str, custom_points: Option<&[f64]>) -> Result<Partition> {
        match spec {
            "midpoints" => Ok(Partition::midpoints(s)),
            "product-fixed-points" => Partition::product_fixed_points(s),
            "mixed" => Partition::mixed(s),
            "custom" => {
                let pts = custom_points.ok_or_else(|| {
                    Error::InvalidPattern("custom partition needs explicit points".into())
                })?;
                Partition::custom(s, pts)
            }
            _ => match spec
                .strip_prefix("endpoints-")
                .or_else(|| spec.strip_prefix("endpoints:"))
            {
                Some(pat) => Partition::endpoint_pattern(s, pat),
                None => Err(Error::InvalidPattern(format!("unknown partition kind {spec:?}"))),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The point `A_i` (1-based).
    pub fn point(&self, i: usize) -> f64 {
        self.points[i - 1]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Index of the strip `[A_i, A_{i+1})` containing `w` (left closed).
    pub fn strip_of(&self, w: f64) -> usize {
        let x = fwd_len(self.points[0], w);
        self.offs.partition_point(|&o| o <= x).max(1)
    }
}

/// The window `[b_i, a_i]` of admissible positions for `A_i`: with every
/// partition point inside its window, the orbit of each `A_i` under the
/// boundary map lands on another partition point after two steps, which is
/// what closes the attractor into finitely many rectangles. The endpoints
/// are `b_i = T_{sigma(i-1)} Q_{theta(i-1)}` and `a_i = T_{sigma(i)}
/// P_{rho(i)+1}`.
pub fn short_cycle_interval(s: &Surface, i: usize) -> (f64, f64) {
    let a = s
        .t(s.sigma(i))
        .apply_angle(s.p(s.cyc(s.rho(i) as i64 + 1)));
    let im1 = s.cyc(i as i64 - 1);
    let b = s.t(s.sigma(im1)).apply_angle(s.q(s.theta(im1)));
    (b, a)
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleCheck {
    pub index: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub point: f64,
    pub admissible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleReport {
    pub checks: Vec<CycleCheck>,
    pub all_admissible: bool,
}

/// Check every partition point against its admissibility window.
pub fn cycle_report(s: &Surface, part: &Partition) -> CycleReport {
    let tol = crate::angular_tolerance();
    let checks: Vec<CycleCheck> = (1..=s.n)
        .map(|i| {
            let (b, a) = short_cycle_interval(s, i);
            let x = part.point(i);
            let admissible = fwd_len(b, x) <= fwd_len(b, a) + tol;
            CycleCheck { index: i, window_lo: b, window_hi: a, point: x, admissible }
        })
        .collect();
    let all = checks.iter().all(|c| c.admissible);
    CycleReport { checks, all_admissible: all }
}

/// One application of the boundary map: the strip index `i` of `w` and the
/// image `T_i(w)`. The arithmetic digit emitted by this step is `sigma(i)`.
pub fn boundary_step(s: &Surface, part: &Partition, w: f64) -> (usize, f64) {
    let i = part.strip_of(w);
    (i, s.t(i).apply_angle(w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    NumericLattice,
}

/// An axis-parallel rectangle on the torus: `u` in the forward arc
/// `[u_lo, u_hi]`, `w` in `[w_lo, w_hi]`, attached to the strip of its
/// `w`-arc.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Rect {
    pub strip: usize,
    pub u_lo: f64,
    pub u_hi: f64,
    pub w_lo: f64,
    pub w_hi: f64,
}

impl Rect {
    pub fn u_len(&self) -> f64 {
        fwd_len(self.u_lo, self.u_hi)
    }

    pub fn w_len(&self) -> f64 {
        fwd_len(self.w_lo, self.w_hi)
    }

    pub fn area(&self) -> f64 {
        self.u_len() * self.w_len()
    }
}

#[derive(Clone, Debug)]
pub struct Attractor {
    surface: Surface,
    partition: Partition,
    pub provenance: Provenance,
    b: Vec<f64>,
    c: Vec<f64>,
    rects: Vec<Rect>,
    /// `rects[strip_start[i-1]..strip_start[i]]` are the cells of strip `i`,
    /// ordered by their offset within the strip.
    strip_start: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct InverseHit {
    pub margin: f64,
    pub branch: usize,
    pub u: f64,
    pub w: f64,
}

#[derive(Clone, Debug)]
pub struct ReduceOutcome {
    pub geodesic: Geodesic,
    pub steps: usize,
    /// Branch strips applied, in order; the reducing word is
    /// `T_{strips[last]} ... T_{strips[0]}`.
    pub strips: Vec<usize>,
}

fn bc_points(s: &Surface, part: &Partition) -> (Vec<f64>, Vec<f64>) {
    let mut b = Vec::with_capacity(s.n);
    let mut c = Vec::with_capacity(s.n);
    for i in 1..=s.n {
        let im1 = s.cyc(i as i64 - 1);
        let ip1 = s.cyc(i as i64 + 1);
        let jb = s.sigma(im1);
        b.push(s.t(jb).apply_angle(part.point(jb)));
        let jc = s.sigma(ip1);
        c.push(s.t(jc).apply_angle(part.point(s.cyc(jc as i64 + 1))));
    }
    (b, c)
}

fn index_by_strip(n: usize, rects: &[Rect]) -> Vec<usize> {
    let mut start = vec![0usize; n + 1];
    for r in rects {
        start[r.strip] += 1;
    }
    for i in 1..=n {
        start[i] += start[i - 1];
    }
    start
}

impl Attractor {
    /// Dispatch on the partition kind: endpoint patterns go through the
    /// numeric lattice search, everything else through the closed form.
    pub fn build(s: &Surface, part: &Partition) -> Result<Attractor> {
        match part.kind {
            PartitionKind::EndpointPattern(_) => {
                Attractor::numeric_lattice(s, part, 120_000, 110, 31)
            }
            _ => Attractor::closed_form(s, part),
        }
    }

    /// Attractor of a short-cycle partition, directly from the two-step
    /// orbit closure: per strip the rectangle heights cut at `B_i` and
    /// `C_i`, with `u` spanning `[Q_{i+1} or Q_{i+2}, P_{i-1} or P_i]`.
    pub fn closed_form(s: &Surface, part: &Partition) -> Result<Attractor> {
        if part.len() != s.n {
            return Err(Error::InvalidPattern("partition size mismatch".into()));
        }
        let (b, c) = bc_points(s, part);
        let mut rects = Vec::new();
        for i in 1..=s.n {
            let a0 = part.point(i);
            let a1 = part.point(s.cyc(i as i64 + 1));
            let span = fwd_len(a0, a1);
            let mut cuts: Vec<f64> = [b[i - 1], c[i - 1]]
                .into_iter()
                .map(|x| fwd_len(a0, x))
                .filter(|&t| t > 0.0 && t < span)
                .collect();
            cuts.sort_by(f64::total_cmp);
            let mut ws = vec![0.0];
            for t in cuts {
                if t - ws.last().unwrap() > 1e-12 {
                    ws.push(t);
                }
            }
            if span - ws.last().unwrap() > 1e-12 {
                ws.push(span);
            } else {
                *ws.last_mut().unwrap() = span;
            }
            for k in 0..ws.len() - 1 {
                let wm = wrap(a0 + (ws[k] + ws[k + 1]) / 2.0);
                let lo = if in_fwd(a0, c[i - 1], wm, true, false) {
                    s.q(s.cyc(i as i64 + 1))
                } else {
                    s.q(s.cyc(i as i64 + 2))
                };
                let hi = if in_fwd(a0, b[i - 1], wm, true, false) {
                    s.p(s.cyc(i as i64 - 1))
                } else {
                    s.p(i)
                };
                rects.push(Rect {
                    strip: i,
                    u_lo: lo,
                    u_hi: hi,
                    w_lo: wrap(a0 + ws[k]),
                    w_hi: wrap(a0 + ws[k + 1]),
                });
            }
        }
        let strip_start = index_by_strip(s.n, &rects);
        Ok(Attractor {
            surface: s.clone(),
            partition: part.clone(),
            provenance: Provenance::ClosedForm,
            b,
            c,
            rects,
            strip_start,
        })
    }

    /// Attractor of an endpoint-pattern partition: iterate a random cloud
    /// under the natural extension, read off one rectangle per strip and
    /// lattice `w`-cell with `u`-ends snapped to the `P`/`Q` lattice, then
    /// certify that the rectangle union maps onto itself exactly.
    pub fn numeric_lattice(
        s: &Surface,
        part: &Partition,
        n_points: usize,
        iters: usize,
        seed: u64,
    ) -> Result<Attractor> {
        let lat = lattice_points(s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut us = Vec::with_capacity(n_points);
        let mut vs = Vec::with_capacity(n_points);
        while us.len() < n_points {
            let u = rng.random::<f64>() * TWO_PI;
            let w = rng.random::<f64>() * TWO_PI;
            if cdist(u, w) > 0.1 {
                us.push(u);
                vs.push(w);
            }
        }
        let maps: Vec<MoebiusMap> = (1..=s.n).map(|i| s.t(i)).collect();
        for _ in 0..iters {
            for k in 0..us.len() {
                let i = part.strip_of(vs[k]);
                let t = &maps[i - 1];
                us[k] = t.apply_angle(us[k]);
                vs[k] = t.apply_angle(vs[k]);
            }
        }

        let mut rects = Vec::new();
        for i in 1..=s.n {
            let a0 = part.point(i);
            let a1 = part.point(s.cyc(i as i64 + 1));
            let span = fwd_len(a0, a1);
            let mut cuts: Vec<f64> = lat
                .iter()
                .map(|&x| fwd_len(a0, x))
                .filter(|&t| t > 1e-12 && t < span - 1e-12)
                .collect();
            cuts.sort_by(f64::total_cmp);
            let mut offs = vec![0.0];
            offs.extend(cuts);
            offs.push(span);
            let anchor = wrap(a0 + span / 2.0);
            let mut pts: Vec<(f64, f64)> = Vec::new();
            for k in 0..us.len() {
                let wo = fwd_len(a0, vs[k]);
                if wo < span {
                    pts.push((fwd_len(anchor, us[k]), wo));
                }
            }
            for cell in 0..offs.len() - 1 {
                let mut umin = f64::INFINITY;
                let mut umax = f64::NEG_INFINITY;
                let mut count = 0usize;
                for &(uo, wo) in &pts {
                    if wo >= offs[cell] && wo < offs[cell + 1] {
                        count += 1;
                        umin = umin.min(uo);
                        umax = umax.max(uo);
                    }
                }
                if count < 12 {
                    return Err(Error::NoFiniteStructure(format!(
                        "strip {i} cell {cell}: only {count} samples"
                    )));
                }
                let lo = snap_lattice(&lat, wrap(anchor + umin), 0.05)?;
                let hi = snap_lattice(&lat, wrap(anchor + umax), 0.05)?;
                rects.push(Rect {
                    strip: i,
                    u_lo: lo,
                    u_hi: hi,
                    w_lo: wrap(a0 + offs[cell]),
                    w_hi: wrap(a0 + offs[cell + 1]),
                });
            }
        }
        let rects = merge_lattice_cells(rects);
        certify_lattice_invariance(s, &lat, &rects)?;
        let (b, c) = bc_points(s, part);
        let strip_start = index_by_strip(s.n, &rects);
        Ok(Attractor {
            surface: s.clone(),
            partition: part.clone(),
            provenance: Provenance::NumericLattice,
            b,
            c,
            rects,
            strip_start,
        })
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// The cut point `B_i = T_{sigma(i-1)} A_{sigma(i-1)}`.
    pub fn b(&self, i: usize) -> f64 {
        self.b[i - 1]
    }

    /// The cut point `C_i = T_{sigma(i+1)} A_{sigma(i+1)+1}`.
    pub fn c(&self, i: usize) -> f64 {
        self.c[i - 1]
    }

    fn cell_of(&self, w: f64) -> &Rect {
        let i = self.partition.strip_of(w);
        let range = self.strip_start[i - 1]..self.strip_start[i];
        let a0 = self.partition.point(i);
        let x = fwd_len(a0, w);
        let mut best = range.start;
        for k in range {
            if fwd_len(a0, self.rects[k].w_lo) <= x {
                best = k;
            }
        }
        &self.rects[best]
    }

    /// The `u`-interval of the attractor over height `w`.
    pub fn u_range(&self, w: f64) -> (f64, f64) {
        let cell = self.cell_of(w);
        (cell.u_lo, cell.u_hi)
    }

    pub fn contains(&self, u: f64, w: f64, slack: f64) -> bool {
        let cell = self.cell_of(w);
        fwd_len(cell.u_lo, u) <= cell.u_len() + slack
    }

    /// Signed distance from `(u, w)` to the boundary of its cell: positive
    /// inside, negative outside (in `u`).
    pub fn margin(&self, u: f64, w: f64) -> f64 {
        let cell = self.cell_of(w);
        let (lo, hi) = (cell.u_lo, cell.u_hi);
        let mut du = fwd_len(lo, u).min(fwd_len(u, hi));
        if fwd_len(lo, u) > cell.u_len() {
            du = -fwd_len(hi, u).min(fwd_len(u, lo));
        }
        let dw = fwd_len(cell.w_lo, w).min(fwd_len(w, cell.w_hi));
        du.min(dw)
    }

    /// One step of the natural extension: `(u, w) -> (T_i u, T_i w)` with
    /// `i` the strip of `w`.
    pub fn step(&self, u: f64, w: f64) -> (usize, f64, f64) {
        let i = self.partition.strip_of(w);
        let t = self.surface.t(i);
        (i, t.apply_angle(u), t.apply_angle(w))
    }

    /// All backward branches that land in the attractor, best margin first.
    pub fn inverse_candidates(&self, u: f64, w: f64, slack: f64) -> Vec<InverseHit> {
        let s = &self.surface;
        let mut hits = Vec::new();
        for j in 1..=s.n {
            let tinv = s.t(s.sigma(j));
            let u2 = tinv.apply_angle(u);
            let w2 = tinv.apply_angle(w);
            if self.partition.strip_of(w2) == j && self.contains(u2, w2, slack) {
                hits.push(InverseHit { margin: self.margin(u2, w2), branch: j, u: u2, w: w2 });
            }
        }
        hits.sort_by(|p, q| q.margin.total_cmp(&p.margin));
        hits
    }

    /// The unique preimage under the natural extension. Points within
    /// `1e-9` of a cell boundary may admit two branches and are rejected.
    pub fn inverse_step(&self, u: f64, w: f64) -> Result<(usize, f64, f64)> {
        let hits = self.inverse_candidates(u, w, 1e-12);
        match hits.len() {
            0 => Err(Error::NotInAttractor),
            1 => Ok((hits[0].branch, hits[0].u, hits[0].w)),
            _ => {
                if hits[1].margin > 1e-9 {
                    return Err(Error::NumericallySingular(format!(
                        "ambiguous inverse branches {} and {}",
                        hits[0].branch, hits[1].branch
                    )));
                }
                Ok((hits[0].branch, hits[0].u, hits[0].w))
            }
        }
    }

    pub fn is_reduced(&self, g: &Geodesic) -> bool {
        self.contains(g.u, g.w, 0.0)
    }

    /// Drive a geodesic into the attractor by forward steps.
    pub fn reduce(&self, g: &Geodesic, cap: usize) -> Result<ReduceOutcome> {
        let (mut u, mut w) = (g.u, g.w);
        let mut strips = Vec::new();
        for steps in 0..=cap {
            if self.contains(u, w, 0.0) {
                return Ok(ReduceOutcome { geodesic: Geodesic { u, w }, steps, strips });
            }
            if steps == cap {
                break;
            }
            let (i, u2, w2) = self.step(u, w);
            strips.push(i);
            u = u2;
            w = w2;
        }
        Err(Error::MaxStepsExceeded(cap))
    }

    pub fn lebesgue_area(&self) -> f64 {
        self.rects.iter().map(Rect::area).sum()
    }
}

fn lattice_points(s: &Surface) -> Vec<f64> {
    let mut lat: Vec<f64> = (1..=s.n).flat_map(|i| [s.p(i), s.q(i)]).collect();
    lat.sort_by(f64::total_cmp);
    lat
}

fn snap_lattice(lat: &[f64], x: f64, tol: f64) -> Result<f64> {
    let mut best = lat[0];
    let mut bd = cdist(x, best);
    for &v in &lat[1..] {
        let d = cdist(x, v);
        if d < bd {
            bd = d;
            best = v;
        }
    }
    if bd > tol {
        return Err(Error::NoFiniteStructure(format!(
            "no lattice point within {tol:.0e} of {x:.6} (nearest {bd:.3e})"
        )));
    }
    Ok(best)
}

fn merge_lattice_cells(cells: Vec<Rect>) -> Vec<Rect> {
    let mut out: Vec<Rect> = Vec::new();
    for cell in cells {
        if let Some(prev) = out.last_mut() {
            if prev.strip == cell.strip
                && cdist(prev.w_hi, cell.w_lo) < 1e-12
                && cdist(prev.u_lo, cell.u_lo) < 1e-12
                && cdist(prev.u_hi, cell.u_hi) < 1e-12
            {
                prev.w_hi = cell.w_hi;
                continue;
            }
        }
        out.push(cell);
    }
    out
}

/// Cut a rect list along the lattice in both axes; key by the `w`-cell,
/// collect sorted `u`-subintervals (endpoints rounded to 1e-7).
fn refine_on_lattice(
    lat: &[f64],
    list: &[(f64, f64, f64, f64)],
) -> BTreeMap<(i64, i64), Vec<(f64, f64)>> {
    let key = |x: f64| (x * 1e7).round() as i64;
    let rf = |x: f64| (x * 1e7).round() / 1e7;
    let cuts = |base: f64, span: f64| {
        let mut c: Vec<f64> = lat
            .iter()
            .map(|&x| fwd_len(base, x))
            .filter(|&t| t > 1e-12 && t < span - 1e-12)
            .collect();
        c.sort_by(f64::total_cmp);
        let mut offs = vec![0.0];
        offs.extend(c);
        offs.push(span);
        offs
    };
    let mut out: BTreeMap<(i64, i64), Vec<(f64, f64)>> = BTreeMap::new();
    for &(w0, w1, lo, hi) in list {
        let ow = cuts(w0, fwd_len(w0, w1));
        let ou = cuts(lo, fwd_len(lo, hi));
        for k in 0..ow.len() - 1 {
            let entry = out
                .entry((key(wrap(w0 + ow[k])), key(wrap(w0 + ow[k + 1]))))
                .or_default();
            for m in 0..ou.len() - 1 {
                entry.push((rf(wrap(lo + ou[m])), rf(wrap(lo + ou[m + 1]))));
            }
        }
    }
    for v in out.values_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    out
}

/// Certify that the rectangle union maps onto itself exactly under the
/// natural extension: every image endpoint snaps to the lattice, and per
/// lattice `w`-cell the image `u`-subintervals tile the attractor's own
/// `u`-subintervals once each.
fn certify_lattice_invariance(s: &Surface, lat: &[f64], cells: &[Rect]) -> Result<()> {
    let mut pieces = Vec::with_capacity(cells.len());
    for r in cells {
        let t = s.t(r.strip);
        pieces.push((
            snap_lattice(lat, t.apply_angle(r.w_lo), 1e-9)?,
            snap_lattice(lat, t.apply_angle(r.w_hi), 1e-9)?,
            snap_lattice(lat, t.apply_angle(r.u_lo), 1e-9)?,
            snap_lattice(lat, t.apply_angle(r.u_hi), 1e-9)?,
        ));
    }
    let want_list: Vec<(f64, f64, f64, f64)> =
        cells.iter().map(|r| (r.w_lo, r.w_hi, r.u_lo, r.u_hi)).collect();
    let want = refine_on_lattice(lat, &want_list);
    let got = refine_on_lattice(lat, &pieces);
    if want.len() != got.len() || want.keys().ne(got.keys()) {
        return Err(Error::NoFiniteStructure(format!(
            "image w-cells differ ({} vs {})",
            want.len(),
            got.len()
        )));
    }
    for (k, wv) in &want {
        let gv = &got[k];
        if wv.len() != gv.len() {
            return Err(Error::NoFiniteStructure(format!(
                "u-tiling multiplicity at w-cell {k:?}: {} vs {}",
                wv.len(),
                gv.len()
            )));
        }
        for (a, b) in wv.iter().zip(gv) {
            if (a.0 - b.0).abs() > 1e-6 || (a.1 - b.1).abs() > 1e-6 {
                return Err(Error::NoFiniteStructure(format!(
                    "u-subinterval mismatch at w-cell {k:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Grid-based attractor: push the full square forward and keep the cells
/// that stay populated. Stops when the cell set repeats exactly.
#[derive(Clone, Debug)]
pub struct GridAttractor {
    pub n: usize,
    pub alive: Vec<bool>,
    pub passes: usize,
    pub stabilized: bool,
}

impl GridAttractor {
    pub fn cell(&self, iu: usize, iw: usize) -> bool {
        self.alive[iu * self.n + iw]
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&b| b).count()
    }
}

/// Cells map forward as intervals (an outer cover of the true image), so
/// the limit set encloses the attractor and overhangs it by at most a few
/// cells; the interval semantics is what keeps expansion in `w` from
/// skipping rows.
pub fn numeric_grid(s: &Surface, part: &Partition, n: usize, max_passes: usize) -> GridAttractor {
    let step = TWO_PI / n as f64;
    let line = |k: usize| k as f64 * step;
    let cell_idx = |x: f64| ((wrap(x) / step) as usize).min(n - 1);
    // cells intersecting the forward arc [x0, x1]
    let cover = |x0: f64, x1: f64| -> (usize, usize) {
        let j0 = cell_idx(x0);
        let j1 = cell_idx(x1);
        (j0, (j1 + n - j0) % n + 1)
    };
    let mut alive = vec![false; n * n];
    for iu in 0..n {
        let zu = circle_point(line(iu) + 0.5 * step);
        for iw in 0..n {
            let zw = circle_point(line(iw) + 0.5 * step);
            if (zu - zw).norm() > step {
                alive[iu * n + iw] = true;
            }
        }
    }
    // per row: the w-cell split at any partition points inside it, each
    // segment with its own branch map
    let mut row_segments: Vec<Vec<(f64, f64, MoebiusMap)>> = Vec::with_capacity(n);
    for iw in 0..n {
        let (w0, w1) = (line(iw), line(iw + 1));
        let mut cuts = vec![0.0];
        for i in 1..=s.n {
            let off = fwd_len(w0, part.point(i));
            if off > 1e-12 && off < step - 1e-12 {
                cuts.push(off);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.push(step);
        let mut segs = Vec::new();
        for k in 0..cuts.len() - 1 {
            let a = wrap(w0 + cuts[k]);
            let b = if k + 2 == cuts.len() { w1 } else { wrap(w0 + cuts[k + 1]) };
            let i = part.strip_of(wrap(w0 + 0.5 * (cuts[k] + cuts[k + 1])));
            segs.push((a, b, s.t(i)));
        }
        row_segments.push(segs);
    }
    let mut passes = 0;
    let mut stabilized = false;
    while passes < max_passes {
        let mut next = vec![false; n * n];
        for (iw, segs) in row_segments.iter().enumerate() {
            for &(w0, w1, t) in segs {
                let (jw0, wcnt) = cover(t.apply_angle(w0), t.apply_angle(w1));
                for iu in 0..n {
                    if !alive[iu * n + iw] {
                        continue;
                    }
                    let (ju0, ucnt) =
                        cover(t.apply_angle(line(iu)), t.apply_angle(line(iu + 1)));
                    for a in 0..ucnt {
                        let row = ((ju0 + a) % n) * n;
                        for b in 0..wcnt {
                            next[row + (jw0 + b) % n] = true;
                        }
                    }
                }
            }
        }
        passes += 1;
        if next == alive {
            stabilized = true;
            break;
        }
        alive = next;
    }
    GridAttractor { n, alive, passes, stabilized }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn surface2() -> Surface {
        Surface::build(2).unwrap()
    }

    #[test]
    fn strip_lookup_is_left_closed() {
        let s = surface2();
        let part = Partition::midpoints(&s);
        for i in 1..=s.n {
            assert_eq!(part.strip_of(part.point(i)), i);
            assert_eq!(part.strip_of(wrap(part.point(i) - 1e-9)), s.cyc(i as i64 - 1));
        }
    }

    #[test]
    fn product_fixed_points_are_evenly_spaced() {
        let s = surface2();
        let part = Partition::product_fixed_points(&s).unwrap();
        let gap = TWO_PI / s.n as f64;
        for i in 1..=s.n {
            let next = part.point(s.cyc(i as i64 + 1));
            assert!((fwd_len(part.point(i), next) - gap).abs() < 1e-9);
            let pulled = s.u_map(i).inverse().apply_angle(part.point(i));
            assert!(cdist(pulled, next) < 1e-9, "i = {i}");
        }
    }

    #[test]
    fn short_cycle_window_brackets_the_midpoint() {
        for genus in [2, 3] {
            let s = Surface::build(genus).unwrap();
            for i in 1..=s.n {
                let (b, a) = short_cycle_interval(&s, i);
                assert!(in_fwd(b, a, s.midpoint(i), true, true));
                assert!(in_fwd(s.p(i), s.q(i), b, false, false));
                assert!(in_fwd(s.p(i), s.q(i), a, false, false));
                // same points through the corner map: a_i = U_i P_{tau(i)-2},
                // b_i = U_i Q_{tau(i)+2}
                let ui = s.u_map(i);
                let a2 = ui.apply_angle(s.p(s.cyc(s.tau(i) as i64 - 2)));
                let b2 = ui.apply_angle(s.q(s.cyc(s.tau(i) as i64 + 2)));
                assert!(cdist(a, a2) < 1e-9 && cdist(b, b2) < 1e-9);
            }
            let report = cycle_report(&s, &Partition::midpoints(&s));
            assert!(report.all_admissible);
        }
    }

    #[test]
    fn closed_form_cell_counts_and_cut_identities() {
        let s = surface2();
        for (part, want_rects) in [
            (Partition::midpoints(&s), 36),
            (Partition::product_fixed_points(&s).unwrap(), 36),
            (Partition::mixed(&s).unwrap(), 30),
        ] {
            let att = Attractor::closed_form(&s, &part).unwrap();
            assert_eq!(att.rects().len(), want_rects, "{}", part.kind);
            for i in 1..=s.n {
                // B_i strictly between Q_i and A_{i+1}; C_i between A_i and P_{i+1}
                assert!(in_fwd(s.q(i), part.point(s.cyc(i as i64 + 1)), att.b(i), false, false));
                assert!(in_fwd(part.point(i), s.p(s.cyc(i as i64 + 1)), att.c(i), false, false));
                // U_{tau(i)+1} C_i = B_{tau(i)+1}
                let j = s.cyc(s.tau(i) as i64 + 1);
                let img = s.u_map(j).apply_angle(att.c(i));
                assert!(cdist(img, att.b(j)) < 1e-12);
            }
        }
        let mixed = Attractor::closed_form(&s, &Partition::mixed(&s).unwrap()).unwrap();
        for i in (2..=s.n).step_by(2) {
            assert!(cdist(mixed.b(i), mixed.c(i)) < 1e-12, "strip {i}");
        }
    }

    #[test]
    fn forward_and_inverse_steps_roundtrip() {
        let s = surface2();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for part in [Partition::midpoints(&s), Partition::mixed(&s).unwrap()] {
            let att = Attractor::closed_form(&s, &part).unwrap();
            let mut done = 0;
            while done < 200 {
                let k = rng.random_range(0..att.rects().len());
                let r = att.rects()[k];
                let u = wrap(r.u_lo + rng.random::<f64>() * r.u_len());
                let w = wrap(r.w_lo + rng.random::<f64>() * r.w_len());
                if !att.contains(u, w, 0.0) {
                    continue;
                }
                done += 1;
                let (j, u2, w2) = att.step(u, w);
                assert!(att.contains(u2, w2, 1e-10));
                let (jb, ub, wb) = att.inverse_step(u2, w2).unwrap();
                assert_eq!(jb, j);
                assert!(cdist(ub, u) < 1e-12 && cdist(wb, w) < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_map_expands_strip_interiors() {
        let s = surface2();
        let part = Partition::midpoints(&s);
        for i in 1..=s.n {
            let a0 = part.point(i);
            let span = fwd_len(a0, part.point(s.cyc(i as i64 + 1)));
            for f in [0.1, 0.5, 0.9] {
                let w = wrap(a0 + f * span);
                assert!(s.t(i).derivative_modulus(w) > 1.0);
            }
        }
    }

    #[test]
    fn random_geodesics_reduce_quickly_and_stay() {
        let s = surface2();
        let att = Attractor::closed_form(&s, &Partition::midpoints(&s)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst = 0usize;
        for _ in 0..40 {
            let u = rng.random::<f64>() * TWO_PI;
            let w = rng.random::<f64>() * TWO_PI;
            if cdist(u, w) < 0.2 {
                continue;
            }
            let g = Geodesic { u, w };
            let out = att.reduce(&g, 50).unwrap();
            assert!(att.is_reduced(&out.geodesic));
            assert_eq!(out.steps, out.strips.len());
            worst = worst.max(out.steps);
            let (mut u2, mut w2) = (out.geodesic.u, out.geodesic.w);
            for _ in 0..5 {
                let st = att.step(u2, w2);
                u2 = st.1;
                w2 = st.2;
                assert!(att.contains(u2, w2, 1e-10));
            }
        }
        assert!(worst <= 10, "worst entry {worst}");
    }

    #[test]
    fn grid_attractor_agrees_with_closed_form() {
        let s = surface2();
        let part = Partition::midpoints(&s);
        let att = Attractor::closed_form(&s, &part).unwrap();
        let n = 200;
        let grid = numeric_grid(&s, &part, n, 64);
        assert!(grid.stabilized, "no repeat within {} passes", grid.passes);
        let step = TWO_PI / n as f64;
        let mut eroded = 0;
        let mut worst_overhang = 0.0f64;
        for iu in 0..n {
            for iw in 0..n {
                let u = (iu as f64 + 0.5) * step;
                let w = (iw as f64 + 0.5) * step;
                let m = att.margin(u, w);
                if m > 2.5 * step && !grid.cell(iu, iw) {
                    eroded += 1;
                }
                if grid.cell(iu, iw) && m < 0.0 {
                    worst_overhang = worst_overhang.max(-m);
                }
            }
        }
        assert_eq!(eroded, 0, "interior cells lost");
        eprintln!(
            "grid: passes {}, alive area {:.4}, true area {:.4}, worst overhang {:.4} ({:.1} cells)",
            grid.passes,
            grid.alive_count() as f64 * step * step,
            att.lebesgue_area(),
            worst_overhang,
            worst_overhang / step
        );
        let area = grid.alive_count() as f64 * step * step;
        assert!(area >= att.lebesgue_area());
        assert!(area < att.lebesgue_area() * 1.1, "area {area}");
    }

    #[test]
    fn pattern_attractors_snap_to_the_lattice() {
        let s = surface2();
        for (pat, cells) in [("P", 24), ("PQ", 12)] {
            let part = Partition::endpoint_pattern(&s, pat).unwrap();
            let att = Attractor::numeric_lattice(&s, &part, 60_000, 90, 31).unwrap();
            assert_eq!(att.rects().len(), cells, "pattern {pat}");
            assert_eq!(att.provenance, Provenance::NumericLattice);
            assert!((att.lebesgue_area() - 30.060314078).abs() < 1e-6);
        }
    }

    #[test]
    fn custom_partition_validation() {
        let s = surface2();
        let mut pts: Vec<f64> = (1..=s.n).map(|i| s.midpoint(i)).collect();
        assert!(Partition::custom(&s, &pts).is_ok());
        pts[3] = wrap(s.q(4) + 0.05);
        assert!(Partition::custom(&s, &pts).is_err());
    }

    #[test]
    fn partition_spec_parsing() {
        let s = surface2();
        assert_eq!(
            Partition::from_spec(&s, "midpoints", None).unwrap().kind,
            PartitionKind::Midpoints
        );
        assert_eq!(
            Partition::from_spec(&s, "endpoints-PPQQ", None).unwrap().kind,
            PartitionKind::EndpointPattern("PPQQ".into())
        );
        assert!(Partition::from_spec(&s, "endpoints-PX", None).is_err());
        assert!(Partition::from_spec(&s, "custom", None).is_err());
    }
}
