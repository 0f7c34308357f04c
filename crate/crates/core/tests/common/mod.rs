//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nemoloc::instance::{Instance, Solution};
use nemoloc::numerics::{LinearProgram, Relation};
use nemoloc::objectives::Sense;
use nemoloc::preference::{ChoquetModel, PreferenceStore, Verdict};
use rand::Rng;

// ---------------------------------------------------------------- LP

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleLp {
    Infeasible,
    Unbounded,
    Optimal(f64),
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (x, y) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                        *x -= f * y;
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn boxed_best(lp: &LinearProgram, big: f64) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = lp.constraints.iter().map(|c| (c.coeffs.clone(), c.rhs)).collect();
    let mut boxed = lp.bounds.clone();
    for (i, (lo, hi)) in boxed.iter_mut().enumerate() {
        if !lo.is_finite() {
            *lo = -big;
        }
        if !hi.is_finite() {
            *hi = big;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        planes.push((e.clone(), *lo));
        planes.push((e, *hi));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-7 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        lp.constraints.iter().all(|c| {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs + tol,
                Relation::Ge => lhs >= c.rhs - tol,
                Relation::Eq => (lhs - c.rhs).abs() <= tol,
            }
        }) && x.iter().zip(&boxed).all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol)
    };
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn rec(
        start: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        planes: &[(Vec<f64>, f64)],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if depth == pick.len() {
            visit(pick);
            return;
        }
        for k in start..planes.len() {
            pick[depth] = k;
            rec(k + 1, depth + 1, pick, planes, visit);
        }
    }
    rec(0, 0, &mut pick, &planes, &mut |sel| {
        let a: Vec<Vec<f64>> = sel.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = sel.iter().map(|&k| planes[k].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(v, |bv: f64| bv.max(v)));
            }
        }
    });
    best
}

/// Vertex enumeration inside two nested big boxes: no vertex means
/// infeasible, a value that grows with the box means unbounded.
pub fn lp_vertex_oracle(lp: &LinearProgram) -> OracleLp {
    match (boxed_best(lp, 1e4), boxed_best(lp, 1e5)) {
        (None, _) | (_, None) => OracleLp::Infeasible,
        (Some(a), Some(b)) if (b - a).abs() > 1e-6 * (1.0 + a.abs()) => OracleLp::Unbounded,
        (Some(a), _) => OracleLp::Optimal(a),
    }
}

pub fn random_lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let n = rng.random_range(1..=4);
    let rows = rng.random_range(1..=6);
    let objective = (0..n).map(|_| rng.random_range(-4..=4) as f64).collect();
    let mut lp = LinearProgram::new(objective);
    for _ in 0..rows {
        let coeffs = (0..n).map(|_| rng.random_range(-4..=4) as f64).collect();
        let rel = match rng.random_range(0..20) {
            0..=8 => Relation::Le,
            9..=15 => Relation::Ge,
            _ => Relation::Eq,
        };
        lp.add_constraint(coeffs, rel, rng.random_range(-3..=8) as f64);
    }
    for i in 0..n {
        match rng.random_range(0..20) {
            0..=2 => {
                let lo = rng.random_range(-5..=2) as f64;
                lp.set_bounds(i, lo, lo + rng.random_range(0..=6) as f64);
            }
            3..=5 => lp.set_bounds(i, f64::NEG_INFINITY, f64::INFINITY),
            _ => {}
        }
    }
    lp
}

// ---------------------------------------------------------------- linear compatibility

/// Brute-force search over the weight simplex at step 0.01.
pub fn grid_linear_compatible(store: &PreferenceStore, n: usize) -> bool {
    let steps = 100usize;
    let mut w = vec![0usize; n];
    fn rec(k: usize, left: usize, w: &mut Vec<usize>, test: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if k + 1 == w.len() {
            w[k] = left;
            return test(w);
        }
        for v in 0..=left {
            w[k] = v;
            if rec(k + 1, left - v, w, test) {
                return true;
            }
        }
        false
    }
    rec(0, steps, &mut w, &mut |w| {
        let weights: Vec<f64> = w.iter().map(|&v| v as f64 / steps as f64).collect();
        store.active().all(|c| {
            let d: f64 = weights.iter().zip(c.left_vec.iter().zip(&c.right_vec)).map(|(w, (l, r))| w * (l - r)).sum();
            match c.verdict {
                Verdict::Left => d > 1e-9,
                Verdict::Right => d < -1e-9,
                Verdict::Indifferent => d.abs() <= 1e-9,
            }
        })
    })
}

fn grid_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0..=4) as f64 / 4.0).collect()
}

/// Up to four comparisons on a coarse grid; at most one indifference,
/// always between a vector and a copy with two coordinates swapped (it then
/// pins two weights equal, which the grid can represent).
pub fn random_store<R: Rng>(rng: &mut R, n: usize) -> PreferenceStore {
    let mut store = PreferenceStore::new();
    let count = rng.random_range(1..=4);
    let mut used_indifference = false;
    let mut id = 1;
    while store.len() < count {
        let left = grid_vector(rng, n);
        let (right, verdict) = if !used_indifference && rng.random_bool(0.2) {
            let mut r = left.clone();
            let i = rng.random_range(0..n);
            let j = (i + 1 + rng.random_range(0..n - 1)) % n;
            r.swap(i, j);
            used_indifference = true;
            (r, Verdict::Indifferent)
        } else {
            let v = if rng.random_bool(0.5) { Verdict::Left } else { Verdict::Right };
            (grid_vector(rng, n), v)
        };
        if left == right && verdict != Verdict::Indifferent {
            continue;
        }
        let a = Solution::new(vec![id], 1000).unwrap();
        let b = Solution::new(vec![id + 1], 1000).unwrap();
        id += 2;
        store.push(a, b, verdict, left, right).unwrap();
    }
    store
}

// ---------------------------------------------------------------- sorting

fn dominates(a: &[f64], b: &[f64], orientation: &[Sense]) -> bool {
    let better_eq = a.iter().zip(b).zip(orientation).all(|((x, y), s)| match s {
        Sense::Min => x <= y,
        Sense::Max => x >= y,
    });
    better_eq && a != b
}

/// Front number (1-based) of every point by repeated peeling.
pub fn brute_fronts(points: &[Vec<f64>], orientation: &[Sense]) -> Vec<usize> {
    let mut front = vec![0usize; points.len()];
    let mut level = 1;
    while front.contains(&0) {
        let current: Vec<usize> = (0..points.len())
            .filter(|&i| front[i] == 0)
            .filter(|&i| !(0..points.len()).any(|j| front[j] == 0 && dominates(&points[j], &points[i], orientation)))
            .collect();
        for i in current {
            front[i] = level;
        }
        level += 1;
    }
    front
}

/// Crowding distance from neighbour definitions: for each objective the
/// lower neighbour of `i` is the largest `(value, index)` below `(v_i, i)`.
pub fn brute_crowding(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let k_count = front[0].len();
    (0..n)
        .map(|i| {
            let mut d = 0.0;
            for k in 0..k_count {
                let key = |j: usize| (front[j][k], j);
                let lt = |a: (f64, usize), b: (f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
                let lo = (0..n).filter(|&j| lt(key(j), key(i))).max_by(|&a, &b| {
                    if lt(key(a), key(b)) {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Greater
                    }
                });
                let hi = (0..n).filter(|&j| lt(key(i), key(j))).min_by(|&a, &b| {
                    if lt(key(a), key(b)) {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Greater
                    }
                });
                let vals: Vec<f64> = front.iter().map(|p| p[k]).collect();
                let range = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - vals.iter().cloned().fold(f64::INFINITY, f64::min);
                if range <= 0.0 {
                    continue;
                }
                match (lo, hi) {
                    (Some(a), Some(b)) => d += (front[b][k] - front[a][k]) / range,
                    _ => d = f64::INFINITY,
                }
            }
            d
        })
        .collect()
}

// ---------------------------------------------------------------- Choquet

/// A random valid 2-additive model, with interaction terms of both signs.
pub fn random_choquet<R: Rng>(rng: &mut R, n: usize) -> ChoquetModel {
    loop {
        let z: Vec<f64> = ChoquetModel::param_box(n)
            .iter()
            .map(|(lo, hi)| rng.random_range(*lo..=*hi))
            .collect();
        if let Some(m) = ChoquetModel::from_params(&z, n) {
            return m;
        }
    }
}

// ---------------------------------------------------------------- repair

/// Rule trace computed from a full table of subset verdicts: `table(mask)`
/// says whether activating exactly the comparisons in `mask` (bit `k` =
/// comparison `k`, oldest first) is compatible.
pub fn repair_trace(count: usize, table: &dyn Fn(usize) -> bool) -> usize {
    let mut active = (1usize << count) - 1;
    let mut removed = Vec::new();
    let mut k = 0;
    while !table(active) && k < count {
        active &= !(1 << k);
        removed.push(k);
        k += 1;
    }
    for &k in removed.iter().rev() {
        if table(active | (1 << k)) {
            active |= 1 << k;
        }
    }
    active
}

// ---------------------------------------------------------------- instances

/// Three demand points at (0,0), (2,0), (0,2), population 1 each; sites at
/// (0,0) and (2,0).
pub fn tiny_instance() -> Instance {
    Instance::from_json(
        r#"{"demand":[{"id":1,"x":0,"y":0,"pop":1},{"id":2,"x":2,"y":0,"pop":1},{"id":3,"x":0,"y":2,"pop":1}],
            "sites":[{"id":1,"x":0,"y":0},{"id":2,"x":2,"y":0}],"s1":1,"s2":2.5}"#,
    )
    .unwrap()
}
