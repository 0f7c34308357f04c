use crate::objectives::Sense;

/// Pareto dominance under per-objective orientation.
pub fn dominates_with(a: &[f64], b: &[f64], orientation: &[Sense]) -> bool {
    let mut strictly = false;
    for ((x, y), s) in a.iter().zip(b).zip(orientation) {
        let (x, y) = if s.is_minimized() { (*x, *y) } else { (-x, -y) };
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fast non-dominated sort. Returns fronts of indices, best first, each
/// front in ascending index order.
pub fn nondominated_sort<V: AsRef<[f64]>>(points: &[V], orientation: &[Sense]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates_with(a, b, orientation) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_with(b, a, orientation) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front.
///
/// Per objective, members are ordered by (value, position); the two ends
/// get +inf and interior members add the normalized gap between their
/// neighbours. Objectives with zero range contribute nothing.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let k_count = front[0].as_ref().len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..k_count {
        let value = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let range = value(order[n - 1]) - value(order[0]);
        if range <= 0.0 {
            continue;
        }
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        for w in order.windows(3) {
            dist[w[1]] += (value(w[2]) - value(w[0])) / range;
        }
    }
    if n <= 2 {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
    }
    dist
}
