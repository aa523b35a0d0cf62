//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use geocirc_core::{MetricSurface, Point2, Vec2};

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0)
    }
}

/// Shortest broken path between two grid nodes of an `n × n` grid over
/// `[lo.x, hi.x] × [lo.y, hi.y]`, with edges to every primitive offset of
/// Chebyshev radius ≤ `radius` and Simpson-rule `g`-lengths per edge.
///
/// `p` and `q` must be grid nodes.
pub fn grid_distance(
    surface: &MetricSurface,
    p: Point2,
    q: Point2,
    lo: Point2,
    hi: Point2,
    n: usize,
    radius: i64,
) -> f64 {
    let hx = (hi.x - lo.x) / (n - 1) as f64;
    let hy = (hi.y - lo.y) / (n - 1) as f64;
    let index = |pt: Point2| {
        let i = ((pt.x - lo.x) / hx).round() as usize;
        let j = ((pt.y - lo.y) / hy).round() as usize;
        assert!(
            (lo.x + i as f64 * hx - pt.x).abs() < 1e-9 && (lo.y + j as f64 * hy - pt.y).abs() < 1e-9,
            "not a grid node"
        );
        i * n + j
    };
    let coords = |k: usize| Point2::new(lo.x + (k / n) as f64 * hx, lo.y + (k % n) as f64 * hy);
    let mut offsets = Vec::new();
    for di in -radius..=radius {
        for dj in -radius..=radius {
            if (di, dj) != (0, 0) && gcd(di, dj) == 1 {
                offsets.push((di, dj));
            }
        }
    }
    let edge = |a: Point2, d: Vec2| {
        let mid = Point2::new(a.x + d.x / 2.0, a.y + d.y / 2.0);
        let b = Point2::new(a.x + d.x, a.y + d.y);
        let norm = |p: Point2| surface.norm(p, d).unwrap();
        (norm(a) + 4.0 * norm(mid) + norm(b)) / 6.0
    };
    let (src, dst) = (index(p), index(q));
    let mut dist = vec![f64::INFINITY; n * n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry(0.0, src));
    while let Some(Entry(d, k)) = heap.pop() {
        if k == dst {
            return d;
        }
        if d > dist[k] {
            continue;
        }
        let (i, j) = ((k / n) as i64, (k % n) as i64);
        let a = coords(k);
        for &(di, dj) in &offsets {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                continue;
            }
            let m = ni as usize * n + nj as usize;
            let nd = d + edge(a, Vec2::new(di as f64 * hx, dj as f64 * hy));
            if nd < dist[m] {
                dist[m] = nd;
                heap.push(Entry(nd, m));
            }
        }
    }
    dist[dst]
}

/// `J₀(x)` by Miller's backward recurrence, normalized with
/// `J₀ + 2 Σ J_{2k} = 1`.
pub fn bessel_j0(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let start = 2 * ((x.abs() as usize + 30 + (x.abs().sqrt() * 10.0) as usize) / 2);
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut sum = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            sum *= 1e-250;
        }
        let order = k - 1;
        if order == 0 {
            j0 = cur;
        } else if order % 2 == 0 {
            sum += 2.0 * cur;
        }
    }
    j0 / (j0 + sum)
}

/// Gaussian curvature of a metric with `g_xy = 0` from the Brioschi formula,
/// derivatives taken by central differences of the metric tensor.
pub fn brioschi_curvature(surface: &MetricSurface, p: Point2, h: f64) -> f64 {
    let eg = |x: f64, y: f64| {
        let g = surface.metric_at(Point2::new(x, y)).unwrap();
        assert!(g[(0, 1)].abs() < 1e-14);
        (g[(0, 0)], g[(1, 1)])
    };
    let w = |x: f64, y: f64| {
        let (e, g) = eg(x, y);
        (e * g).sqrt()
    };
    // term_x = ∂x(G_x / W), term_y = ∂y(E_y / W)
    let gx_over_w = |x: f64, y: f64| (eg(x + h, y).1 - eg(x - h, y).1) / (2.0 * h) / w(x, y);
    let ey_over_w = |x: f64, y: f64| (eg(x, y + h).0 - eg(x, y - h).0) / (2.0 * h) / w(x, y);
    let term_x = (gx_over_w(p.x + h, p.y) - gx_over_w(p.x - h, p.y)) / (2.0 * h);
    let term_y = (ey_over_w(p.x, p.y + h) - ey_over_w(p.x, p.y - h)) / (2.0 * h);
    -(term_x + term_y) / (2.0 * w(p.x, p.y))
}

/// Composite trapezoid of a periodic complex integrand given as `(re, im)`.
pub fn periodic_trapezoid(n: usize, f: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..n {
        let (a, b) = f(k as f64 * h);
        re += a;
        im += b;
    }
    (re * h, im * h)
}
