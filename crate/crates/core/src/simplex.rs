//! Nelder–Mead simplex minimizer.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 1/2,
//! shrink 1/2). Vertices are ordered by objective value, ties broken by the
//! lexicographically smaller coordinate vector, so runs are reproducible.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Convergence needs both the simplex diameter and the spread of
    /// objective values below this.
    pub tolerance: f64,
    /// Offset added to each coordinate of the start point to build the
    /// remaining vertices.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub fn minimize<F>(objective: F, start: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    assert!(dim > 0, "simplex needs at least one coordinate");
    // NaN is treated as the worst possible value.
    let eval = |p: &[f64]| {
        let v = objective(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut verts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    verts.push((start.to_vec(), eval(start)));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += opts.step;
        let v = eval(&p);
        verts.push((p, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        verts.sort_by(vertex_order);
        if diameter(&verts) < opts.tolerance
            && verts[dim].1 - verts[0].1 < opts.tolerance
        {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let centroid = centroid(&verts[..dim]);
        let worst = &verts[dim];
        let reflected = along(&centroid, &worst.0, -REFLECT);
        let fr = eval(&reflected);

        if fr < verts[0].1 {
            let expanded = along(&centroid, &worst.0, -EXPAND);
            let fe = eval(&expanded);
            verts[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < verts[dim - 1].1 {
            verts[dim] = (reflected, fr);
            continue;
        }

        let (candidate, fc, threshold) = if fr < worst.1 {
            let outside = along(&centroid, &worst.0, -REFLECT * CONTRACT);
            let fc = eval(&outside);
            (outside, fc, fr)
        } else {
            let inside = along(&centroid, &worst.0, CONTRACT);
            let fc = eval(&inside);
            (inside, fc, worst.1)
        };
        if fc < threshold || (fc == threshold && fc < verts[dim].1) {
            verts[dim] = (candidate, fc);
            continue;
        }

        let best = verts[0].0.clone();
        for v in verts.iter_mut().skip(1) {
            for (c, b) in v.0.iter_mut().zip(&best) {
                *c = b + SHRINK * (*c - b);
            }
            v.1 = eval(&v.0);
        }
    }

    let (point, value) = verts.swap_remove(0);
    SimplexOutcome {
        point,
        value,
        iterations,
        converged,
    }
}

fn vertex_order(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn centroid(verts: &[(Vec<f64>, f64)]) -> Vec<f64> {
    let mut c = vec![0.0; verts[0].0.len()];
    for (p, _) in verts {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    let n = verts.len() as f64;
    c.iter_mut().for_each(|ci| *ci /= n);
    c
}

/// `centroid + coef * (point - centroid)`
fn along(centroid: &[f64], point: &[f64], coef: f64) -> Vec<f64> {
    centroid
        .iter()
        .zip(point)
        .map(|(c, p)| c + coef * (p - c))
        .collect()
}

fn diameter(verts: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in verts.iter().enumerate() {
        for b in &verts[i + 1..] {
            let dist = a
                .0
                .iter()
                .zip(&b.0)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            d = d.max(dist);
        }
    }
    d
}
