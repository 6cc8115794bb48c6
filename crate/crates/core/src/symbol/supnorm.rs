use num_complex::Complex;

use super::{FourierSymbol, MAX_DIM};
use crate::scalar::Real;

/// Largest grid (total points) the refinement loop will evaluate.
const MAX_GRID_POINTS: usize = 1 << 22;
const CANDIDATES: usize = 8;
const CONVERGED: f64 = 1e-6;

/// Estimate of `sup |f|`, attained at an actual point (hence a lower bound).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupNorm<T> {
    pub value: T,
    /// Final grid resolution per axis.
    pub grid_n: usize,
    /// Whether two successive refinements agreed to 1e-6.
    pub converged: bool,
}

/// Max of `|f|` over the uniform `n^dim` grid, without local refinement.
pub fn grid_max<T: Real>(f: &FourierSymbol<T>, n: usize) -> T {
    f.eval_grid(n.max(1))
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.norm_sqr().sqrt()))
}

/// Value and gradient of `|f|^2` at `x`.
fn value_grad<T: Real>(f: &FourierSymbol<T>, x: &[T]) -> (T, [T; MAX_DIM]) {
    let dim = f.dim;
    let two_pi = T::two_pi();
    let mut v = Complex::<T>::default();
    let mut dv = [Complex::<T>::default(); MAX_DIM];
    for (m, c) in f.raw() {
        let mut phase = T::zero();
        for i in 0..dim {
            phase += T::lit(m[i] as f64) * x[i];
        }
        let (s, co) = (two_pi * phase).sin_cos();
        let term = *c * Complex::new(co, s);
        v += term;
        for i in 0..dim {
            dv[i] += term * Complex::new(T::zero(), two_pi * T::lit(m[i] as f64));
        }
    }
    let mut g = [T::zero(); MAX_DIM];
    for i in 0..dim {
        g[i] = (v.conj() * dv[i]).re * T::lit(2.0);
    }
    (v.norm_sqr(), g)
}

/// Gradient ascent on `|f|^2` with backtracking, starting from `x`.
fn climb<T: Real>(f: &FourierSymbol<T>, mut x: [T; MAX_DIM]) -> T {
    let dim = f.dim;
    let (mut val, mut grad) = value_grad(f, &x[..dim]);
    let mut step = T::lit(1e-3);
    for _ in 0..200 {
        let gnorm = grad[..dim].iter().fold(T::zero(), |a, g| a + *g * *g).sqrt();
        if gnorm <= T::eps() * (T::one() + val) {
            break;
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut y = x;
            for i in 0..dim {
                y[i] += step * grad[i] / gnorm;
            }
            let (nv, ng) = value_grad(f, &y[..dim]);
            if nv > val {
                x = y;
                val = nv;
                grad = ng;
                step *= T::lit(2.0);
                improved = true;
                break;
            }
            step *= T::lit(0.5);
        }
        if !improved || step < T::lit(1e-14) {
            break;
        }
    }
    val.sqrt()
}

fn refined_max<T: Real>(f: &FourierSymbol<T>, n: usize) -> T {
    let dim = f.dim;
    let values = f.eval_grid(n);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .norm_sqr()
            .partial_cmp(&values[a].norm_sqr())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut best = values
        .get(order[0])
        .map(|v| v.norm_sqr().sqrt())
        .unwrap_or_else(T::zero);
    for &idx in order.iter().take(CANDIDATES) {
        let mut x = [T::zero(); MAX_DIM];
        let mut rest = idx;
        for i in (0..dim).rev() {
            x[i] = T::lit((rest % n) as f64 / n as f64);
            rest /= n;
        }
        best = best.max(climb(f, x));
    }
    best
}

/// `sup |f|` from a grid of at least `grid_n` points per axis, refined
/// locally and re-run on doubled grids until the estimate stabilises.
pub fn sup_norm<T: Real>(f: &FourierSymbol<T>, grid_n: usize) -> SupNorm<T> {
    if f.is_zero() {
        return SupNorm {
            value: T::zero(),
            grid_n,
            converged: true,
        };
    }
    let mut n = grid_n.max(4 * (f.max_freq() as usize + 1));
    let mut prev = refined_max(f, n);
    loop {
        let next_n = 2 * n;
        if next_n.pow(f.dim as u32) > MAX_GRID_POINTS {
            return SupNorm {
                value: prev,
                grid_n: n,
                converged: false,
            };
        }
        let next = refined_max(f, next_n);
        let change = (next - prev).abs().as_f64();
        let value = next.max(prev);
        n = next_n;
        if change < CONVERGED {
            return SupNorm {
                value,
                grid_n: n,
                converged: true,
            };
        }
        prev = value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{preset, random_symbol};

    #[test]
    fn constant_and_cosine() {
        let c = FourierSymbol::<f64>::constant(2, Complex::new(3.0, 4.0));
        assert!((sup_norm(&c, 8).value - 5.0).abs() < 1e-12);
        let cos = preset::<f64>("cos1", 2).unwrap();
        let s = sup_norm(&cos, 8);
        assert!((s.value - 1.0).abs() < 1e-6 && s.converged);
    }

    #[test]
    fn off_grid_maximum_is_found() {
        // maximum of cos(2 pi (x - 0.0123)) sits between grid nodes
        let f = FourierSymbol::<f64>::from_coeffs(
            2,
            vec![
                (vec![1, 0], Complex::from_polar(0.5, -0.0123 * std::f64::consts::TAU)),
                (vec![-1, 0], Complex::from_polar(0.5, 0.0123 * std::f64::consts::TAU)),
            ],
        )
        .unwrap();
        assert!(grid_max(&f, 8) < 1.0 - 1e-4);
        assert!((sup_norm(&f, 8).value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_max_non_decreasing_under_nested_refinement() {
        let f = random_symbol::<f64>(17, 2, 2, true).unwrap();
        let mut last = 0.0;
        for n in [12, 24, 48, 96] {
            let v = grid_max(&f, n);
            assert!(v >= last - 1e-14);
            last = v;
        }
        assert!(sup_norm(&f, 12).value >= last - 1e-12);
        assert!(sup_norm(&f, 12).value <= f.l1_norm() + 1e-12);
    }
}
