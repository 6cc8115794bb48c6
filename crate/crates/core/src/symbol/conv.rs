//! Coefficient convolution and grid evaluation.

use std::collections::BTreeMap;

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use super::{Freq, FourierSymbol, MAX_DIM, PRUNE_TOL};
use crate::scalar::Real;

/// Above this many coefficient pairs the product goes through an FFT.
const DIRECT_PAIR_LIMIT: usize = 200_000;

pub(super) fn multiply<T: Real>(f: &FourierSymbol<T>, g: &FourierSymbol<T>) -> FourierSymbol<T> {
    let dim = f.dim;
    if f.is_zero() || g.is_zero() {
        return FourierSymbol::zero(dim);
    }
    let pairs = f.len() * g.len();
    let (flo, fhi) = bounds(f);
    let (glo, ghi) = bounds(g);
    let mut shape = [1usize; MAX_DIM];
    for i in 0..dim {
        shape[i] = (fhi[i] - flo[i] + ghi[i] - glo[i] + 1) as usize;
    }
    let boxed: usize = shape.iter().product();
    let fft_cost = 8.0 * boxed as f64 * (boxed as f64).log2().max(1.0);
    if pairs <= DIRECT_PAIR_LIMIT || (pairs as f64) < fft_cost {
        direct(f, g)
    } else {
        spectral(f, g, &flo, &glo, &shape)
    }
}

fn bounds<T: Real>(f: &FourierSymbol<T>) -> (Freq, Freq) {
    let mut lo = [i32::MAX; MAX_DIM];
    let mut hi = [i32::MIN; MAX_DIM];
    for m in f.coeffs.keys() {
        for i in 0..MAX_DIM {
            lo[i] = lo[i].min(m[i]);
            hi[i] = hi[i].max(m[i]);
        }
    }
    (lo, hi)
}

fn direct<T: Real>(f: &FourierSymbol<T>, g: &FourierSymbol<T>) -> FourierSymbol<T> {
    let mut acc: BTreeMap<Freq, Complex<T>> = BTreeMap::new();
    for (a, ca) in &f.coeffs {
        for (b, cb) in &g.coeffs {
            let mut m = [0; MAX_DIM];
            for i in 0..MAX_DIM {
                m[i] = a[i] + b[i];
            }
            *acc.entry(m).or_default() += *ca * *cb;
        }
    }
    FourierSymbol::from_map(f.dim, acc)
}

fn strides(shape: &[usize; MAX_DIM]) -> [usize; MAX_DIM] {
    let mut s = [1usize; MAX_DIM];
    for i in (0..MAX_DIM - 1).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// In-place FFT along every axis of a row-major array.
///
/// Each axis is brought to the innermost position by a block transpose so
/// that all its lines go through one batched call.
fn fft_nd<T: Real>(planner: &mut FftPlanner<T>, data: &mut [Complex<T>], shape: &[usize; MAX_DIM], dir: FftDirection) {
    let st = strides(shape);
    let mut buf = Vec::new();
    let mut scratch = Vec::new();
    for axis in 0..MAX_DIM {
        let n = shape[axis];
        if n <= 1 {
            continue;
        }
        let plan = planner.plan_fft(n, dir);
        scratch.resize(plan.get_inplace_scratch_len(), Complex::default());
        let s = st[axis];
        if s == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * s;
        buf.resize(block, Complex::default());
        for chunk in data.chunks_exact_mut(block) {
            for (j, row) in chunk.chunks_exact(s).enumerate() {
                for (q, v) in row.iter().enumerate() {
                    buf[q * n + j] = *v;
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for (j, row) in chunk.chunks_exact_mut(s).enumerate() {
                for (q, v) in row.iter_mut().enumerate() {
                    *v = buf[q * n + j];
                }
            }
        }
    }
}

fn spectral<T: Real>(
    f: &FourierSymbol<T>,
    g: &FourierSymbol<T>,
    flo: &Freq,
    glo: &Freq,
    shape: &[usize; MAX_DIM],
) -> FourierSymbol<T> {
    let dim = f.dim;
    let st = strides(shape);
    let total: usize = shape.iter().product();
    let place = |s: &FourierSymbol<T>, lo: &Freq| {
        let mut a = vec![Complex::<T>::default(); total];
        for (m, c) in &s.coeffs {
            let mut idx = 0;
            for i in 0..dim {
                idx += (m[i] - lo[i]) as usize * st[i];
            }
            a[idx] = *c;
        }
        a
    };
    let mut a = place(f, flo);
    let mut b = place(g, glo);
    let mut planner = FftPlanner::new();
    fft_nd(&mut planner, &mut a, shape, FftDirection::Forward);
    fft_nd(&mut planner, &mut b, shape, FftDirection::Forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    fft_nd(&mut planner, &mut a, shape, FftDirection::Inverse);
    let inv = T::one() / T::lit(total as f64);
    // rounding noise scales with the product of the l1 norms
    let floor = (f.l1_norm() * g.l1_norm()).as_f64() * T::eps().as_f64() * 16.0;
    let tol = floor.max(PRUNE_TOL);
    let mut acc = BTreeMap::new();
    for (idx, v) in a.into_iter().enumerate() {
        let v = v.scale(inv);
        if v.norm_sqr().as_f64().sqrt() <= tol {
            continue;
        }
        let mut m = [0; MAX_DIM];
        for i in 0..dim {
            m[i] = ((idx / st[i]) % shape[i]) as i32 + flo[i] + glo[i];
        }
        acc.insert(m, v);
    }
    FourierSymbol::from_map(dim, acc)
}

pub(super) fn eval_grid<T: Real>(f: &FourierSymbol<T>, n: usize) -> Vec<Complex<T>> {
    let dim = f.dim;
    let mut shape = [1usize; MAX_DIM];
    for s in shape.iter_mut().take(dim) {
        *s = n;
    }
    let st = strides(&shape);
    let total: usize = shape.iter().product();
    let mut a = vec![Complex::<T>::default(); total];
    let nn = n as i32;
    for (m, c) in &f.coeffs {
        let mut idx = 0;
        for i in 0..dim {
            idx += m[i].rem_euclid(nn) as usize * st[i];
        }
        a[idx] += *c;
    }
    fft_nd(&mut FftPlanner::new(), &mut a, &shape, FftDirection::Inverse);
    a
}

/// Smallest integer at least `n` with no prime factor above 5.
fn smooth(n: usize) -> usize {
    (n.max(1)..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

/// Combines symbols pointwise and returns the exact coefficients of the
/// result, whose frequencies must satisfy `|m_i| <= bound[i]`.
///
/// All inputs are evaluated on one grid large enough that the result does
/// not alias. `combine` receives the input values at a point and returns the
/// value there together with the sum of the moduli of its terms, which sets
/// the rounding floor below which coefficients are dropped.
pub(crate) fn pointwise<T: Real>(
    dim: usize,
    inputs: &[&FourierSymbol<T>],
    bound: &Freq,
    combine: impl Fn(&[Complex<T>]) -> (Complex<T>, T),
) -> FourierSymbol<T> {
    let mut shape = [1usize; MAX_DIM];
    for i in 0..dim {
        shape[i] = smooth(2 * bound[i] as usize + 1);
    }
    let st = strides(&shape);
    let total: usize = shape.iter().product();
    let mut planner = FftPlanner::<T>::new();
    let scatter = |a: &mut [Complex<T>], f: &FourierSymbol<T>, w: Complex<T>| {
        for (m, c) in &f.coeffs {
            let mut idx = 0;
            for i in 0..dim {
                idx += m[i].rem_euclid(shape[i] as i32) as usize * st[i];
            }
            a[idx] += *c * w;
        }
    };
    // real inputs travel in pairs as the real and imaginary parts of one transform
    let is_real = |f: &FourierSymbol<T>| f.reality_defect().as_f64() <= 1e-14 * f.max_coeff().as_f64();
    let mut values: Vec<Vec<Complex<T>>> = vec![Vec::new(); inputs.len()];
    let real: Vec<usize> = (0..inputs.len()).filter(|&j| is_real(inputs[j])).collect();
    for pair in real.chunks(2) {
        let mut a = vec![Complex::<T>::default(); total];
        scatter(&mut a, inputs[pair[0]], Complex::new(T::one(), T::zero()));
        if let Some(&j) = pair.get(1) {
            scatter(&mut a, inputs[j], Complex::new(T::zero(), T::one()));
        }
        fft_nd(&mut planner, &mut a, &shape, FftDirection::Inverse);
        if let Some(&j) = pair.get(1) {
            values[j] = a.iter().map(|v| Complex::new(v.im, T::zero())).collect();
        }
        values[pair[0]] = a.into_iter().map(|v| Complex::new(v.re, T::zero())).collect();
    }
    for (j, f) in inputs.iter().enumerate() {
        if values[j].is_empty() {
            let mut a = vec![Complex::<T>::default(); total];
            scatter(&mut a, f, Complex::new(T::one(), T::zero()));
            fft_nd(&mut planner, &mut a, &shape, FftDirection::Inverse);
            values[j] = a;
        }
    }
    let mut point = vec![Complex::<T>::default(); inputs.len()];
    let mut out = vec![Complex::<T>::default(); total];
    let mut magnitude = T::zero();
    for (idx, o) in out.iter_mut().enumerate() {
        for (p, v) in point.iter_mut().zip(&values) {
            *p = v[idx];
        }
        let (v, mag) = combine(&point);
        *o = v;
        magnitude = magnitude.max(mag);
    }
    drop(values);
    fft_nd(&mut planner, &mut out, &shape, FftDirection::Forward);
    let inv = T::one() / T::lit(total as f64);
    let tol = (magnitude.as_f64() * T::eps().as_f64() * 4.0).max(PRUNE_TOL);
    let mut acc = BTreeMap::new();
    for (idx, v) in out.into_iter().enumerate() {
        let v = v.scale(inv);
        if v.norm_sqr().as_f64().sqrt() <= tol {
            continue;
        }
        let mut m = [0; MAX_DIM];
        for i in 0..dim {
            let j = ((idx / st[i]) % shape[i]) as i32;
            m[i] = if j <= bound[i] { j } else { j - shape[i] as i32 };
        }
        acc.insert(m, v);
    }
    FourierSymbol::from_map(dim, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::random_symbol;

    const T1: f64 = 1.0;

    #[test]
    fn spectral_product_matches_direct() {
        let f = random_symbol::<f64>(1, 4, 3, true).unwrap();
        let g = random_symbol::<f64>(2, 4, 3, false).unwrap();
        let (flo, fhi) = bounds(&f);
        let (glo, ghi) = bounds(&g);
        let mut shape = [1usize; MAX_DIM];
        for i in 0..4 {
            shape[i] = (fhi[i] - flo[i] + ghi[i] - glo[i] + 1) as usize;
        }
        let a = direct(&f, &g);
        let b = spectral(&f, &g, &flo, &glo, &shape);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn pointwise_product_matches_direct() {
        let f = random_symbol::<f64>(5, 4, 2, false).unwrap();
        let g = random_symbol::<f64>(6, 4, 1, true).unwrap();
        let mut bound = [0; MAX_DIM];
        for (b, (x, y)) in bound.iter_mut().zip(f.freq_bound().iter().zip(g.freq_bound())) {
            *b = x + y;
        }
        let h = pointwise(4, &[&f, &g], &bound, |v| (v[0] * v[1], v[0].l1_norm() * v[1].l1_norm()));
        assert!(direct(&f, &g).max_abs_diff(&h) < 1e-13);
        // real inputs are transformed in pairs
        let e = random_symbol::<f64>(7, 4, 1, true).unwrap();
        let three = pointwise(4, &[&g, &f, &e], &[4, 4, 4, 4], |v| (v[0] * v[1] * v[2], T1));
        assert!((&direct(&g, &f) * &e).max_abs_diff(&three) < 1e-12);
        assert_eq!(smooth(17), 18);
        assert_eq!(smooth(29), 30);
    }

    #[test]
    fn spectral_product_in_two_dimensions() {
        let f = random_symbol::<f64>(3, 2, 5, false).unwrap();
        let g = random_symbol::<f64>(4, 2, 2, false).unwrap();
        let (flo, fhi) = bounds(&f);
        let (glo, ghi) = bounds(&g);
        let mut shape = [1usize; MAX_DIM];
        for i in 0..2 {
            shape[i] = (fhi[i] - flo[i] + ghi[i] - glo[i] + 1) as usize;
        }
        let b = spectral(&f, &g, &flo, &glo, &shape);
        assert!(direct(&f, &g).max_abs_diff(&b) < 1e-12);
    }
}
