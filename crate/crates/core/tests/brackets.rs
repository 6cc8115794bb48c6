use std::f64::consts::TAU;

use nambu_core::brackets::{
    bracket4, nambu_bracket_det, nambu_bracket_pairwise, poisson_bracket, ConstantSymplecticForm, VolumeDensity,
};
use nambu_core::geometry::TorusGeometry;
use nambu_core::symbol::{preset, random_symbol};
use nambu_core::Symbol;
use num_complex::Complex64;
use proptest::prelude::*;

fn sym(seed: u64, dim: usize, freq: u32) -> Symbol {
    random_symbol(seed, dim, freq, true).unwrap()
}

fn rel(a: &Symbol, b: &Symbol) -> f64 {
    a.max_abs_diff(b) / a.max_coeff().max(b.max_coeff()).max(1.0)
}

fn t2_form() -> ConstantSymplecticForm<f64> {
    ConstantSymplecticForm::darboux(2, TAU).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn poisson_antisymmetric_and_leibniz(seed in 0u64..1_000_000) {
        let (f, g, h) = (sym(seed, 2, 3), sym(seed + 1, 2, 2), sym(seed + 2, 2, 2));
        let form = t2_form();
        let pb = |a: &Symbol, b: &Symbol| poisson_bracket(a, b, &form).unwrap();
        prop_assert!(rel(&pb(&f, &g), &-&pb(&g, &f)) < 1e-12);
        let lhs = pb(&f, &(&g * &h));
        let rhs = &(&pb(&f, &g) * &h) + &(&g * &pb(&f, &h));
        prop_assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn jacobi_on_both_tori(seed in 0u64..1_000_000, r in 1usize..=3) {
        let t4 = TorusGeometry::<f64>::t4();
        let (f, g, h) = (sym(seed, 4, 1), sym(seed + 1, 4, 1), sym(seed + 2, 4, 1));
        let pb = |a: &Symbol, b: &Symbol| t4.poisson(a, b, r).unwrap();
        let x = pb(&f, &pb(&g, &h));
        let y = pb(&g, &pb(&h, &f));
        let z = pb(&h, &pb(&f, &g));
        let sum = &(&x + &y) + &z;
        prop_assert!(sum.max_coeff() < 1e-10 * x.max_coeff().max(1.0));
    }

    #[test]
    fn four_brackets_alternate(seed in 0u64..1_000_000, i in 0usize..4, j in 0usize..4, r in 1usize..=3) {
        prop_assume!(i != j);
        let t4 = TorusGeometry::<f64>::t4();
        let fs: Vec<Symbol> = (0..4).map(|s| sym(seed + s, 4, 1)).collect();
        let args = [&fs[0], &fs[1], &fs[2], &fs[3]];
        let mut sw = args;
        sw.swap(i, j);
        prop_assert!(rel(&t4.bracket4_r(sw, r).unwrap(), &-&t4.bracket4_r(args, r).unwrap()) < 1e-12);
        prop_assert!(rel(&t4.bracket4_hyp(sw).unwrap(), &-&t4.bracket4_hyp(args).unwrap()) < 1e-12);
        prop_assert!(rel(&t4.nambu(&sw).unwrap(), &-&t4.nambu(&args).unwrap()) < 1e-12);
    }

    #[test]
    fn determinant_equals_pairwise(seed in 0u64..1_000_000, r in 1usize..=3) {
        let t4 = TorusGeometry::<f64>::t4();
        let form = t4.form(r).unwrap();
        let fs: Vec<Symbol> = (0..4).map(|s| sym(seed + s, 4, 1)).collect();
        let refs: Vec<&Symbol> = fs.iter().collect();
        let det = nambu_bracket_det(&refs, &VolumeDensity::from_form(form).unwrap()).unwrap();
        let pw = nambu_bracket_pairwise(&refs, form).unwrap();
        prop_assert!(rel(&det, &pw) < 1e-10);
    }

    #[test]
    fn multilinear_in_each_slot(seed in 0u64..1_000_000, slot in 0usize..4, a in -2.0f64..2.0) {
        let t4 = TorusGeometry::<f64>::t4();
        let fs: Vec<Symbol> = (0..5).map(|s| sym(seed + s, 4, 1)).collect();
        let with = |x: &Symbol| {
            let mut args = [&fs[0], &fs[1], &fs[2], &fs[3]];
            args[slot] = x;
            t4.nambu(&args).unwrap()
        };
        let mix = &fs[slot].scale_real(a) + &fs[4];
        let lhs = with(&mix);
        let rhs = &with(&fs[slot]).scale_real(a) + &with(&fs[4]);
        prop_assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn leibniz_in_last_slot(seed in 0u64..1_000_000, r in 1usize..=3) {
        let t4 = TorusGeometry::<f64>::t4();
        let fs: Vec<Symbol> = (0..5).map(|s| sym(seed + s, 4, 1)).collect();
        let (f, g, h, t, s) = (&fs[0], &fs[1], &fs[2], &fs[3], &fs[4]);
        let ts = t * s;
        let lhs = t4.bracket4_r([f, g, h, &ts], r).unwrap();
        let rhs = &(t * &t4.bracket4_r([f, g, h, s], r).unwrap()) + &(&t4.bracket4_r([f, g, h, t], r).unwrap() * s);
        prop_assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn four_torus_scalings(seed in 0u64..1_000_000, r in 1usize..=3) {
        let t4 = TorusGeometry::<f64>::t4();
        let fs: Vec<Symbol> = (0..4).map(|s| sym(seed + s, 4, 1)).collect();
        let args = [&fs[0], &fs[1], &fs[2], &fs[3]];
        let nambu = t4.nambu(&args).unwrap();
        let br = t4.bracket4_r(args, r).unwrap();
        prop_assert!(rel(&br, &nambu.scale_real(6.0)) < 1e-12);
        prop_assert!(rel(&t4.bracket4_hyp(args).unwrap(), &br.scale_real(3.0)) < 1e-12);
        prop_assert!((t4.mu(r).unwrap() - 6.0).abs() < 1e-12);
    }
}

#[test]
fn fundamental_identity_on_the_four_torus() {
    let t4 = TorusGeometry::<f64>::t4();
    for seed in [3u64, 17] {
        let ws: Vec<Symbol> = (0..7).map(|s| sym(100 * seed + s, 4, 1)).collect();
        let nb = |xs: [&Symbol; 4]| t4.nambu(&xs).unwrap();
        let (f, g) = (&ws[..3], &ws[3..]);
        let lhs = nb([&f[0], &f[1], &f[2], &nb([&g[0], &g[1], &g[2], &g[3]])]);
        let mut rhs = Symbol::zero(4);
        for i in 0..4 {
            let inner = nb([&f[0], &f[1], &f[2], &g[i]]);
            let mut slots = [&g[0], &g[1], &g[2], &g[3]];
            slots[i] = &inner;
            rhs = &rhs + &nb(slots);
        }
        assert!(rel(&lhs, &rhs) < 1e-9, "seed {seed}: {}", rel(&lhs, &rhs));
    }
}

#[test]
fn trivial_cases_vanish() {
    let t4 = TorusGeometry::<f64>::t4();
    let f = sym(1, 4, 2);
    let g = sym(2, 4, 2);
    let one = Symbol::one(4);
    assert!(t4.poisson(&f, &f, 1).unwrap().max_coeff() < 1e-12);
    assert!(t4.nambu(&[&f, &g, &one, &g]).unwrap().is_zero());
    assert!(t4.nambu(&[&f, &g, &f, &g]).unwrap().max_coeff() < 1e-10);
    assert!(t4.bracket4_hyp([&f, &f, &g, &g]).unwrap().max_coeff() < 1e-10);
}

#[test]
fn coordinate_brackets() {
    // {cos, sin} pairs in closed form on the two-torus
    let form = t2_form();
    let f = preset::<f64>("cos1", 2).unwrap();
    let g = preset::<f64>("cos2", 2).unwrap();
    let want = preset::<f64>("sin1*sin2", 2).unwrap().scale_real(TAU);
    assert!(rel(&poisson_bracket(&f, &g, &form).unwrap(), &want) < 1e-13);
    // the Darboux four-bracket of four exponentials
    let form4 = ConstantSymplecticForm::darboux(4, 1.0).unwrap();
    let e: Vec<Symbol> = (1..=4).map(|i| preset(&format!("exp{i}"), 4).unwrap()).collect();
    let prod = &(&e[0] * &e[1]) * &(&e[2] * &e[3]);
    let got = bracket4(&e[0], &e[1], &e[2], &e[3], &form4).unwrap();
    // only {x1,x2}{x3,x4} survives: (2 pi i)^4
    let want = prod.scale(Complex64::new(TAU.powi(4), 0.0));
    assert!(rel(&got, &want) < 1e-12);
}
