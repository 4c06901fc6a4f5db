use std::sync::Arc;

use anisohardy::atoms::{atomic_quasi_norm, random_decomposition, AtomicDecomposition, DecompositionParams};
use anisohardy::dilation::{ExpansiveDilation, StepQuasiNorm};
use anisohardy::fourier_bounds::reconstruct_f;
use anisohardy::grid::GridFunction;
use anisohardy::maximal::{hl_maximal, powered_maximal, BallScan};
use anisohardy::spaces::{BallSpace, OrliczFunction, VariableExponent};
use num_complex::Complex64;
use proptest::prelude::*;

fn d1() -> Arc<ExpansiveDilation> {
    Arc::new(ExpansiveDilation::from_text("2").unwrap())
}

fn grid_1d(values: Vec<f64>) -> GridFunction {
    let n = values.len();
    GridFunction::new(vec![-2.0], vec![2.0], vec![n], values).unwrap()
}

fn spaces_1d() -> Vec<BallSpace> {
    vec![
        BallSpace::lebesgue(0.75).unwrap(),
        BallSpace::lorentz(0.5, 0.5).unwrap(),
        BallSpace::orlicz(OrliczFunction::power(0.8).unwrap()),
        BallSpace::variable(VariableExponent::formula(
            "0.6+0.2x^2",
            |x: &[f64]| 0.6 + 0.2 * x[0] * x[0] / (1.0 + x[0] * x[0]),
            0.6,
            0.8,
        ))
        .unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponent_homogeneity(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        prop_assume!(x.abs() + y.abs() > 1e-3);
        for text in ["2,0;0,3", "1,1;-1,1"] {
            let d = Arc::new(ExpansiveDilation::from_text(text).unwrap());
            let rho = StepQuasiNorm::new(d.clone()).unwrap();
            let k = rho.exponent(&[x, y]).unwrap().unwrap();
            let k1 = rho.exponent(&d.apply_power(1, &[x, y])).unwrap().unwrap();
            prop_assert_eq!(k1, k + 1);
        }
    }

    #[test]
    fn lattice_and_homogeneity(
        g in prop::collection::vec(0.0f64..2.0, 64),
        shrink in prop::collection::vec(0.0f64..1.0, 64),
        c in -3.0f64..3.0,
    ) {
        let f: Vec<f64> = g.iter().zip(&shrink).map(|(a, s)| a * s).collect();
        let (gf, ff) = (grid_1d(g), grid_1d(f));
        for space in spaces_1d() {
            let (nf, ng) = (space.norm(&ff).unwrap(), space.norm(&gf).unwrap());
            prop_assert!(nf <= ng * (1.0 + 1e-10), "{}: {} > {}", space.kind_name(), nf, ng);
            let scaled = space.norm(&ff.scaled(c)).unwrap();
            prop_assert!((scaled - c.abs() * nf).abs() <= 1e-8 * (1.0 + nf), "{}", space.kind_name());
        }
    }

    #[test]
    fn convexified_lebesgue(values in prop::collection::vec(-2.0f64..2.0, 64), p in 0.3f64..2.0, q in 0.3f64..2.0) {
        let f = grid_1d(values);
        let wrapped = BallSpace::lebesgue(q).unwrap().convexify(p).unwrap().norm(&f).unwrap();
        let direct = f.lq_norm(p * q);
        prop_assert!((wrapped - direct).abs() <= 1e-10 * (1.0 + direct));
    }

    #[test]
    fn maximal_monotone(
        g in prop::collection::vec(0.0f64..1.0, 64),
        shrink in prop::collection::vec(0.0f64..1.0, 64),
    ) {
        let f: Vec<f64> = g.iter().zip(&shrink).map(|(a, s)| a * s).collect();
        let (gf, ff) = (grid_1d(g), grid_1d(f));
        let scan = BallScan::for_grid(&gf, d1(), 2, -4..=3).unwrap();
        let (mf, mg) = (hl_maximal(&ff, &scan).unwrap(), hl_maximal(&gf, &scan).unwrap());
        for (a, b) in mf.values().iter().zip(mg.values()) {
            prop_assert!(a <= b);
        }
        let (p1, p2) = (powered_maximal(&ff, &scan, 0.5).unwrap(), powered_maximal(&ff, &scan, 1.5).unwrap());
        for (a, b) in p1.values().iter().zip(p2.values()) {
            prop_assert!(*a <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn grid_round_trips(values in prop::collection::vec(-1e3f64..1e3, 2..40)) {
        let f = grid_1d(values);
        let back = GridFunction::from_bytes(&f.to_bytes()).unwrap();
        prop_assert_eq!(back.values(), f.values());
        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        let back = GridFunction::read_csv(csv.as_slice()).unwrap();
        prop_assert_eq!(back.values(), f.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reconstruction_is_linear(seed in 0u64..1000, xi in -20.0f64..20.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let space = Arc::new(BallSpace::lebesgue(0.75).unwrap());
        let params = DecompositionParams { atoms: 2, ..Default::default() };
        let dec = random_decomposition(space.clone(), d1(), &params, seed).unwrap();
        let other = random_decomposition(space, d1(), &params, seed + 1).unwrap();
        let mu = Complex64::new(re, im);
        let mut lambdas: Vec<Complex64> = dec.lambdas.iter().map(|l| l * mu).collect();
        lambdas.extend(other.lambdas.iter().cloned());
        let mut atoms = dec.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let combined = AtomicDecomposition::new(lambdas, atoms).unwrap();
        let lhs = reconstruct_f(&combined, &[xi]);
        let rhs = mu * reconstruct_f(&dec, &[xi]) + reconstruct_f(&other, &[xi]);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn atomic_norm_monotone_in_coefficients(seed in 0u64..1000, j in 0usize..3, grow in 1.0f64..3.0) {
        let space = Arc::new(BallSpace::lebesgue(0.75).unwrap());
        let params = DecompositionParams { atoms: 3, ..Default::default() };
        let dec = random_decomposition(space, d1(), &params, seed).unwrap();
        let mut bigger = dec.clone();
        bigger.lambdas[j] *= grow;
        let (a, b) = (atomic_quasi_norm(&dec, 0.6).unwrap(), atomic_quasi_norm(&bigger, 0.6).unwrap());
        prop_assert!(a <= b * (1.0 + 1e-12));
    }
}
