use cocycle_core::lab::uniform_integrability_weighted;
use cocycle_core::linalg::{exterior_power, log_plus, operator_norm, singular_values};
use cocycle_core::lyapunov::{integrated_spectrum, lambda_d_logdet, lambda_k, lambda_k_sequence};
use cocycle_core::metrics::{rho_p, tau_p};
use cocycle_core::{families, Cocycle, FiniteCyclicBase, LpExponent, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: &Matrix, b: &Matrix, rel: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1e-300);
    a.sub(b).max_abs() <= rel * scale
}

/// A random permutation base with random (or equal) weights.
fn random_base(r: &mut ChaCha8Rng, n: usize, equal: bool) -> FiniteCyclicBase {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    if equal {
        return FiniteCyclicBase::uniform(perm).unwrap();
    }
    // weights must be constant along cycles
    let cycles = FiniteCyclicBase::uniform(perm.clone()).unwrap().cycles().to_vec();
    let mut raw = vec![0.0; n];
    for c in &cycles {
        let w = r.random_range(0.05..1.0);
        c.iter().for_each(|&i| raw[i] = w);
    }
    let total: f64 = raw.iter().sum();
    FiniteCyclicBase::new(raw.iter().map(|w| w / total).collect(), perm).unwrap()
}

fn random_cocycle(r: &mut ChaCha8Rng, n: usize, d: usize) -> Cocycle<FiniteCyclicBase> {
    let base = random_base(r, n, false);
    let gens = (0..n).map(|_| families::random_gl(r, d, 1e3).unwrap()).collect();
    Cocycle::new(base, gens).unwrap()
}

/// `A` with every generator multiplied by `I + s·G`, `G` Gaussian.
fn nearby(r: &mut ChaCha8Rng, a: &Cocycle<FiniteCyclicBase>, s: f64) -> Cocycle<FiniteCyclicBase> {
    let d = a.dim();
    let changes: Vec<(usize, Matrix)> = (0..a.generators().len())
        .map(|i| {
            let g = families::random_gl(r, d, 1e6).unwrap();
            (i, Matrix::identity(d).add(&g.scaled(s)))
        })
        .collect();
    a.perturb_on_set(&changes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exterior_norm_is_singular_product(seed in any::<u64>(), d in 2usize..=6) {
        let m = families::random_gl(&mut rng(seed), d, 1e6).unwrap();
        let sv = singular_values(&m);
        let norm = operator_norm(&m);
        for k in 1..=d {
            let e = exterior_power(&m, k).unwrap().operator_norm();
            let prod: f64 = sv[..k].iter().product();
            prop_assert!((e - prod).abs() <= 1e-9 * prod);
            prop_assert!(e <= norm.powi(k as i32) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn exterior_power_is_functorial(seed in any::<u64>(), d in 2usize..=5) {
        let mut r = rng(seed);
        let m = families::random_gl(&mut r, d, 1e4).unwrap();
        let n = families::random_gl(&mut r, d, 1e4).unwrap();
        for k in 1..=d {
            let lhs = exterior_power(&m.matmul(&n), k).unwrap().into_matrix();
            let rhs = exterior_power(&m, k).unwrap().into_matrix().matmul(&exterior_power(&n, k).unwrap().into_matrix());
            prop_assert!(close(&lhs, &rhs, 1e-9));
        }
    }

    #[test]
    fn exterior_log_plus_is_lipschitz(seed in any::<u64>(), d in 2usize..=4, s in 1e-4f64..2.0) {
        let mut r = rng(seed);
        let a = families::random_gl(&mut r, d, 1e3).unwrap();
        let b = a.add(&families::random_gl(&mut r, d, 1e6).unwrap().scaled(s));
        let diff = operator_norm(&b.sub(&a));
        let inv_norm = operator_norm(&a.inverse().unwrap());
        prop_assert!(log_plus(operator_norm(&b)).unwrap() <= log_plus(operator_norm(&a)).unwrap() + diff + 1e-12);
        // for k ≥ 2 the factor k alone is not enough; k·‖A⁻¹‖ is
        for k in 1..=d {
            let lb = log_plus(exterior_power(&b, k).unwrap().operator_norm()).unwrap();
            let la = log_plus(exterior_power(&a, k).unwrap().operator_norm()).unwrap();
            prop_assert!(lb - (la + k as f64 * diff * inv_norm) <= 1e-12);
        }
    }

    #[test]
    fn scalar_log_plus_of_sum(x in 0.0f64..1e6, y in 0.0f64..1e3) {
        prop_assert!(log_plus(x + y).unwrap() <= log_plus(x).unwrap() + y + 1e-12);
    }

    #[test]
    fn cocycle_identity(seed in any::<u64>(), n_atoms in 1usize..12, d in 1usize..=4, m in 0usize..=20, n in 0usize..=20) {
        let mut r = rng(seed);
        let a = random_cocycle(&mut r, n_atoms, d);
        let x = r.random_range(0..n_atoms);
        let tn = (0..n).fold(x, |y, _| a.base().permutation()[y]);
        let lhs = a.scaled_product(x, m + n).unwrap();
        let pm = a.scaled_product(tn, m).unwrap();
        let pn = a.scaled_product(x, n).unwrap();
        let rhs = pm.mantissa().matmul(pn.mantissa());
        let shift = (pm.exponent() + pn.exponent() - lhs.exponent()) as i32;
        let rhs = rhs.scaled(2f64.powi(shift));
        prop_assert!(close(lhs.mantissa(), &rhs, 1e-9));
    }

    #[test]
    fn scaling_covariance(seed in any::<u64>(), n_atoms in 1usize..8, d in 1usize..=4, c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let a = random_cocycle(&mut r, n_atoms, d);
        let ac = a.scale(c).unwrap();
        let x = r.random_range(0..n_atoms);
        let n = r.random_range(0..10usize);
        let lhs = ac.product(x, n).unwrap();
        let rhs = a.product(x, n).unwrap().scaled(c.powi(n as i32));
        prop_assert!(close(&lhs, &rhs, 1e-12));
        let s = integrated_spectrum(&a).unwrap();
        let sc = integrated_spectrum(&ac).unwrap();
        for (u, v) in s.exponents.iter().zip(&sc.exponents) {
            prop_assert!((v - u - c.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_duality(seed in any::<u64>(), n_atoms in 1usize..10, d in 1usize..=4) {
        let a = random_cocycle(&mut rng(seed), n_atoms, d);
        let s = integrated_spectrum(&a).unwrap().exponents;
        let si = integrated_spectrum(&a.inverse_cocycle()).unwrap().exponents;
        for (u, v) in s.iter().rev().zip(&si) {
            prop_assert!((u + v).abs() < 1e-9);
        }
    }

    #[test]
    fn top_sum_is_log_det(seed in any::<u64>(), n_atoms in 1usize..10, d in 1usize..=5) {
        let a = random_cocycle(&mut rng(seed), n_atoms, d);
        let via_det = lambda_d_logdet(&a).unwrap();
        prop_assert!((lambda_k(&a, d).unwrap() - via_det).abs() < 1e-9);
        let sum: f64 = integrated_spectrum(&a).unwrap().exponents.iter().sum();
        prop_assert!((sum - via_det).abs() < 1e-9);
    }

    #[test]
    fn fekete_subadditivity(seed in any::<u64>(), n_atoms in 1usize..8, d in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_cocycle(&mut r, n_atoms, d);
        let k = r.random_range(1..=d);
        let seq = lambda_k_sequence(&a, k, 24).unwrap();
        let na = |n: usize| n as f64 * seq.values[n - 1];
        for m in 1..=12 {
            for n in 1..=12 {
                let bound = na(m) + na(n);
                prop_assert!(na(m + n) <= bound + 1e-9 * (1.0 + bound.abs()));
            }
        }
        prop_assert!(lambda_k(&a, k).unwrap() <= seq.inf() + 1e-9);
    }

    #[test]
    fn holder_chain_and_axioms(seed in any::<u64>(), n_atoms in 1usize..10, d in 1usize..=3, s in 1e-3f64..1.0) {
        let mut r = rng(seed);
        let a = random_cocycle(&mut r, n_atoms, d);
        let b = nearby(&mut r, &a, s);
        let c = nearby(&mut r, &a, s);
        let ps = [LpExponent::ONE, LpExponent::new(2.0).unwrap(), LpExponent::new(4.0).unwrap(), LpExponent::Infinity];
        let rhos: Vec<f64> = ps.iter().map(|&p| rho_p(&a, &b, p).unwrap().rho).collect();
        for w in rhos.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12));
        }
        for &p in &ps {
            let ab = rho_p(&a, &b, p).unwrap();
            prop_assert_eq!(ab.rho, rho_p(&b, &a, p).unwrap().rho);
            prop_assert_eq!(rho_p(&a, &a, p).unwrap().rho, 0.0);
            let ac = rho_p(&a, &c, p).unwrap();
            let bc = rho_p(&b, &c, p).unwrap();
            prop_assert!(ac.rho <= ab.rho + bc.rho + 1e-12);
            prop_assert_eq!(ab.rho < ac.rho, ab.tau < ac.tau);
            if ab.rho < 1.0 {
                prop_assert!(b.integrability().unwrap().is_ic);
            }
        }
        prop_assert!(tau_p(&a, &b, LpExponent::ONE).unwrap() > 0.0);
    }

    #[test]
    fn uniform_integrability_guarantee(seed in any::<u64>(), n in 1usize..40, equal in any::<bool>(), eta in 1e-3f64..1.0) {
        let mut r = rng(seed);
        let base = random_base(&mut r, n, equal);
        let w = base.weights();
        let f: Vec<f64> = (0..n).map(|_| if r.random_bool(0.2) { r.random_range(0.0..50.0) } else { r.random_range(0.0..1.0) }).collect();
        let ub = uniform_integrability_weighted(w, &f, eta).unwrap();
        for _ in 0..50 {
            // h ≥ 0 with ‖h − f‖₁ < η: spend a random share of the budget on one atom
            let mut h = f.clone();
            let i = r.random_range(0..n);
            let share = r.random_range(0.0..0.999) * eta;
            h[i] += share / w[i];
            let j = r.random_range(0..n);
            h[j] = (h[j] - r.random_range(0.0..1.0) * (eta - share) / w[j]).max(0.0);
            let dist: f64 = (0..n).map(|x| w[x] * (h[x] - f[x]).abs()).sum();
            if dist >= eta {
                continue;
            }
            let tail: f64 = (0..n).filter(|&x| h[x] > ub.k).map(|x| w[x] * h[x]).sum();
            let mass: f64 = (0..n).filter(|&x| h[x] > ub.k).map(|x| w[x]).sum();
            prop_assert!(tail < 2.0 * eta);
            prop_assert!(mass < 2.0 * eta / ub.k);
        }
    }

    #[test]
    fn integration_is_shift_invariant(seed in any::<u64>(), n in 1usize..30) {
        let mut r = rng(seed);
        let equal = r.random_bool(0.5);
        let base = random_base(&mut r, n, equal);
        let f: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let lhs = base.integrate(|x| f[base.permutation()[x]]).unwrap();
        let rhs = base.integrate(|x| f[x]).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}
