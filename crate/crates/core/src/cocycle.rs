//! Linear cocycles `A: X -> GL(d, R)` over a base system, their iterated
//! products `Aⁿ(x) = A(T^{n-1}x)···A(x)`, inverses and scalings.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::base::BaseSystem;
use crate::error::{Error, Result};
use crate::linalg::{exterior_power, log_plus_norm, operator_norm, Matrix, ScaledMatrix};

/// A cocycle assigns generator `generators[label(x)]` to the base point `x`.
#[derive(Clone, Debug)]
pub struct Cocycle<B: BaseSystem> {
    base: Arc<B>,
    generators: Vec<Matrix>,
    inverses: Vec<Matrix>,
    dim: usize,
}

/// `∫ log⁺‖A‖` and `∫ log⁺‖A⁻¹‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrabilityReport {
    pub int_log_plus_a: f64,
    pub int_log_plus_a_inv: f64,
    pub is_ic: bool,
}

impl<B: BaseSystem> Cocycle<B> {
    /// One generator per base label; every generator must be invertible.
    pub fn new(base: impl Into<Arc<B>>, generators: Vec<Matrix>) -> Result<Self> {
        let base = base.into();
        if generators.len() != base.n_labels() {
            return Err(Error::DimensionMismatch { expected: base.n_labels(), found: generators.len() });
        }
        let dim = generators[0].dim();
        let mut inverses = Vec::with_capacity(generators.len());
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
            }
            inverses.push(g.inverse()?);
        }
        Ok(Self { base, generators, inverses, dim })
    }

    pub fn constant(base: impl Into<Arc<B>>, m: Matrix) -> Result<Self> {
        let base = base.into();
        let n = base.n_labels();
        Self::new(base, alloc::vec![m; n])
    }

    pub fn identity(base: impl Into<Arc<B>>, dim: usize) -> Result<Self> {
        Self::constant(base, Matrix::identity(dim))
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<B> {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn inverse_generators(&self) -> &[Matrix] {
        &self.inverses
    }

    /// `A(x)`.
    pub fn at(&self, x: B::Point) -> Result<&Matrix> {
        Ok(&self.generators[self.base.label(x)?])
    }

    /// `A(x)⁻¹`.
    pub fn inverse_at(&self, x: B::Point) -> Result<&Matrix> {
        Ok(&self.inverses[self.base.label(x)?])
    }

    /// Whether both cocycles live over the same base system.
    pub fn same_base(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.same_base(other) {
            return Err(Error::BaseMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// `Aⁿ(x)`; fails if an entry leaves the floating-point range.
    pub fn product(&self, x: B::Point, n: usize) -> Result<Matrix> {
        let mut p = Matrix::identity(self.dim);
        for (step, label) in self.base.orbit_labels(x, n)?.into_iter().enumerate() {
            p = self.generators[label].matmul(&p);
            if !p.is_finite() {
                return Err(Error::ProductOverflow { steps: step + 1 });
            }
        }
        Ok(p)
    }

    /// `Aⁿ(x)` in power-of-two scaled form, for products of any length.
    pub fn scaled_product(&self, x: B::Point, n: usize) -> Result<ScaledMatrix> {
        let mut p = ScaledMatrix::identity(self.dim);
        for label in self.base.orbit_labels(x, n)? {
            p.left_mul(&self.generators[label]);
        }
        Ok(p)
    }

    /// `∧^k A(·)` for every label.
    pub fn compound_generators(&self, k: usize) -> Result<Vec<Matrix>> {
        self.generators.iter().map(|g| Ok(exterior_power(g, k)?.into_matrix())).collect()
    }

    /// The cocycle `x ↦ A(T⁻¹x)⁻¹` over `T⁻¹`. Its products are exact
    /// inverses of the products of `A`, so its exponents are `-λ_d ≥ … ≥ -λ_1`.
    pub fn inverse_cocycle(&self) -> Self {
        let (base, relabel) = self.base.inverse_system();
        let pick = |v: &[Matrix]| relabel.iter().map(|&l| v[l].clone()).collect();
        Self { base: Arc::new(base), generators: pick(&self.inverses), inverses: pick(&self.generators), dim: self.dim }
    }

    /// The cocycle `x ↦ A(x)⁻¹` over the same map `T`.
    pub fn pointwise_inverse(&self) -> Self {
        Self {
            base: self.base.clone(),
            generators: self.inverses.clone(),
            inverses: self.generators.clone(),
            dim: self.dim,
        }
    }

    /// `c·A` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain { what: "scale factor", value: c });
        }
        let generators = self.generators.iter().map(|g| g.scaled(c)).collect();
        let inverses = self.inverses.iter().map(|g| g.scaled(1.0 / c)).collect();
        Ok(Self { base: self.base.clone(), generators, inverses, dim: self.dim })
    }

    /// Same base, with generator `l` replaced for each `(l, M)`.
    pub fn with_generators(&self, changes: &[(usize, Matrix)]) -> Result<Self> {
        let mut generators = self.generators.clone();
        let mut inverses = self.inverses.clone();
        for (l, m) in changes {
            if *l >= generators.len() {
                return Err(Error::InvalidPoint { point: *l, n_atoms: generators.len() });
            }
            if m.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: m.dim() });
            }
            inverses[*l] = m.inverse()?;
            generators[*l] = m.clone();
        }
        Ok(Self { base: self.base.clone(), generators, inverses, dim: self.dim })
    }

    /// `B(l) = R_l·A(l)` on the listed labels, `B = A` elsewhere.
    pub fn perturb_on_set(&self, changes: &[(usize, Matrix)]) -> Result<Self> {
        let mut replaced = Vec::with_capacity(changes.len());
        for (l, r) in changes {
            let a = self.generators.get(*l).ok_or(Error::InvalidPoint { point: *l, n_atoms: self.generators.len() })?;
            if r.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: r.dim() });
            }
            r.inverse()?;
            replaced.push((*l, r.matmul(a)));
        }
        self.with_generators(&replaced)
    }

    /// Exact `Σ_l w_l·f(A_l)` against the label law.
    pub fn integrate_generators(&self, f: impl Fn(usize, &Matrix) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (l, (&w, g)) in self.base.label_weights().iter().zip(&self.generators).enumerate() {
            if w == 0.0 {
                continue;
            }
            let v = f(l, g);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: l });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    pub fn integrability(&self) -> Result<IntegrabilityReport> {
        let plus = self.integrate_generators(|_, g| log_plus_norm(operator_norm(g)))?;
        let minus = self.integrate_generators(|l, _| log_plus_norm(operator_norm(&self.inverses[l])))?;
        Ok(IntegrabilityReport {
            int_log_plus_a: plus,
            int_log_plus_a_inv: minus,
            is_ic: plus.is_finite() && minus.is_finite(),
        })
    }
}

impl<B: BaseSystem> PartialEq for Cocycle<B> {
    fn eq(&self, other: &Self) -> bool {
        self.same_base(other) && self.generators == other.generators
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::{FiniteCyclicBase, SampledBase, SampledPoint};
    use core::f64::consts::{FRAC_PI_2, LN_2};

    fn cyclic(n: usize) -> FiniteCyclicBase {
        FiniteCyclicBase::cyclic(n).unwrap()
    }

    fn m(rows: [[f64; 2]; 2]) -> Matrix {
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn product_definition() {
        let m0 = m([[1.0, 2.0], [0.0, 1.0]]);
        let m1 = m([[0.0, -1.0], [1.0, 3.0]]);
        let a = Cocycle::new(cyclic(2), alloc::vec![m0.clone(), m1.clone()]).unwrap();
        assert_eq!(a.product(0, 0).unwrap(), Matrix::identity(2));
        assert_eq!(a.product(0, 2).unwrap(), m1.matmul(&m0));
        assert_eq!(a.product(1, 2).unwrap(), m0.matmul(&m1));
        let c = Cocycle::constant(cyclic(3), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        assert_eq!(c.product(1, 5).unwrap(), Matrix::diagonal(&[32.0, 1.0 / 32.0]));
    }

    #[test]
    fn overflow_is_reported() {
        let c = Cocycle::constant(cyclic(1), Matrix::diagonal(&[1e200, 1e-200])).unwrap();
        assert!(matches!(c.product(0, 3), Err(Error::ProductOverflow { steps: 2 })));
        let s = c.scaled_product(0, 3).unwrap();
        assert!((s.log_operator_norm() - 600.0 * core::f64::consts::LN_10).abs() < 1e-9);
    }

    #[test]
    fn inverse_cocycle_inverts_products() {
        let gens = alloc::vec![
            m([[1.0, 2.0], [0.5, 3.0]]),
            m([[0.0, -1.0], [1.0, 0.2]]),
            m([[2.0, 0.0], [1.0, 0.5]]),
        ];
        let base = FiniteCyclicBase::new(alloc::vec![1.0 / 3.0; 3], alloc::vec![2, 0, 1]).unwrap();
        let a = Cocycle::new(base, gens).unwrap();
        let inv = a.inverse_cocycle();
        for x in 0..3 {
            for n in 1..6 {
                // (A^{-1})^n(x) = (A^n(T^{-n}x))^{-1}
                let mut y = x;
                for _ in 0..n {
                    y = a.base().apply_inverse(y).unwrap();
                }
                let want = a.product(y, n).unwrap().inverse().unwrap();
                let got = inv.product(x, n).unwrap();
                assert!(got.sub(&want).max_abs() < 1e-10 * want.max_abs());
            }
        }
        let twice = inv.inverse_cocycle();
        assert_eq!(twice.product(1, 4).unwrap(), a.product(1, 4).unwrap());
    }

    #[test]
    fn inverse_over_sampled_shift() {
        let base = SampledBase::bernoulli(alloc::vec![0.5, 0.5], 9).unwrap();
        let a = Cocycle::new(base, alloc::vec![m([[2.0, 1.0], [0.0, 0.5]]), m([[0.0, -1.0], [1.0, 1.0]])]).unwrap();
        let inv = a.inverse_cocycle();
        let x = SampledPoint::new(4, 0);
        let n = 7;
        let mut y = x;
        for _ in 0..n {
            y = a.base().apply_inverse(y).unwrap();
        }
        let want = a.product(y, n).unwrap().inverse().unwrap();
        assert!(inv.product(x, n).unwrap().sub(&want).max_abs() < 1e-9 * want.max_abs());
    }

    #[test]
    fn constant_inverse_is_constant_inverse() {
        let a = Cocycle::constant(cyclic(4), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        let inv = a.inverse_cocycle();
        assert!(inv.generators().iter().all(|g| *g == Matrix::diagonal(&[0.5, 2.0])));
    }

    #[test]
    fn scaling() {
        let a = Cocycle::constant(cyclic(2), m([[1.0, 1.0], [0.0, 1.0]])).unwrap();
        assert_eq!(a.scale(1.0).unwrap(), a);
        assert!(a.scale(0.0).is_err() && a.scale(-2.0).is_err());
        let s = a.scale(3.0).unwrap();
        assert_eq!(s.product(0, 4).unwrap(), a.product(0, 4).unwrap().scaled(81.0));
    }

    #[test]
    fn integrability_reports() {
        let id = Cocycle::identity(cyclic(3), 2).unwrap();
        let r = id.integrability().unwrap();
        assert_eq!((r.int_log_plus_a, r.int_log_plus_a_inv, r.is_ic), (0.0, 0.0, true));
        let d = Cocycle::constant(cyclic(3), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        let r = d.integrability().unwrap();
        assert!((r.int_log_plus_a - LN_2).abs() < 1e-15 && (r.int_log_plus_a_inv - LN_2).abs() < 1e-15);
    }

    #[test]
    fn perturbations() {
        let a = Cocycle::constant(cyclic(3), Matrix::diagonal(&[2.0, 0.5])).unwrap();
        assert_eq!(a.perturb_on_set(&[]).unwrap(), a);
        assert_eq!(a.perturb_on_set(&[(1, Matrix::identity(2))]).unwrap(), a);
        let b = a.perturb_on_set(&[(2, Matrix::rotation(FRAC_PI_2))]).unwrap();
        assert_eq!(b.generators()[0], a.generators()[0]);
        assert_ne!(b.generators()[2], a.generators()[2]);
        assert!(a.perturb_on_set(&[(0, Matrix::zeros(2))]).is_err());
        assert!(a.perturb_on_set(&[(5, Matrix::identity(2))]).is_err());
    }

    #[test]
    fn rejects_mismatched_inputs() {
        assert!(Cocycle::new(cyclic(2), alloc::vec![Matrix::identity(2)]).is_err());
        assert!(Cocycle::new(cyclic(2), alloc::vec![Matrix::identity(2), Matrix::identity(3)]).is_err());
        assert!(matches!(
            Cocycle::new(cyclic(1), alloc::vec![m([[1.0, 2.0], [2.0, 4.0]])]),
            Err(Error::Singular { .. })
        ));
    }
}
