//! Operator subspaces under the Hilbert-Schmidt inner product.
//!
//! A subspace is stored as an HS-orthonormal basis produced by a one-sided
//! Jacobi SVD of the stacked, row-major vectorized generators. The SVD route
//! keeps rank decisions independent of generator order and resolves
//! dependent generators to singular values near machine epsilon instead of
//! the sqrt(eps) floor a Gram-matrix route would give.

use num_complex::Complex64;

use super::cmat::CMat;
use crate::error::{Error, Result};
use crate::tol;

/// Finite-dimensional operator subspace with an HS-orthonormal basis.
#[derive(Clone, Debug)]
pub struct OperatorSpace {
    ambient_dim: usize,
    basis: Vec<CMat>,
}

/// Outcome of a membership test: projection residual is always reported.
#[derive(Clone, Copy, Debug)]
pub struct Membership {
    pub contained: bool,
    pub residual: f64,
}

impl OperatorSpace {
    /// HS-orthonormal span of the given n x n generators.
    pub fn span(mats: &[CMat], n: usize) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::EmptySpan);
        }
        for m in mats {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("{n}x{n}"),
                    got: format!("{}x{}", m.rows(), m.cols()),
                    context: "span",
                });
            }
        }
        // drop generators below the rank cutoff, normalize the rest
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for m in mats {
            let norm = m.hs_norm();
            if norm > tol::RANK {
                rows.push(m.entries().iter().map(|z| z / norm).collect());
            }
        }
        if rows.is_empty() {
            return Err(Error::EmptySpan);
        }

        orthogonalize_rows(&mut rows);

        let mut with_norms: Vec<(f64, usize)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (row_norm(r), i))
            .collect();
        with_norms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let sigma_max = with_norms[0].0;

        let mut basis = Vec::new();
        for &(sigma, idx) in &with_norms {
            if sigma > tol::RANK * sigma_max {
                let data: Vec<Complex64> = rows[idx].iter().map(|z| z / sigma).collect();
                basis.push(CMat::new(n, n, data)?);
            }
        }
        Ok(Self {
            ambient_dim: n,
            basis,
        })
    }

    /// Wrap an already HS-orthonormal family (validated).
    pub fn from_orthonormal(basis: Vec<CMat>, n: usize) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptySpan);
        }
        let space = Self {
            ambient_dim: n,
            basis,
        };
        let g = space.gram_residual();
        if g > tol::EXACT {
            return Err(Error::InvalidConfig(format!(
                "basis is not HS-orthonormal (Gram residual {g:.3e})"
            )));
        }
        Ok(space)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    /// Deviation of the basis Gram matrix from the identity.
    pub fn gram_residual(&self) -> f64 {
        let k = self.basis.len();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let g = self.basis[i].hs_inner(&self.basis[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - Complex64::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out = out.add(&b.scale(b.hs_inner(m)));
        }
        out
    }

    /// Membership test with reported residual.
    pub fn contains(&self, m: &CMat) -> Result<Membership> {
        if m.rows() != self.ambient_dim || m.cols() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.ambient_dim),
                got: format!("{}x{}", m.rows(), m.cols()),
                context: "contains",
            });
        }
        let residual = m.sub(&self.project(m)).hs_norm();
        Ok(Membership {
            contained: residual <= tol::MEMBER * m.hs_norm().max(1.0),
            residual,
        })
    }

    /// Largest membership residual of `other`'s basis in `self`.
    pub fn containment_residual(&self, other: &OperatorSpace) -> Result<f64> {
        let mut worst = 0.0f64;
        for b in other.basis() {
            worst = worst.max(self.contains(b)?.residual);
        }
        Ok(worst)
    }

    /// Space equality by mutual containment of bases.
    pub fn equals(&self, other: &OperatorSpace) -> Result<bool> {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return Ok(false);
        }
        let fwd = self.containment_residual(other)?;
        let bwd = other.containment_residual(self)?;
        Ok(fwd <= tol::MEMBER && bwd <= tol::MEMBER)
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(&CMat::identity(self.ambient_dim))
            .map(|m| m.contained)
            .unwrap_or(false)
    }

    /// True when the adjoint of every basis element lies back in the span.
    pub fn is_adjoint_closed(&self) -> bool {
        self.basis
            .iter()
            .all(|b| self.contains(&b.adjoint()).map(|m| m.contained).unwrap_or(false))
    }

    /// The two conditions a subspace must satisfy to be the noncommutative
    /// graph of some channel: symmetric (adjoint-closed) and containing the
    /// unit matrix.
    pub fn check_graph_conditions(&self) -> Result<()> {
        let has_identity = self.contains_identity();
        let adjoint_closed = self.is_adjoint_closed();
        if has_identity && adjoint_closed {
            Ok(())
        } else {
            Err(Error::GraphCondition {
                has_identity,
                adjoint_closed,
            })
        }
    }

    /// Tensor product space: elementary tensors of the two bases, which are
    /// HS-orthonormal by construction.
    pub fn tensor(a: &OperatorSpace, b: &OperatorSpace) -> OperatorSpace {
        let n = a.ambient_dim * b.ambient_dim;
        let mut basis = Vec::with_capacity(a.dim() * b.dim());
        for x in &a.basis {
            for y in &b.basis {
                basis.push(super::cmat::tensor(x, y));
            }
        }
        OperatorSpace {
            ambient_dim: n,
            basis,
        }
    }
}

fn row_norm(r: &[Complex64]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One-sided Jacobi: rotate row pairs until all are mutually orthogonal.
/// Row norms then equal the singular values of the stacked matrix and the
/// normalized rows are the corresponding right singular vectors.
fn orthogonalize_rows(rows: &mut [Vec<Complex64>]) {
    let k = rows.len();
    if k < 2 {
        return;
    }
    let max_norm0 = rows.iter().map(|r| row_norm(r)).fold(0.0, f64::max);
    let negligible = (1e-14 * max_norm0).powi(2);

    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b, c) = pair_gram(&rows[i], &rows[j]);
                if a <= negligible || b <= negligible {
                    continue;
                }
                let cn = c.norm();
                if cn <= 1e-14 * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                // diagonalize [[a, c], [conj(c), b]] and mix the two rows by
                // the transposed eigenvector matrix
                let u = c / cn;
                let zeta = (b - a) / (2.0 * cn);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let jqp = -sn * u.conj();
                let jqq = cs * u.conj();
                let (ri, rj) = split_pair(rows, i, j);
                for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
                    let gi = *x;
                    let gj = *y;
                    *x = gi * cs + gj * jqp;
                    *y = gi * sn + gj * jqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn pair_gram(a: &[Complex64], b: &[Complex64]) -> (f64, f64, Complex64) {
    let mut na = 0.0;
    let mut nb = 0.0;
    let mut c = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        na += x.norm_sqr();
        nb += y.norm_sqr();
        c += x.conj() * y;
    }
    (na, nb, c)
}

fn split_pair<T>(slice: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    debug_assert!(i < j);
    let (left, right) = slice.split_at_mut(j);
    (&mut left[i], &mut right[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_mat(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        CMat::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn span_of_identity_is_one_dimensional() {
        let s = OperatorSpace::span(&[CMat::identity(4)], 4).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.ambient_dim(), 4);
        assert!(s.gram_residual() <= tol::EXACT);
    }

    #[test]
    fn span_rejects_empty_and_zero() {
        assert!(matches!(
            OperatorSpace::span(&[], 2),
            Err(Error::EmptySpan)
        ));
        assert!(matches!(
            OperatorSpace::span(&[CMat::zeros(2, 2)], 2),
            Err(Error::EmptySpan)
        ));
    }

    #[test]
    fn span_detects_dependence_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_mat(&mut rng, 3);
        let b = random_mat(&mut rng, 3);
        let combo = a.scale(c(0.3, -1.2)).add(&b.scale(c(0.0, 2.0)));
        let s = OperatorSpace::span(&[a.clone(), b.clone(), combo], 3).unwrap();
        assert_eq!(s.dim(), 2);
        // and duplicated generators collapse
        let s2 = OperatorSpace::span(&[a.clone(), a.clone(), a], 3).unwrap();
        assert_eq!(s2.dim(), 1);
    }

    #[test]
    fn span_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let gens: Vec<CMat> = (0..5).map(|_| random_mat(&mut rng, 4)).collect();
        let s = OperatorSpace::span(&gens, 4).unwrap();
        let s2 = OperatorSpace::span(s.basis(), 4).unwrap();
        assert_eq!(s.dim(), s2.dim());
        assert!(s.equals(&s2).unwrap());
    }

    #[test]
    fn contains_reports_residuals() {
        let s = OperatorSpace::span(&[CMat::identity(4)], 4).unwrap();
        let m = s.contains(&CMat::identity(4).scale_re(2.0)).unwrap();
        assert!(m.contained);
        assert!(m.residual <= 1e-12);

        let mut e01 = CMat::zeros(4, 4);
        e01.set(0, 1, c(1.0, 0.0));
        let m2 = s.contains(&e01).unwrap();
        assert!(!m2.contained);
        assert!((m2.residual - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn equality_is_an_equivalence_on_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let gens: Vec<CMat> = (0..3).map(|_| random_mat(&mut rng, 3)).collect();
        let a = OperatorSpace::span(&gens, 3).unwrap();
        // same span from scrambled generators
        let scrambled = vec![
            gens[2].scale(c(0.0, 1.0)),
            gens[0].add(&gens[1]),
            gens[1].scale(c(-2.0, 0.5)),
        ];
        let b = OperatorSpace::span(&scrambled, 3).unwrap();
        assert!(a.equals(&a).unwrap());
        assert!(a.equals(&b).unwrap());
        assert!(b.equals(&a).unwrap());
        let other = OperatorSpace::span(&[CMat::identity(3)], 3).unwrap();
        assert!(!a.equals(&other).unwrap());
    }

    #[test]
    fn tensor_space_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let a = OperatorSpace::span(&[random_mat(&mut rng, 2), random_mat(&mut rng, 2)], 2).unwrap();
        let b = OperatorSpace::span(&[random_mat(&mut rng, 3)], 3).unwrap();
        let t = OperatorSpace::tensor(&a, &b);
        assert_eq!(t.dim(), a.dim() * b.dim());
        assert_eq!(t.ambient_dim(), 6);
        assert!(t.gram_residual() <= tol::EXACT);
    }

    #[test]
    fn graph_conditions() {
        let s = OperatorSpace::span(&[CMat::identity(2)], 2).unwrap();
        assert!(s.check_graph_conditions().is_ok());

        let mut e01 = CMat::zeros(2, 2);
        e01.set(0, 1, c(1.0, 0.0));
        let bad = OperatorSpace::span(&[e01], 2).unwrap();
        match bad.check_graph_conditions() {
            Err(Error::GraphCondition {
                has_identity,
                adjoint_closed,
            }) => {
                assert!(!has_identity);
                assert!(!adjoint_closed);
            }
            other => panic!("expected graph-condition error, got {other:?}"),
        }
    }
}
