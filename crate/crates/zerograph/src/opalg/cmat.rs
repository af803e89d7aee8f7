//! Dense complex matrices in row-major order.
//!
//! `CMat` is the universal carrier of this crate: operators, Kraus blocks and
//! state vectors (as n x 1 columns) are all `CMat` values. Everything is
//! immutable after construction and safe to share across threads.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense complex matrix with explicit dimensions, entries stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Which tensor factor `partial_trace` keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

impl CMat {
    /// Build a matrix from row-major entries, rejecting shape mismatches and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Column vector |k> of dimension n.
    pub fn basis_vector(n: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, 1);
        m.data[k] = Complex64::new(1.0, 0.0);
        m
    }

    /// Column vector from entries.
    pub fn col_vector(entries: &[Complex64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, factor: Complex64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> CMat {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_b = &other.data[k * other.cols..(k + 1) * other.cols];
                let row_o = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in row_o.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Hilbert-Schmidt inner product <self, other> = trace(self^dag other),
    /// conjugate-linear in the first argument.
    pub fn hs_inner(&self, other: &CMat) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entrywise distance, used for "equal to tolerance" assertions.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Asymmetry |A - A^dag| in HS norm; zero for Hermitian matrices.
    pub fn hermitian_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self.at(i, j) - self.at(j, i).conj()).norm_sqr();
            }
        }
        // every off-diagonal pair is counted twice by the loop above, matching
        // |A - A^dag|_HS exactly
        s.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_residual() <= tol * self.hs_norm().max(1.0)
    }

    /// Euclidean norm of a column vector.
    pub fn vector_norm(&self) -> f64 {
        self.hs_norm()
    }

    /// <self|other> for column vectors.
    pub fn vector_inner(&self, other: &CMat) -> Complex64 {
        self.hs_inner(other)
    }

    pub fn normalized(&self) -> CMat {
        let n = self.hs_norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scale_re(1.0 / n)
    }

    /// Outer product |self><other| of two column vectors.
    pub fn outer(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, 1);
        assert_eq!(other.cols, 1);
        let mut out = CMat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                out.data[i * other.rows + j] = self.data[i] * other.data[j].conj();
            }
        }
        out
    }

    /// Sandwich form <phi| self |psi> for column vectors.
    pub fn sandwich(&self, phi: &CMat, psi: &CMat) -> Complex64 {
        assert_eq!(phi.cols, 1);
        assert_eq!(psi.cols, 1);
        assert_eq!(self.rows, phi.rows);
        assert_eq!(self.cols, psi.rows);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            let f = phi.data[i].conj();
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut inner = Complex64::new(0.0, 0.0);
            for (a, p) in row.iter().zip(&psi.data) {
                inner += a * p;
            }
            acc += f * inner;
        }
        acc
    }

    /// Column j as an n x 1 vector.
    pub fn column(&self, j: usize) -> CMat {
        let mut out = CMat::zeros(self.rows, 1);
        for i in 0..self.rows {
            out.data[i] = self.data[i * self.cols + j];
        }
        out
    }

    /// Matrices assembled from columns.
    pub fn from_columns(cols: &[CMat]) -> CMat {
        assert!(!cols.is_empty());
        let rows = cols[0].rows;
        let mut out = CMat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.cols, 1);
            assert_eq!(c.rows, rows);
            for i in 0..rows {
                out.data[i * cols.len() + j] = c.data[i];
            }
        }
        out
    }

    /// Row-major flattening as an rc x 1 column (the vectorization used for
    /// every Hilbert-Schmidt computation in this crate).
    pub fn vectorized(&self) -> Vec<Complex64> {
        self.data.clone()
    }
}

/// Kronecker product; block (i, j) of the result equals a[i,j] * b.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let f = a.data[i * ac + j];
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for p in 0..br {
                let dst_row = i * br + p;
                for q in 0..bc {
                    out.data[dst_row * ac * bc + j * bc + q] = f * b.data[p * bc + q];
                }
            }
        }
    }
    out
}

/// Reduced operator on the kept factor of a bipartite system; the trace is
/// preserved.
pub fn partial_trace(m: &CMat, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<CMat> {
    let n = dim_a * dim_b;
    if m.rows != n || m.cols != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", m.rows, m.cols),
            context: "partial_trace",
        });
    }
    match keep {
        Subsystem::A => {
            let mut out = CMat::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..dim_b {
                        acc += m.at(i * dim_b + k, j * dim_b + k);
                    }
                    out.set(i, j, acc);
                }
            }
            Ok(out)
        }
        Subsystem::B => {
            let mut out = CMat::zeros(dim_b, dim_b);
            for p in 0..dim_b {
                for q in 0..dim_b {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..dim_a {
                        acc += m.at(k * dim_b + p, k * dim_b + q);
                    }
                    out.set(p, q, acc);
                }
            }
            Ok(out)
        }
    }
}

// JSON encoding: {"rows": r, "cols": c, "data": [[re, im], ...]} row-major.
#[derive(Serialize, Deserialize)]
struct CMatWire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = CMatWire {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = CMatWire::deserialize(deserializer)?;
        let data = wire
            .data
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        CMat::new(wire.rows, wire.cols, data).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn new_rejects_bad_shapes_and_nan() {
        assert!(matches!(
            CMat::new(2, 2, vec![c(1.0, 0.0); 3]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            CMat::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFiniteEntry)
        ));
    }

    #[test]
    fn tensor_identity_case() {
        let i2 = CMat::identity(2);
        assert_eq!(tensor(&i2, &i2), CMat::identity(4));
    }

    #[test]
    fn tensor_of_diagonal_unitary_squares_the_phase() {
        // U = diag(eta, conj(eta)) with eta = exp(i pi/4); U (x) U = diag(i, 1, 1, -i)
        let eta = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let u = CMat::from_fn(2, 2, |i, j| {
            if i != j {
                c(0.0, 0.0)
            } else if i == 0 {
                eta
            } else {
                eta.conj()
            }
        });
        let uu = tensor(&u, &u);
        let expected = CMat::from_fn(4, 4, |i, j| {
            if i != j {
                return c(0.0, 0.0);
            }
            match i {
                0 => c(0.0, 1.0),
                3 => c(0.0, -1.0),
                _ => c(1.0, 0.0),
            }
        });
        assert!(uu.max_abs_diff(&expected) <= tol::EXACT);
    }

    #[test]
    fn tensor_of_basis_vectors() {
        let e0 = CMat::basis_vector(4, 0);
        let t = tensor(&e0, &e0);
        assert_eq!(t.rows(), 16);
        assert_eq!(t.cols(), 1);
        assert_eq!(t.at(0, 0), c(1.0, 0.0));
        assert!((1..16).all(|k| t.at(k, 0).norm() == 0.0));
    }

    #[test]
    fn tensor_is_associative_up_to_reshaping() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_mat(&mut rng, 2, 3);
            let b = random_mat(&mut rng, 3, 2);
            let d = random_mat(&mut rng, 2, 2);
            let left = tensor(&tensor(&a, &b), &d);
            let right = tensor(&a, &tensor(&b, &d));
            assert!(left.max_abs_diff(&right) <= tol::EXACT);
        }
    }

    #[test]
    fn tensor_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_mat(&mut rng, 2, 2);
        let b = random_mat(&mut rng, 2, 2);
        let d = random_mat(&mut rng, 3, 3);
        let lhs = tensor(&a.add(&b), &d);
        let rhs = tensor(&a, &d).add(&tensor(&b, &d));
        assert!(lhs.max_abs_diff(&rhs) <= tol::EXACT);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_mat(&mut rng, 3, 3);
        let mut sigma = random_mat(&mut rng, 2, 2);
        // normalize sigma to unit trace
        let t = sigma.trace();
        sigma = sigma.scale(Complex64::new(1.0, 0.0) / t);
        let joint = tensor(&rho, &sigma);
        let reduced = partial_trace(&joint, 3, 2, Subsystem::A).unwrap();
        assert!(reduced.max_abs_diff(&rho) <= tol::EXACT);
        let other = partial_trace(&joint, 3, 2, Subsystem::B).unwrap();
        assert!(other.max_abs_diff(&sigma.scale(rho.trace())) <= 1e-9);
    }

    #[test]
    fn partial_trace_identity() {
        let reduced = partial_trace(&CMat::identity(4), 2, 2, Subsystem::A).unwrap();
        assert!(reduced.max_abs_diff(&CMat::identity(2).scale_re(2.0)) <= tol::EXACT);
    }

    #[test]
    fn partial_trace_of_code_vector_projector() {
        // phi_0 = (|1>|1> + |2>|2|)/sqrt(2) in C4 (x) C4; tracing the second
        // factor leaves (|1><1| + |2><2|)/2.
        let mut phi = CMat::zeros(16, 1);
        phi.set(0, 0, c(1.0 / 2f64.sqrt(), 0.0));
        phi.set(5, 0, c(1.0 / 2f64.sqrt(), 0.0));
        let proj = phi.outer(&phi);
        let reduced = partial_trace(&proj, 4, 4, Subsystem::A).unwrap();
        let mut expected = CMat::zeros(4, 4);
        expected.set(0, 0, c(0.5, 0.0));
        expected.set(1, 1, c(0.5, 0.0));
        assert!(reduced.max_abs_diff(&expected) <= tol::EXACT);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = random_mat(&mut rng, 6, 6);
        let ra = partial_trace(&m, 2, 3, Subsystem::A).unwrap();
        let rb = partial_trace(&m, 2, 3, Subsystem::B).unwrap();
        assert!((ra.trace() - m.trace()).norm() <= tol::EXACT);
        assert!((rb.trace() - m.trace()).norm() <= tol::EXACT);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        assert!(partial_trace(&CMat::identity(5), 2, 2, Subsystem::A).is_err());
    }

    #[test]
    fn adjoint_and_hs_inner_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_mat(&mut rng, 3, 3);
        let b = random_mat(&mut rng, 3, 3);
        let direct = a.hs_inner(&b);
        let via_trace = a.adjoint().mul(&b).trace();
        assert!((direct - via_trace).norm() <= tol::EXACT);
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let m = CMat::new(
            1,
            2,
            vec![c(0.1 + 1.0 / 3.0, -2.0f64.sqrt()), c(1e-17, 123_456.789_012_345_67)],
        )
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: CMat = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
        // and the wire format is the documented one
        assert!(s.starts_with("{\"rows\":1,\"cols\":2,\"data\":[["));
    }

    #[test]
    fn json_rejects_non_finite() {
        let s = "{\"rows\":1,\"cols\":1,\"data\":[[1e999,0.0]]}";
        assert!(serde_json::from_str::<CMat>(s).is_err());
    }
}
