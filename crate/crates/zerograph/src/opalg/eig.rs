//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.
//!
//! Dimensions in this crate are small (at most a few hundred), where Jacobi
//! is accurate to machine precision and needs no pivoting heuristics. The
//! output is made deterministic: eigenvalues sorted descending, degenerate
//! eigenspaces re-based on projected standard basis vectors, and every
//! eigenvector phase fixed so its first component of largest magnitude is
//! real positive.

use num_complex::Complex64;

use super::cmat::CMat;
use crate::error::{Error, Result};
use crate::tol;

/// Eigensystem of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, aligned with `eigenvalues`.
    pub eigenvectors: CMat,
    /// Count of eigenvalues with magnitude above the rank cutoff.
    pub rank: usize,
}

impl Spectrum {
    /// Reassemble sum lambda_i v_i v_i^dag.
    pub fn reconstruct(&self) -> CMat {
        let n = self.eigenvectors.rows();
        let mut out = CMat::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            out = out.add(&v.outer(&v).scale_re(lam));
        }
        out
    }

    /// Operator square root over eigenvalues above the cutoff (input must be
    /// positive semidefinite for this to make sense).
    pub fn sqrt(&self) -> CMat {
        let n = self.eigenvectors.rows();
        let mut out = CMat::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            if lam > tol::RANK {
                let v = self.eigenvectors.column(k);
                out = out.add(&v.outer(&v).scale_re(lam.sqrt()));
            }
        }
        out
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, &l| m.max(l.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Diagonalize a Hermitian matrix.
pub fn eig_hermitian(a: &CMat) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows(), a.cols()),
            context: "eig_hermitian",
        });
    }
    let scale = a.hs_norm().max(1.0);
    let res = a.hermitian_residual();
    if res > tol::EXACT * scale {
        return Err(Error::NotHermitian { residual: res });
    }

    let n = a.rows();
    // symmetrized working copy
    let mut m = CMat::from_fn(n, n, |i, j| (a.at(i, j) + a.at(j, i).conj()) * 0.5);
    let mut v = CMat::identity(n);

    let frob = m.hs_norm().max(f64::MIN_POSITIVE);
    let stop = 1e-14 * frob;
    for _sweep in 0..80 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.at(p, q).norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).unwrap().then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut columns: Vec<CMat> = order.iter().map(|&i| v.column(i)).collect();

    canonicalize_clusters(&eigenvalues, &mut columns);
    for col in &mut columns {
        fix_phase(col);
    }

    let rank = eigenvalues.iter().filter(|l| l.abs() > tol::RANK).count();
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: CMat::from_columns(&columns),
        rank,
    })
}

/// One complex Jacobi rotation zeroing m[p][q].
fn rotate(m: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let g = m.at(p, q);
    let gn = g.norm();
    if gn <= 1e-300 {
        return;
    }
    let app = m.at(p, p).re;
    let aqq = m.at(q, q).re;
    let u = g / gn;
    let zeta = (aqq - app) / (2.0 * gn);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J[p][p] = c, J[p][q] = s, J[q][p] = -s conj(u), J[q][q] = c conj(u)
    let jqp = -s * u.conj();
    let jqq = c * u.conj();
    let n = m.rows();

    // columns: M <- M J
    for i in 0..n {
        let mip = m.at(i, p);
        let miq = m.at(i, q);
        m.set(i, p, mip * c + miq * jqp);
        m.set(i, q, mip * s + miq * jqq);
    }
    // rows: M <- J^dag M
    for j in 0..n {
        let mpj = m.at(p, j);
        let mqj = m.at(q, j);
        m.set(p, j, mpj * c + mqj * jqp.conj());
        m.set(q, j, mpj * s + mqj * jqq.conj());
    }
    m.set(p, q, Complex64::new(0.0, 0.0));
    m.set(q, p, Complex64::new(0.0, 0.0));
    // keep the diagonal exactly real
    let dpp = m.at(p, p);
    let dqq = m.at(q, q);
    m.set(p, p, Complex64::new(dpp.re, 0.0));
    m.set(q, q, Complex64::new(dqq.re, 0.0));

    // accumulate eigenvectors: V <- V J
    for i in 0..n {
        let vip = v.at(i, p);
        let viq = v.at(i, q);
        v.set(i, p, vip * c + viq * jqp);
        v.set(i, q, vip * s + viq * jqq);
    }
}

/// Replace the basis of each (numerically) degenerate eigenspace by the
/// pivoted Gram-Schmidt orthonormalization of projected standard basis
/// vectors. This makes the returned eigenvectors independent of rotation
/// history inside degenerate clusters.
fn canonicalize_clusters(eigenvalues: &[f64], columns: &mut [CMat]) {
    let n = columns.len();
    if n == 0 {
        return;
    }
    let scale = eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs())).max(1.0);
    let width = 1e-12 * scale;

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[end - 1] - eigenvalues[end]).abs() <= width {
            end += 1;
        }
        if end - start >= 2 {
            canonical_basis_of_span(&mut columns[start..end]);
        }
        start = end;
    }
}

fn canonical_basis_of_span(cols: &mut [CMat]) {
    let dim = cols[0].rows();
    let k = cols.len();
    // projector onto the cluster span
    let mut proj = CMat::zeros(dim, dim);
    for c in cols.iter() {
        proj = proj.add(&c.outer(c));
    }
    let candidates: Vec<CMat> = (0..dim).map(|j| proj.column(j)).collect();

    let mut selected: Vec<CMat> = Vec::with_capacity(k);
    while selected.len() < k {
        // residuals of every candidate against what is already selected
        let mut best_norm = -1.0f64;
        let mut best = None;
        for (idx, cand) in candidates.iter().enumerate() {
            let mut r = cand.clone();
            for s in &selected {
                let coeff = s.vector_inner(&r);
                r = r.sub(&s.scale(coeff));
            }
            let norm = r.vector_norm();
            if norm > best_norm * (1.0 + 1e-9) {
                best_norm = norm;
                best = Some((idx, r));
            }
        }
        let (_, r) = best.expect("cluster span must contain its own dimension");
        debug_assert!(best_norm > 1e-8, "degenerate cluster projector lost rank");
        selected.push(r.scale_re(1.0 / best_norm));
    }
    for (c, s) in cols.iter_mut().zip(selected) {
        *c = s;
    }
}

/// Multiply by a unit phase so the first component of largest magnitude is
/// real positive.
fn fix_phase(col: &mut CMat) {
    let mut max_mag = 0.0f64;
    for i in 0..col.rows() {
        max_mag = max_mag.max(col.at(i, 0).norm());
    }
    if max_mag == 0.0 {
        return;
    }
    let pivot = (0..col.rows())
        .find(|&i| col.at(i, 0).norm() >= max_mag * (1.0 - 1e-9))
        .unwrap();
    let z = col.at(pivot, 0);
    let phase = z.conj() / z.norm();
    *col = col.scale(phase);
}
