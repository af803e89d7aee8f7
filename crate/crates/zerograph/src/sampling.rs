//! Seeded random objects for searches, spot checks and tests.
//!
//! Every stochastic routine in the crate draws from a `ChaCha8Rng` seeded
//! explicitly, so runs are reproducible byte for byte.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::opalg::{eig_hermitian, CMat};

/// Counter-based stream: one independent, reproducible generator per
/// (seed, index) pair.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian sample.
pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * th.cos(), r * th.sin()) / 2f64.sqrt()
}

/// Complex Gaussian matrix (Ginibre ensemble).
pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Uniform unit vector on the sphere of C^n.
pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    loop {
        let v = ginibre(rng, n, 1);
        let norm = v.vector_norm();
        if norm > 1e-6 {
            return v.scale_re(1.0 / norm);
        }
    }
}

/// Random density matrix from a normalized Gram construction G G^dag / tr.
pub fn density_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = ginibre(rng, n, n);
    let p = g.mul(&g.adjoint());
    let t = p.trace().re;
    p.scale_re(1.0 / t)
}

/// Haar-like random unitary: Gram-Schmidt of a Ginibre matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    loop {
        let g = ginibre(rng, n, n);
        let mut cols: Vec<CMat> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v = g.column(j);
            for u in &cols {
                let coeff = u.vector_inner(&v);
                v = v.sub(&u.scale(coeff));
            }
            let norm = v.vector_norm();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols.push(v.scale_re(1.0 / norm));
        }
        if ok {
            return CMat::from_columns(&cols);
        }
    }
}

/// Random channel: Kraus family {G_k S^{-1/2}} from Ginibre blocks, trace
/// preserving by construction.
pub fn random_channel_kraus(
    rng: &mut ChaCha8Rng,
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
) -> Vec<CMat> {
    let blocks: Vec<CMat> = (0..kraus_count)
        .map(|_| ginibre(rng, dim_out, dim_in))
        .collect();
    let mut s = CMat::zeros(dim_in, dim_in);
    for b in &blocks {
        s = s.add(&b.adjoint().mul(b));
    }
    let spec = eig_hermitian(&s).expect("Gram sum is Hermitian");
    // S^{-1/2}; the Gram sum of Ginibre blocks is almost surely full rank
    let n = dim_in;
    let mut inv_sqrt = CMat::zeros(n, n);
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        assert!(lam > 1e-12, "random Kraus Gram sum lost rank");
        let v = spec.eigenvectors.column(k);
        inv_sqrt = inv_sqrt.add(&v.outer(&v).scale_re(1.0 / lam.sqrt()));
    }
    blocks.into_iter().map(|b| b.mul(&inv_sqrt)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let a1 = unit_vector(&mut stream_rng(5, 0), 4);
        let a2 = unit_vector(&mut stream_rng(5, 0), 4);
        let b = unit_vector(&mut stream_rng(5, 1), 4);
        assert_eq!(a1, a2);
        assert!(a1.max_abs_diff(&b) > 1e-3);
    }

    #[test]
    fn density_matrix_is_a_state() {
        let mut rng = seeded_rng(9);
        let rho = density_matrix(&mut rng, 4);
        assert!((rho.trace().re - 1.0).abs() <= tol::EXACT);
        assert!(rho.is_hermitian(tol::EXACT));
        let spec = eig_hermitian(&rho).unwrap();
        assert!(spec.min_eigenvalue() >= -tol::EXACT);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = seeded_rng(10);
        let u = random_unitary(&mut rng, 5);
        let utu = u.adjoint().mul(&u);
        assert!(utu.max_abs_diff(&CMat::identity(5)) <= tol::EXACT);
    }

    #[test]
    fn random_channel_is_trace_preserving() {
        let mut rng = seeded_rng(11);
        let kraus = random_channel_kraus(&mut rng, 3, 4, 2);
        let mut s = CMat::zeros(3, 3);
        for k in &kraus {
            s = s.add(&k.adjoint().mul(k));
        }
        assert!(s.max_abs_diff(&CMat::identity(3)) <= tol::EXACT);
    }
}
