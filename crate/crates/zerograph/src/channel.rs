//! Quantum channels in Kraus form.
//!
//! Covers validation, application, the complementary channel, noncommutative
//! graph extraction, Choi matrices, positive bases of operator subspaces and
//! the pseudo-diagonal construction that realizes a prescribed graph.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{eig_hermitian, tensor, CMat, OperatorSpace};
use crate::tol;

/// Completely positive trace-preserving map, stored as a finite Kraus family
/// of `dim_out x dim_in` blocks. The environment dimension is the number of
/// Kraus operators.
#[derive(Clone, Debug, Serialize)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

// imports re-validate: shapes and trace preservation are invariants, not
// trusted input
impl<'de> Deserialize<'de> for QuantumChannel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            dim_in: usize,
            dim_out: usize,
            kraus: Vec<CMat>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let ch = make_channel(wire.kraus).map_err(D::Error::custom)?;
        if ch.dim_in != wire.dim_in || ch.dim_out != wire.dim_out {
            return Err(D::Error::custom("declared dimensions do not match Kraus blocks"));
        }
        Ok(ch)
    }
}

impl QuantumChannel {
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// |sum K^dag K - I| in HS norm.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut s = CMat::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s = s.add(&k.adjoint().mul(k));
        }
        s.sub(&CMat::identity(self.dim_in)).hs_norm()
    }
}

/// Validate a Kraus family into a channel.
pub fn make_channel(kraus: Vec<CMat>) -> Result<QuantumChannel> {
    if kraus.is_empty() {
        return Err(Error::EmptyKraus);
    }
    let dim_out = kraus[0].rows();
    let dim_in = kraus[0].cols();
    for (index, k) in kraus.iter().enumerate() {
        if k.rows() != dim_out || k.cols() != dim_in {
            return Err(Error::KrausShape {
                index,
                rows: dim_out,
                cols: dim_in,
                got_rows: k.rows(),
                got_cols: k.cols(),
            });
        }
    }
    let ch = QuantumChannel {
        dim_in,
        dim_out,
        kraus,
    };
    let deviation = ch.trace_preservation_residual();
    if deviation > tol::EXACT {
        return Err(Error::TracePreservation { deviation });
    }
    Ok(ch)
}

/// Apply the channel: sum K rho K^dag.
pub fn apply(ch: &QuantumChannel, rho: &CMat) -> Result<CMat> {
    if rho.rows() != ch.dim_in || rho.cols() != ch.dim_in {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", ch.dim_in),
            got: format!("{}x{}", rho.rows(), rho.cols()),
            context: "apply",
        });
    }
    let mut out = CMat::zeros(ch.dim_out, ch.dim_out);
    for k in &ch.kraus {
        out = out.add(&k.mul(rho).mul(&k.adjoint()));
    }
    Ok(out)
}

/// Complementary channel from the shared Stinespring isometry: the b-th
/// Kraus operator of the complement collects row b of every K_k, so that
/// the output entries are trace(K_l^dag K_k rho).
pub fn complementary(ch: &QuantumChannel) -> QuantumChannel {
    let e = ch.env_dim();
    let mut kraus = Vec::with_capacity(ch.dim_out);
    for b in 0..ch.dim_out {
        let mut m = CMat::zeros(e, ch.dim_in);
        for (k, op) in ch.kraus.iter().enumerate() {
            for a in 0..ch.dim_in {
                m.set(k, a, op.at(b, a));
            }
        }
        kraus.push(m);
    }
    // trace preservation carries over exactly from the original family
    QuantumChannel {
        dim_in: ch.dim_in,
        dim_out: e,
        kraus,
    }
}

/// Noncommutative graph span{K_l^dag K_k}. Contains the identity and is
/// closed under adjoint for every valid channel.
pub fn ncgraph(ch: &QuantumChannel) -> OperatorSpace {
    let mut products = Vec::with_capacity(ch.kraus.len() * ch.kraus.len());
    for l in &ch.kraus {
        let ladj = l.adjoint();
        for k in &ch.kraus {
            products.push(ladj.mul(k));
        }
    }
    OperatorSpace::span(&products, ch.dim_in).expect("graph span of a valid channel is nonempty")
}

/// Tensor product channel with Kraus family {K_k (x) L_l}.
pub fn tensor_channels(a: &QuantumChannel, b: &QuantumChannel) -> QuantumChannel {
    let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
    for ka in &a.kraus {
        for kb in &b.kraus {
            kraus.push(tensor(ka, kb));
        }
    }
    QuantumChannel {
        dim_in: a.dim_in * b.dim_in,
        dim_out: a.dim_out * b.dim_out,
        kraus,
    }
}

/// Choi matrix sum_{ij} |i><j| (x) Phi(|i><j|); positive semidefinite, its
/// partial trace over the output factor is the input identity, and its rank
/// is the minimal Kraus number.
pub fn choi(ch: &QuantumChannel) -> CMat {
    let (da, db) = (ch.dim_in, ch.dim_out);
    let n = da * db;
    let mut out = CMat::zeros(n, n);
    // C[(i,p),(j,q)] = sum_k K_k[p,i] conj(K_k[q,j])
    for k in &ch.kraus {
        for i in 0..da {
            for p in 0..db {
                let left = k.at(p, i);
                if left.re == 0.0 && left.im == 0.0 {
                    continue;
                }
                for j in 0..da {
                    for q in 0..db {
                        let v = left * k.at(q, j).conj();
                        let r = i * db + p;
                        let c = j * db + q;
                        out.set(r, c, out.at(r, c) + v);
                    }
                }
            }
        }
    }
    out
}

/// Rank of the Choi matrix = minimal number of Kraus operators.
pub fn choi_rank(ch: &QuantumChannel) -> usize {
    eig_hermitian(&choi(ch)).expect("Choi matrix is Hermitian").rank
}

/// Representation-independent channel equality: HS distance of Choi matrices.
pub fn choi_distance(a: &QuantumChannel, b: &QuantumChannel) -> f64 {
    choi(a).sub(&choi(b)).hs_norm()
}

/// Basis of positive operators spanning an operator subspace and summing to
/// the identity.
#[derive(Clone, Debug, Serialize)]
pub struct PositiveBasis {
    ops: Vec<CMat>,
}

impl<'de> Deserialize<'de> for PositiveBasis {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            ops: Vec<CMat>,
        }
        let wire = Wire::deserialize(deserializer)?;
        PositiveBasis::new(wire.ops).map_err(D::Error::custom)
    }
}

impl PositiveBasis {
    /// Validate: each op Hermitian positive semidefinite, the family sums to
    /// the identity and is linearly independent.
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::NotPositive {
                reason: "empty operator list".into(),
            });
        }
        let n = ops[0].rows();
        let mut sum = CMat::zeros(n, n);
        for (i, op) in ops.iter().enumerate() {
            if !op.is_square() || op.rows() != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("{n}x{n}"),
                    got: format!("{}x{}", op.rows(), op.cols()),
                    context: "PositiveBasis",
                });
            }
            let spec = eig_hermitian(op)?;
            let min = spec.min_eigenvalue();
            if min < -tol::EXACT {
                return Err(Error::NotPositive {
                    reason: format!("operator {i} has eigenvalue {min:.3e}"),
                });
            }
            sum = sum.add(op);
        }
        let dev = sum.sub(&CMat::identity(n)).hs_norm();
        if dev > tol::EXACT {
            return Err(Error::NotResolution { deviation: dev });
        }
        let span = OperatorSpace::span(&ops, n)?;
        if span.dim() != ops.len() {
            return Err(Error::NotPositive {
                reason: format!(
                    "operators are linearly dependent (span {} of {})",
                    span.dim(),
                    ops.len()
                ),
            });
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn count(&self) -> usize {
        self.ops.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ops[0].rows()
    }

    pub fn span(&self) -> OperatorSpace {
        OperatorSpace::span(&self.ops, self.ambient_dim()).expect("validated basis spans")
    }
}

/// Produce a positive basis of a subspace satisfying the graph conditions:
/// pick a Hermitian spanning set {I, H_2..H_d}, shift each H_i positive and
/// scale so the tail sums below I/2, then complete with the defect
/// B_1 = I - sum.
pub fn positive_basis(space: &OperatorSpace) -> Result<PositiveBasis> {
    space.check_graph_conditions()?;
    let n = space.ambient_dim();
    let d = space.dim();
    let identity = CMat::identity(n);
    if d == 1 {
        return PositiveBasis::new(vec![identity]);
    }

    let hermitians = hermitian_spanning_set(space)?;
    debug_assert_eq!(hermitians.len(), d - 1);

    // uniform scaling: each shifted operator gets operator norm 1/(2(d-1)),
    // so the tail stays below I/2 and the defect stays positive
    let cap = 1.0 / (2.0 * (d as f64 - 1.0));
    let mut ops = Vec::with_capacity(d);
    let mut tail = CMat::zeros(n, n);
    for h in &hermitians {
        let spec = eig_hermitian(h)?;
        let shifted = h.add(&identity.scale_re(spec.operator_norm()));
        let norm = eig_hermitian(&shifted)?.operator_norm();
        debug_assert!(norm > 0.0, "spanning element collapsed to zero");
        let b = shifted.scale_re(cap / norm);
        tail = tail.add(&b);
        ops.push(b);
    }
    let first = identity.sub(&tail);
    let mut all = vec![first];
    all.extend(ops);
    PositiveBasis::new(all)
}

/// Hermitian elements H_2..H_d completing the identity to a spanning set of
/// the space: real/imaginary splits of the basis, selected greedily by
/// largest residual against what is already chosen.
fn hermitian_spanning_set(space: &OperatorSpace) -> Result<Vec<CMat>> {
    let n = space.ambient_dim();
    let d = space.dim();
    let mut candidates = Vec::new();
    for b in space.basis() {
        let re = b.add(&b.adjoint()).scale_re(0.5);
        let im = b.sub(&b.adjoint()).scale(Complex64::new(0.0, -0.5));
        for part in [re, im] {
            let norm = part.hs_norm();
            if norm > tol::RANK {
                candidates.push(part.scale_re(1.0 / norm));
            }
        }
    }

    let inorm = CMat::identity(n).scale_re(1.0 / (n as f64).sqrt());
    let mut selected_onb = vec![inorm];
    let mut selected = Vec::with_capacity(d - 1);
    while selected.len() < d - 1 {
        let mut best: Option<(f64, usize, CMat)> = None;
        for (idx, cand) in candidates.iter().enumerate() {
            let mut r = cand.clone();
            for s in &selected_onb {
                let coeff = s.hs_inner(&r);
                r = r.sub(&s.scale(coeff));
            }
            let norm = r.hs_norm();
            if best.as_ref().map(|(b, _, _)| norm > b * (1.0 + 1e-9)).unwrap_or(true) {
                best = Some((norm, idx, r));
            }
        }
        let (norm, idx, r) = best.expect("candidate list cannot be empty here");
        if norm <= 1e-6 {
            return Err(Error::NotPositive {
                reason: "could not assemble a Hermitian spanning set (space not adjoint-closed?)"
                    .into(),
            });
        }
        selected_onb.push(r.scale_re(1.0 / norm));
        selected.push(candidates[idx].clone());
    }
    Ok(selected)
}

/// Pseudo-diagonal channel realizing a prescribed noncommutative graph:
/// V_k = sum_i <k|psi_i> W_i A_i^{1/2} with W_i the partial isometry mapping
/// the range of A_i onto the i-th block of the output sum. The complementary
/// channel is rho -> sum_i trace(A_i rho) |psi_i><psi_i|.
pub fn build_pseudo_diagonal(basis: &PositiveBasis, psis: &[CMat]) -> Result<QuantumChannel> {
    let d = basis.count();
    let n = basis.ambient_dim();
    if psis.len() != d {
        return Err(Error::InvalidConfig(format!(
            "need exactly {d} state vectors, got {}",
            psis.len()
        )));
    }
    let m = psis[0].rows();
    if d > m * m {
        return Err(Error::EnvironmentTooSmall {
            count: d,
            env_dim: m,
        });
    }
    for psi in psis {
        if psi.cols() != 1 || psi.rows() != m {
            return Err(Error::DimensionMismatch {
                expected: format!("{m}x1"),
                got: format!("{}x{}", psi.rows(), psi.cols()),
                context: "build_pseudo_diagonal",
            });
        }
        let dev = (psi.vector_norm() - 1.0).abs();
        if dev > tol::EXACT {
            return Err(Error::NotUnitVector { deviation: dev });
        }
    }
    // rank-one projectors must be linearly independent
    let projectors: Vec<CMat> = psis.iter().map(|p| p.outer(p)).collect();
    let proj_span = OperatorSpace::span(&projectors, m)?;
    if proj_span.dim() != d {
        return Err(Error::DependentProjectors {
            rank: proj_span.dim(),
            need: d,
        });
    }

    // block data: canonical eigenvectors of the nonzero eigenvalues
    struct Block {
        offset: usize,
        sqrt_vals: Vec<f64>,
        vectors: Vec<CMat>,
    }
    let mut blocks = Vec::with_capacity(d);
    let mut offset = 0usize;
    for op in basis.ops() {
        let spec = eig_hermitian(op)?;
        let mut sqrt_vals = Vec::new();
        let mut vectors = Vec::new();
        for (k, &lam) in spec.eigenvalues.iter().enumerate() {
            if lam > tol::RANK {
                sqrt_vals.push(lam.sqrt());
                vectors.push(spec.eigenvectors.column(k));
            }
        }
        let r = sqrt_vals.len();
        blocks.push(Block {
            offset,
            sqrt_vals,
            vectors,
        });
        offset += r;
    }
    let dim_out = offset;

    // rows of W_i A_i^{1/2} are sqrt(lambda_j) <v_j|
    let mut kraus = Vec::with_capacity(m);
    for k in 0..m {
        let mut op = CMat::zeros(dim_out, n);
        for (i, block) in blocks.iter().enumerate() {
            let coeff = psis[i].at(k, 0); // <k|psi_i>
            if coeff.re == 0.0 && coeff.im == 0.0 {
                continue;
            }
            for (j, (sv, v)) in block.sqrt_vals.iter().zip(&block.vectors).enumerate() {
                let row = block.offset + j;
                for a in 0..n {
                    let val = op.at(row, a) + coeff * sv * v.at(a, 0).conj();
                    op.set(row, a, val);
                }
            }
        }
        kraus.push(op);
    }
    make_channel(kraus)
}

/// Deterministic collection of d unit vectors in C^m with linearly
/// independent rank-one projectors: the standard basis, then normalized
/// pairwise sums (e_i + e_j)/sqrt2 ordered by descending j, then the same
/// pairs with a phase, (e_i + i e_j)/sqrt2. The full sequence has length
/// m^2 and every prefix keeps the projectors independent.
pub fn default_psi_sequence(m: usize, d: usize) -> Result<Vec<CMat>> {
    if d > m * m {
        return Err(Error::EnvironmentTooSmall {
            count: d,
            env_dim: m,
        });
    }
    let s = 1.0 / 2f64.sqrt();
    let mut seq = Vec::with_capacity(m * m);
    for k in 0..m {
        seq.push(CMat::basis_vector(m, k));
    }
    for phase in [Complex64::new(s, 0.0), Complex64::new(0.0, s)] {
        for j in (1..m).rev() {
            for i in 0..j {
                let mut v = CMat::zeros(m, 1);
                v.set(i, 0, Complex64::new(s, 0.0));
                v.set(j, 0, phase);
                seq.push(v);
            }
        }
    }
    seq.truncate(d);
    Ok(seq)
}

/// The measure-and-prepare map rho -> sum_i trace(A_i rho) |psi_i><psi_i|
/// applied directly; the reference against which complementary channels of
/// pseudo-diagonal constructions are compared.
pub fn measure_prepare_apply(basis: &PositiveBasis, psis: &[CMat], rho: &CMat) -> CMat {
    let m = psis[0].rows();
    let mut out = CMat::zeros(m, m);
    for (a, psi) in basis.ops().iter().zip(psis) {
        let p = a.mul(rho).trace();
        out = out.add(&psi.outer(psi).scale(p));
    }
    out
}

/// Max entrywise distance between `complementary(ch)` and the
/// measure-and-prepare map over all matrix units.
pub fn complementary_vs_measure_prepare(
    ch: &QuantumChannel,
    basis: &PositiveBasis,
    psis: &[CMat],
) -> f64 {
    let comp = complementary(ch);
    let n = ch.dim_in();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut unit = CMat::zeros(n, n);
            unit.set(i, j, Complex64::new(1.0, 0.0));
            let got = apply(&comp, &unit).expect("dims match");
            let want = measure_prepare_apply(basis, psis, &unit);
            worst = worst.max(got.max_abs_diff(&want));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::Subsystem;
    use crate::sampling;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_channel() {
        let ch = make_channel(vec![CMat::identity(2)]).unwrap();
        assert_eq!(ch.env_dim(), 1);
        let mut rho = CMat::zeros(2, 2);
        rho.set(0, 0, c(0.25, 0.0));
        rho.set(0, 1, c(0.1, 0.3));
        rho.set(1, 0, c(0.1, -0.3));
        rho.set(1, 1, c(0.75, 0.0));
        let out = apply(&ch, &rho).unwrap();
        assert!(out.max_abs_diff(&rho) <= tol::EXACT);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let half = CMat::identity(2).scale_re(0.5);
        match make_channel(vec![half]) {
            Err(Error::TracePreservation { deviation }) => assert!(deviation > 0.5),
            other => panic!("expected trace-preservation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_shape_mismatch() {
        let k0 = CMat::identity(2);
        let k1 = CMat::zeros(3, 2);
        assert!(matches!(
            make_channel(vec![k0, k1]),
            Err(Error::KrausShape { index: 1, .. })
        ));
    }

    #[test]
    fn complementary_of_identity() {
        let ch = make_channel(vec![CMat::identity(2)]).unwrap();
        let comp = complementary(&ch);
        assert_eq!(comp.dim_out(), 1);
        assert_eq!(comp.env_dim(), 2);
        let mut rho = CMat::zeros(2, 2);
        rho.set(0, 0, c(0.3, 0.0));
        rho.set(1, 1, c(0.7, 0.0));
        rho.set(0, 1, c(0.2, 0.1));
        rho.set(1, 0, c(0.2, -0.1));
        let out = apply(&comp, &rho).unwrap();
        assert_eq!(out.rows(), 1);
        assert!((out.at(0, 0) - rho.trace()).norm() <= tol::EXACT);
    }

    #[test]
    fn double_complement_returns_the_same_kraus_family() {
        let mut rng = sampling::seeded_rng(41);
        let kraus = sampling::random_channel_kraus(&mut rng, 2, 3, 2);
        let ch = make_channel(kraus).unwrap();
        let back = complementary(&complementary(&ch));
        assert_eq!(back.env_dim(), ch.env_dim());
        assert!(choi_distance(&back, &ch) <= tol::EXACT);
    }

    #[test]
    fn ncgraph_of_identity_is_trivial() {
        let ch = make_channel(vec![CMat::identity(3)]).unwrap();
        let g = ncgraph(&ch);
        assert_eq!(g.dim(), 1);
        assert!(g.contains_identity());
    }

    #[test]
    fn ncgraph_contains_identity_and_adjoints_for_random_channels() {
        for seed in 0..100u64 {
            let mut rng = sampling::seeded_rng(1000 + seed);
            let kraus = sampling::random_channel_kraus(&mut rng, 3, 3, 2);
            let ch = make_channel(kraus).unwrap();
            let g = ncgraph(&ch);
            assert!(g.contains_identity(), "seed {seed}");
            assert!(g.is_adjoint_closed(), "seed {seed}");
        }
    }

    #[test]
    fn tensor_of_identities() {
        let id2 = make_channel(vec![CMat::identity(2)]).unwrap();
        let t = tensor_channels(&id2, &id2);
        assert_eq!(t.dim_in(), 4);
        assert_eq!(t.dim_out(), 4);
        assert_eq!(t.env_dim(), 1);
        assert!(t.kraus()[0].max_abs_diff(&CMat::identity(4)) <= tol::EXACT);
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let ch = make_channel(vec![CMat::identity(2)]).unwrap();
        let cm = choi(&ch);
        // |Omega><Omega| with Omega = |00> + |11>
        let mut omega = CMat::zeros(4, 1);
        omega.set(0, 0, c(1.0, 0.0));
        omega.set(3, 0, c(1.0, 0.0));
        assert!(cm.max_abs_diff(&omega.outer(&omega)) <= tol::EXACT);
        assert_eq!(choi_rank(&ch), 1);
    }

    #[test]
    fn choi_properties_random() {
        let mut rng = sampling::seeded_rng(42);
        let kraus = sampling::random_channel_kraus(&mut rng, 2, 3, 2);
        let ch = make_channel(kraus).unwrap();
        let cm = choi(&ch);
        let spec = eig_hermitian(&cm).unwrap();
        assert!(spec.min_eigenvalue() >= -tol::EXACT);
        let reduced = crate::opalg::partial_trace(&cm, 2, 3, Subsystem::A).unwrap();
        assert!(reduced.max_abs_diff(&CMat::identity(2)) <= tol::EXACT);
        assert_eq!(choi_rank(&ch), 2);
    }

    #[test]
    fn choi_is_invariant_under_environment_redressing() {
        // mixing the Kraus family by a unitary leaves the channel unchanged
        let mut rng = sampling::seeded_rng(43);
        let kraus = sampling::random_channel_kraus(&mut rng, 2, 2, 2);
        let u = sampling::random_unitary(&mut rng, 2);
        let mixed: Vec<CMat> = (0..2)
            .map(|j| {
                let mut m = CMat::zeros(2, 2);
                for (k, op) in kraus.iter().enumerate() {
                    m = m.add(&op.scale(u.at(k, j)));
                }
                m
            })
            .collect();
        let a = make_channel(kraus).unwrap();
        let b = make_channel(mixed).unwrap();
        assert!(choi_distance(&a, &b) <= tol::EXACT);
    }

    #[test]
    fn choi_of_tensor_is_permuted_tensor_of_chois() {
        let mut rng = sampling::seeded_rng(44);
        let a = make_channel(sampling::random_channel_kraus(&mut rng, 2, 2, 2)).unwrap();
        let b = make_channel(sampling::random_channel_kraus(&mut rng, 2, 2, 1)).unwrap();
        let t = tensor_channels(&a, &b);
        let ct = choi(&t);
        let ca = choi(&a);
        let cb = choi(&b);
        // index (i1 i2, p1 p2) of choi(t) vs ((i1,p1),(i2,p2)) of ca (x) cb
        let (da1, db1, da2, db2) = (2, 2, 2, 2);
        let big = tensor(&ca, &cb);
        let mut worst = 0.0f64;
        for i1 in 0..da1 {
            for i2 in 0..da2 {
                for p1 in 0..db1 {
                    for p2 in 0..db2 {
                        let r_t = ((i1 * da2 + i2) * db1 * db2) + p1 * db2 + p2;
                        let r_b = ((i1 * db1 + p1) * da2 * db2) + i2 * db2 + p2;
                        for j1 in 0..da1 {
                            for j2 in 0..da2 {
                                for q1 in 0..db1 {
                                    for q2 in 0..db2 {
                                        let c_t = ((j1 * da2 + j2) * db1 * db2) + q1 * db2 + q2;
                                        let c_b = ((j1 * db1 + q1) * da2 * db2) + j2 * db2 + q2;
                                        worst = worst
                                            .max((ct.at(r_t, c_t) - big.at(r_b, c_b)).norm());
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(worst <= tol::EXACT);
    }

    #[test]
    fn positive_basis_of_trivial_space() {
        let space = OperatorSpace::span(&[CMat::identity(3)], 3).unwrap();
        let pb = positive_basis(&space).unwrap();
        assert_eq!(pb.count(), 1);
        assert!(pb.ops()[0].max_abs_diff(&CMat::identity(3)) <= tol::EXACT);
    }

    #[test]
    fn positive_basis_requires_graph_conditions() {
        let mut e01 = CMat::zeros(2, 2);
        e01.set(0, 1, c(1.0, 0.0));
        let bad = OperatorSpace::span(&[e01, CMat::identity(2)], 2).unwrap();
        assert!(matches!(
            positive_basis(&bad),
            Err(Error::GraphCondition { .. })
        ));
    }

    #[test]
    fn positive_basis_spans_the_input_space() {
        // a nontrivial adjoint-closed space: span{I, sigma_x, sigma_z}
        let sx = CMat::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let sz = CMat::from_fn(2, 2, |i, j| {
            if i != j {
                c(0.0, 0.0)
            } else if i == 0 {
                c(1.0, 0.0)
            } else {
                c(-1.0, 0.0)
            }
        });
        let space = OperatorSpace::span(&[CMat::identity(2), sx, sz], 2).unwrap();
        let pb = positive_basis(&space).unwrap();
        assert_eq!(pb.count(), 3);
        assert!(pb.span().equals(&space).unwrap());
        let mut sum = CMat::zeros(2, 2);
        for op in pb.ops() {
            let spec = eig_hermitian(op).unwrap();
            assert!(spec.min_eigenvalue() >= -tol::EXACT);
            sum = sum.add(op);
        }
        assert!(sum.max_abs_diff(&CMat::identity(2)) <= tol::EXACT);
    }

    #[test]
    fn channel_json_round_trip_validates() {
        let ch = make_channel(vec![CMat::identity(2)]).unwrap();
        let s = serde_json::to_string(&ch).unwrap();
        assert!(s.starts_with("{\"dim_in\":2,\"dim_out\":2,\"kraus\":["));
        let back: QuantumChannel = serde_json::from_str(&s).unwrap();
        assert_eq!(back.env_dim(), 1);
        // non-trace-preserving payloads are rejected on import
        let bad = "{\"dim_in\":2,\"dim_out\":2,\"kraus\":[{\"rows\":2,\"cols\":2,\"data\":[[0.5,0],[0,0],[0,0],[0.5,0]]}]}";
        assert!(serde_json::from_str::<QuantumChannel>(bad).is_err());
    }

    #[test]
    fn pseudo_diagonal_trivial_case_is_noiseless() {
        let pb = PositiveBasis::new(vec![CMat::identity(3)]).unwrap();
        let psi = CMat::basis_vector(1, 0);
        let ch = build_pseudo_diagonal(&pb, &[psi]).unwrap();
        assert_eq!(ch.dim_in(), 3);
        assert_eq!(ch.dim_out(), 3);
        assert_eq!(ch.env_dim(), 1);
        // channel is rho -> W rho W^dag with W an isometry
        let w = &ch.kraus()[0];
        assert!(w.adjoint().mul(w).max_abs_diff(&CMat::identity(3)) <= tol::EXACT);
    }

    #[test]
    fn pseudo_diagonal_rejects_small_environment() {
        let sx = CMat::from_fn(2, 2, |_, _| c(0.5, 0.0));
        let sy = CMat::identity(2).sub(&sx);
        let pb = PositiveBasis::new(vec![sx, sy]).unwrap();
        let psi = CMat::basis_vector(1, 0);
        assert!(matches!(
            build_pseudo_diagonal(&pb, &[psi.clone(), psi]),
            Err(Error::EnvironmentTooSmall { .. })
        ));
    }

    #[test]
    fn pseudo_diagonal_rejects_dependent_projectors() {
        let sx = CMat::from_fn(2, 2, |_, _| c(0.5, 0.0));
        let sy = CMat::identity(2).sub(&sx);
        let pb = PositiveBasis::new(vec![sx, sy]).unwrap();
        // same vector twice: projectors coincide
        let e0 = CMat::basis_vector(2, 0);
        assert!(matches!(
            build_pseudo_diagonal(&pb, &[e0.clone(), e0]),
            Err(Error::DependentProjectors { .. })
        ));
    }
}
