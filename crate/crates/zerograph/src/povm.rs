//! Quantum observables and indistinguishable subspaces.
//!
//! An observable is a finite resolution of the identity by positive
//! operators; outcome i on state rho has probability trace(M_i rho). A
//! subspace is indistinguishable for the observable when all states
//! supported by it produce the same outcome distribution, which reduces to
//! the zero-error code conditions over span{M_i}.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{make_channel, positive_basis, QuantumChannel};
use crate::error::{Error, Result};
use crate::graphcap::{check_code, search_violation, CodeCertificate, CodeSubspace, ViolationReport};
use crate::opalg::{eig_hermitian, tensor, CMat, OperatorSpace};
use crate::tol;

/// Finite POVM: positive effects summing to the identity. `sharp` is derived
/// (all effects are mutually orthogonal projectors).
#[derive(Clone, Debug)]
pub struct Observable {
    dim: usize,
    effects: Vec<CMat>,
    sharp: bool,
}

impl Observable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn is_sharp(&self) -> bool {
        self.sharp
    }

    /// Operator subspace generated by the effects.
    pub fn span(&self) -> Result<OperatorSpace> {
        OperatorSpace::span(&self.effects, self.dim)
    }

    /// Outcome distribution on a state.
    pub fn probabilities(&self, rho: &CMat) -> Result<Vec<f64>> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.dim),
                got: format!("{}x{}", rho.rows(), rho.cols()),
                context: "probabilities",
            });
        }
        Ok(self.effects.iter().map(|m| m.mul(rho).trace().re).collect())
    }
}

/// Validate a list of effects into an observable.
pub fn make_observable(effects: Vec<CMat>) -> Result<Observable> {
    if effects.is_empty() {
        return Err(Error::NotResolution { deviation: 1.0 });
    }
    let dim = effects[0].rows();
    let mut sum = CMat::zeros(dim, dim);
    for (i, m) in effects.iter().enumerate() {
        if !m.is_square() || m.rows() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim}x{dim}"),
                got: format!("{}x{}", m.rows(), m.cols()),
                context: "make_observable",
            });
        }
        let spec = eig_hermitian(m)?;
        let min = spec.min_eigenvalue();
        if min < -tol::EXACT {
            return Err(Error::NotPositive {
                reason: format!("effect {i} has eigenvalue {min:.3e}"),
            });
        }
        sum = sum.add(m);
    }
    let deviation = sum.sub(&CMat::identity(dim)).hs_norm();
    if deviation > tol::EXACT {
        return Err(Error::NotResolution { deviation });
    }
    let sharp = is_sharp(&effects);
    Ok(Observable { dim, effects, sharp })
}

fn is_sharp(effects: &[CMat]) -> bool {
    for (i, a) in effects.iter().enumerate() {
        if a.mul(a).max_abs_diff(a) > tol::EXACT {
            return false;
        }
        for b in effects.iter().skip(i + 1) {
            if a.mul(b).max_abs() > tol::EXACT {
                return false;
            }
        }
    }
    true
}

/// The observable as a quantum-classical channel rho -> sum_i [tr M_i rho]
/// |i><i|; Kraus operators |i><u| over the scaled eigenvectors u of each
/// effect, so the output is always diagonal.
pub fn pi_channel(obs: &Observable) -> QuantumChannel {
    let m = obs.outcomes();
    let mut kraus = Vec::new();
    for (i, effect) in obs.effects().iter().enumerate() {
        let spec = eig_hermitian(effect).expect("effects are Hermitian");
        let out = CMat::basis_vector(m, i);
        for (k, &lam) in spec.eigenvalues.iter().enumerate() {
            if lam > 1e-14 * spec.eigenvalues[0].max(1.0) {
                let u = spec.eigenvectors.column(k).scale_re(lam.sqrt());
                kraus.push(out.outer(&u));
            }
        }
    }
    make_channel(kraus).expect("resolution of the identity is trace preserving")
}

/// Criterion (iii) of the indistinguishability characterization: the code
/// conditions over span{M_i}.
pub fn is_indistinguishable(obs: &Observable, code: &CodeSubspace) -> Result<CodeCertificate> {
    if obs.dim() != code.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}", obs.dim()),
            got: format!("{}", code.ambient_dim()),
            context: "is_indistinguishable",
        });
    }
    check_code(&obs.span()?, code)
}

/// Tensor product observable with effects {M_i (x) N_j}, i-major outcome
/// order. Sharp exactly when both factors are sharp.
pub fn tensor_observables(a: &Observable, b: &Observable) -> Observable {
    let mut effects = Vec::with_capacity(a.outcomes() * b.outcomes());
    for ma in a.effects() {
        for mb in b.effects() {
            effects.push(tensor(ma, mb));
        }
    }
    make_observable(effects).expect("tensor of observables resolves the identity")
}

/// Search for a two-dimensional indistinguishable subspace: the violation
/// search over span{M_i}. A vanishing best value yields a witness pair
/// spanning such a subspace.
pub fn find_indistinguishable(obs: &Observable, starts: usize, seed: u64) -> Result<ViolationReport> {
    search_violation(&obs.span()?, starts, seed)
}

/// Positive basis of a graph reinterpreted as an observable with
/// dim(space) outcomes.
pub fn observable_from_graph(space: &OperatorSpace) -> Result<Observable> {
    let basis = positive_basis(space)?;
    make_observable(basis.ops().to_vec())
}

// JSON wire format: {"dim": n, "effects": [CMat, ...]}; sharpness is
// recomputed on import.
#[derive(Serialize, Deserialize)]
struct ObservableWire {
    dim: usize,
    effects: Vec<CMat>,
}

impl Serialize for Observable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ObservableWire {
            dim: self.dim,
            effects: self.effects.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = ObservableWire::deserialize(deserializer)?;
        let obs = make_observable(wire.effects).map_err(D::Error::custom)?;
        if obs.dim() != wire.dim {
            return Err(D::Error::custom("declared dim does not match effects"));
        }
        Ok(obs)
    }
}
