//! Dense complex linear algebra and Hilbert-Schmidt operator-space machinery.

mod cmat;
mod eig;
mod space;

pub use cmat::{partial_trace, tensor, CMat, Subsystem};
pub use eig::{eig_hermitian, Spectrum};
pub use space::{Membership, OperatorSpace};
