//! Fair rate allocation on polymatroid capacity regions.
//!
//! Subsets of users are `u64` bit masks and rates are in nats. The
//! [`maxmin`] solvers work on any [`setfn::SubsetFunction`]; [`mac`] and
//! [`bc`] build those functions from Gaussian channel models.

pub mod bc;
pub mod mac;
pub mod majorization;
pub mod maxmin;
pub mod oracle;
pub mod setfn;
