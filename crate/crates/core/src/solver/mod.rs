//! Numerical engines behind the projections. The interior-point method is
//! the default; the first-order methods are kept as independent
//! cross-checks.

pub(crate) mod first_order;
pub(crate) mod ipm;
