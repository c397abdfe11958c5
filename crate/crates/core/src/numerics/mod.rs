//! Grids, quadrature, the band-limited kernel and pulse envelopes.

mod params;
mod profile;
mod quadrature;
mod special;

pub use params::{Mode, SystemParams};
pub use profile::{make_profile, ProfileSpec, PulseProfile, Shape};
pub use quadrature::{gauss_legendre, integrate_adaptive, make_grid, Grid1D, GridSpec, Rule};
pub use special::{commutator_kernel, sinc, sinc_kernel, sine_integral};
