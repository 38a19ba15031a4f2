//! Euclidean and geodesic X-ray transforms, Riesz potentials, filtered
//! reconstruction, sinogram Sobolev norms and the simple-manifold normal
//! operator.

pub mod euclid;
pub mod geodesic;
pub mod manifold;
pub mod norms;
pub mod phantom;
pub mod reconstruct;
pub mod riesz;
pub mod sinogram;

pub use euclid::{adjoint_p, pairing_t, xray_forward_euclid};
pub use geodesic::{xray_forward_geodesic, RayIntegrand};
pub use manifold::{normal_operator_manifold, NormalOperatorSample2D, SimpleFixture};
pub use norms::sinogram_sobolev_norm;
pub use phantom::Phantom;
pub use reconstruct::{calibration_scalar, reconstruct, ReconstructionSpec};
pub use riesz::{riesz_1d, RieszFilter};
pub use sinogram::{offset_grid, theta_grid, Sinogram, SinogramGeometry};
