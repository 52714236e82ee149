pub mod error;
pub mod field;
pub mod spectral;
pub mod norms;
pub mod rng;
pub mod stable;
pub mod stats;
pub mod mollifier;
pub mod solver;
pub mod particles;
pub mod regularity;
pub mod io;
pub mod verify;
