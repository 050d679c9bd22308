pub mod error;
pub mod frontier;
pub mod geom;
pub mod index;
pub mod io;
pub mod network;
pub mod oracle;
mod optimize;
pub mod probe;
pub mod render;
pub mod scene;
pub mod tracer;
