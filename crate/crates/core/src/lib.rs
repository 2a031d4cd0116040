pub mod grid;
pub mod mlp;
pub mod optcore;
pub mod verifier;
pub mod wctrain;
