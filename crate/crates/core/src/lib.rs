pub mod bimonoid;
pub mod descent;
pub mod error;
pub mod error_models;
pub mod exec;
pub mod harness;
pub mod learn;
pub mod nnet;
pub mod numeric;
pub mod para;
