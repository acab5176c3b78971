pub mod config;
pub mod cost;
pub mod error;
pub mod kernel;
pub mod timing;
pub mod topology;
pub mod store;
pub mod query;
pub mod denorm;
pub mod engine;
pub mod reference;
