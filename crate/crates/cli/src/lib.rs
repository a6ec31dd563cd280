//! Command line front end and HTTP service for the underwater simulator.

pub mod app;
pub mod config;
pub mod output;
pub mod service;
pub mod session;
