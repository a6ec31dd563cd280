//! Core of the chatsim underwater simulator: scene model, procedural world
//! generation, the ChatScript command language, the model bridge, the frame
//! executor and the camera.

pub mod capture;
pub mod chatscript;
pub mod command;
pub mod executor;
pub mod hash;
pub mod llm;
pub mod scene;
pub mod worldgen;
