//! Files, reports and the command-line front end for `perverse-core`.
//!
//! A [`document::Document`] holds a stratified poset and optionally a sheaf
//! complex on it. The [`commands`] module implements `validate`, `check`,
//! `verify` and `gen` as pure functions of their inputs; the binary only
//! parses flags and does file IO.

pub mod commands;
pub mod document;
pub mod report;

pub use document::{Document, LoadError, FORMAT_VERSION};
