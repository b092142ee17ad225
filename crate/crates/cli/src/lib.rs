//! Library side of the `mixdetect` command-line tool.

pub mod commands;
pub mod config;
pub mod golden;
pub mod records;
pub mod reproduce;
pub mod study;
