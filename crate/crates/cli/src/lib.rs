pub mod commands;
pub mod http;
