#![allow(dead_code)]

pub mod exprs;
pub mod fixtures;
pub mod oracle;
pub mod script;
