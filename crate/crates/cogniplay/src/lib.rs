//! File formats, the session store, the HTTP service and the command line
//! for the `cogniplay-core` agent.

pub mod cli;
pub mod formats;
pub mod service;
pub mod store;
