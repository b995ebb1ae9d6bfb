//! Batch verification suite (stub).
