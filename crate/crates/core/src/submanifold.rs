//! Leaf geometry of the canonical foliations (stub).
