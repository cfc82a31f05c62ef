//! ora — scene IO, file formats, and batch CLI (placeholder).
