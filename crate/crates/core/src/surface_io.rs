//! Surface description files.
