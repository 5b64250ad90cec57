use std::sync::OnceLock;

/// Node-count cap for canonicalization and enumeration guards.
pub const DEFAULT_SIZE_GUARD: usize = 64;

/// Environment variable overriding [`DEFAULT_SIZE_GUARD`].
pub const SIZE_GUARD_ENV: &str = "DCL_SIZE_GUARD";

/// The active size guard, read once from the environment.
pub fn size_guard() -> usize {
    static GUARD: OnceLock<usize> = OnceLock::new();
    *GUARD.get_or_init(|| {
        std::env::var(SIZE_GUARD_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_SIZE_GUARD)
    })
}
