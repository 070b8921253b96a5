use crate::error::{Error, Result};

/// Runs `f` inside a dedicated rayon pool of `threads` workers; `0` uses
/// rayon's default size.
pub fn with_threads<T, F>(threads: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Input(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}
