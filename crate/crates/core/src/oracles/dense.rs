use crate::glme::{GlmeSolution, GlmeSystem};
use crate::{Error, Result};

/// Largest system the dense oracle will materialize.
pub const DENSE_LIMIT: usize = 512;

/// Solves the window system by LU with partial pivoting on the full
/// interleaved matrix.
pub fn dense_solve(system: &GlmeSystem) -> Result<GlmeSolution> {
    if system.m > DENSE_LIMIT {
        return Err(Error::Config(format!(
            "dense oracle limited to M <= {DENSE_LIMIT}, got {}",
            system.m
        )));
    }
    let (a, b) = system.dense();
    let x = a.lu().solve(&b).ok_or(Error::Singular)?;
    let x1: Vec<_> = (0..system.m).map(|i| x[2 * i]).collect();
    let y2: Vec<_> = (0..system.m).map(|i| x[2 * i + 1]).collect();
    let q_at_t = 2.0 * system.kappa() * y2[system.m - 1];
    Ok(GlmeSolution { x1, y2, q_at_t })
}
