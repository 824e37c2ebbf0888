use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::spectral::{reflectionless_a_prime, DiscreteEigenvalue};
use crate::{Error, Result, Signal, TimeGrid, C64};

type Block = Matrix2<C64>;
type Pair = Vector2<C64>;

/// Reflectionless N-soliton potential with the given left eigenvalues and
/// left norming constants, built by successive Darboux transformations of
/// the zero potential.
///
/// Soliton `k` is seeded with the free solution `(e^{-i zeta_k t}, g_k e^{i zeta_k t})`,
/// `g_k = 1/(l_k a'(zeta_k))`, and each transformation adds
/// `4 eta_k phi_1 conj(phi_2)/(|phi_1|^2 + |phi_2|^2)` to the potential.
pub fn darboux_multisoliton(eigenvalues: &[DiscreteEigenvalue], grid: TimeGrid) -> Result<Signal> {
    let order = darboux_order(eigenvalues)?;
    let zetas: Vec<C64> = eigenvalues.iter().map(|e| e.zeta).collect();
    let seeds: Vec<C64> = (0..eigenvalues.len())
        .map(|k| 1.0 / (eigenvalues[k].norming * reflectionless_a_prime(&zetas, k)))
        .collect();
    let q = grid.times().map(|t| darboux_at(t, &order, &zetas, &seeds)).collect();
    Ok(Signal::new(grid, q))
}

// Eigenvalues added in order of increasing eta.
fn darboux_order(eigenvalues: &[DiscreteEigenvalue]) -> Result<Vec<usize>> {
    if eigenvalues.is_empty() {
        return Err(Error::Empty("eigenvalue list"));
    }
    for (i, a) in eigenvalues.iter().enumerate() {
        for b in &eigenvalues[i + 1..] {
            if (a.zeta - b.zeta).norm() <= 1e-10 * (1.0 + a.zeta.norm()) {
                return Err(Error::CoincidentEigenvalues);
            }
        }
    }
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[a].zeta.im.total_cmp(&eigenvalues[b].zeta.im));
    Ok(order)
}

// Free seed, scaled so its larger component has unit magnitude.
fn seed(t: f64, zeta: C64, gamma: C64) -> Pair {
    let (xi, eta) = (zeta.re, zeta.im);
    let l1 = eta * t;
    let l2 = gamma.norm().ln() - eta * t;
    let m = l1.max(l2);
    Pair::new(
        C64::from_polar((l1 - m).exp(), -xi * t),
        C64::from_polar((l2 - m).exp(), gamma.arg() + xi * t),
    )
}

fn darboux_at(t: f64, order: &[usize], zetas: &[C64], seeds: &[C64]) -> C64 {
    let mut q = C64::new(0.0, 0.0);
    // projectors S_j = H diag(zeta_j, conj zeta_j) H^{-1} of the transformations so far
    let mut applied: Vec<Block> = Vec::with_capacity(order.len());
    for &k in order {
        let zk = zetas[k];
        let mut phi = seed(t, zk, seeds[k]);
        for s in &applied {
            phi = (Block::identity() * zk - s) * phi;
            let n = phi.norm();
            if n > 0.0 {
                phi /= C64::new(n, 0.0);
            }
        }
        let (p1, p2) = (phi[0], phi[1]);
        let norm2 = p1.norm_sqr() + p2.norm_sqr();
        q += 4.0 * zk.im * p1 * p2.conj() / norm2;
        let h = Block::new(p1, -p2.conj(), p2, p1.conj());
        let hinv = Block::new(p1.conj(), p2.conj(), -p2, p1) / C64::new(norm2, 0.0);
        applied.push(h * Block::from_diagonal(&Pair::new(zk, zk.conj())) * hinv);
    }
    q
}

/// Closed-form reflectionless potential from the Marchenko equation with a
/// purely exponential kernel; `N x N` solve per sample. Ill-conditioned far
/// from the solitons, so keep `|t|` moderate.
pub fn closed_form_multisoliton(eigenvalues: &[DiscreteEigenvalue], grid: TimeGrid) -> Result<Signal> {
    darboux_order(eigenvalues)?;
    let n = eigenvalues.len();
    let i = C64::i();
    let c: Vec<C64> = eigenvalues.iter().map(|e| -i * e.norming).collect();
    let k = DMatrix::from_fn(n, n, |a, b| i / (eigenvalues[a].zeta - eigenvalues[b].zeta.conj()));
    let mut q = Vec::with_capacity(grid.len);
    for t in grid.times() {
        let e = DVector::from_fn(n, |a, _| c[a] * (-2.0 * i * eigenvalues[a].zeta * t).exp());
        let d = DVector::from_fn(n, |a, _| c[a].conj() * (2.0 * i * eigenvalues[a].zeta.conj() * t).exp());
        let b = DMatrix::from_diagonal(&d) * k.transpose();
        let m = DMatrix::identity(n, n) + DMatrix::from_diagonal(&e) * &k * b;
        let alpha = m.lu().solve(&e).ok_or(Error::Singular)?;
        q.push(2.0 * alpha.sum());
    }
    Ok(Signal::new(grid, q))
}
