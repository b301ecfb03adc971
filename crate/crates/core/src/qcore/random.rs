//! Seeded random generators. All randomness flows through [`Rng`], a ChaCha20
//! stream seeded from a 64-bit integer (`seed_from_u64`).

use nalgebra::QR;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::linalg::{c, eigvalsh, psd_inv_sqrt, CMatrix, CVector, C64};
use super::types::{DensityMatrix, Povm, UnitaryMatrix};

pub type Rng = rand_chacha::ChaCha20Rng;

pub const RNG_ALGORITHM: &str = "chacha20/seed_from_u64";

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// One step of the splitmix64 sequence, used to derive independent seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of an independent sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Real and imaginary parts i.i.d. N(0, 1).
pub fn complex_gaussian(rng: &mut Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    // fill row by row so the stream order is independent of storage layout
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar unitary from the phase-corrected QR decomposition of a Gaussian matrix.
pub fn haar_unitary(d: usize, rng: &mut Rng) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    let a = gaussian_matrix(d, d, rng);
    let qr = QR::new(a);
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..d {
        let rd = r[(j, j)];
        let ph = if rd.norm() > 0.0 { rd / rd.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            u[(i, j)] *= ph;
        }
    }
    Ok(UnitaryMatrix::new_unchecked(u))
}

/// Tensor product of independent Haar unitaries on each factor.
pub fn local_haar_unitary(local_dims: &[usize], rng: &mut Rng) -> Result<UnitaryMatrix> {
    let mut out = UnitaryMatrix::identity(1);
    for &dl in local_dims {
        out = out.kron(&haar_unitary(dl, rng)?);
    }
    Ok(out)
}

/// Uniformly random unit ket.
pub fn haar_ket(d: usize, rng: &mut Rng) -> Result<CVector> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    loop {
        let v = CVector::from_iterator(d, (0..d).map(|_| complex_gaussian(rng)));
        let n = v.norm();
        if n > 1e-12 {
            return Ok(v / c(n, 0.0));
        }
    }
}

pub fn haar_pure_state(d: usize, rng: &mut Rng) -> Result<DensityMatrix> {
    DensityMatrix::pure(&haar_ket(d, rng)?)
}

/// Product of independent Haar kets on each factor.
pub fn product_pure_state(local_dims: &[usize], rng: &mut Rng) -> Result<DensityMatrix> {
    let mut v = CVector::from_element(1, c(1.0, 0.0));
    for &dl in local_dims {
        v = v.kronecker(&haar_ket(dl, rng)?);
    }
    DensityMatrix::pure(&v)
}

/// ρ = M†M / tr(M†M) for an r×d Gaussian M (Hilbert–Schmidt measure).
pub fn random_rank_r_state(d: usize, r: usize, rng: &mut Rng) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    if r == 0 || r > d {
        return Err(Error::InvalidRank(format!("r={r} outside 1..={d}")));
    }
    let m = gaussian_matrix(r, d, rng);
    let rho = m.adjoint() * m;
    let t = super::linalg::trace(&rho).re;
    let rho = super::linalg::hermitian_part(&(rho / c(t, 0.0)));
    DensityMatrix::new(rho)
}

/// Π_m = S^{-1/2} M_m†M_m S^{-1/2}, S = Σ M_m†M_m, for M Gaussian r×d blocks.
pub fn random_rank_r_povm(d: usize, r: usize, outcomes: usize, rng: &mut Rng) -> Result<Povm> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    if r == 0 || r > d {
        return Err(Error::InvalidRank(format!("r={r} outside 1..={d}")));
    }
    if outcomes < 2 {
        return Err(Error::InvalidDimension("a POVM needs at least 2 outcomes".into()));
    }
    for _ in 0..6 {
        let blocks: Vec<CMatrix> = (0..outcomes)
            .map(|_| {
                let m = gaussian_matrix(r, d, rng);
                m.adjoint() * m
            })
            .collect();
        let s: CMatrix = blocks.iter().fold(CMatrix::zeros(d, d), |acc, b| acc + b);
        let ev = eigvalsh(&s);
        if *ev.last().unwrap() <= 1e-12 * ev[0].max(1e-300) {
            continue;
        }
        let w = psd_inv_sqrt(&s, 0.0);
        let mut out: Vec<CMatrix> = blocks.iter().map(|b| super::linalg::hermitian_part(&(&w * b * &w))).collect();
        // push the residual of Σ Π − I into the outcomes proportionally
        let total: CMatrix = out.iter().fold(CMatrix::zeros(d, d), |acc, b| acc + b);
        let fix = psd_inv_sqrt(&total, 0.0);
        for p in out.iter_mut() {
            *p = super::linalg::hermitian_part(&(&fix * &*p * &fix));
        }
        return Povm::new(out);
    }
    Err(Error::ConstructionFailure("singular S after 5 retries".into()))
}

#[cfg(test)]
mod tests {
    use super::super::linalg::{identity, max_abs, numerical_rank};
    use super::*;

    #[test]
    fn haar_small_cases() {
        let mut rng = rng_from_seed(3);
        let u = haar_unitary(1, &mut rng).unwrap();
        assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let u = haar_unitary(4, &mut rng).unwrap();
        assert!(max_abs(&(u.matrix().adjoint() * u.matrix() - identity(4))) < 1e-12);
        assert!(haar_unitary(0, &mut rng).is_err());
    }

    #[test]
    fn haar_first_moment() {
        let mut rng = rng_from_seed(11);
        let n = 10_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let u = haar_unitary(2, &mut rng).unwrap();
            let x = u.matrix()[(0, 0)].norm_sqr();
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let sd = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 0.02);
        assert!((mean - 0.5).abs() < 3.0 * sd + 1e-3);
    }

    #[test]
    fn rank_r_states() {
        let mut rng = rng_from_seed(5);
        let p = random_rank_r_state(4, 1, &mut rng).unwrap();
        assert!((p.purity() - 1.0).abs() < 1e-10);
        let q = random_rank_r_state(4, 2, &mut rng).unwrap();
        assert_eq!(numerical_rank(q.matrix()), 2);
        let f = random_rank_r_state(3, 3, &mut rng).unwrap();
        assert_eq!(f.rank(), 3);
        assert!(random_rank_r_state(3, 4, &mut rng).is_err());
    }

    #[test]
    fn random_povms() {
        let mut rng = rng_from_seed(9);
        let p = random_rank_r_povm(2, 1, 4, &mut rng).unwrap();
        assert_eq!(p.len(), 4);
        for o in p.outcomes() {
            assert_eq!(numerical_rank(o), 1);
        }
        let q = random_rank_r_povm(3, 2, 9, &mut rng).unwrap();
        assert!(q.outcomes().iter().all(|o| numerical_rank(o) <= 2));
        let t = random_rank_r_povm(2, 2, 2, &mut rng).unwrap();
        let o = t.outcomes();
        assert!(max_abs(&(&o[0] - (identity(2) - &o[1]))) < 1e-10);
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn same_seed_same_stream() {
        let a = haar_unitary(5, &mut rng_from_seed(42)).unwrap();
        let b = haar_unitary(5, &mut rng_from_seed(42)).unwrap();
        assert_eq!(a, b);
    }
}
