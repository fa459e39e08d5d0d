//! Seeded random elements, states and measurements for property checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraSpec, Element};
use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::measurement::Povm;
use crate::state_space::State;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn block_wise<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &AlgebraSpec,
    mut f: impl FnMut(&mut R, usize) -> CMatrix,
) -> Element {
    let blocks = spec.block_dims().iter().map(|&n| f(rng, n)).collect();
    Element::from_blocks(spec.clone(), blocks).expect("blocks match spec")
}

/// Element with independent complex Gaussian entries.
pub fn random_element<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> Element {
    block_wise(rng, spec, |r, n| complex_gaussian(r, n, n))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> Element {
    block_wise(rng, spec, |r, n| {
        linalg::hermitian_part(&complex_gaussian(r, n, n))
    })
}

/// Faithful density `BB† / Tr(BB†)` with Gaussian `B`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> State {
    let b = random_element(rng, spec);
    let positive = b.multiply(&b.adjoint()).expect("same spec");
    State::from_positive(positive).expect("Gaussian matrices are almost surely invertible")
}

/// Rank-one state supported in one block.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> State {
    let k = rng.random_range(0..spec.num_blocks());
    let blocks = spec
        .block_dims()
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            if j == k {
                let psi = complex_gaussian(rng, n, 1);
                &psi * psi.adjoint()
            } else {
                CMatrix::zeros(n, n)
            }
        })
        .collect();
    let positive = Element::from_blocks(spec.clone(), blocks).expect("blocks match spec");
    State::from_positive(positive).expect("nonzero vector")
}

/// `exp(i h)` for a random Hermitian `h`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> Element {
    let h = random_hermitian(rng, spec);
    Element::from_blocks(
        spec.clone(),
        h.blocks().iter().map(linalg::expi_hermitian).collect(),
    )
    .expect("blocks match spec")
}

/// Invertible element (Gaussian, almost surely invertible).
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> Element {
    random_element(rng, spec)
}

/// `m^j = S^{-1/2} a_j S^{-1/2}` with `a_j = b_j† b_j` and `S = Σ a_j`.
pub fn random_povm<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &AlgebraSpec,
    outcomes: usize,
) -> Result<Povm> {
    let raw: Vec<Element> = (0..outcomes)
        .map(|_| {
            let b = random_element(rng, spec);
            b.adjoint().multiply(&b).expect("same spec")
        })
        .collect();
    let total = raw
        .iter()
        .skip(1)
        .try_fold(raw[0].clone(), |acc, a| acc.add(a))?;
    let inv_sqrt = Element::from_blocks(
        spec.clone(),
        total
            .blocks()
            .iter()
            .map(linalg::inv_sqrt_psd)
            .collect::<Result<Vec<_>>>()?,
    )?;
    let effects = raw
        .iter()
        .map(|a| {
            inv_sqrt
                .multiply(a)
                .and_then(|x| x.multiply(&inv_sqrt))
                .map(|x| x.hermitian_part())
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// Projective measurement in the eigenbasis of a random Hermitian element.
pub fn random_projective_povm<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> Result<Povm> {
    Povm::projective_eigenbasis(&random_hermitian(rng, spec))
}

/// Uniform point of `(lo, hi)^d` away from the ends by `margin`.
pub fn random_point<R: Rng + ?Sized>(
    rng: &mut R,
    lo: f64,
    hi: f64,
    d: usize,
    margin: f64,
) -> Vec<f64> {
    (0..d)
        .map(|_| rng.random_range((lo + margin)..(hi - margin)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::POSITIVITY_TOL;

    #[test]
    fn samples_are_valid() {
        let mut r = rng(7);
        let spec = AlgebraSpec::new(vec![2, 1, 3]).unwrap();
        let s = random_density(&mut r, &spec);
        assert!(s.is_faithful(1e-12));
        let p = random_pure(&mut r, &spec);
        assert!((p.density().trace().re - 1.0).abs() < 1e-12);
        let u = random_unitary(&mut r, &spec);
        let uu = u.multiply(&u.adjoint()).unwrap();
        assert!(uu.max_abs_diff(&Element::identity(&spec)).unwrap() < 1e-12);
        let povm = random_povm(&mut r, &spec, 4).unwrap();
        assert!(povm.validate(POSITIVITY_TOL).passed);
        let proj = random_projective_povm(&mut r, &spec).unwrap();
        assert!(proj.validate(POSITIVITY_TOL).passed);
    }

    #[test]
    fn seeds_are_reproducible() {
        let spec = AlgebraSpec::matrix(2).unwrap();
        let a = random_hermitian(&mut rng(3), &spec);
        let b = random_hermitian(&mut rng(3), &spec);
        assert_eq!(a, b);
    }
}
