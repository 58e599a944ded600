// Indicial roots of the Jacobi operator on the cones, by mode.

use simons_core::spectral::{indicial_roots, kernel_band, sphere_eigen_multiplicity, ModeIndex, RootKind};
use simons_core::{ConeParams, IndicialRoots, Result};

pub struct SpectrumSummary {
    pub clifford: Vec<IndicialRoots>,
    /// Constant-mode kind for n = 2..=8 with p = 1.
    pub constant_kinds: Vec<(u32, RootKind)>,
    pub band_roots: usize,
}

pub fn run_example() -> Result<SpectrumSummary> {
    let c = ConeParams::new(2, 1)?;
    let mut clifford = Vec::new();
    for k in 0..=2 {
        for l in 0..=2 - k {
            let r = indicial_roots(&c, ModeIndex::new(k, l));
            println!(
                "(k,l)=({k},{l}) mult {:>2}  λ+ = {:+.6}{:+.6}i  λ- = {:+.6}{:+.6}i  {}",
                sphere_eigen_multiplicity(1, k) * sphere_eigen_multiplicity(1, l),
                r.plus.re,
                r.plus.im,
                r.minus.re,
                r.minus.im,
                r.kind.as_str()
            );
            clifford.push(r);
        }
    }

    let constant_kinds: Vec<_> = (2..=8)
        .map(|n| {
            let c = ConeParams::new(n, 1).unwrap();
            (c.n(), indicial_roots(&c, ModeIndex::new(0, 0)).kind)
        })
        .collect();
    for (n, kind) in &constant_kinds {
        println!("n = {n}: constant mode {}", kind.as_str());
    }

    // Roots of C_{7,3} with real part in (-3.5, -1.5].
    let band = kernel_band(&ConeParams::new(7, 3)?, 1.5, 3.5)?;
    for b in &band {
        println!("C_7,3 band root {:?}", b);
    }
    Ok(SpectrumSummary { clifford, constant_kinds, band_roots: band.len() })
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
