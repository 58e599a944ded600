// Phase portrait of the reduced flow for C_{2,1}, written as SVG and CSV.

use std::path::PathBuf;

use simons_core::portrait::{phase_portrait, Portrait};
use simons_core::{ConeParams, OrbitControls, Result};

pub fn run_example() -> Result<(Portrait, PathBuf)> {
    let c = ConeParams::new(2, 1)?;
    let portrait = phase_portrait(&c, 20, &OrbitControls::default(), true)?;
    for o in &portrait.orbits {
        let (a, b) = (o.start(), o.end());
        println!("{:<14} ({:.4}, {:.4}) -> ({:.6}, {:.6})", o.label, a.theta, a.phi, b.theta, b.phi);
    }
    let dir = std::env::temp_dir().join("simons-examples");
    std::fs::create_dir_all(&dir)?;
    let svg = dir.join("portrait_n2_p1.svg");
    std::fs::write(&svg, portrait.to_svg())?;
    std::fs::write(dir.join("portrait_n2_p1_endpoints.csv"), portrait.endpoints_csv())?;
    println!("wrote {}", svg.display());
    Ok((portrait, svg))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
