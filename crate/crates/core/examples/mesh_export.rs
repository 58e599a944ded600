// Point cloud in R^{n+2} and an OBJ mesh of a 3D slice for Σ_{2,1,+}.

use simons_core::mesh::{obj_mesh, point_cloud, MeshOptions};
use simons_core::{generate_sigma, ConeParams, OrbitControls, Result, Sign};

pub fn run_example() -> Result<(usize, String)> {
    let c = ConeParams::new(2, 1)?;
    let curve = generate_sigma(&c, Sign::Plus, &OrbitControls::default())?;
    let opts = MeshOptions::default();
    let cloud = point_cloud(&curve, &opts)?;
    let obj = obj_mesh(&curve, &opts, 4)?;
    println!("{} points in R^4", cloud.len());
    println!("OBJ: {} vertices, {} faces", obj.lines().filter(|l| l.starts_with("v ")).count(), obj.lines().filter(|l| l.starts_with("f ")).count());
    Ok((cloud.len(), obj))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
