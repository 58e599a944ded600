//! The `simons` command line: argument parsing, configuration merging and
//! file emission for each subcommand.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::asymptotics::{density_at_pole, density_profile};
use crate::cone::{cone_density, ConeParams};
use crate::error::{Error, Result};
use crate::flow::{generate_sigma, OrbitControls, Sign};
use crate::mesh::{obj_mesh, point_cloud, point_cloud_csv, MeshOptions};
use crate::ode::lemma_suite;
use crate::portrait::phase_portrait;
use crate::spectral::{indicial_roots, ModeIndex};
use crate::verify::{log_radii, verify, VerifyOptions};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SIMONS_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Optional JSON configuration; command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<i64>,
    pub p: Option<i64>,
    pub sign: Option<Sign>,
    pub controls: Option<OrbitControls>,
    pub out_dir: Option<PathBuf>,
    pub max_mode: Option<u32>,
    pub grid: Option<usize>,
    pub doubled: Option<bool>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub count: Option<usize>,
    pub pole: Option<bool>,
    pub stride: Option<usize>,
    pub sphere_points: Option<usize>,
    pub rho_max: Option<f64>,
    pub slices: Option<usize>,
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub n_max: Option<i64>,
    pub flux_resolution: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))
    }
}

#[derive(Parser, Debug)]
#[command(name = "simons", version, about = "Invariant minimal hypersurfaces asymptotic to the cones C_{n,p}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $SIMONS_OUT_DIR or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<i64>,
    #[arg(long)]
    p: Option<i64>,
    /// + or -.
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<Sign>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    /// Distance of the seed from the saddle.
    #[arg(long)]
    offset: Option<f64>,
    /// Required growth of log-radius before an orbit stops.
    #[arg(long)]
    rho_span: Option<f64>,
    /// Largest integrator step in arc length.
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Indicial roots for all modes with k + l <= max-mode.
    Roots {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_mode: Option<u32>,
    },
    /// Phase portrait of the reduced flow as SVG and CSV.
    Portrait {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
        /// Also draw the two orbits asymptotic to the doubled cone.
        #[arg(long)]
        doubled: bool,
    },
    /// Profile curve of one surface.
    Profile {
        #[command(flatten)]
        common: Common,
    },
    /// Residual, decay, density and flux checks for one surface.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        flux_resolution: Option<usize>,
    },
    /// Point cloud (and OBJ mesh for n = 2) of one surface.
    Mesh {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        sphere_points: Option<usize>,
        #[arg(long)]
        rho_max: Option<f64>,
        #[arg(long)]
        slices: Option<usize>,
    },
    /// Density ratios about the origin (or the axis point with --pole).
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        pole: bool,
    },
    /// Seeded random instances of the second-order ODE decomposition.
    Odecheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Orbit, residual and density summary for every (n, p, sign) with n <= n-max.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_max: Option<i64>,
    },
}

/// Settings shared by every subcommand after merging file and flags.
struct Resolved {
    cfg: RunConfig,
    out: PathBuf,
    controls: OrbitControls,
    sign: Sign,
}

impl Resolved {
    fn new(common: &Common) -> Result<Self> {
        let cfg = match &common.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let out = common
            .out
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let mut controls = cfg.controls.unwrap_or_default();
        if let Some(v) = common.atol {
            controls.atol = v;
        }
        if let Some(v) = common.rtol {
            controls.rtol = v;
        }
        if let Some(v) = common.offset {
            controls.offset = v;
        }
        if let Some(v) = common.rho_span {
            controls.rho_span = v;
        }
        if let Some(v) = common.max_step {
            controls.max_step = v;
        }
        controls.validate()?;
        let sign = common.sign.or(cfg.sign).unwrap_or(Sign::Plus);
        Ok(Self { cfg, out, controls, sign })
    }

    fn params(&self, common: &Common) -> Result<ConeParams> {
        let n = common.n.or(self.cfg.n).ok_or_else(|| Error::InvalidInput("--n is required".into()))?;
        let p = common.p.or(self.cfg.p).ok_or_else(|| Error::InvalidInput("--p is required".into()))?;
        ConeParams::new(n, p)
    }

    /// Whether the orbit span was set explicitly by flag or file.
    fn span_given(&self, common: &Common) -> bool {
        common.rho_span.is_some() || self.cfg.controls.is_some()
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    }
}

fn tag(params: &ConeParams) -> String {
    format!("n{}_p{}", params.n(), params.p())
}

fn tag_signed(params: &ConeParams, sign: Sign) -> String {
    format!("n{}_p{}_{}", params.n(), params.p(), sign.word())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Runs the command line given as `argv` (including the program name) and
/// returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Roots { common, max_mode } => {
            let r = Resolved::new(&common)?;
            let params = r.params(&common)?;
            let max_mode = max_mode.or(r.cfg.max_mode).unwrap_or(3);
            let path = r.write(&format!("roots_{}.csv", tag(&params)), &roots_csv(&params, max_mode))?;
            println!("{}", path.display());
            Ok(EXIT_OK)
        }
        Command::Portrait { common, grid, doubled } => {
            let r = Resolved::new(&common)?;
            let params = r.params(&common)?;
            let grid = grid.or(r.cfg.grid).unwrap_or(24);
            let doubled = doubled || r.cfg.doubled.unwrap_or(false);
            let portrait = phase_portrait(&params, grid, &r.controls, doubled)?;
            let t = tag(&params);
            for (name, body) in [
                (format!("portrait_{t}.svg"), portrait.to_svg()),
                (format!("portrait_{t}.csv"), portrait.field_csv()),
                (format!("portrait_{t}_orbits.csv"), portrait.orbits_csv()),
                (format!("portrait_{t}_endpoints.csv"), portrait.endpoints_csv()),
                (format!("portrait_{t}_singular.csv"), portrait.singular_csv()),
            ] {
                println!("{}", r.write(&name, &body)?.display());
            }
            Ok(EXIT_OK)
        }
        Command::Profile { common } => {
            let r = Resolved::new(&common)?;
            let params = r.params(&common)?;
            let curve = generate_sigma(&params, r.sign, &r.controls)?;
            let mut s = String::from("s,rho,theta,phi,a,b,da,db\n");
            for x in &curve.samples {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    x.s, x.state.rho, x.state.point.theta, x.state.point.phi, x.a, x.b, x.da, x.db
                );
            }
            let path = r.write(&format!("profile_{}.csv", tag_signed(&params, r.sign)), &s)?;
            println!("{}", path.display());
            println!("samples {} terminal distance {:.3e}", curve.len(), curve.terminal_distance());
            Ok(EXIT_OK)
        }
        Command::Verify { common, flux_resolution } => {
            let r = Resolved::new(&common)?;
            let params = r.params(&common)?;
            let mut controls = r.controls;
            if !r.span_given(&common) {
                // Long enough for the oscillatory decay fit.
                controls.rho_span = 40.0;
            }
            let opts = VerifyOptions {
                flux_resolution: flux_resolution.or(r.cfg.flux_resolution).unwrap_or(256),
                ..VerifyOptions::default()
            };
            let report = verify(&params, r.sign, &controls, &opts)?;
            let t = tag_signed(&params, r.sign);
            let text = report.to_text();
            print!("{text}");
            r.write(&format!("verify_{t}.txt"), &text)?;
            r.write(&format!("verify_{t}_density.csv"), &report.density_csv())?;
            r.write(&format!("verify_{t}_decay.csv"), &report.decay_csv())?;
            if !report.flux.is_empty() {
                r.write(&format!("verify_{t}_flux.csv"), &report.flux_csv())?;
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Mesh { common, stride, sphere_points, rho_max, slices } => {
            let r = Resolved::new(&common)?;
            let params = r.params(&common)?;
            let d = MeshOptions::default();
            let opts = MeshOptions {
                stride: stride.or(r.cfg.stride).unwrap_or(d.stride),
                sphere_points: sphere_points.or(r.cfg.sphere_points).unwrap_or(d.sphere_points),
                rho_max: rho_max.or(r.cfg.rho_max).unwrap_or(d.rho_max),
                seed: r.cfg.seed.unwrap_or(d.seed),
            };
            let curve = generate_sigma(&params, r.sign, &r.controls)?;
            let t = tag_signed(&params, r.sign);
            let cloud = point_cloud(&curve, &opts)?;
            println!("{}", r.write(&format!("mesh_{t}.csv"), &point_cloud_csv(&cloud))?.display());
            if params.n() == 2 {
                let obj = obj_mesh(&curve, &opts, slices.or(r.cfg.slices).unwrap_or(6))?;
                println!("{}", r.write(&format!("mesh_{t}.obj"), &obj)?.display());
            }
            Ok(EXIT_OK)
        }
        Command::Density { common, r_min, r_max, count, pole } => {
            let r = Resolved::new(&common)?;
            let params = r.params(&common)?;
            let curve = generate_sigma(&params, r.sign, &r.controls)?;
            let t = tag_signed(&params, r.sign);
            let count = count.or(r.cfg.count).unwrap_or(100);
            if pole || r.cfg.pole.unwrap_or(false) {
                let radii = log_radii(r_min.or(r.cfg.r_min).unwrap_or(1e-3), r_max.or(r.cfg.r_max).unwrap_or(1.0), count);
                let d = density_at_pole(&curve, &radii)?;
                let mut s = String::from("r,theta\n");
                for (x, th) in d.radii.iter().zip(&d.theta) {
                    let _ = writeln!(s, "{x:.16e},{th:.16e}");
                }
                println!("{}", r.write(&format!("density_pole_{t}.csv"), &s)?.display());
            } else {
                let hi = r_max.or(r.cfg.r_max).unwrap_or(0.999 * curve.last().state.rho.exp());
                let radii = log_radii(r_min.or(r.cfg.r_min).unwrap_or(0.1), hi, count);
                let d = density_profile(&curve, &radii)?;
                let mut s = String::from("r,theta,cap_correction\n");
                for ((x, th), cap) in d.radii.iter().zip(&d.theta).zip(&d.cap_correction) {
                    let _ = writeln!(s, "{x:.16e},{th:.16e},{cap:.16e}");
                }
                println!("{}", r.write(&format!("density_{t}.csv"), &s)?.display());
                println!("limit estimate {:.10} cone density {:.10}", d.limit_estimate, cone_density(&params));
            }
            Ok(EXIT_OK)
        }
        Command::Odecheck { common, seed, count, horizon } => {
            let r = Resolved::new(&common)?;
            let seed = seed.or(r.cfg.seed).unwrap_or(20240611);
            let count = count.or(r.cfg.count).unwrap_or(200);
            let horizon = horizon.or(r.cfg.horizon).unwrap_or(10.0);
            let suite = lemma_suite(seed, count, horizon)?;
            let mut s = String::from("index,seed,max_reconstruction_error,observed_c,v_estimate_holds\n");
            for row in &suite.rows {
                let _ = writeln!(
                    s,
                    "{},{},{:.16e},{:.16e},{}",
                    row.index, row.seed, row.max_reconstruction_error, row.observed_c, row.v_estimate_holds
                );
            }
            r.write(&format!("odecheck_seed{seed}.csv"), &s)?;
            println!("seed {seed}");
            println!("max reconstruction error {:.3e}", suite.max_reconstruction_error());
            println!("observed c {:.6}", suite.max_observed_c());
            println!("v estimate holds in all cases: {}", suite.all_v_estimates_hold());
            let ok = suite.all_v_estimates_hold() && suite.max_reconstruction_error() <= 1e-7;
            Ok(if ok { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Sweep { common, n_max } => {
            let r = Resolved::new(&common)?;
            let n_max = n_max.or(r.cfg.n_max).unwrap_or(5);
            if n_max < 2 {
                return Err(Error::InvalidInput(format!("--n-max must be at least 2, got {n_max}")));
            }
            let cells: Vec<(ConeParams, Sign)> = (2..=n_max)
                .flat_map(|n| (1..n).map(move |p| ConeParams::new(n, p).unwrap()))
                .flat_map(|c| [(c, Sign::Plus), (c, Sign::Minus)])
                .collect();
            let dir = r.out.join("sweep");
            let controls = r.controls;
            let results: Vec<(String, bool)> = std::thread::scope(|scope| {
                let handles: Vec<_> = cells
                    .iter()
                    .map(|&(c, sign)| {
                        let dir = dir.clone();
                        scope.spawn(move || sweep_cell(&c, sign, &controls, &dir))
                    })
                    .collect();
                handles
                    .into_iter()
                    .zip(&cells)
                    .map(|(h, (c, sign))| match h.join() {
                        Ok(res) => res,
                        Err(_) => (format!("{} panicked", tag_signed(c, *sign)), false),
                    })
                    .collect()
            });
            let mut failures = 0;
            for (line, ok) in &results {
                println!("{line}");
                failures += usize::from(!ok);
            }
            println!("{} cells, {} failed", results.len(), failures);
            Ok(if failures == 0 { EXIT_OK } else { EXIT_NUMERICAL })
        }
    }
}

fn roots_csv(params: &ConeParams, max_mode: u32) -> String {
    let mut s = String::from("n,p,k,l,re_plus,im_plus,re_minus,im_minus,kind\n");
    for k in 0..=max_mode {
        for l in 0..=max_mode - k {
            let r = indicial_roots(params, ModeIndex::new(k, l));
            let _ = writeln!(
                s,
                "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                params.n(),
                params.p(),
                k,
                l,
                r.plus.re,
                r.plus.im,
                r.minus.re,
                r.minus.im,
                r.kind.as_str()
            );
        }
    }
    s
}

/// One sweep cell; never panics on numerical failure and writes only its own file.
fn sweep_cell(params: &ConeParams, sign: Sign, controls: &OrbitControls, dir: &Path) -> (String, bool) {
    let t = tag_signed(params, sign);
    let outcome = (|| -> Result<[f64; 4]> {
        let curve = generate_sigma(params, sign, controls)?;
        let graph = crate::asymptotics::profile_to_graph(&curve)?;
        let inv = crate::asymptotics::residual_invariant(params, &graph)?.max_scaled();
        let radii = log_radii(0.1, 0.999 * curve.last().state.rho.exp(), 60);
        let density = density_profile(&curve, &radii)?;
        Ok([curve.terminal_distance(), curve.max_reduced_ode_residual(), inv, density.limit_estimate])
    })();
    let header = "n,p,sign,status,terminal_distance,reduced_residual,invariant_residual,density_limit,cone_density,message\n";
    let (row, line, ok) = match outcome {
        Ok(v) => (
            format!(
                "{},{},{},ok,{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},\n",
                params.n(),
                params.p(),
                sign,
                v[0],
                v[1],
                v[2],
                v[3],
                cone_density(params)
            ),
            format!("{t}: ok, density {:.6}", v[3]),
            true,
        ),
        Err(e) => (
            format!(
                "{},{},{},failed,,,,,{:.16e},\"{}\"\n",
                params.n(),
                params.p(),
                sign,
                cone_density(params),
                e.to_string().replace('"', "'")
            ),
            format!("{t}: failed: {e}"),
            false,
        ),
    };
    let written = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join(format!("{t}.csv")), format!("{header}{row}")));
    match written {
        Ok(()) => (line, ok),
        Err(e) => (format!("{t}: could not write output: {e}"), false),
    }
}
