//! Phase portrait of the reduced flow on `[0, π/2] × [-π/2, π/2]`: arrow
//! field, nullclines, singular points and the orbits of the two surfaces,
//! rendered as plain SVG markup and CSV tables.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::cone::ConeParams;
use crate::error::Result;
use crate::flow::{
    doubled_cone_seeds, generate_sigma, integrate_orbit, singular_points, vector_field, y2_nullcline, OrbitControls,
    PhasePoint, ProfileCurve, Sign, SingularPointInfo,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: PhasePoint,
    pub y: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct PortraitOrbit {
    pub label: String,
    pub curve: ProfileCurve,
}

impl PortraitOrbit {
    pub fn start(&self) -> PhasePoint {
        self.curve.samples[0].state.point
    }

    pub fn end(&self) -> PhasePoint {
        self.curve.last().state.point
    }
}

#[derive(Debug, Clone)]
pub struct Portrait {
    pub params: ConeParams,
    /// Cell-centred samples, `grid × grid`, row-major in `θ` then `φ`.
    pub field: Vec<FieldSample>,
    pub grid: usize,
    pub singular: Vec<SingularPointInfo>,
    pub orbits: Vec<PortraitOrbit>,
}

/// Samples the field on a `grid × grid` cell-centred lattice and integrates
/// the orbits of both surfaces, plus the two doubled-cone orbits on request.
pub fn phase_portrait(params: &ConeParams, grid: usize, controls: &OrbitControls, doubled: bool) -> Result<Portrait> {
    let grid = grid.max(2);
    let mut field = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let theta = FRAC_PI_2 * (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let phi = -FRAC_PI_2 + PI * (j as f64 + 0.5) / grid as f64;
            let point = PhasePoint::new(theta, phi);
            field.push(FieldSample { point, y: vector_field(params, point) });
        }
    }
    let mut orbits = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        orbits.push(PortraitOrbit { label: format!("sigma{}", sign.as_str()), curve: generate_sigma(params, sign, controls)? });
    }
    if doubled {
        for (k, (start, dir, ctl)) in doubled_cone_seeds(params, controls).into_iter().enumerate() {
            let label = if k == 0 { "doubled-below" } else { "doubled-above" };
            orbits.push(PortraitOrbit { label: label.into(), curve: integrate_orbit(params, start, dir, &ctl)? });
        }
    }
    Ok(Portrait { params: *params, field, grid, singular: singular_points(params), orbits })
}

const SCALE: f64 = 300.0;
const MARGIN: f64 = 40.0;

fn sx(theta: f64) -> f64 {
    MARGIN + theta * SCALE
}

fn sy(phi: f64) -> f64 {
    MARGIN + (FRAC_PI_2 - phi) * SCALE
}

fn polyline(out: &mut String, pts: impl Iterator<Item = (f64, f64)>, attrs: &str) {
    let mut path = String::new();
    for (k, (t, p)) in pts.enumerate() {
        let _ = write!(path, "{}{:.2},{:.2}", if k == 0 { "" } else { " " }, sx(t), sy(p));
    }
    let _ = writeln!(out, r#"<polyline points="{path}" {attrs}/>"#);
}

impl Portrait {
    pub fn to_svg(&self) -> String {
        let (w, h) = (2.0 * MARGIN + FRAC_PI_2 * SCALE, 2.0 * MARGIN + PI * SCALE);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
        );
        let _ = writeln!(
            s,
            r#"<title>Vector field Y for n = {}, p = {}</title>"#,
            self.params.n(),
            self.params.p()
        );
        s.push_str(concat!(
            r#"<defs><marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" markerHeight="5" orient="auto">"#,
            r##"<path d="M0,0 L10,5 L0,10 z" fill="#555"/></marker>"##,
            "\n",
        ));
        let _ = writeln!(
            s,
            r#"<clipPath id="frame"><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#,
            sx(0.0),
            sy(FRAC_PI_2),
            FRAC_PI_2 * SCALE,
            PI * SCALE
        );
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="black"/>"#,
            sx(0.0),
            sy(FRAC_PI_2),
            FRAC_PI_2 * SCALE,
            PI * SCALE
        );

        // Arrows scaled so the longest spans 80% of a cell.
        let cell = (FRAC_PI_2 / self.grid as f64).min(PI / self.grid as f64) * SCALE;
        let ymax = self.field.iter().map(|f| f.y[0].hypot(f.y[1])).fold(0.0, f64::max);
        s.push_str("<g id=\"field\" stroke=\"#555\" stroke-width=\"1\">\n");
        for f in &self.field {
            let m = f.y[0].hypot(f.y[1]);
            if !(m > 0.0) || !(ymax > 0.0) {
                continue;
            }
            let len = 0.8 * cell * m / ymax;
            // Screen y grows downward as φ grows upward.
            let (dx, dy) = (len * f.y[0] / m, -len * f.y[1] / m);
            let (cx, cy) = (sx(f.point.theta), sy(f.point.phi));
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" marker-end="url(#head)"/>"##,
                cx - dx / 2.0,
                cy - dy / 2.0,
                cx + dx / 2.0,
                cy + dy / 2.0
            );
        }
        s.push_str("</g>\n");

        s.push_str("<g id=\"nullclines\" fill=\"none\" stroke-dasharray=\"6,4\" clip-path=\"url(#frame)\">\n");
        let samples = 200;
        let thetas = || (0..=samples).map(|i| FRAC_PI_2 * i as f64 / samples as f64);
        polyline(&mut s, thetas().map(|t| (t, t)), r#"stroke="steelblue" class="y1-nullcline""#);
        polyline(&mut s, [(0.0, -FRAC_PI_2), (0.0, FRAC_PI_2)].into_iter(), r#"stroke="steelblue" class="y1-nullcline""#);
        polyline(
            &mut s,
            [(FRAC_PI_2, -FRAC_PI_2), (FRAC_PI_2, FRAC_PI_2)].into_iter(),
            r#"stroke="steelblue" class="y1-nullcline""#,
        );
        polyline(
            &mut s,
            thetas().map(|t| (t, y2_nullcline(&self.params, t))),
            r#"stroke="darkorange" class="y2-nullcline""#,
        );
        polyline(
            &mut s,
            thetas().map(|t| (t, y2_nullcline(&self.params, t) - PI)),
            r#"stroke="darkorange" class="y2-nullcline""#,
        );
        s.push_str("</g>\n");

        s.push_str("<g id=\"orbits\" fill=\"none\" stroke-width=\"2\" clip-path=\"url(#frame)\">\n");
        for (k, o) in self.orbits.iter().enumerate() {
            let colour = ["crimson", "seagreen", "slateblue", "goldenrod"][k % 4];
            polyline(
                &mut s,
                o.curve.samples.iter().map(|x| (x.state.point.theta, x.state.point.phi)),
                &format!(r#"stroke="{colour}" class="orbit" data-label="{}""#, o.label),
            );
        }
        s.push_str("</g>\n");

        s.push_str("<g id=\"singular\">\n");
        for sp in &self.singular {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="black" class="singular" data-kind="{}" data-theta="{:.16e}" data-phi="{:.16e}"/>"#,
                sx(sp.location.theta),
                sy(sp.location.phi),
                sp.kind.as_str(),
                sp.location.theta,
                sp.location.phi
            );
        }
        s.push_str("</g>\n");
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">θ</text>"#,
            sx(FRAC_PI_2 / 2.0),
            sy(-FRAC_PI_2) + 28.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">φ</text>"#,
            sx(0.0) - 22.0,
            sy(0.0)
        );
        s.push_str("</svg>\n");
        s
    }

    /// `theta,phi,Y1,Y2` for every lattice sample.
    pub fn field_csv(&self) -> String {
        let mut s = String::from("theta,phi,Y1,Y2\n");
        for f in &self.field {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", f.point.theta, f.point.phi, f.y[0], f.y[1]);
        }
        s
    }

    /// `orbit,s,rho,theta,phi` for every orbit sample.
    pub fn orbits_csv(&self) -> String {
        let mut s = String::from("orbit,s,rho,theta,phi\n");
        for o in &self.orbits {
            for x in &o.curve.samples {
                let _ = writeln!(
                    s,
                    "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                    o.label, x.s, x.state.rho, x.state.point.theta, x.state.point.phi
                );
            }
        }
        s
    }

    /// `orbit,theta_start,phi_start,theta_end,phi_end,sink_distance`.
    pub fn endpoints_csv(&self) -> String {
        let mut s = String::from("orbit,theta_start,phi_start,theta_end,phi_end,sink_distance\n");
        for o in &self.orbits {
            let (a, b) = (o.start(), o.end());
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                o.label,
                a.theta,
                a.phi,
                b.theta,
                b.phi,
                o.curve.terminal_distance()
            );
        }
        s
    }

    /// `kind,theta,phi,re1,im1,re2,im2` for the singular points.
    pub fn singular_csv(&self) -> String {
        let mut s = String::from("kind,theta,phi,re1,im1,re2,im2\n");
        for sp in &self.singular {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                sp.kind.as_str(),
                sp.location.theta,
                sp.location.phi,
                sp.eigenvalues[0].re,
                sp.eigenvalues[0].im,
                sp.eigenvalues[1].re,
                sp.eigenvalues[1].im
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_portrait() {
        let c = ConeParams::new(2, 1).unwrap();
        let p = phase_portrait(&c, 12, &OrbitControls::default(), false).unwrap();
        assert_eq!(p.field.len(), 144);
        assert_eq!(p.singular.len(), 3);
        for o in &p.orbits {
            assert!(o.end().distance(&PhasePoint::new(PI / 4.0, PI / 4.0)) < 1e-6);
        }
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("class=\"singular\"").count(), 3);
        assert_eq!(svg.matches("class=\"orbit\"").count(), 2);
        assert_eq!(p.field_csv().lines().count(), 145);
    }

    #[test]
    fn doubled_orbits_are_optional() {
        let c = ConeParams::new(3, 1).unwrap();
        let p = phase_portrait(&c, 4, &OrbitControls::default(), true).unwrap();
        assert_eq!(p.orbits.len(), 4);
        assert_eq!(p.endpoints_csv().lines().count(), 5);
    }
}
