//! Spherical particle diffusion on equal-volume shells, advanced by backward Euler.

use crate::constants::SHELLS;

/// Geometry of a particle split into `n` shells of equal volume.
#[derive(Debug, Clone)]
pub struct ShellGrid {
    radius: f64,
    /// Coupling A_i / (h_i V_shell) of the interior face between shell i-1 and i; index 0 unused.
    coupling: Vec<f64>,
    /// Particle surface area over shell volume.
    surface_factor: f64,
    /// Distance from the outer shell's representative radius to the surface.
    surface_offset: f64,
}

impl ShellGrid {
    pub fn new(radius: f64, shells: usize) -> Self {
        assert!(shells >= 2, "need at least two shells");
        let n = shells as f64;
        let face = |i: usize| radius * (i as f64 / n).cbrt();
        let centre = |i: usize| {
            let (a, b) = (face(i), face(i + 1));
            ((a.powi(3) + b.powi(3)) / 2.0).cbrt()
        };
        let mut coupling = vec![0.0; shells];
        for (i, g) in coupling.iter_mut().enumerate().skip(1) {
            let r = face(i);
            let h = centre(i) - centre(i - 1);
            *g = 3.0 * n * r * r / (radius.powi(3) * h);
        }
        Self {
            radius,
            coupling,
            surface_factor: 3.0 * n / radius,
            surface_offset: radius - centre(shells - 1),
        }
    }

    pub fn with_default_shells(radius: f64) -> Self {
        Self::new(radius, SHELLS)
    }

    pub fn shells(&self) -> usize {
        self.coupling.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Surface concentration given the outward molar flux density `flux` (mol/m^2/s).
    pub fn surface_concentration(&self, conc: &[f64], diffusivity: f64, flux: f64) -> f64 {
        conc[conc.len() - 1] - flux * self.surface_offset / diffusivity
    }

    /// Advance `conc` in place by `dt` with outward surface flux `flux`.
    /// `scratch` must hold at least two vectors' worth of room and is reused between calls.
    pub fn advance(&self, conc: &mut [f64], diffusivity: f64, flux: f64, dt: f64, scratch: &mut DiffusionScratch) {
        let n = conc.len();
        debug_assert_eq!(n, self.shells());
        let k = dt * diffusivity;
        let cp = &mut scratch.upper;
        let dp = &mut scratch.rhs;
        cp.resize(n, 0.0);
        dp.resize(n, 0.0);
        // Thomas algorithm: sub-diagonal a_i = -k g_i, super-diagonal c_i = -k g_{i+1}
        let g = &self.coupling;
        let mut prev_c = 0.0;
        let mut prev_d = 0.0;
        for i in 0..n {
            let gl = if i > 0 { g[i] } else { 0.0 };
            let gr = if i + 1 < n { g[i + 1] } else { 0.0 };
            let a = -k * gl;
            let b = 1.0 + k * (gl + gr);
            let c = -k * gr;
            let mut rhs = conc[i];
            if i + 1 == n {
                rhs -= dt * self.surface_factor * flux;
            }
            let m = b - a * prev_c;
            prev_c = c / m;
            prev_d = (rhs - a * prev_d) / m;
            cp[i] = prev_c;
            dp[i] = prev_d;
        }
        conc[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            conc[i] = dp[i] - cp[i] * conc[i + 1];
        }
    }
}

/// Reusable work arrays for [`ShellGrid::advance`].
#[derive(Debug, Default, Clone)]
pub struct DiffusionScratch {
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

/// Volume-average concentration; shells have equal volume.
pub fn average(conc: &[f64]) -> f64 {
    conc.iter().sum::<f64>() / conc.len() as f64
}

/// Pure form of one diffusion step.
pub fn diffusion_step(grid: &ShellGrid, conc: &[f64], diffusivity: f64, flux: f64, dt: f64) -> Vec<f64> {
    let mut out = conc.to_vec();
    grid.advance(&mut out, diffusivity, flux, dt, &mut DiffusionScratch::default());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shells_have_equal_volume() {
        let grid = ShellGrid::new(1e-5, 20);
        assert!((grid.surface_factor * 1e-5 - 60.0).abs() < 1e-9);
        assert_eq!(grid.shells(), 20);
    }

    #[test]
    fn uniform_state_is_steady_without_flux() {
        let grid = ShellGrid::new(5e-6, 20);
        let c = vec![1234.5; 20];
        let out = diffusion_step(&grid, &c, 1e-14, 0.0, 100.0);
        for v in out {
            assert!((v - 1234.5).abs() < 1e-9);
        }
    }

    #[test]
    fn relaxes_towards_uniform() {
        let grid = ShellGrid::new(5e-6, 20);
        let mut c: Vec<f64> = (0..20).map(|i| 1000.0 + 100.0 * i as f64).collect();
        let mean = average(&c);
        let mut s = DiffusionScratch::default();
        for _ in 0..2000 {
            grid.advance(&mut c, 1e-14, 0.0, 10.0, &mut s);
        }
        for v in &c {
            assert!((v - mean).abs() < 1e-3);
        }
    }

    #[test]
    fn quasi_steady_surface_gradient_matches_analytic_profile() {
        // Under constant flux the profile approaches c(r) = c0(t) - J r^2 / (2 D R),
        // so surface minus average equals J R / (5 D).
        let radius = 5e-6;
        let d = 1e-14;
        let flux = 1e-6;
        let grid = ShellGrid::new(radius, 200);
        let mut c = vec![20000.0; 200];
        let mut s = DiffusionScratch::default();
        for _ in 0..4000 {
            grid.advance(&mut c, d, flux, 1.0, &mut s);
        }
        let surf = grid.surface_concentration(&c, d, flux);
        let gap = average(&c) - surf;
        let expected = flux * radius / (5.0 * d);
        assert!((gap - expected).abs() / expected < 0.01, "{gap} vs {expected}");
    }

    /// Surface concentration sampled every minute of a 30 min constant-flux discharge.
    fn surface_trace(shells: usize, dt: f64, radius: f64, d: f64, flux: f64, c0: f64) -> Vec<f64> {
        let grid = ShellGrid::new(radius, shells);
        let mut c = vec![c0; shells];
        let mut s = DiffusionScratch::default();
        let per_sample = (60.0 / dt).round() as usize;
        (0..30)
            .map(|_| {
                for _ in 0..per_sample {
                    grid.advance(&mut c, d, flux, dt, &mut s);
                }
                grid.surface_concentration(&c, d, flux)
            })
            .collect()
    }

    #[test]
    fn refinement_changes_one_c_surface_concentration_by_under_a_thousandth() {
        let p = crate::params::CellParameters::bundled("nmc622_25c").unwrap();
        for e in [&p.negative, &p.positive] {
            let a = e.specific_area(e.active_fraction);
            let flux = p.one_c() / (crate::constants::FARADAY * p.area * e.thickness * a);
            // lithium enters the positive particle on discharge
            let (flux, c0) = if std::ptr::eq(e, &p.positive) {
                (-flux, 0.4 * e.max_concentration)
            } else {
                (flux, 0.8 * e.max_concentration)
            };
            let coarse = surface_trace(20, 1.0, e.particle_radius, e.diffusivity, flux, c0);
            let fine = surface_trace(40, 0.5, e.particle_radius, e.diffusivity, flux, c0);
            for (a, b) in coarse.iter().zip(&fine) {
                assert!((a - b).abs() / b < 1e-3, "{a} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn conserves_mass(
            flux in -1e-4f64..1e-4,
            dt in 0.1f64..10.0,
            base in 1000.0f64..30000.0,
            tilt in -500.0f64..500.0,
            d in 1e-15f64..1e-13,
        ) {
            let radius = 1e-5;
            let grid = ShellGrid::new(radius, 20);
            let c: Vec<f64> = (0..20).map(|i| base + tilt * i as f64 / 20.0).collect();
            let out = diffusion_step(&grid, &c, d, flux, dt);
            // moles per unit particle volume change by -3 J dt / R
            let expected = average(&c) - 3.0 * flux * dt / radius;
            let got = average(&out);
            prop_assert!((got - expected).abs() <= 1e-10 * base.max(1.0));
        }
    }
}
