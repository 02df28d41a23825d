//! Conformally flat torus metrics carrying a product eigenfunction.
//!
//! Both constructions here follow one scheme: pick a positive profile `F` on
//! the circle, set `Φ(x,y) = F(x)·cos(my)`, and define the conformal factor
//! `Q(x) = 1 − F″(x)/(m²·F(x))`.  The metric `Q·(dx²+dy²)` has
//! Laplace–Beltrami operator `Q⁻¹Δ₀`, and a two-line computation shows
//! `−Q⁻¹Δ₀Φ = m²Φ`, i.e. `Φ` is an eigenfunction with eigenvalue `m²`.
//! The profiles are engineered so that the super-level set `{Φ > 1}`
//! splinters into many components:
//!
//! * the *smooth* profile modulates a flat plateau by
//!   `exp(−1/x²)·cos(1/x²)`, whose positive bands accumulate at `x = 0` —
//!   `{Φ > 1}` then has one component per band, infinitely many in the limit;
//! * the *analytic* profile is `1 + a·cos(nx)`, whose `n` wells give `{Φ > 1}`
//!   exactly `n` components while keeping the metric real-analytic.
//!
//! Positivity of `Q` is never assumed: every constructor carries an audited
//! minimum over a scan grid much finer than the build resolution and refuses
//! to return a profile whose conformal factor could vanish.

use std::f64::consts::PI;

use crate::fields::{
    sample1d, DomainTopology, Grid1DPeriodic, ScalarField1D, ScalarField2D,
};
use crate::numerics::fft;
use crate::{Error, Result};

/// Build resolution used by [`build_example1`] when the caller has no
/// opinion.  High enough that the spectral second derivative resolves every
/// oscillation of the seed whose amplitude exceeds roundoff.
pub const EXAMPLE1_DEFAULT_RESOLUTION: usize = 1 << 14;

/// The positivity audit samples the conformal factor on a grid this many
/// times finer than the build grid (via zero-padded Fourier interpolation).
pub const POSITIVITY_SCAN_FACTOR: usize = 64;

/// Number of scan points for the closed-form analytic-profile audit.
const ANALYTIC_SCAN_POINTS: usize = 1_000_000;

// ──────────────────────────────────────────────────────────────────────────
// Smooth cutoff
// ──────────────────────────────────────────────────────────────────────────

/// A smooth plateau cutoff: identically 1 on `[−r₁, r₁]`, identically 0
/// outside `(−r₂, r₂)`, monotone and C^∞ in between, values in `[0,1]`.
///
/// The transition uses the classical `exp(−1/t)` mollifier step, so every
/// derivative vanishes at both ends of the transition zone.
#[derive(Debug, Clone, Copy)]
pub struct BumpSpec {
    r1: f64,
    r2: f64,
}

impl BumpSpec {
    /// A cutoff with plateau `[−r₁, r₁]` and support `[−r₂, r₂]`.
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1.is_finite() && r2.is_finite() && 0.0 < r1 && r1 < r2) {
            return Err(Error::invalid(format!(
                "cutoff radii must satisfy 0 < r1 < r2, got r1={r1}, r2={r2}"
            )));
        }
        Ok(Self { r1, r2 })
    }

    /// The standard choice for the smooth torus profile: plateau `[−π/3, π/3]`,
    /// support `[−π/2, π/2]`.
    #[must_use]
    pub fn standard() -> Self {
        Self {
            r1: PI / 3.0,
            r2: PI / 2.0,
        }
    }

    /// Radius of the plateau where the cutoff is exactly 1.
    #[must_use]
    pub fn inner_radius(&self) -> f64 {
        self.r1
    }

    /// Radius of the support; the cutoff is exactly 0 for `|x| ≥ r₂`.
    #[must_use]
    pub fn outer_radius(&self) -> f64 {
        self.r2
    }

    /// Cutoff value at `x`.
    #[must_use]
    pub fn cutoff(&self, x: f64) -> f64 {
        smoothstep((self.r2 - x.abs()) / (self.r2 - self.r1))
    }
}

/// C^∞ monotone step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, and
/// `e(t)/(e(t) + e(1−t))` with `e(t) = exp(−1/t)` in between.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

// ──────────────────────────────────────────────────────────────────────────
// The oscillating seed and the smooth profile ψ
// ──────────────────────────────────────────────────────────────────────────

/// `exp(−1/x²)·cos(1/x²)`, with the removable singularity at 0 filled by 0.
///
/// The exponential factor flushes to zero long before `cos(1/x²)` loses
/// meaning, so the product is well defined (and correctly 0) for every
/// finite `x`; the explicit guard covers `x = 0` and subnormals where
/// `1/x²` overflows to infinity.
#[must_use]
pub fn oscillating_seed(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    if !s.is_finite() {
        return 0.0;
    }
    (-s).exp() * s.cos()
}

/// The plateau-localized oscillation on `[−π, π]`:
/// `ψ₁(x) = φ(x)·exp(−1/x²)·cos(1/x²) + 1 − φ(x)` with `φ` the cutoff.
///
/// Inside the plateau this is the bare seed; outside the cutoff support it
/// is exactly 1; in between it is a positive blend (the seed's magnitude is
/// below `e^{−1/r₁²} < 0.41` there, so the blend stays above `0.59·(1−φ)`… in
/// particular ψ₁ only vanishes inside the plateau).
#[must_use]
pub fn psi1(x: f64, bump: &BumpSpec) -> f64 {
    let phi = bump.cutoff(x);
    // Grouping matters: `(1 − φ)` first, so that on the plateau (φ = 1) the
    // result is the bare seed.  The naive left-to-right `φ·seed + 1 − φ`
    // computes `(seed + 1) − 1` there and quantizes the e^{−1/x²}-sized
    // oscillation to the 2⁻⁵³ grid of 1.0, destroying the deep bands.
    phi * oscillating_seed(x) + (1.0 - phi)
}

/// 2π-periodic extension of [`psi1`]: evaluate at the representative of `x`
/// in `(−π, π]`.
#[must_use]
pub fn psi0(x: f64, bump: &BumpSpec) -> f64 {
    psi1(wrap_to_pi(x), bump)
}

/// Representative of `x` modulo 2π lying in `(−π, π]`.
fn wrap_to_pi(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// The positive zeros of the seed, largest first:
/// `x_k = (π/2 + kπ)^{−1/2}` for `k = 0, 1, …` (where `cos(1/x²)` vanishes).
/// Together with 0 and the mirror images these are exactly the zeros of ψ₁.
#[must_use]
pub fn seed_zeros(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 1.0 / (PI / 2.0 + k as f64 * PI).sqrt())
        .collect()
}

// ──────────────────────────────────────────────────────────────────────────
// Smooth profile
// ──────────────────────────────────────────────────────────────────────────

/// The smooth torus construction: `F = 1 + ψ₀/2`, transverse frequency `m`,
/// conformal factor `Q = 1 − F″/(m²F)` with an audited positive minimum.
#[derive(Debug, Clone)]
pub struct Example1Profile {
    /// Cutoff used to localize the oscillating seed.
    pub bump: BumpSpec,
    /// Transverse frequency; the eigenvalue of `Φ(x,y) = F(x)cos(my)` is `m²`.
    pub m: u32,
    /// Profile samples `F = 1 + ψ₀/2` on the build grid.
    pub f: ScalarField1D,
    /// Spectral second derivative of `F` on the build grid.
    pub f_second: ScalarField1D,
    /// Conformal factor samples `Q = 1 − F″/(m²F)` on the build grid.
    pub q: ScalarField1D,
    /// `max F″/F` over the build grid — the quantity `m²` must dominate.
    pub sup_ratio: f64,
    /// Audited minimum of `Q` over the [`POSITIVITY_SCAN_FACTOR`]× finer grid.
    pub min_q: f64,
    /// Fineness multiplier of the audit grid relative to the build grid.
    pub scan_factor: usize,
}

/// Build the smooth profile at the given resolution (power of two, ≥ 1024).
///
/// With `m = None` the frequency is found by doubling from 1 until the
/// audited minimum of `Q` is positive, which happens as soon as
/// `m² > sup F″/F`.  An explicit `m` that fails the audit is an error that
/// reports `sup F″/F` so the caller can pick a sufficient frequency.
pub fn build_example1(m: Option<u32>, resolution: usize) -> Result<Example1Profile> {
    if !resolution.is_power_of_two() || resolution < 1024 {
        return Err(Error::invalid(format!(
            "build resolution must be a power of two ≥ 1024, got {resolution}"
        )));
    }
    let bump = BumpSpec::standard();
    let grid = Grid1DPeriodic::new(resolution, 2.0 * PI)?;
    let f = sample1d(|x| 1.0 + 0.5 * psi0(x, &bump), &grid, "F")?;
    match m {
        Some(m) => assemble_example1(bump, m, f),
        None => {
            let mut m = 1u32;
            loop {
                match assemble_example1(bump, m, f.clone()) {
                    Ok(profile) => return Ok(profile),
                    Err(Error::BoundViolated(_)) if m < 1 << 12 => m *= 2,
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

/// Assemble a smooth profile from explicit `F` samples: differentiate
/// spectrally, form `Q`, and run the fine positivity audit.
fn assemble_example1(bump: BumpSpec, m: u32, f: ScalarField1D) -> Result<Example1Profile> {
    if m == 0 {
        return Err(Error::invalid("transverse frequency m must be ≥ 1"));
    }
    let f_second = f.second_derivative_periodic()?;
    let m2 = f64::from(m) * f64::from(m);
    let sup_ratio = f
        .values
        .iter()
        .zip(&f_second.values)
        .map(|(&fv, &fpp)| fpp / fv)
        .fold(f64::NEG_INFINITY, f64::max);

    let q_values: Vec<f64> = f
        .values
        .iter()
        .zip(&f_second.values)
        .map(|(&fv, &fpp)| 1.0 - fpp / (m2 * fv))
        .collect();
    let q = ScalarField1D::new(f.grid.clone(), q_values, "Q")?;

    // Audit: evaluate the trigonometric interpolants of F and F″ on a much
    // finer grid and take the minimum of the reassembled Q there.  This
    // catches sign dips between build nodes that the coarse minimum misses.
    let f_fine = fft::upsample(&f.values, POSITIVITY_SCAN_FACTOR);
    let fpp_fine = fft::upsample(&f_second.values, POSITIVITY_SCAN_FACTOR);
    let min_q = f_fine
        .iter()
        .zip(&fpp_fine)
        .map(|(&fv, &fpp)| 1.0 - fpp / (m2 * fv))
        .fold(f64::INFINITY, f64::min);
    if min_q <= 0.0 {
        return Err(Error::bound(format!(
            "conformal factor not positive at m={m}: audited min Q = {min_q:.6e}; \
             need m² > sup F″/F = {sup_ratio:.6}"
        )));
    }
    Ok(Example1Profile {
        bump,
        m,
        f,
        f_second,
        q,
        sup_ratio,
        min_q,
        scan_factor: POSITIVITY_SCAN_FACTOR,
    })
}

impl Example1Profile {
    /// Maximum of `|Δ₀Φ + m²QΦ|` over an `nx × ny` torus grid, with the
    /// x-derivative taken spectrally *at that verification resolution* (an
    /// independent check, not a copy of the build-time derivative).
    ///
    /// `Δ₀` acts separably on the product `F(x)cos(my)`: the transverse
    /// factor is an exact eigenvector of the spectral second derivative when
    /// `m < ny/2`, so the grid residual is `(F″ + m²(Q−1)F)(x)·cos(my)`.
    /// `nx` must divide the build resolution so the stored `Q` restricts to
    /// the verification nodes exactly.
    pub fn eigen_residual(&self, nx: usize, ny: usize) -> Result<f64> {
        let build_n = self.q.grid.n;
        if nx == 0 || build_n % nx != 0 {
            return Err(Error::invalid(format!(
                "verification grid nx={nx} must divide the build resolution {build_n}"
            )));
        }
        let stride = build_n / nx;
        let q_sub: Vec<f64> = (0..nx).map(|i| self.q.values[i * stride]).collect();
        let grid = Grid1DPeriodic::new(nx, 2.0 * PI)?;
        let bump = self.bump;
        let f = sample1d(|x| 1.0 + 0.5 * psi0(x, &bump), &grid, "F")?;
        product_eigen_residual(&f, &q_sub, self.m, ny)
    }
}

// ──────────────────────────────────────────────────────────────────────────
// Analytic profile
// ──────────────────────────────────────────────────────────────────────────

/// The analytic torus construction: `F_a = 1 + a·cos(nx)`, eigenvalue 1,
/// conformal factor `Q_a = 1 + a·n²·cos(nx)/(1 + a·cos(nx))` in closed form.
#[derive(Debug, Clone, Copy)]
pub struct Example2Profile {
    /// Number of wells of the profile; `{Φ > 1}` has exactly `n` components.
    pub n: u32,
    /// Modulation amplitude, `0 ≤ a < 1`.
    pub a: f64,
    /// Minimum of `Q_a` over the closed-form scan.
    pub min_q: f64,
    /// Scan point attaining the minimum.
    pub min_q_x: f64,
}

impl Example2Profile {
    /// Profile value `F_a(x) = 1 + a·cos(nx)`.
    #[must_use]
    pub fn f(&self, x: f64) -> f64 {
        1.0 + self.a * (f64::from(self.n) * x).cos()
    }

    /// Closed-form second derivative `F_a″(x) = −a·n²·cos(nx)`.
    #[must_use]
    pub fn f_second(&self, x: f64) -> f64 {
        let n = f64::from(self.n);
        -self.a * n * n * (n * x).cos()
    }

    /// Conformal factor `Q_a(x) = 1 + a·n²·cos(nx)/(1 + a·cos(nx))`.
    #[must_use]
    pub fn q(&self, x: f64) -> f64 {
        let n = f64::from(self.n);
        let c = (n * x).cos();
        1.0 + self.a * n * n * c / (1.0 + self.a * c)
    }

    /// The eigenfunction `Φ_a(x,y) = F_a(x)·cos(y)` (eigenvalue 1).
    #[must_use]
    pub fn phi(&self, x: f64, y: f64) -> f64 {
        self.f(x) * y.cos()
    }

    /// Maximum of `|Δ₀Φ_a + Q_a·Φ_a|` over an `nx × ny` torus grid with the
    /// x-derivative taken spectrally at that resolution.  `F_a` is a degree-n
    /// trigonometric polynomial, so for `nx > 2n` the spectral derivative is
    /// exact to rounding and the residual sits at the rounding floor.
    pub fn eigen_residual(&self, nx: usize, ny: usize) -> Result<f64> {
        let grid = Grid1DPeriodic::new(nx, 2.0 * PI)?;
        let me = *self;
        let f = sample1d(move |x| me.f(x), &grid, "F_a")?;
        let q_nodes: Vec<f64> = (0..nx).map(|i| self.q(f.grid.node(i))).collect();
        product_eigen_residual(&f, &q_nodes, 1, ny)
    }
}

/// Largest comfortable modulation amplitude for `n` wells: half the
/// positivity threshold `1/(n²+1)` (the closed-form minimum of `Q_a` is
/// `1 − a·n²/(1−a)`, positive exactly when `a < 1/(n²+1)`).
#[must_use]
pub fn auto_amplitude(n: u32) -> f64 {
    0.5 / f64::from(n * n + 1)
}

/// Build the analytic profile, auditing positivity of the conformal factor
/// on a dense closed-form scan.
pub fn build_example2(n: u32, a: f64) -> Result<Example2Profile> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "analytic profile needs n ≥ 3 wells, got {n}"
        )));
    }
    if !a.is_finite() || !(0.0..1.0).contains(&a) {
        return Err(Error::invalid(format!(
            "modulation amplitude must lie in [0,1), got {a}"
        )));
    }
    let candidate = Example2Profile {
        n,
        a,
        min_q: f64::INFINITY,
        min_q_x: 0.0,
    };
    let mut min_q = f64::INFINITY;
    let mut min_q_x = 0.0;
    for i in 0..ANALYTIC_SCAN_POINTS {
        let x = 2.0 * PI * i as f64 / ANALYTIC_SCAN_POINTS as f64;
        let q = candidate.q(x);
        if q < min_q {
            min_q = q;
            min_q_x = x;
        }
    }
    if min_q <= 0.0 {
        return Err(Error::bound(format!(
            "conformal factor not positive: min Q_a = {min_q:.6} at x = {min_q_x:.6} \
             (n={n}, a={a}); positivity needs a < 1/(n²+1) = {:.6}",
            1.0 / f64::from(n * n + 1)
        )));
    }
    Ok(Example2Profile {
        min_q,
        min_q_x,
        ..candidate
    })
}

// ──────────────────────────────────────────────────────────────────────────
// Field builders
// ──────────────────────────────────────────────────────────────────────────

/// Sample `Φ(x,y) = F(x)·cos(my)` for the smooth profile on an `nx × ny`
/// periodic grid.  `F` is evaluated analytically (not interpolated from the
/// build grid), with evenness in both variables exact on the grid.
pub fn phi_field_example1(
    profile: &Example1Profile,
    nx: usize,
    ny: usize,
) -> Result<ScalarField2D> {
    let bump = profile.bump;
    let m = f64::from(profile.m);
    sample_even_product(
        |x| 1.0 + 0.5 * psi0(x, &bump),
        |y| (m * y).cos(),
        nx,
        ny,
        "Phi_m",
    )
}

/// Sample `Φ_a(x,y) = F_a(x)·cos(y)` on an `nx × ny` periodic grid, with
/// evenness in both variables exact on the grid.
pub fn phi_field_example2(
    profile: &Example2Profile,
    nx: usize,
    ny: usize,
) -> Result<ScalarField2D> {
    let p = *profile;
    sample_even_product(|x| p.f(x), |y| y.cos(), nx, ny, "Phi_a")
}

/// The stable excess field for the smooth profile:
/// `{Φ > 1} = {W > 0}` with `W(x,y) = (ψ₀(x)/2)·cos(my) − 2·sin²(my/2)`.
///
/// `Φ − 1 = F·cos(my) − 1` computed directly loses the `e^{−1/x²}`-sized
/// band structure near `x = 0` to cancellation; the rewritten form evaluates
/// both contributions to full relative precision, so bands with amplitude
/// far below the 2⁻⁵² unit roundoff of `Φ ≈ 1` remain countable.
///
/// Sampled on the planar window `[x_lo, x_hi] × [−y_half, y_half]` with an
/// all-true mask; `ny` must be odd so that `y = 0` is a column center (the
/// deepest bands are visible only on that line).
pub fn level_one_excess_example1(
    bump: &BumpSpec,
    m: u32,
    x_window: (f64, f64),
    y_half: f64,
    nx: usize,
    ny: usize,
) -> Result<ScalarField2D> {
    let (x_lo, x_hi) = x_window;
    if !(x_lo.is_finite() && x_hi.is_finite() && x_lo < x_hi) {
        return Err(Error::invalid("empty or non-finite x window"));
    }
    if !(y_half.is_finite() && y_half > 0.0) {
        return Err(Error::invalid("y half-width must be positive"));
    }
    if ny % 2 == 0 {
        return Err(Error::invalid(format!(
            "ny must be odd so that y = 0 is a column center, got {ny}"
        )));
    }
    let mf = f64::from(m);
    let topology = DomainTopology::PlanarMasked {
        nx,
        ny,
        x0: x_lo,
        x1: x_hi,
        y0: -y_half,
        y1: y_half,
        mask: vec![true; nx * ny],
    };
    let mut values = Vec::with_capacity(nx * ny);
    for row in 0..nx {
        for col in 0..ny {
            let (x, y) = topology.cell_center(row, col);
            let half = (0.5 * mf * y).sin();
            values.push(0.5 * psi0(x, bump) * (mf * y).cos() - 2.0 * half * half);
        }
    }
    ScalarField2D::new(topology, values, "Phi_m - 1 (stable)")
}

/// Sample the separable field `f(x)·g(y)` with both factors even about 0,
/// evaluating each factor on half the nodes and mirroring so the evenness
/// holds bit-exactly on the grid: `h(−x,y) = h(x,y)` and `h(x,−y) = h(x,y)`
/// as floating-point values, not merely up to rounding.
fn sample_even_product(
    fx: impl Fn(f64) -> f64,
    gy: impl Fn(f64) -> f64,
    nx: usize,
    ny: usize,
    label: &str,
) -> Result<ScalarField2D> {
    let topology = DomainTopology::TorusPeriodic {
        nx,
        ny,
        lx: 2.0 * PI,
        ly: 2.0 * PI,
    };
    let mirrored = |n: usize, eval: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut vals = vec![0.0; n];
        for (i, v) in vals.iter_mut().enumerate().take(n / 2 + 1) {
            *v = eval(2.0 * PI * i as f64 / n as f64);
        }
        for i in n / 2 + 1..n {
            vals[i] = vals[n - i];
        }
        vals
    };
    let fv = mirrored(nx, &fx);
    let gv = mirrored(ny, &gy);
    let mut values = Vec::with_capacity(nx * ny);
    for &fx_i in &fv {
        for &gy_j in &gv {
            values.push(fx_i * gy_j);
        }
    }
    ScalarField2D::new(topology, values, label)
}

/// Shared residual kernel: `max |(F″ + m²(Q−1)F)(x)·cos(my)|` over the grid,
/// with `F″` the spectral derivative of the given samples.  Requires
/// `m < ny/2` so the transverse factor is exactly representable.
fn product_eigen_residual(
    f: &ScalarField1D,
    q_at_nodes: &[f64],
    m: u32,
    ny: usize,
) -> Result<f64> {
    if 2 * (m as usize) >= ny {
        return Err(Error::invalid(format!(
            "transverse grid ny={ny} cannot represent frequency m={m}"
        )));
    }
    let m2 = f64::from(m) * f64::from(m);
    let f_second = f.second_derivative_periodic()?;
    let radial: Vec<f64> = (0..f.grid.n)
        .map(|i| f_second.values[i] + m2 * (q_at_nodes[i] - 1.0) * f.values[i])
        .collect();
    let mut worst = 0.0f64;
    for r in &radial {
        for j in 0..ny {
            let y = 2.0 * PI * j as f64 / ny as f64;
            worst = worst.max((r * (f64::from(m) * y).cos()).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodal::{count_level_components, CountOptions, Side};
    use crate::numerics::bisect;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn cutoff_is_plateau_then_zero() {
        let b = BumpSpec::standard();
        assert_eq!(b.cutoff(0.0), 1.0);
        assert_eq!(b.cutoff(PI / 3.0), 1.0);
        assert_eq!(b.cutoff(-0.9), 1.0);
        assert_eq!(b.cutoff(PI / 2.0), 0.0);
        assert_eq!(b.cutoff(3.0), 0.0);
        let mid = b.cutoff(1.3);
        assert!(mid > 0.0 && mid < 1.0, "transition zone value {mid}");
        // Monotone decreasing across the transition.
        let mut prev = 1.0;
        for i in 0..100 {
            let x = PI / 3.0 + (PI / 6.0) * i as f64 / 99.0;
            let v = b.cutoff(x);
            assert!(v <= prev + 1e-15, "cutoff not monotone at x={x}");
            prev = v;
        }
    }

    #[test]
    fn psi1_matches_its_charter() {
        let b = BumpSpec::standard();
        // Outside the cutoff support: exactly 1.
        assert_eq!(psi1(3.0, &b), 1.0);
        assert_eq!(psi1(-2.0, &b), 1.0);
        // At the removable singularity: exactly 0.
        assert_eq!(psi1(0.0, &b), 0.0);
        // At a seed zero: the cosine factor kills the value.
        let z = 1.0 / (PI / 2.0 + 2.0 * PI).sqrt();
        assert!(
            psi1(z, &b).abs() < 1e-18,
            "ψ₁ at a seed zero: {:e}",
            psi1(z, &b)
        );
        // |ψ₁| ≤ 1 and ψ₁ > 0 outside the plateau.
        for i in 0..=20_000 {
            let x = -PI + TAU * i as f64 / 20_000.0;
            let v = psi1(x, &b);
            assert!(v.abs() <= 1.0 + 1e-15, "|ψ₁({x})| = {v} exceeds 1");
            if x.abs() > PI / 3.0 {
                assert!(v > 0.0, "ψ₁({x}) = {v} not positive off the plateau");
            }
        }
    }

    #[test]
    fn seed_zero_locations_match_bisection_oracle() {
        // Scan [0.17, 0.9] for sign changes of ψ₁ and compare the bisected
        // roots against the closed-form zero ladder.
        let b = BumpSpec::standard();
        let f = |x: f64| psi1(x, &b);
        let brackets = bisect::sign_change_brackets(&f, 0.17, 0.9, 4096);
        let mut roots: Vec<f64> = brackets
            .iter()
            .map(|&(lo, hi)| bisect::bisect(&f, lo, hi, 1e-13).unwrap())
            .collect();
        roots.sort_by(|p, q| q.partial_cmp(p).unwrap()); // largest first
        let expected: Vec<f64> = seed_zeros(12)
            .into_iter()
            .filter(|z| *z > 0.17)
            .collect();
        assert_eq!(
            roots.len(),
            expected.len(),
            "zero count in [0.17, 0.9]: found {:?}",
            roots
        );
        for (got, want) in roots.iter().zip(&expected) {
            assert!(
                (got - want).abs() < 1e-10,
                "zero mismatch: bisection {got}, closed form {want}"
            );
        }
    }

    #[test]
    fn smooth_profile_auto_frequency_is_positive_and_minimal() {
        let p = build_example1(None, EXAMPLE1_DEFAULT_RESOLUTION).unwrap();
        assert!(p.min_q > 0.0, "audited min Q = {}", p.min_q);
        assert!(
            f64::from(p.m) * f64::from(p.m) > p.sup_ratio,
            "m² = {} must dominate sup F″/F = {}",
            p.m * p.m,
            p.sup_ratio
        );
        assert_eq!(p.scan_factor, POSITIVITY_SCAN_FACTOR);
        // The doubling search stops at the first admissible power of two.
        if p.m > 1 {
            let half = build_example1(Some(p.m / 2), EXAMPLE1_DEFAULT_RESOLUTION);
            assert!(half.is_err(), "m/2 should have failed the audit");
        }
        // Profile floor: F = 1 + ψ₀/2 ≥ 1/2.
        let (fmin, fmax) = p.f.min_max();
        assert!(fmin >= 0.5 - 1e-12, "min F = {fmin}");
        assert!(fmax <= 1.5 + 1e-12, "max F = {fmax}");
    }

    #[test]
    fn too_small_frequency_reports_the_ratio() {
        let err = build_example1(Some(1), EXAMPLE1_DEFAULT_RESOLUTION).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("sup F″/F"),
            "error must report the profile ratio, got: {msg}"
        );
    }

    #[test]
    fn flat_profile_gives_unit_conformal_factor() {
        // With the oscillation amplitude forced to zero (F ≡ 1) the factor
        // is identically 1 no matter the frequency.
        let grid = Grid1DPeriodic::new(1024, TAU).unwrap();
        let f = sample1d(|_| 1.0, &grid, "flat").unwrap();
        for m in [1u32, 5] {
            let p = assemble_example1(BumpSpec::standard(), m, f.clone()).unwrap();
            let (qmin, qmax) = p.q.min_max();
            assert!(
                (qmin - 1.0).abs() < 1e-12 && (qmax - 1.0).abs() < 1e-12,
                "m={m}: Q range [{qmin}, {qmax}]"
            );
        }
    }

    #[test]
    fn smooth_profile_eigen_residual_is_small() {
        let p = build_example1(None, EXAMPLE1_DEFAULT_RESOLUTION).unwrap();
        let m2 = f64::from(p.m) * f64::from(p.m);
        let res = p.eigen_residual(1024, 64).unwrap();
        assert!(
            res < 1e-6 * m2,
            "residual {res:.3e} ≥ 1e-6·m² = {:.3e}",
            1e-6 * m2
        );
    }

    #[test]
    fn analytic_profile_accepts_and_rejects_by_positivity() {
        // a = 0: flat, Q ≡ 1.
        let flat = build_example2(5, 0.0).unwrap();
        for i in 0..10 {
            assert_eq!(flat.q(0.61 * i as f64), 1.0);
        }
        // n = 5, a = 0.1: min Q ≈ 1 − 2.5/0.9 < 0 — rejected, with the
        // minimizing abscissa (a well bottom, cos(5x) = −1) in the message.
        let err = build_example2(5, 0.1).unwrap_err();
        assert!(matches!(err, Error::BoundViolated(_)), "got {err:?}");
        // n = 5, a = 0.03: min Q = 1 − 0.75/0.97 > 0 — accepted.
        let p = build_example2(5, 0.03).unwrap();
        let expect = 1.0 - 0.75 / 0.97;
        assert!(
            (p.min_q - expect).abs() < 1e-6,
            "min Q = {}, closed form {expect}",
            p.min_q
        );
        // The auto amplitude passes its own audit with room to spare.
        let auto = build_example2(5, auto_amplitude(5)).unwrap();
        assert!(auto.min_q > 0.3, "auto amplitude margin: {}", auto.min_q);
    }

    #[test]
    fn analytic_profile_eigen_residual_is_rounding_level() {
        let p = build_example2(5, 0.03).unwrap();
        let res = p.eigen_residual(512, 64).unwrap();
        assert!(res < 1e-10, "residual {res:.3e}");
    }

    #[test]
    fn analytic_field_symmetries_are_exact_on_the_grid() {
        let p = build_example2(4, 0.02).unwrap();
        let field = phi_field_example2(&p, 128, 96).unwrap();
        let (nx, ny) = (128usize, 96usize);
        for i in 0..nx {
            for j in 0..ny {
                let v = field.at(i, j);
                let mx = field.at((nx - i) % nx, j);
                let my = field.at(i, (ny - j) % ny);
                assert!(v == mx, "x-mirror mismatch at ({i},{j}): {v} vs {mx}");
                assert!(v == my, "y-mirror mismatch at ({i},{j}): {v} vs {my}");
            }
        }
    }

    #[test]
    fn analytic_super_level_set_has_n_components() {
        let p = build_example2(5, auto_amplitude(5)).unwrap();
        let field = phi_field_example2(&p, 512, 128).unwrap();
        let rep =
            count_level_components(&field, 1.0, Side::Above, &CountOptions::default()).unwrap();
        assert_eq!(rep.component_count, 5, "one component per profile well");
    }

    #[test]
    fn negative_profile_band_forces_phi_below_one() {
        // Cells with ψ₀(x) < 0 must satisfy Φ < 1 whatever y is.  Where the
        // band amplitude sinks below the 2⁻⁵³ grid of 1.0 the raw product
        // rounds to exactly 1, so the strict inequality is asserted on the
        // stable excess W = (ψ₀/2)·cos(my) − 2sin²(my/2) (= Φ − 1) and only
        // the non-strict one on the raw field.
        let p = build_example1(None, 1024).unwrap();
        let bump = p.bump;
        let m = f64::from(p.m);
        let field = phi_field_example1(&p, 256, 64).unwrap();
        for i in 0..256usize {
            let x = TAU * i as f64 / 256.0;
            if psi0(x, &bump) < 0.0 {
                for j in 0..64usize {
                    let y = TAU * j as f64 / 64.0;
                    let half = (0.5 * m * y).sin();
                    let w = 0.5 * psi0(x, &bump) * (m * y).cos() - 2.0 * half * half;
                    assert!(w < 0.0, "W({i},{j}) = {w:e} though ψ₀({x}) < 0");
                    assert!(
                        field.at(i, j) <= 1.0,
                        "Φ({i},{j}) = {} though ψ₀({x}) < 0",
                        field.at(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn transverse_node_line_vanishes() {
        // cos(m·y) = 0 on the column y = π/(2m) when that y is a grid node.
        let p = build_example2(3, 0.01).unwrap();
        let ny = 128usize;
        let field = phi_field_example2(&p, 64, ny).unwrap();
        let j = ny / 4; // y = π/2, cos(y) = 0 up to rounding
        for i in 0..64usize {
            assert!(
                field.at(i, j).abs() < 1e-15,
                "node line leak at row {i}: {}",
                field.at(i, j)
            );
        }
    }

    #[test]
    fn stable_excess_counts_bands_monotonically() {
        // Super-level bands of the smooth profile accumulate at x = 0 with
        // amplitudes e^{−2kπ}; the count inside a fixed window grows with
        // the x-resolution until every band above the tolerance is resolved.
        let bump = BumpSpec::standard();
        let window = (0.17, 0.62);
        let opts = CountOptions::default();
        let mut counts = Vec::new();
        for nx in [192usize, 384, 768] {
            let w = level_one_excess_example1(&bump, 1, window, 0.04, nx, 33).unwrap();
            let rep = count_level_components(&w, 0.0, Side::Above, &opts).unwrap();
            counts.push(rep.component_count);
        }
        assert!(
            counts.windows(2).all(|c| c[0] <= c[1]),
            "band counts must be nondecreasing: {counts:?}"
        );
        assert!(
            *counts.last().unwrap() >= 4,
            "resolved band count too small: {counts:?}"
        );
    }

    #[test]
    fn stable_excess_beats_direct_subtraction() {
        // The positive band j sits between the seed zeros z_{2j−1} and z_{2j}
        // with peak amplitude e^{−2jπ}.  A window over bands 4 and 5 only
        // — amplitudes e^{−8π} ≈ 1.2e−11 and e^{−10π} ≈ 2.3e−14 — is far
        // below the 2⁻⁵² cancellation noise of a direct Φ − 1 evaluation,
        // yet the stable form still separates both bands from the troughs.
        let bump = BumpSpec::standard();
        let z = seed_zeros(11);
        let w = level_one_excess_example1(&bump, 1, (z[10], z[7]), 2e-6, 512, 9).unwrap();
        let rep = count_level_components(&w, 0.0, Side::Above, &CountOptions::default()).unwrap();
        assert_eq!(rep.component_count, 2, "two bands in the deep window");
        let peak = w.max_abs();
        assert!(
            peak > 1e-12 && peak < 1e-9,
            "deep-window amplitude scale {peak:.3e} out of expected range"
        );
    }

    #[test]
    fn even_product_sampler_rejects_nothing_but_matches_direct_eval() {
        // The mirrored sampler must agree with direct evaluation to rounding.
        let p = build_example2(3, 0.02).unwrap();
        let field = phi_field_example2(&p, 64, 48).unwrap();
        for i in 0..64usize {
            for j in 0..48usize {
                let x = TAU * i as f64 / 64.0;
                let y = TAU * j as f64 / 48.0;
                let want = p.phi(x, y);
                assert!(
                    (field.at(i, j) - want).abs() < 1e-13,
                    "sampler drift at ({i},{j})"
                );
            }
        }
    }

}
