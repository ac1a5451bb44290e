//! Entropy functionals, entropies along potential-driven transports, and the
//! TCD and timelike Brunn–Minkowski checkers.
//!
//! Densities at time `t` are never estimated by smoothing: every quantity at
//! an intermediate time is pulled back to `μ₀` through the Jacobian identity
//! `ρ₀(x) = ρ_t(𝓕_t(x)) det_m[d𝓕_t(x)]`. Left and right sides of each
//! inequality share one sample set.

use serde::{Deserialize, Serialize};

use crate::curvature::{s_kappa, tau_coefficient, ComparisonParams, HIT_OR_MISS_PAD};
use crate::distance::{time_separation, z_t_membership, Membership};
use crate::error::{Error, Result};
use crate::finsler::{check_dim, FinslerStructure, Point};
use crate::montecarlo::{self, sample_batches, BatchTable, Estimate, Verdict};
use crate::potential::{transport_jacobian, transport_velocity, ScalarPotential};
use crate::region::{pad_box, Region};
use crate::transport::cyclical_monotonicity_check;

/// Absolutely continuous probability measure with a sampler driven by
/// unit-cube points.
pub trait DensityMeasure: Sync {
    fn dim(&self) -> usize;

    /// Density with respect to chart Lebesgue measure.
    fn lebesgue_density(&self, x: &[f64]) -> f64;

    /// Maps a uniform point of `[0,1)^n` to a point distributed as the measure.
    fn sample(&self, u: &[f64]) -> Vec<f64>;

    fn support(&self) -> Region;
}

/// `ρ = dμ/dm`.
pub fn density<S: FinslerStructure, M: DensityMeasure>(s: &S, mu: &M, x: &[f64]) -> f64 {
    mu.lebesgue_density(x) / s.reference_density(x)
}

/// Normalized Lebesgue measure on an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxMeasure {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxMeasure {
    pub fn new(lo: impl Into<Vec<f64>>, hi: impl Into<Vec<f64>>) -> Result<Self> {
        let m = BoxMeasure {
            lo: lo.into(),
            hi: hi.into(),
        };
        m.support().validate(m.lo.len())?;
        if !(m.volume() > 0.0) {
            return Err(Error::Parameter("box measure needs positive volume".into()));
        }
        Ok(m)
    }

    pub fn volume(&self) -> f64 {
        self.support().volume()
    }
}

impl DensityMeasure for BoxMeasure {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn lebesgue_density(&self, x: &[f64]) -> f64 {
        if self.support().contains(x) {
            1.0 / self.volume()
        } else {
            0.0
        }
    }

    fn sample(&self, u: &[f64]) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).zip(u).map(|((a, b), c)| a + (b - a) * c).collect()
    }

    fn support(&self) -> Region {
        Region::boxed(self.lo.clone(), self.hi.clone())
    }
}

/// Entropy functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntropyKind {
    /// `∫ ρ log ρ dm`.
    Ent,
    /// `∓∫ ρ^{(N-1)/N} dm`, minus for `N >= n`, plus for `N < 0`.
    Renyi {
        #[serde(rename = "N")]
        n: f64,
    },
    /// `ess sup ρ`.
    Renyi0,
}

impl EntropyKind {
    fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            EntropyKind::Renyi { n } if !(n < 0.0 || (n >= dim as f64 && n.is_finite())) => Err(
                Error::Parameter(format!("Rényi parameter N = {n} outside (-inf, 0) ∪ [{dim}, inf)")),
            ),
            _ => Ok(()),
        }
    }
}

/// Extra evaluations spent refining a sampled maximum.
pub const ESSSUP_REFINEMENT: usize = 256;

/// Largest value of `f` over `ESSSUP_REFINEMENT` points of the unit cube in a
/// neighbourhood of `u` one stratum wide.
fn refine_max<F: Fn(&[f64]) -> Result<f64>>(f: F, u: &[f64], per_batch: usize, seed: u64) -> Result<f64> {
    let n = u.len();
    let width = (per_batch as f64).powf(-1.0 / n as f64);
    let mut rng = montecarlo::batch_rng(seed, REFINE_STREAM, 0);
    let offsets = montecarlo::latin_hypercube(&mut rng, ESSSUP_REFINEMENT, n);
    let mut best = f(u)?;
    for o in offsets {
        let p: Vec<f64> = u
            .iter()
            .zip(&o)
            .map(|(c, d)| (c + width * (2.0 * d - 1.0)).clamp(0.0, 1.0 - f64::EPSILON))
            .collect();
        best = best.max(f(&p)?);
    }
    Ok(best)
}

const ENTROPY_STREAM: u64 = 10;
const TCD_STREAM: u64 = 11;
const REFINE_STREAM: u64 = 12;
const BM_Z_STREAM: u64 = 13;
const BM_A0_STREAM: u64 = 14;
const BM_A1_STREAM: u64 = 15;
const BM_PAIR_STREAM: u64 = 16;

/// Entropy of `μ` under the given functional. `S⁰` is the refined sample
/// maximum, a lower bound for the essential supremum.
pub fn entropy_eval<S: FinslerStructure, M: DensityMeasure>(
    s: &S,
    mu: &M,
    kind: EntropyKind,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    entropy_along(s, mu, kind, samples, seed, |_| Ok(1.0))
}

/// Entropy of `μ_t = (𝓕_t)_♯ μ₀` computed on `μ₀` samples through
/// `ρ_t(𝓕_t(x)) = ρ₀(x) / det_m[d𝓕_t(x)]`.
#[allow(clippy::too_many_arguments)]
pub fn entropy_along_transport<S: FinslerStructure, M: DensityMeasure, U: ScalarPotential>(
    s: &S,
    mu0: &M,
    u: &U,
    t: f64,
    kind: EntropyKind,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    entropy_along(s, mu0, kind, samples, seed, |x| {
        Ok(transport_jacobian(s, u, &Point(x.to_vec()), t, q)?.det_m)
    })
}

fn entropy_along<S, M, J>(s: &S, mu: &M, kind: EntropyKind, samples: usize, seed: u64, jac: J) -> Result<Estimate>
where
    S: FinslerStructure,
    M: DensityMeasure,
    J: Fn(&[f64]) -> Result<f64> + Sync,
{
    check_dim(s, mu.dim())?;
    kind.validate(s.dim())?;
    // value of the integrand at a μ₀ sample
    let integrand = |u: &[f64]| -> Result<f64> {
        let x = mu.sample(u);
        let rho = density(s, mu, &x);
        let j = jac(&x)?;
        Ok(match kind {
            EntropyKind::Ent => rho.ln() - j.ln(),
            EntropyKind::Renyi { n } => {
                let v = rho.powf(-1.0 / n) * j.powf(1.0 / n);
                if n < 0.0 {
                    v
                } else {
                    -v
                }
            }
            EntropyKind::Renyi0 => rho / j,
        })
    };
    let table = sample_batches(mu.dim(), samples, seed, ENTROPY_STREAM, |u| Ok(vec![integrand(u)?]))?;
    match kind {
        EntropyKind::Renyi0 => {
            let best = refine_max(integrand, table.argmax(0), table.per_batch(), seed)?.max(table.max(0));
            Ok(Estimate {
                mean: best,
                stderr: 0.0,
                samples: table.samples(),
            })
        }
        _ => Ok(table.component(0)),
    }
}

/// Regime of the curvature-dimension inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Ninf,
    Npos,
    Nneg,
    Nzero,
}

impl Regime {
    pub fn of(n_eff: f64) -> Regime {
        if n_eff == f64::INFINITY {
            Regime::Ninf
        } else if n_eff > 0.0 {
            Regime::Npos
        } else if n_eff < 0.0 {
            Regime::Nneg
        } else {
            Regime::Nzero
        }
    }
}

/// One evaluated inequality at dimension parameter `N'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TcdSide {
    #[serde(rename = "N_prime", with = "crate::ext::serde_real")]
    pub n_prime: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative when the inequality holds.
    pub slack: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TcdReport {
    pub regime: Regime,
    pub params: ComparisonParams,
    /// Evaluation at `N' = N` first, then the additional `N'` required by
    /// the regime (`2N` for positive, `N/2` for negative `N`).
    pub checks: Vec<TcdSide>,
    /// Sampled `E_π[l²]` along the realized coupling.
    pub mean_l2: f64,
    /// True when sides are sample maxima (regime `N = 0`), which bound the
    /// essential suprema from below.
    pub esssup_lower_bound: bool,
    pub samples: usize,
    pub seed: u64,
}

impl TcdReport {
    pub fn primary(&self) -> &TcdSide {
        &self.checks[0]
    }

    /// Worst verdict over all evaluated `N'`.
    pub fn verdict(&self) -> Verdict {
        let vs: Vec<Verdict> = self
            .checks
            .iter()
            .map(|c| montecarlo::verdict(c.slack, c.stderr, c.lhs.abs().max(c.rhs.abs())))
            .collect();
        if vs.contains(&Verdict::Fail) {
            Verdict::Fail
        } else if vs.contains(&Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }
}

/// Number of transport pairs fed to the cyclical monotonicity screen.
pub const MONOTONICITY_PAIRS: usize = 10;

/// Chronology threshold for sampled transport pairs.
pub const CHRONOLOGY_EPS: f64 = 1e-9;

/// Per-sample data of the transport `x ↦ 𝓕_1(x)`.
struct RaySample {
    rho0: f64,
    jt: f64,
    j1: f64,
    l: f64,
}

fn ray_sample<S: FinslerStructure, M: DensityMeasure, U: ScalarPotential>(
    s: &S,
    mu0: &M,
    u: &U,
    p: &ComparisonParams,
    unit: &[f64],
) -> Result<RaySample> {
    let x = mu0.sample(unit);
    let w = transport_velocity(s, u, &x, p.q)?;
    let l = (-2.0 * s.lagrangian(&x, &w)).sqrt();
    if !(l > CHRONOLOGY_EPS) {
        return Err(Error::NotQSeparated { l });
    }
    let xp = Point(x.clone());
    Ok(RaySample {
        rho0: density(s, mu0, &x),
        jt: transport_jacobian(s, u, &xp, p.t, p.q)?.det_m,
        j1: transport_jacobian(s, u, &xp, 1.0, p.q)?.det_m,
        l,
    })
}

/// `s_{-K}(t l) / (t s_{-K}(l))`, equal to 1 when `l = 0`.
pub fn zero_dim_distortion(k: f64, t: f64, l: f64) -> Result<f64> {
    if l == 0.0 {
        return Ok(1.0);
    }
    if t == 0.0 {
        // limit t → 0 of s(tl)/(t s(l)) is l / s(l)
        return Ok(l / s_kappa(-k, l)?);
    }
    Ok(s_kappa(-k, t * l)? / (t * s_kappa(-k, l)?))
}

/// Checks `TCD_q(K, N)` along the transport induced by the potential `u`
/// from `μ₀`. The pair `(μ₀, (𝓕_1)_♯ μ₀)` must be chronologically separated
/// on every sample and the sampled transport graph must be
/// `l^q`-cyclically monotone; otherwise the check is refused.
pub fn tcd_check<S: FinslerStructure, M: DensityMeasure, U: ScalarPotential>(
    s: &S,
    mu0: &M,
    u: &U,
    params: &ComparisonParams,
    samples: usize,
    seed: u64,
) -> Result<TcdReport> {
    let n = s.dim();
    check_dim(s, mu0.dim())?;
    params.validate(n)?;
    let (k, t) = (params.k, params.t);
    screen_monotonicity(s, mu0, u, params.q, seed)?;
    let regime = Regime::of(params.n);
    let n_primes: Vec<f64> = match regime {
        Regime::Npos => vec![params.n, 2.0 * params.n],
        Regime::Nneg => vec![params.n, 0.5 * params.n],
        _ => vec![params.n],
    };

    let table: BatchTable = sample_batches(n, samples, seed, TCD_STREAM, |unit| {
        let r = ray_sample(s, mu0, u, params, unit)?;
        let mut out = vec![r.l * r.l];
        match regime {
            Regime::Ninf => out.extend([r.rho0.ln(), r.jt.ln(), r.j1.ln()]),
            Regime::Npos | Regime::Nneg => {
                for &np in &n_primes {
                    let base = r.rho0.powf(-1.0 / np);
                    let a = tau_coefficient(k, np, 1.0 - t, r.l)?;
                    let b = tau_coefficient(k, np, t, r.l)?;
                    out.extend([
                        base * r.jt.powf(1.0 / np),
                        a * base,
                        b * base * r.j1.powf(1.0 / np),
                    ]);
                }
            }
            Regime::Nzero => {
                let rho1 = r.rho0 / r.j1;
                out.extend([
                    r.rho0 / r.jt,
                    (zero_dim_distortion(k, 1.0 - t, r.l)? * r.rho0)
                        .max(zero_dim_distortion(k, t, r.l)? * rho1),
                ]);
            }
        }
        Ok(out)
    })?;

    let mean_l2 = table.component(0).mean;
    let mut checks = Vec::new();
    match regime {
        Regime::Ninf => {
            let lhs = |m: &[f64]| m[1] - m[2];
            let rhs = |m: &[f64]| (1.0 - t) * m[1] + t * (m[1] - m[3]) - 0.5 * k * t * (1.0 - t) * m[0];
            let slack = table.combine(|m| rhs(m) - lhs(m));
            checks.push(TcdSide {
                n_prime: params.n,
                lhs: table.combine(lhs).mean,
                rhs: table.combine(rhs).mean,
                slack: slack.mean,
                stderr: slack.stderr,
            });
        }
        Regime::Npos | Regime::Nneg => {
            let sign = if regime == Regime::Npos { -1.0 } else { 1.0 };
            for (i, &np) in n_primes.iter().enumerate() {
                let o = 1 + 3 * i;
                let lhs = move |m: &[f64]| sign * m[o];
                let rhs = move |m: &[f64]| sign * (m[o + 1] + m[o + 2]);
                let slack = table.combine(|m| rhs(m) - lhs(m));
                checks.push(TcdSide {
                    n_prime: np,
                    lhs: table.combine(lhs).mean,
                    rhs: table.combine(rhs).mean,
                    slack: slack.mean,
                    stderr: slack.stderr,
                });
            }
        }
        Regime::Nzero => {
            let component = |j: usize| {
                move |unit: &[f64]| -> Result<f64> {
                    let r = ray_sample(s, mu0, u, params, unit)?;
                    Ok(if j == 1 {
                        r.rho0 / r.jt
                    } else {
                        (zero_dim_distortion(k, 1.0 - t, r.l)? * r.rho0)
                            .max(zero_dim_distortion(k, t, r.l)? * r.rho0 / r.j1)
                    })
                }
            };
            let lhs = refine_max(component(1), table.argmax(1), table.per_batch(), seed)?.max(table.max(1));
            let rhs = refine_max(component(2), table.argmax(2), table.per_batch(), seed)?.max(table.max(2));
            checks.push(TcdSide {
                n_prime: 0.0,
                lhs,
                rhs,
                slack: rhs - lhs,
                stderr: 0.0,
            });
        }
    }
    Ok(TcdReport {
        regime,
        params: *params,
        checks,
        mean_l2,
        esssup_lower_bound: regime == Regime::Nzero,
        samples: table.samples(),
        seed,
    })
}

/// Refuses transports whose sampled graph is not `l^q`-cyclically monotone,
/// since those cannot be optimal.
fn screen_monotonicity<S: FinslerStructure, M: DensityMeasure, U: ScalarPotential>(
    s: &S,
    mu0: &M,
    u: &U,
    q: f64,
    seed: u64,
) -> Result<()> {
    let mut rng = montecarlo::batch_rng(seed, REFINE_STREAM, 1);
    let pts = montecarlo::latin_hypercube(&mut rng, MONOTONICITY_PAIRS, mu0.dim());
    let pairs = pts
        .iter()
        .map(|unit| {
            let x = mu0.sample(unit);
            let w = transport_velocity(s, u, &x, q)?;
            let y = crate::geometry::exp_map(s, &crate::finsler::Vector::new(x.clone(), w))?;
            Ok((Point(x), y))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = cyclical_monotonicity_check(s, &pairs, q)?;
    if worst < -1e-9 {
        return Err(Error::Parameter(format!(
            "transport graph is not l^q-cyclically monotone (violation {worst:e})"
        )));
    }
    Ok(())
}

/// Sides of the timelike Brunn–Minkowski inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrunnMinkowskiReport {
    pub regime: Regime,
    pub lhs: f64,
    pub rhs: f64,
    /// Oriented so that the inequality holds when `slack >= -3·stderr`.
    pub slack: f64,
    pub stderr: f64,
    pub mass_z: f64,
    pub mass_a0: f64,
    pub mass_a1: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub inconclusive_fraction: f64,
    pub samples: usize,
    pub seed: u64,
}

impl BrunnMinkowskiReport {
    pub fn verdict(&self) -> Verdict {
        montecarlo::verdict(self.slack, self.stderr, self.lhs.abs().max(self.rhs.abs()))
    }
}

fn box_point(lo: &[f64], hi: &[f64], u: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).zip(u).map(|((a, b), c)| a + (b - a) * c).collect()
}

/// Hit-or-miss estimate of `m[R]` over the padded box `(lo, hi)`.
fn hit_or_miss<S, F>(s: &S, lo: &[f64], hi: &[f64], samples: usize, seed: u64, stream: u64, inside: F) -> Result<(Estimate, f64)>
where
    S: FinslerStructure,
    F: Fn(&[f64]) -> Result<Membership> + Sync,
{
    let vol = Region::boxed(lo.to_vec(), hi.to_vec()).volume();
    let table = sample_batches(lo.len(), samples, seed, stream, |u| {
        let z = box_point(lo, hi, u);
        Ok(match inside(&z)? {
            Membership::Inside => vec![vol * s.reference_density(&z), 0.0],
            Membership::Outside => vec![0.0, 0.0],
            Membership::Inconclusive => vec![0.0, 1.0],
        })
    })?;
    Ok((table.component(0), table.component(1).mean))
}

/// Monte Carlo check of the timelike Brunn–Minkowski inequality on a flat
/// model. `m[Z_t(A₀, A₁)]`, `m[A₀]` and `m[A₁]` are hit-or-miss estimates from
/// independent streams; the extremes of `l` over `A₀ × A₁` are sampled.
#[allow(clippy::too_many_arguments)]
pub fn brunn_minkowski_check<S: FinslerStructure>(
    s: &S,
    a0: &Region,
    a1: &Region,
    t: f64,
    k: f64,
    n_eff: f64,
    samples: usize,
    seed: u64,
) -> Result<BrunnMinkowskiReport> {
    let n = s.dim();
    a0.validate(n)?;
    a1.validate(n)?;
    if !s.is_flat() {
        return Err(Error::Unsupported(
            "Brunn–Minkowski volumes need exact Z_t membership, available on flat models".into(),
        ));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Parameter(format!("t = {t} outside (0, 1)")));
    }
    if n_eff.is_nan() || (n_eff > 0.0 && n_eff < n as f64) {
        return Err(Error::Parameter(format!("N = {n_eff} lies in (0, {n})")));
    }
    if !(a0.volume() > 0.0 && a1.volume() > 0.0) {
        return Err(Error::Parameter("both sets need positive volume".into()));
    }

    let (lo0, hi0) = a0.bounding_box();
    let (lo1, hi1) = a1.bounding_box();
    // l-extremes over A₀ × A₁, with chronology enforced on every sample
    let pair_table = sample_batches(2 * n, samples, seed, BM_PAIR_STREAM, |u| {
        let x = box_point(&lo0, &hi0, &u[..n]);
        let y = box_point(&lo1, &hi1, &u[n..]);
        if !(a0.contains(&x) && a1.contains(&y)) {
            return Ok(vec![f64::NEG_INFINITY, f64::NEG_INFINITY]);
        }
        let l = time_separation(s, &Point(x.clone()), &Point(y.clone()))?.value;
        if !(l > CHRONOLOGY_EPS) {
            return Err(Error::Parameter(format!("A₀ × A₁ leaves {{l > 0}} at {x:?}, {y:?}")));
        }
        Ok(vec![-l, l])
    })?;
    let (l_min, l_max) = (-pair_table.max(0), pair_table.max(1));

    let zbox = pad_box(
        (
            lo0.iter().zip(&lo1).map(|(a, b)| (1.0 - t) * a + t * b).collect(),
            hi0.iter().zip(&hi1).map(|(a, b)| (1.0 - t) * a + t * b).collect(),
        ),
        HIT_OR_MISS_PAD,
    );
    let (mz, inconclusive) = hit_or_miss(s, &zbox.0, &zbox.1, samples, seed, BM_Z_STREAM, |z| {
        z_t_membership(s, z, a0, a1, t)
    })?;
    let inside = |r: &Region| {
        let r = r.clone();
        move |z: &[f64]| Ok(if r.contains(z) { Membership::Inside } else { Membership::Outside })
    };
    let b0 = a0.padded_bounding_box(HIT_OR_MISS_PAD);
    let b1 = a1.padded_bounding_box(HIT_OR_MISS_PAD);
    let (m0, _) = hit_or_miss(s, &b0.0, &b0.1, samples, seed, BM_A0_STREAM, inside(a0))?;
    let (m1, _) = hit_or_miss(s, &b1.0, &b1.1, samples, seed, BM_A1_STREAM, inside(a1))?;

    let regime = Regime::of(n_eff);
    // (value, derivative wrt m_z, m_0, m_1) for first-order error propagation
    let (lhs, rhs, grad_l, grad_r, sign) = match regime {
        Regime::Ninf => {
            let kt = 0.5 * k * t * (1.0 - t);
            let curv = (kt * l_min * l_min).min(kt * l_max * l_max);
            (
                mz.mean.ln(),
                (1.0 - t) * m0.mean.ln() + t * m1.mean.ln() + curv,
                [1.0 / mz.mean, 0.0, 0.0],
                [0.0, (1.0 - t) / m0.mean, t / m1.mean],
                1.0,
            )
        }
        Regime::Npos | Regime::Nneg => {
            let e = 1.0 / n_eff;
            let taus = |tt: f64| -> Result<(f64, f64)> {
                let a = tau_coefficient(k, n_eff, tt, l_min)?;
                let b = tau_coefficient(k, n_eff, tt, l_max)?;
                Ok((a.min(b), a.max(b)))
            };
            let (c0, c1) = if regime == Regime::Npos {
                (taus(1.0 - t)?.0, taus(t)?.0)
            } else {
                (taus(1.0 - t)?.1, taus(t)?.1)
            };
            (
                mz.mean.powf(e),
                c0 * m0.mean.powf(e) + c1 * m1.mean.powf(e),
                [e * mz.mean.powf(e - 1.0), 0.0, 0.0],
                [0.0, c0 * e * m0.mean.powf(e - 1.0), c1 * e * m1.mean.powf(e - 1.0)],
                if regime == Regime::Npos { 1.0 } else { -1.0 },
            )
        }
        Regime::Nzero => {
            let coef = |tt: f64, l: f64| -> Result<f64> { Ok(tt * s_kappa(-k, l)? / s_kappa(-k, tt * l)?) };
            let c0 = coef(1.0 - t, l_min)?.min(coef(1.0 - t, l_max)?);
            let c1 = coef(t, l_min)?.min(coef(t, l_max)?);
            let (r0, r1) = (c0 * m0.mean, c1 * m1.mean);
            (
                mz.mean,
                r0.min(r1),
                [1.0, 0.0, 0.0],
                if r0 <= r1 { [0.0, c0, 0.0] } else { [0.0, 0.0, c1] },
                1.0,
            )
        }
    };
    let se = [mz.stderr, m0.stderr, m1.stderr];
    let var: f64 = (0..3).map(|i| ((grad_l[i] - grad_r[i]) * se[i]).powi(2)).sum();
    Ok(BrunnMinkowskiReport {
        regime,
        lhs,
        rhs,
        slack: sign * (lhs - rhs),
        stderr: var.sqrt(),
        mass_z: mz.mean,
        mass_a0: m0.mean,
        mass_a1: m1.mean,
        l_min,
        l_max,
        inconclusive_fraction: inconclusive,
        samples: mz.samples,
        seed,
    })
}
