//! Closed-form and semi-analytic phase machinery.
//!
//! In the scaling limit, a community's expected surplus of active-over-used
//! nodes, normalized by its critical seed scale `g_i`, converges to
//!
//! ```text
//! rho_i(x) = alpha_i - x_i + (1/r) (1 - 1/r)^(r-1) (x_i + chi_ij x_j)^r
//! ```
//!
//! where `x_i` is the rescaled number of used nodes and `chi` couples the
//! communities. The balance curve `x2 = zeta(x1)` is the locus `rho_1 =
//! rho_2` inside the admissible box; the sign of `min rho_1` along it decides
//! the regime: negative is sub-critical with the final size pinned by the
//! first zero `(z, zeta(z))`, zero is critical, positive is super-critical.
//! The critical curve in `(alpha1, alpha2)` space comes from the tangency of
//! the two zero-level sets and has separate closed forms for `det chi != 0`
//! and `det chi = 0`.

use serde::{Deserialize, Serialize};

use crate::binom::convolution_upper_tail;
use crate::error::{Error, Result};
use crate::sbm::{Community, ModelParams};

/// Width of the sign band around `det chi = 0` treated as neutral.
pub const NEUTRAL_DET_BAND: f64 = 1e-12;

/// Asymptotic parameter set, canonically oriented so `alpha1 >= alpha2 > 0`
/// or `alpha1 > 0 = alpha2`.
///
/// The constructor relabels communities when needed; relabeling maps
/// `nu -> 1/nu`, `mu -> 1/mu`, `gamma -> gamma * mu` (the cross probability
/// is expressed relative to community 1's intra probability) and transposes
/// `chi`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AsymptoticParams {
    /// Community size ratio `n1 / n2`.
    pub nu: f64,
    /// Intra-probability ratio `p1 / p2`.
    pub mu: f64,
    /// Cross-to-intra probability ratio `q / p1`.
    pub gamma: f64,
    /// Activation threshold.
    pub r: u32,
    /// Normalized seed fraction of community 1.
    pub alpha1: f64,
    /// Normalized seed fraction of community 2.
    pub alpha2: f64,
    /// True when the constructor swapped community labels.
    pub relabeled: bool,
}

impl AsymptoticParams {
    pub fn new(nu: f64, mu: f64, gamma: f64, r: u32, alpha1: f64, alpha2: f64) -> Result<Self> {
        for (name, v) in [("nu", nu), ("mu", mu), ("gamma", gamma)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(2..=60).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "r must be in 2..=60, got {r}"
            )));
        }
        for (name, v) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if alpha1.max(alpha2) <= 0.0 {
            return Err(Error::InvalidParameter(
                "at least one seed fraction must be positive".into(),
            ));
        }
        if alpha1 >= alpha2 {
            Ok(AsymptoticParams {
                nu,
                mu,
                gamma,
                r,
                alpha1,
                alpha2,
                relabeled: false,
            })
        } else {
            Ok(AsymptoticParams {
                nu: 1.0 / nu,
                mu: 1.0 / mu,
                gamma: gamma * mu,
                r,
                alpha1: alpha2,
                alpha2: alpha1,
                relabeled: true,
            })
        }
    }

    pub fn chi(&self) -> ChiMatrix {
        chi_from_ratios(self.r, self.gamma, self.nu, self.mu)
    }

    pub fn family(&self) -> CurveFamily {
        CurveFamily {
            r: self.r,
            gamma: self.gamma,
            nu: self.nu,
            mu: self.mu,
        }
    }

    /// Limit of `g2 / g1`: `(nu mu^r)^(1/(r-1))`.
    pub fn scale_ratio(&self) -> f64 {
        (self.nu * self.mu.powi(self.r as i32)).powf(1.0 / (self.r as f64 - 1.0))
    }

    /// `r / (r - 1)`, the right edge of the admissible box.
    pub fn box_edge(&self) -> f64 {
        let r = self.r as f64;
        r / (r - 1.0)
    }
}

fn chi_from_ratios(r: u32, gamma: f64, nu: f64, mu: f64) -> ChiMatrix {
    let rm1 = r as f64 - 1.0;
    ChiMatrix {
        chi12: gamma * (nu * mu.powi(r as i32)).powf(1.0 / rm1),
        chi21: gamma * (nu * mu).powf(-1.0 / rm1),
    }
}

/// Off-diagonal coupling coefficients (`chi11 = chi22 = 1` implicitly).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChiMatrix {
    pub chi12: f64,
    pub chi21: f64,
}

impl ChiMatrix {
    pub fn det(&self) -> f64 {
        1.0 - self.chi12 * self.chi21
    }

    pub fn assortativity(&self) -> Assortativity {
        let d = self.det();
        if d.abs() <= NEUTRAL_DET_BAND {
            Assortativity::Neutral
        } else if d > 0.0 {
            Assortativity::Assortative
        } else {
            Assortativity::Disassortative
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assortativity {
    Assortative,
    Neutral,
    Disassortative,
}

/// `(1/r) (1 - 1/r)^(r-1)`.
fn rho_coeff(r: u32) -> f64 {
    let rf = r as f64;
    (1.0 / rf) * (1.0 - 1.0 / rf).powi(r as i32 - 1)
}

/// The pair `(rho_1(x), rho_2(x))`.
pub fn rho(asym: &AsymptoticParams, chi: &ChiMatrix, x: (f64, f64)) -> (f64, f64) {
    let c = rho_coeff(asym.r);
    let ri = asym.r as i32;
    let rho1 = asym.alpha1 - x.0 + c * (x.0 + chi.chi12 * x.1).powi(ri);
    let rho2 = asym.alpha2 - x.1 + c * (x.1 + chi.chi21 * x.0).powi(ri);
    (rho1, rho2)
}

/// Membership in the admissible box: both coordinates in `[0, r/(r-1)]` with
/// `x1 + chi12 x2 <= r/(r-1)` and `x2 + chi21 x1 <= r/(r-1)`.
pub fn domain_contains(chi: &ChiMatrix, r: u32, x: (f64, f64)) -> bool {
    let rr = r as f64 / (r as f64 - 1.0);
    x.0 >= 0.0
        && x.1 >= 0.0
        && x.0 <= rr
        && x.1 <= rr
        && x.0 + chi.chi12 * x.1 <= rr
        && x.1 + chi.chi21 * x.0 <= rr
}

/// The balance curve `x2 = zeta(x1)` where `rho_1 = rho_2`, with domain
/// `[x1_lo, x1_hi]`: `x1_lo` is the unique root of
/// `rho_1(x1, 0) = rho_2(x1, 0)` (zero when `alpha1 = alpha2`) and `x1_hi`
/// is where the curve meets the boundary of the admissible box.
///
/// Defined for `alpha1 <= 1`.
#[derive(Clone, Debug)]
pub struct BalanceCurve {
    asym: AsymptoticParams,
    chi: ChiMatrix,
    rr: f64,
    x1_lo: f64,
    x1_hi: f64,
}

impl BalanceCurve {
    pub fn new(asym: &AsymptoticParams) -> Result<Self> {
        if asym.alpha1 > 1.0 {
            return Err(Error::CurveUndefined {
                alpha1: asym.alpha1,
            });
        }
        let chi = asym.chi();
        let rr = asym.box_edge();
        let mut curve = BalanceCurve {
            asym: *asym,
            chi,
            rr,
            x1_lo: 0.0,
            x1_hi: rr,
        };

        // Left endpoint: root of sigma(x1, 0), strictly decreasing on the box.
        curve.x1_lo = if asym.alpha1 == asym.alpha2 {
            0.0
        } else {
            let f = |x1: f64| curve.sigma((x1, 0.0));
            debug_assert!(f(0.0) > 0.0 && f(rr) < 0.0);
            bisect_root(f, 0.0, rr)
        };

        // Right endpoint: where max(x1 + chi12 z, z + chi21 x1) reaches the
        // box edge, increasing along the curve.
        let gap = |x1: f64| -> f64 {
            match curve.solve_x2(x1) {
                Some(z) => (x1 + curve.chi.chi12 * z).max(z + curve.chi.chi21 * x1) - rr,
                None => 1.0, // curve already exited
            }
        };
        curve.x1_hi = if gap(curve.x1_lo) >= 0.0 {
            curve.x1_lo
        } else {
            bisect_root(|x1| -gap(x1), curve.x1_lo, rr)
        };
        Ok(curve)
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.x1_lo, self.x1_hi)
    }

    fn sigma(&self, x: (f64, f64)) -> f64 {
        let (r1, r2) = rho(&self.asym, &self.chi, x);
        r1 - r2
    }

    fn x2_upper_limit(&self, x1: f64) -> f64 {
        let a = self.rr;
        let b = (self.rr - x1) / self.chi.chi12;
        let c = self.rr - self.chi.chi21 * x1;
        a.min(b).min(c).max(0.0)
    }

    /// Root of `sigma(x1, .)` in `[0, x2_upper_limit]`; `None` when the curve
    /// has exited the box before this `x1`.
    fn solve_x2(&self, x1: f64) -> Option<f64> {
        let hi = self.x2_upper_limit(x1);
        let s0 = self.sigma((x1, 0.0));
        if s0 >= 0.0 {
            return Some(0.0);
        }
        let s_hi = self.sigma((x1, hi));
        if s_hi < 0.0 {
            // tolerate boundary-grazing roundoff at the right endpoint
            if s_hi > -1e-9 {
                return Some(hi);
            }
            return None;
        }
        Some(bisect_root(|z| -self.sigma((x1, z)), 0.0, hi))
    }

    /// `zeta(x1)`; errors outside `[x1_lo, x1_hi]` (modulo roundoff slack).
    pub fn x2_at(&self, x1: f64) -> Result<f64> {
        let slack = 1e-9 * self.rr;
        if x1 < self.x1_lo - slack || x1 > self.x1_hi + slack {
            return Err(Error::OutsideCurveDomain {
                x1,
                lo: self.x1_lo,
                hi: self.x1_hi,
            });
        }
        let clamped = x1.clamp(self.x1_lo, self.x1_hi);
        self.solve_x2(clamped).ok_or(Error::OutsideCurveDomain {
            x1,
            lo: self.x1_lo,
            hi: self.x1_hi,
        })
    }

    /// The full deterministic trajectory from the origin: zero on
    /// `[0, x1_lo]`, then the balance curve.
    pub fn trajectory_x2(&self, x1: f64) -> Result<f64> {
        if x1 < self.x1_lo {
            if x1 < -1e-12 {
                return Err(Error::OutsideCurveDomain {
                    x1,
                    lo: 0.0,
                    hi: self.x1_hi,
                });
            }
            Ok(0.0)
        } else {
            self.x2_at(x1)
        }
    }

    /// `rho_1` evaluated on the curve.
    pub fn rho1_on_curve(&self, x1: f64) -> Result<f64> {
        let z = self.x2_at(x1)?;
        Ok(rho(&self.asym, &self.chi, (x1, z)).0)
    }
}

/// Bisection for a decreasing sign change of `f` on `[lo, hi]`
/// (`f(lo) > 0 >= f(hi)` up to roundoff); returns the crossing abscissa.
fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Phase regime of the process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Sub,
    Crit,
    Sup,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Sub => "Sub",
            Regime::Crit => "Crit",
            Regime::Sup => "Sup",
        };
        f.write_str(s)
    }
}

/// Sub-critical fixed point: first zero of `rho_1` along the balance curve
/// and the implied limit of `|final active| / g1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FixedPoint {
    /// First-coordinate zero `z`.
    pub x1: f64,
    /// `zeta(z)`.
    pub x2: f64,
    /// `z + zeta(z) * (nu mu^r)^(1/(r-1))`.
    pub final_size_limit: f64,
}

/// Classifier output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseDiagnosis {
    pub regime: Regime,
    pub assortativity: Assortativity,
    pub det_chi: f64,
    /// Present iff the regime is sub-critical.
    pub fixed_point: Option<FixedPoint>,
    /// Balance-curve domain; absent when `alpha1 > 1`.
    pub curve_endpoints: Option<(f64, f64)>,
    /// Minimum of `rho_1` along the curve; absent when `alpha1 > 1`.
    pub min_rho_on_curve: Option<f64>,
}

/// Classifier knobs.
#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Half-width of the band around zero declared critical.
    pub crit_band: f64,
    /// Uniform samples of the curve before local refinement.
    pub curve_samples: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            crit_band: 1e-6,
            curve_samples: 4096,
        }
    }
}

/// Classify the regime. Total over valid parameters: `alpha1 > 1` is
/// super-critical outright; otherwise the minimum of `rho_1` on the balance
/// curve decides, with a configurable critical band.
pub fn classify(asym: &AsymptoticParams) -> PhaseDiagnosis {
    classify_with(asym, &ClassifyOptions::default())
}

pub fn classify_with(asym: &AsymptoticParams, opts: &ClassifyOptions) -> PhaseDiagnosis {
    let chi = asym.chi();
    let det = chi.det();
    let assortativity = chi.assortativity();
    if asym.alpha1 > 1.0 {
        return PhaseDiagnosis {
            regime: Regime::Sup,
            assortativity,
            det_chi: det,
            fixed_point: None,
            curve_endpoints: None,
            min_rho_on_curve: None,
        };
    }
    let curve = BalanceCurve::new(asym).expect("alpha1 <= 1");
    let (lo, hi) = curve.endpoints();
    let samples = opts.curve_samples.max(8);
    let phi = |x1: f64| {
        curve
            .rho1_on_curve(x1.clamp(lo, hi))
            .expect("inside curve domain")
    };

    let (min_x, min_val) = if hi - lo <= 1e-14 {
        (lo, phi(lo))
    } else {
        let step = (hi - lo) / (samples - 1) as f64;
        let mut best_i = 0usize;
        let mut best = f64::INFINITY;
        let values: Vec<f64> = (0..samples)
            .map(|i| {
                let v = phi(lo + step * i as f64);
                if v < best {
                    best = v;
                    best_i = i;
                }
                v
            })
            .collect();
        let a = lo + step * best_i.saturating_sub(1) as f64;
        let b = (lo + step * (best_i + 1) as f64).min(hi);
        let (mut mx, mut mv) = golden_min(phi, a, b);
        if values[best_i] < mv {
            mx = lo + step * best_i as f64;
            mv = values[best_i];
        }
        (mx, mv)
    };
    let _ = min_x;

    if min_val < -opts.crit_band {
        // Sub-critical: locate the smallest zero of rho_1 along the curve.
        let step = (hi - lo) / (samples - 1) as f64;
        let mut z = lo;
        let mut prev_x = lo;
        let mut prev_v = phi(lo);
        let mut found = prev_v <= 0.0;
        if !found {
            for i in 1..samples {
                let x = lo + step * i as f64;
                let v = phi(x);
                if v <= 0.0 {
                    z = bisect_root(phi, prev_x, x);
                    found = true;
                    break;
                }
                prev_x = x;
                prev_v = v;
            }
        }
        debug_assert!(found, "negative minimum implies a sign change");
        let _ = prev_v;
        let x2 = curve.x2_at(z).expect("zero lies on the curve");
        PhaseDiagnosis {
            regime: Regime::Sub,
            assortativity,
            det_chi: det,
            fixed_point: Some(FixedPoint {
                x1: z,
                x2,
                final_size_limit: z + x2 * asym.scale_ratio(),
            }),
            curve_endpoints: Some((lo, hi)),
            min_rho_on_curve: Some(min_val),
        }
    } else {
        let regime = if min_val <= opts.crit_band {
            Regime::Crit
        } else {
            Regime::Sup
        };
        PhaseDiagnosis {
            regime,
            assortativity,
            det_chi: det,
            fixed_point: None,
            curve_endpoints: Some((lo, hi)),
            min_rho_on_curve: Some(min_val),
        }
    }
}

/// A family of models sharing the same critical curve; seed fractions do not
/// enter.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CurveFamily {
    pub r: u32,
    pub gamma: f64,
    pub nu: f64,
    pub mu: f64,
}

impl CurveFamily {
    pub fn chi(&self) -> ChiMatrix {
        chi_from_ratios(self.r, self.gamma, self.nu, self.mu)
    }

    pub fn box_edge(&self) -> f64 {
        self.r as f64 / (self.r as f64 - 1.0)
    }

    /// Which closed-form branch applies.
    pub fn branch(&self) -> &'static str {
        if self.chi().det().abs() <= NEUTRAL_DET_BAND {
            "neutral"
        } else {
            "general"
        }
    }
}

/// One emitted point of the critical curve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub y1: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Uniform parameter grid on `[0, r/(r-1)]`.
pub fn default_y1_grid(r: u32, points: usize) -> Vec<f64> {
    let rr = r as f64 / (r as f64 - 1.0);
    let n = points.max(2);
    (0..n).map(|i| rr * i as f64 / (n - 1) as f64).collect()
}

/// Parameter grid concentrated on the stretch of `y1` that actually emits
/// curve points (the unit-square filter can keep a sliver of the full range
/// for strongly asymmetric families). Falls back to the uniform grid when a
/// coarse scan finds nothing.
pub fn windowed_y1_grid(family: &CurveFamily, points: usize) -> Vec<f64> {
    let scan = critical_curve(family, &default_y1_grid(family.r, 4097));
    match (scan.first(), scan.last()) {
        (Some(first), Some(last)) => {
            let rr = family.box_edge();
            let pad = (last.y1 - first.y1) * 0.02 + rr / 4096.0;
            let lo = (first.y1 - pad).max(0.0);
            let hi = (last.y1 + pad).min(rr);
            let n = points.max(2);
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
        _ => default_y1_grid(family.r, points),
    }
}

/// The critical curve in `(alpha1, alpha2)` space, evaluated on a parameter
/// grid and filtered to the unit square.
///
/// For `det chi != 0` the curve is parametrized by `y = (x1 + chi12 x2,
/// x2 + chi21 x1)` on the tangency locus
/// `beta y2^(r-1) = (1 - beta y1^(r-1)) / (1 - beta y1^(r-1) det chi)` with
/// `beta = (1 - 1/r)^(r-1)`, mapped back through `chi^(-1)` and
/// `alpha_i = x_i - (beta/r) y_i^r`. For `det chi = 0` the tangency locus is
/// the straight line `y2 = chi21 (Z - y1)` in `x`-space with
/// `Z = r/(r-1) (1 + chi21^(r-1))^(-1/(r-1))`.
pub fn critical_curve(family: &CurveFamily, y1_grid: &[f64]) -> Vec<CriticalPoint> {
    let chi = family.chi();
    let det = chi.det();
    let r = family.r;
    let rf = r as f64;
    let rr = family.box_edge();
    let beta = (1.0 - 1.0 / rf).powi(r as i32 - 1);
    let c = beta / rf;
    let mut out = Vec::new();
    let keep = |y1: f64, a1: f64, a2: f64, out: &mut Vec<CriticalPoint>| {
        let eps = 1e-12;
        if (-eps..=1.0 + eps).contains(&a1) && (-eps..=1.0 + eps).contains(&a2) {
            out.push(CriticalPoint {
                y1,
                alpha1: a1.clamp(0.0, 1.0),
                alpha2: a2.clamp(0.0, 1.0),
            });
        }
    };
    if det.abs() <= NEUTRAL_DET_BAND {
        let z = rr * (1.0 + chi.chi21.powi(r as i32 - 1)).powf(-1.0 / (rf - 1.0));
        for &y1 in y1_grid {
            if !(0.0..=rr).contains(&y1) {
                continue;
            }
            let y2 = chi.chi21 * (z - y1);
            if y2 < -1e-15 {
                continue;
            }
            let y2 = y2.max(0.0);
            let a1 = y1 - c * (y1 + y2 * chi.chi12).powi(r as i32);
            let a2 = y2 - c * (y1 * chi.chi21 + y2).powi(r as i32);
            keep(y1, a1, a2, &mut out);
        }
    } else {
        for &y1 in y1_grid {
            if !(0.0..=rr).contains(&y1) {
                continue;
            }
            let t = beta * y1.powi(r as i32 - 1);
            let num = 1.0 - t;
            let den = 1.0 - t * det;
            if num < 0.0 || den <= 0.0 {
                continue;
            }
            let y2 = rr * (num / den).powf(1.0 / (rf - 1.0));
            let x1 = (y1 - chi.chi12 * y2) / det;
            let x2 = (y2 - chi.chi21 * y1) / det;
            let a1 = x1 - c * y1.powi(r as i32);
            let a2 = x2 - c * y2.powi(r as i32);
            keep(y1, a1, a2, &mut out);
        }
    }
    out
}

/// Exact activation probability `b_i(u) = P(Bin(u_i, p_i) + Bin(u_j, q) >= r)`
/// for a fresh node of community `i` given used counts `u = (u1, u2)`.
pub fn b_exact(params: &ModelParams, u: (u64, u64), community: Community) -> f64 {
    match community {
        Community::One => convolution_upper_tail(u.0, params.p1, u.1, params.q, params.r),
        Community::Two => convolution_upper_tail(u.1, params.p2, u.0, params.q, params.r),
    }
}

/// Expected surplus of active over used nodes in community `i` given used
/// counts `u`: `a_i + (n_i - a_i) b_i(u) - u_i`.
pub fn expected_surplus(params: &ModelParams, u: (u64, u64), community: Community) -> f64 {
    let a = params.seed_count(community) as f64;
    let n = params.community_size(community) as f64;
    let u_own = match community {
        Community::One => u.0,
        Community::Two => u.1,
    } as f64;
    a + (n - a) * b_exact(params, u, community) - u_own
}

/// Leading-order approximation of `b_i` at rescaled used counts `x`:
/// `(floor(x1 g1) p_i + floor(x2 g2) q)^r / r!` (community 2 symmetric).
pub fn b_asymptotic(params: &ModelParams, x: (f64, f64), community: Community) -> Result<f64> {
    let scale = params.critical_scale()?;
    let u1 = (x.0 * scale.g1).floor();
    let u2 = (x.1 * scale.g2).floor();
    let lambda = match community {
        Community::One => u1 * params.p1 + u2 * params.q,
        Community::Two => u2 * params.p2 + u1 * params.q,
    };
    let mut fact = 1.0f64;
    for i in 2..=params.r as u64 {
        fact *= i as f64;
    }
    Ok(lambda.powi(params.r as i32) / fact)
}

/// Single-community sub-critical limit.
///
/// `phi` is the unique root in [0, 1] of `r x - x^r = (r - 1) alpha1`. Two
/// equivalent normalizations of the final size follow from it:
/// `limit = r phi / ((r - 1) alpha1)` is the final size per seed (the growth
/// factor `|final| / a1`), and `size_over_scale = limit * alpha1 =
/// r phi / (r - 1)` is the final size per critical scale (`|final| / g1`).
/// The two-community classifier applied to the degenerate symmetric model
/// (one community split in half, all probabilities equal) reproduces
/// `size_over_scale` exactly.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ErLimit {
    /// Unique root in [0, 1] of `r x - x^r = (r - 1) alpha1`.
    pub phi: f64,
    /// `r phi / ((r - 1) alpha1)`: limit of `|final active| / a1`.
    pub limit: f64,
    /// `r phi / (r - 1)`: limit of `|final active| / g1`.
    pub size_over_scale: f64,
}

/// Sub-critical final-size limit of the single-community model for
/// `0 < alpha1 < 1`.
pub fn er_subcritical_limit(r: u32, alpha1: f64) -> Result<ErLimit> {
    if !(2..=60).contains(&r) {
        return Err(Error::InvalidParameter(format!("r = {r} out of range")));
    }
    if !(alpha1 > 0.0 && alpha1 < 1.0) {
        return Err(Error::Domain(format!(
            "single-community limit needs 0 < alpha1 < 1, got {alpha1}"
        )));
    }
    let rf = r as f64;
    let target = (rf - 1.0) * alpha1;
    // f(x) = r x - x^r - target: f(0) < 0 < f(1), strictly increasing on [0,1]
    let f = |x: f64| rf * x - x.powi(r as i32) - target;
    let phi = bisect_root(|x| -f(x), 0.0, 1.0);
    Ok(ErLimit {
        phi,
        limit: rf * phi / target,
        size_over_scale: rf * phi / (rf - 1.0),
    })
}

/// Straight-line extension request for [`trajectory_samples`].
#[derive(Clone, Copy, Debug, Default)]
pub struct TrajectoryExtension {
    /// Extend until `floor(x1 g1) + floor(x2 g2)` covers this many steps.
    pub target_steps: u64,
    /// Normalized used-node capacities `(n1/g1, n2/g2)`; when given, the
    /// default slope aims at this corner so both communities exhaust
    /// together.
    pub capacity: Option<(f64, f64)>,
    /// Explicit slope override.
    pub theta0: Option<f64>,
}

/// Build the sampled deterministic trajectory used by schedule construction:
/// zero up to the balance-curve start, the curve itself, and optionally a
/// straight-line extension of slope `theta0` until the requested step budget
/// is covered.
///
/// The extension slope is, in order of preference: the explicit `theta0`;
/// the direction of the capacity corner (so the schedule never demands more
/// nodes than a community holds); the curve's average slope over its last
/// decile. The fallbacks are clamped to [0.1, 10].
pub fn trajectory_samples(
    asym: &AsymptoticParams,
    g1: f64,
    g2: f64,
    extension: Option<TrajectoryExtension>,
) -> Result<Vec<(f64, f64)>> {
    if !(g1.is_finite() && g1 > 0.0) || !(g2.is_finite() && g2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trajectory needs positive scales, got g1 = {g1}, g2 = {g2}"
        )));
    }
    let dx = 1.0 / (4.0 * g1.max(g2).max(1.0));
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let push = |x: f64, z: f64, samples: &mut Vec<(f64, f64)>| {
        if let Some(&(px, pz)) = samples.last() {
            if x <= px {
                return;
            }
            debug_assert!(z >= pz - 1e-12);
            samples.push((x, z.max(pz)));
        } else {
            samples.push((x, z));
        }
    };

    let capacity_slope = |end: (f64, f64)| -> Option<f64> {
        let (cap1, cap2) = extension?.capacity?;
        let (dx1, dx2) = (cap1 - end.0, cap2 - end.1);
        if dx1 > 0.0 && dx2 >= 0.0 {
            Some((dx2 / dx1).clamp(0.1, 10.0))
        } else {
            None
        }
    };
    let explicit = extension.and_then(|e| e.theta0);

    let (end_x, end_z, slope) = if asym.alpha1 <= 1.0 {
        let curve = BalanceCurve::new(asym)?;
        let (lo, hi) = curve.endpoints();
        samples.push((0.0, 0.0));
        let mut x = dx;
        while x < lo {
            push(x, 0.0, &mut samples);
            x += dx;
        }
        if lo > 0.0 {
            push(lo, 0.0, &mut samples);
        }
        x = lo + dx;
        while x < hi {
            push(x, curve.x2_at(x)?, &mut samples);
            x += dx;
        }
        let z_hi = curve.x2_at(hi)?;
        push(hi, z_hi, &mut samples);
        let decile_slope = || {
            let span = hi - lo;
            if span <= 0.0 {
                1.0
            } else {
                let xa = hi - 0.1 * span;
                let za = curve.x2_at(xa).unwrap_or(z_hi);
                ((z_hi - za) / (hi - xa)).clamp(0.1, 10.0)
            }
        };
        let slope = explicit
            .or_else(|| capacity_slope((hi, z_hi)))
            .unwrap_or_else(decile_slope);
        (hi, z_hi, slope)
    } else {
        let rr = asym.box_edge();
        samples.push((0.0, 0.0));
        let mut x = dx;
        while x < rr {
            push(x, 0.0, &mut samples);
            x += dx;
        }
        push(rr, 0.0, &mut samples);
        let slope = explicit
            .map(|t| t.clamp(0.1, 10.0))
            .or_else(|| capacity_slope((rr, 0.0)))
            .unwrap_or(1.0);
        (rr, 0.0, slope)
    };

    if let Some(ext) = extension {
        let target = ext.target_steps;
        let steps_at = |x: f64, z: f64| (x * g1).floor() + (z * g2).floor();
        if steps_at(end_x, end_z) < target as f64 + 2.0 {
            let need = target as f64 + 2.0;
            // solve x g1 + z(x) g2 >= need along the extension line
            let denom = g1 + slope * g2;
            let x_stop = end_x + ((need - steps_at(end_x, end_z)) / denom).max(0.0) + 2.0 * dx;
            let mut x = end_x + dx;
            while x <= x_stop {
                push(x, end_z + slope * (x - end_x), &mut samples);
                x += dx;
            }
            push(x_stop, end_z + slope * (x_stop - end_x), &mut samples);
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asym(gamma: f64, alpha1: f64, alpha2: f64) -> AsymptoticParams {
        AsymptoticParams::new(1.0, 1.0, gamma, 2, alpha1, alpha2).unwrap()
    }

    #[test]
    fn chi_examples() {
        let c = asym(1.0, 0.5, 0.1).chi();
        assert_eq!(c.chi12, 1.0);
        assert_eq!(c.chi21, 1.0);
        assert_eq!(c.det(), 0.0);
        assert_eq!(c.assortativity(), Assortativity::Neutral);

        let c = asym(0.25, 0.5, 0.1).chi();
        assert!((c.chi12 - 0.25).abs() < 1e-15);
        assert!((c.chi21 - 0.25).abs() < 1e-15);
        assert!((c.det() - 0.9375).abs() < 1e-15);
        assert_eq!(c.assortativity(), Assortativity::Assortative);

        let c = asym(0.6, 0.5, 0.1).chi();
        assert!((c.chi12 - 0.6).abs() < 1e-15);
        assert!((c.chi21 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn chi_transposes_under_relabeling() {
        let a = AsymptoticParams::new(2.0, 3.0, 0.4, 3, 0.2, 0.7).unwrap();
        assert!(a.relabeled);
        let b = AsymptoticParams::new(2.0, 3.0, 0.4, 3, 0.7, 0.2).unwrap();
        let (ca, cb) = (a.chi(), b.chi());
        assert!((ca.chi12 - cb.chi21).abs() < 1e-12 * cb.chi21.abs());
        assert!((ca.chi21 - cb.chi12).abs() < 1e-12 * cb.chi12.abs());
        assert!((ca.det() - cb.det()).abs() < 1e-12);
    }

    #[test]
    fn rho_at_origin_is_alpha() {
        let a = asym(0.6, 0.56, 0.1);
        let (r1, r2) = rho(&a, &a.chi(), (0.0, 0.0));
        assert_eq!(r1, 0.56);
        assert_eq!(r2, 0.1);
    }

    #[test]
    fn rho_hand_value() {
        // r=2, chi12=0.6, alpha1=0.56, x=(0.4, 0.2):
        // rho1 = 0.56 - 0.4 + 0.25 (0.4 + 0.12)^2 = 0.2276
        let a = asym(0.6, 0.56, 0.1);
        let (r1, _) = rho(&a, &a.chi(), (0.4, 0.2));
        let oracle = 0.56 - 0.4 + 0.25 * (0.4f64 + 0.6 * 0.2).powi(2);
        assert!((r1 - oracle).abs() < 1e-15);
        assert!((r1 - 0.2276).abs() < 1e-12);
    }

    #[test]
    fn rho_positive_everywhere_when_alpha_exceeds_one() {
        let a = AsymptoticParams::new(1.0, 1.0, 0.6, 2, 1.2, 0.3).unwrap();
        let chi = a.chi();
        for i in 0..50 {
            for j in 0..50 {
                let x = (2.0 * i as f64 / 49.0, 2.0 * j as f64 / 49.0);
                if domain_contains(&chi, 2, x) {
                    assert!(rho(&a, &chi, x).0 > 0.0, "x = {x:?}");
                }
            }
        }
    }

    #[test]
    fn domain_examples() {
        let chi = ChiMatrix {
            chi12: 0.6,
            chi21: 0.6,
        };
        assert!(domain_contains(&chi, 2, (0.0, 0.0)));
        assert!(domain_contains(&chi, 2, (2.0, 0.0)));
        assert!(!domain_contains(&chi, 2, (2.0, 0.01)));
    }

    #[test]
    fn balance_curve_is_diagonal_in_symmetric_case() {
        let a = asym(0.6, 0.2, 0.2);
        let curve = BalanceCurve::new(&a).unwrap();
        let (lo, hi) = curve.endpoints();
        assert_eq!(lo, 0.0);
        assert!((hi - 1.25).abs() < 1e-9, "x1 (1 + 0.6) = 2 at the box edge");
        for i in 0..=100 {
            let x1 = lo + (hi - lo) * i as f64 / 100.0;
            let z = curve.x2_at(x1).unwrap();
            assert!((z - x1).abs() < 1e-9, "zeta(x1) = x1 by symmetry, x1={x1}");
        }
    }

    #[test]
    fn balance_curve_starts_at_zero_and_increases() {
        let a = asym(0.6, 0.56, 0.1);
        let curve = BalanceCurve::new(&a).unwrap();
        let (lo, hi) = curve.endpoints();
        assert!(lo > 0.0 && hi > lo);
        assert!(curve.x2_at(lo).unwrap().abs() < 1e-9);
        // rho1 = rho2 > 0 at the left endpoint
        let (r1, r2) = rho(&a, &a.chi(), (lo, 0.0));
        assert!((r1 - r2).abs() < 1e-9);
        assert!(r1 > 0.0);
        let mut prev = -1.0;
        for i in 0..=200 {
            let x1 = lo + (hi - lo) * i as f64 / 200.0;
            let z = curve.x2_at(x1).unwrap();
            assert!(z > prev, "strictly increasing");
            let (r1, r2) = rho(&a, &a.chi(), (x1, z));
            assert!((r1 - r2).abs() < 1e-8, "balance residual at {x1}");
            prev = z;
        }
        assert!(matches!(
            curve.x2_at(lo - 0.1),
            Err(Error::OutsideCurveDomain { .. })
        ));
        assert!(matches!(
            curve.x2_at(hi + 0.1),
            Err(Error::OutsideCurveDomain { .. })
        ));
    }

    #[test]
    fn curve_rejected_above_alpha_one() {
        let a = AsymptoticParams::new(1.0, 1.0, 0.6, 2, 1.1, 0.0).unwrap();
        assert!(matches!(
            BalanceCurve::new(&a),
            Err(Error::CurveUndefined { .. })
        ));
    }

    #[test]
    fn classify_figure_captions() {
        assert_eq!(classify(&asym(0.6, 0.56, 0.10)).regime, Regime::Sub);
        assert_eq!(classify(&asym(0.6, 0.60, 0.40)).regime, Regime::Sup);
    }

    #[test]
    fn classify_symmetric_fixed_point() {
        // alpha = 0.2 on the symmetric chi = 0.6 family: along the diagonal
        // rho(x) = 0.2 - x + 0.64 x^2, whose smaller root is
        // (1 - sqrt(1 - 4*0.64*0.2)) / (2*0.64).
        let d = classify(&asym(0.6, 0.2, 0.2));
        assert_eq!(d.regime, Regime::Sub);
        let fp = d.fixed_point.unwrap();
        let z_oracle = (1.0 - (1.0f64 - 4.0 * 0.64 * 0.2).sqrt()) / (2.0 * 0.64);
        assert!((fp.x1 - z_oracle).abs() < 1e-6, "{} vs {z_oracle}", fp.x1);
        assert!((fp.x2 - z_oracle).abs() < 1e-6);
        assert!((fp.final_size_limit - 2.0 * z_oracle).abs() < 1e-6);
        assert!((fp.final_size_limit - 0.470984).abs() < 1e-5);
        // residuals of both surpluses at the fixed point
        let a = asym(0.6, 0.2, 0.2);
        let (r1, r2) = rho(&a, &a.chi(), (fp.x1, fp.x2));
        assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8);
    }

    #[test]
    fn classify_alpha_above_one_is_sup() {
        let d = classify(&AsymptoticParams::new(1.0, 1.0, 0.6, 2, 1.01, 0.9).unwrap());
        assert_eq!(d.regime, Regime::Sup);
        assert!(d.fixed_point.is_none());
        assert!(d.curve_endpoints.is_none());
    }

    #[test]
    fn just_right_of_fixed_point_rho_is_negative() {
        let a = asym(0.6, 0.56, 0.10);
        let d = classify(&a);
        let fp = d.fixed_point.unwrap();
        let curve = BalanceCurve::new(&a).unwrap();
        let (_, hi) = curve.endpoints();
        let eps = (hi - fp.x1) * 1e-3;
        let x1 = fp.x1 + eps;
        let v = curve.rho1_on_curve(x1).unwrap();
        assert!(v < 0.0, "rho1 just right of the first zero: {v}");
    }

    #[test]
    fn critical_curve_neutral_is_the_half_segment() {
        let family = CurveFamily {
            r: 2,
            gamma: 1.0,
            nu: 1.0,
            mu: 1.0,
        };
        let pts = critical_curve(&family, &default_y1_grid(2, 512));
        assert!(pts.len() > 100);
        for p in &pts {
            assert!(
                (p.alpha1 + p.alpha2 - 0.5).abs() < 1e-9,
                "({}, {})",
                p.alpha1,
                p.alpha2
            );
        }
    }

    #[test]
    fn critical_curve_neutral_endpoint_formula() {
        // raw branch formulas at y1 = 0, chi21 = 1, r = 2: y2 = 1 and
        // alpha = (-1/4, 3/4), which the unit-square filter drops;
        // the first kept point continues the same line alpha1 + alpha2 = 1/2.
        let family = CurveFamily {
            r: 2,
            gamma: 1.0,
            nu: 1.0,
            mu: 1.0,
        };
        let z = 2.0 * (1.0f64 + 1.0).powf(-1.0);
        assert!((z - 1.0).abs() < 1e-15);
        let y2_at_zero = 1.0 * (z - 0.0);
        let a1 = 0.0 - 0.25 * (0.0 + y2_at_zero * 1.0f64).powi(2);
        let a2 = y2_at_zero - 0.25 * (0.0 + y2_at_zero).powi(2);
        assert!((a1 + 0.25).abs() < 1e-15);
        assert!((a2 - 0.75).abs() < 1e-15);
        let pts = critical_curve(&family, &[0.0]);
        assert!(pts.is_empty(), "out-of-square point is filtered");
    }

    #[test]
    fn critical_curve_matches_symmetric_tangency() {
        // chi = 0.6 symmetric, r = 2: on the diagonal the critical seed
        // fraction solves 1 - 4 * 0.64 * alpha = 0.
        let family = CurveFamily {
            r: 2,
            gamma: 0.6,
            nu: 1.0,
            mu: 1.0,
        };
        let pts = critical_curve(&family, &default_y1_grid(2, 4001));
        let sym = pts
            .iter()
            .min_by(|a, b| {
                (a.alpha1 - a.alpha2)
                    .abs()
                    .total_cmp(&(b.alpha1 - b.alpha2).abs())
            })
            .unwrap();
        let oracle = 1.0 / (4.0 * 0.64);
        assert!(
            (sym.alpha1 - oracle).abs() < 1e-3,
            "diagonal point {} vs {oracle}",
            sym.alpha1
        );
    }

    #[test]
    fn critical_curve_reproduces_reference_alpha2() {
        // On the chi = 0.6 symmetric family, alpha1 = 0.6 pairs with
        // alpha2 about 0.1745 on the critical curve.
        let family = CurveFamily {
            r: 2,
            gamma: 0.6,
            nu: 1.0,
            mu: 1.0,
        };
        let pts = critical_curve(&family, &default_y1_grid(2, 20001));
        let near = pts
            .iter()
            .min_by(|a, b| (a.alpha1 - 0.6).abs().total_cmp(&(b.alpha1 - 0.6).abs()))
            .unwrap();
        assert!((near.alpha1 - 0.6).abs() < 1e-3);
        assert!((near.alpha2 - 0.1745).abs() < 2e-3, "alpha2 = {}", near.alpha2);
    }

    #[test]
    fn critical_points_reclassify_as_critical() {
        let family = CurveFamily {
            r: 2,
            gamma: 0.25,
            nu: 1.0,
            mu: 1.0,
        };
        let pts = critical_curve(&family, &default_y1_grid(2, 41));
        assert!(!pts.is_empty());
        for p in pts {
            if p.alpha1.max(p.alpha2) < 1e-6 {
                continue;
            }
            let a =
                AsymptoticParams::new(family.nu, family.mu, family.gamma, family.r, p.alpha1, p.alpha2)
                    .unwrap();
            let d = classify(&a);
            assert_eq!(d.regime, Regime::Crit, "({}, {})", p.alpha1, p.alpha2);
        }
    }

    #[test]
    fn b_exact_examples() {
        let params = ModelParams {
            n1: 10,
            n2: 10,
            p1: 0.5,
            p2: 0.5,
            q: 0.5,
            r: 2,
            a1: 1,
            a2: 1,
        };
        assert_eq!(b_exact(&params, (0, 0), Community::One), 0.0);
        // Bin(2, 1/2) + Bin(1, 1/2) = Bin(3, 1/2); P(>= 2) = 1/2
        let v = b_exact(&params, (2, 1), Community::One);
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn b_exact_monotone_in_used_counts() {
        let params = ModelParams {
            n1: 100,
            n2: 100,
            p1: 0.03,
            p2: 0.05,
            q: 0.01,
            r: 3,
            a1: 5,
            a2: 5,
        };
        for c in Community::BOTH {
            let mut prev_row = [0.0; 21];
            for u1 in 0..=20u64 {
                let mut prev = 0.0;
                for u2 in 0..=20u64 {
                    let v = b_exact(&params, (u1, u2), c);
                    assert!((0.0..=1.0).contains(&v));
                    assert!(v >= prev - 1e-15, "monotone in u2");
                    assert!(v >= prev_row[u2 as usize] - 1e-15, "monotone in u1");
                    prev = v;
                    prev_row[u2 as usize] = v;
                }
            }
        }
    }

    #[test]
    fn expected_surplus_degenerate_cases() {
        let params = ModelParams {
            n1: 50,
            n2: 40,
            p1: 0.0,
            p2: 0.0,
            q: 0.0,
            r: 2,
            a1: 7,
            a2: 3,
        };
        assert_eq!(expected_surplus(&params, (0, 0), Community::One), 7.0);
        assert_eq!(expected_surplus(&params, (0, 0), Community::Two), 3.0);
        // zero probabilities: surplus = a_i - u_i
        assert_eq!(expected_surplus(&params, (6, 4), Community::One), 1.0);
        assert_eq!(expected_surplus(&params, (6, 4), Community::Two), -1.0);
    }

    #[test]
    fn b_asymptotic_closed_form_r2() {
        let params = ModelParams {
            n1: 100_000,
            n2: 50_000,
            p1: 3e-4,
            p2: 4e-4,
            q: 1e-4,
            r: 2,
            a1: 0,
            a2: 0,
        };
        let s = params.critical_scale().unwrap();
        let x = (0.4, 0.7);
        let lam = (x.0 * s.g1).floor() * 3e-4 + (x.1 * s.g2).floor() * 1e-4;
        let v = b_asymptotic(&params, x, Community::One).unwrap();
        assert!((v - lam * lam / 2.0).abs() < 1e-18);
        assert_eq!(b_asymptotic(&params, (0.0, 0.0), Community::One).unwrap(), 0.0);
    }

    #[test]
    fn er_limit_quadratic_case() {
        // r=2, alpha1=0.5: phi = 1 - sqrt(1/2), limit = 2 phi / 0.5
        let er = er_subcritical_limit(2, 0.5).unwrap();
        let phi_oracle = 1.0 - 0.5f64.sqrt();
        assert!((er.phi - phi_oracle).abs() < 1e-12);
        assert!((er.limit - 1.171573).abs() < 1e-6);
        assert!((er.size_over_scale - er.limit * 0.5).abs() < 1e-15);
        // defining equation residual
        let res = 2.0 * er.phi - er.phi.powi(2) - 0.5;
        assert!(res.abs() < 1e-12);
    }

    #[test]
    fn er_limit_agrees_with_degenerate_two_community_classifier() {
        // ER(n, p) is the symmetric neutral model with both halves equal:
        // alpha1_sbm = alpha_er / 4, g1_sbm = 2 g_er at r = 2; the classifier's
        // final-size limit must reproduce size_over_scale.
        for alpha_er in [0.3, 0.5, 0.8] {
            let er = er_subcritical_limit(2, alpha_er).unwrap();
            let asym =
                AsymptoticParams::new(1.0, 1.0, 1.0, 2, alpha_er / 4.0, alpha_er / 4.0).unwrap();
            let d = classify(&asym);
            assert_eq!(d.regime, Regime::Sub);
            let from_classifier = 2.0 * d.fixed_point.unwrap().final_size_limit;
            assert!(
                (from_classifier - er.size_over_scale).abs() < 1e-6,
                "alpha_er = {alpha_er}: {from_classifier} vs {}",
                er.size_over_scale
            );
        }
    }

    #[test]
    fn er_limit_approaches_one_for_small_alpha() {
        let mut prev = f64::INFINITY;
        for &a in &[0.5, 0.2, 0.05, 0.01, 0.001] {
            let er = er_subcritical_limit(3, a).unwrap();
            assert!(er.limit < prev, "limit decreases toward 1");
            prev = er.limit;
        }
        assert!((prev - 1.0).abs() < 1e-2);
        assert!(er_subcritical_limit(2, 1.0).is_err());
        assert!(er_subcritical_limit(2, 0.0).is_err());
    }

    #[test]
    fn trajectory_samples_monotone_and_anchored() {
        let a = asym(0.6, 0.56, 0.1);
        let samples = trajectory_samples(&a, 50.0, 50.0, None).unwrap();
        assert_eq!(samples[0], (0.0, 0.0));
        for w in samples.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
        // extension covers the requested step budget
        let extended = trajectory_samples(
            &a,
            50.0,
            50.0,
            Some(TrajectoryExtension {
                target_steps: 2000,
                capacity: Some((40.0, 40.0)),
                theta0: None,
            }),
        )
        .unwrap();
        let (x, z) = *extended.last().unwrap();
        assert!((x * 50.0).floor() + (z * 50.0).floor() >= 2000.0);
    }

    #[test]
    fn trajectory_for_alpha_above_one_runs_on_the_axis() {
        let a = AsymptoticParams::new(1.0, 1.0, 0.5, 2, 1.5, 0.0).unwrap();
        let samples = trajectory_samples(
            &a,
            30.0,
            30.0,
            Some(TrajectoryExtension {
                target_steps: 500,
                capacity: None,
                theta0: None,
            }),
        )
        .unwrap();
        let on_axis = samples.iter().take_while(|&&(x, _)| x <= 2.0).all(|&(_, z)| z == 0.0);
        assert!(on_axis);
    }
}
