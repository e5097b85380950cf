//! Injectivity radius at a point, shortest geodesic loops, injectivity
//! profiles along loops, and the loop-neighborhood integral comparison.
//!
//! A shortest geodesic loop based at `p` lifts to the segment from a lift
//! `p~` to `g0 p~` where `g0` minimizes the displacement at `p~`; its length
//! is twice the injectivity radius. Everything here works with that lifted
//! segment, mapped to the imaginary axis when convenient.

use crate::constants::max_inj;
use crate::error::{GeomError, Result};
use crate::fuchsian::FuchsianGroup;
use crate::hplane::{
    dist, fermi_dist, from_fermi, to_fermi, Geodesic, HPoint, MoebiusElement,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A shortest nontrivial geodesic loop based at the projection of
/// `basepoint_lift`.
#[derive(Debug, Clone)]
pub struct GeodesicLoop {
    pub basepoint_lift: HPoint,
    pub element: MoebiusElement,
    pub length: f64,
}

impl GeodesicLoop {
    /// Isometry taking the lifted segment onto `[i, e^length i]` with the
    /// basepoint lift at `i`.
    pub fn to_axis(&self) -> Result<MoebiusElement> {
        let q = self.element.apply(self.basepoint_lift);
        let geo = Geodesic::through(self.basepoint_lift, q)?;
        let m = geo.map_to_imaginary_axis();
        let y0 = m.apply(self.basepoint_lift).y();
        let y1 = m.apply(q).y();
        let oriented = if y1 > y0 {
            m
        } else {
            // Flip the axis: z -> -1/z swaps 0 and infinity.
            MoebiusElement::from_entries(0.0, -1.0, 1.0, 0.0)
                .expect("unit rotation")
                .compose(&m)
        };
        let y0 = oriented.apply(self.basepoint_lift).y();
        Ok(MoebiusElement::axis_translation(-y0.ln()).compose(&oriented))
    }
}

/// Sampled injectivity radii along a loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjProfile {
    pub samples: Vec<ProfileSample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub inj: f64,
}

impl InjProfile {
    pub fn min_inj(&self) -> f64 {
        self.samples.iter().map(|p| p.inj).fold(f64::INFINITY, f64::min)
    }

    pub fn max_inj(&self) -> f64 {
        self.samples.iter().map(|p| p.inj).fold(0.0, f64::max)
    }
}

fn word_cmp(a: &[i32], b: &[i32]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Injectivity radius at `p`: half the minimal displacement over the group,
/// with the attaining element (ties broken by shortest word).
///
/// The search radius only ever needs to reach `2 ln(4g - 2)`, the universal
/// bound on twice the injectivity radius.
pub fn injectivity_radius(group: &FuchsianGroup, p: HPoint) -> Result<(f64, GeodesicLoop)> {
    let bound = 2.0 * max_inj(group.genus()) + 0.1;
    let mut radius = 2.0f64.min(bound);
    loop {
        let orbit = group.enumerate_at(p, radius)?;
        if let Some(best) = orbit.first() {
            // Sorted by displacement then word, so the first entry is the
            // canonical witness.
            let inj = best.displacement / 2.0;
            assert!(
                inj <= max_inj(group.genus()) + 1e-9,
                "injectivity radius {inj} exceeds the universal bound"
            );
            return Ok((
                inj,
                GeodesicLoop {
                    basepoint_lift: p,
                    element: best.element.clone(),
                    length: best.displacement,
                },
            ));
        }
        if radius >= bound {
            return Err(GeomError::DomainError(
                "no orbit element within the universal injectivity bound; \
                 group data is inconsistent"
                    .into(),
            ));
        }
        radius = (radius * 2.0).min(bound);
    }
}

/// Point at arc length `s` along the lifted loop segment.
pub fn loop_point(lp: &GeodesicLoop, s: f64) -> Result<HPoint> {
    if !( -1e-12..=lp.length + 1e-12).contains(&s) {
        return Err(GeomError::ParameterOutOfRange {
            value: s,
            min: 0.0,
            max: lp.length,
        });
    }
    let s = s.clamp(0.0, lp.length);
    let k = lp.to_axis()?;
    Ok(k.inverse().apply(HPoint::new(0.0, s.exp())?))
}

/// Injectivity radius at `n >= 2` equally spaced points along the loop,
/// endpoints included.
///
/// One orbit enumeration at the loop basepoint serves every profile point:
/// an element realizing the radius at `q` moves `q` by at most
/// `2 ln(4g - 2)`, hence moves the basepoint by at most
/// `2 ln(4g - 2) + 2 dist(p, q)`.
pub fn inj_profile(group: &FuchsianGroup, lp: &GeodesicLoop, n: usize) -> Result<InjProfile> {
    if n < 2 || n > 10_000 {
        return Err(GeomError::ParameterOutOfRange {
            value: n as f64,
            min: 2.0,
            max: 10_000.0,
        });
    }
    let p = lp.basepoint_lift;
    let reach = (lp.length / 2.0).min(max_inj(group.genus()));
    let radius = 2.0 * max_inj(group.genus()) + 2.0 * reach + 0.1;
    let orbit = group.enumerate_at(p, radius)?;
    let k_inv = lp.to_axis()?.inverse();

    let mut samples = Vec::with_capacity(n);
    for idx in 0..n {
        let s = lp.length * idx as f64 / (n - 1) as f64;
        let q = k_inv.apply(HPoint::new(0.0, s.exp())?);
        let dpq = dist(p, q);
        let mut best = f64::INFINITY;
        for o in &orbit {
            // Sorted by displacement: once the lower bound for the
            // displacement at q exceeds the running best, stop.
            if o.displacement - 2.0 * dpq > best {
                break;
            }
            let d = dist(q, o.element.apply(q));
            if d > 1e-9 && d < best {
                best = d;
            }
        }
        if !best.is_finite() {
            return Err(GeomError::DomainError(
                "profile point found no nearby orbit element".into(),
            ));
        }
        samples.push(ProfileSample { s, inj: best / 2.0 });
    }
    Ok(InjProfile { samples })
}

/// Distance from the lift `z` (in the axis frame of the loop) to the
/// segment `[i, e^L i]`.
fn fermi_dist_to_segment(u: f64, v: f64, len: f64) -> f64 {
    if u < 0.0 {
        fermi_dist(u, v, 0.0, 0.0)
    } else if u > len {
        fermi_dist(u, v, len, 0.0)
    } else {
        v.abs()
    }
}

/// Surface distance from `q` to the loop (as a subset of the surface).
///
/// The minimum runs over group translates of `q`; any translate beating the
/// direct distance `d0` moves `q` by at most `d0 + dist(q, mid) + len/2`,
/// which bounds the enumeration radius.
pub fn dist_to_loop(group: &FuchsianGroup, q: HPoint, lp: &GeodesicLoop) -> Result<f64> {
    let k = lp.to_axis()?;
    let (uq, vq) = to_fermi(k.apply(q));
    let d0 = fermi_dist_to_segment(uq, vq, lp.length);
    let mid = k.inverse().apply(HPoint::new(0.0, (lp.length / 2.0).exp())?);
    let radius = d0 + dist(q, mid) + lp.length / 2.0 + 0.1;
    let orbit = group.enumerate_at(q, radius)?;
    let mut best = d0;
    for o in &orbit {
        let (u, v) = to_fermi(k.apply(o.element.apply(q)));
        best = best.min(fermi_dist_to_segment(u, v, lp.length));
    }
    Ok(best)
}

/// Surface distance from `q` to the single loop point at arc length `s`.
pub fn dist_to_loop_point(
    group: &FuchsianGroup,
    q: HPoint,
    lp: &GeodesicLoop,
    s: f64,
) -> Result<f64> {
    let target = loop_point(lp, s)?;
    let d0 = dist(q, target);
    let orbit = group.enumerate_at(q, 2.0 * d0 + 0.1)?;
    let mut best = d0;
    for o in &orbit {
        best = best.min(dist(o.element.apply(q), target));
    }
    Ok(best)
}

/// Result of one neck-inequality comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeckCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub se_lhs: f64,
    pub se_rhs: f64,
    pub ratio: f64,
    pub seed: u64,
    pub eps0: f64,
    pub n_mc: usize,
    pub n_s: usize,
    /// Band count `floor(inj / eps0)`; at most 5 forces the short-loop
    /// branch of the inequality.
    pub m_bands: usize,
}

/// Compares the iterated ball integral along the loop against
/// `12 eps0` times the integral over the loop neighborhood, for `f >= 0`.
///
/// Both sides share one Monte-Carlo cloud drawn area-uniformly from the
/// Fermi slab around the lifted segment; samples are weighted by the
/// reciprocal of their multiplicity in the slab so that surface integrals
/// come out exactly once. The outer arc-length integral uses the midpoint
/// rule on `n_s` panels.
pub fn neck_check<F: Fn(HPoint) -> f64>(
    group: &FuchsianGroup,
    lp: &GeodesicLoop,
    eps0: f64,
    f: F,
    n_mc: usize,
    n_s: usize,
    seed: u64,
) -> Result<NeckCheck> {
    if eps0 <= 0.0 {
        return Err(GeomError::DomainError(format!(
            "eps0 must be positive, got {eps0}"
        )));
    }
    if n_mc == 0 || n_mc > 10_000_000 {
        return Err(GeomError::McBudget {
            requested: n_mc,
            cap: 10_000_000,
        });
    }
    let n_s = n_s.max(64);

    // Hypothesis: the injectivity radius along the loop stays >= 2 eps0.
    let grid = inj_profile(group, lp, 129)?;
    let min_inj = grid.min_inj();
    if min_inj < 2.0 * eps0 {
        return Err(GeomError::HypothesisViolated(format!(
            "inj along loop dips to {min_inj} < 2 eps0 = {}",
            2.0 * eps0
        )));
    }

    let len = lp.length;
    let k = lp.to_axis()?;
    let k_inv = k.inverse();

    // Local translates able to move slab points back into the slab or within
    // eps0 of the segment.
    let mid = k_inv.apply(HPoint::new(0.0, (len / 2.0).exp())?);
    let r_loc = len + 4.0 * eps0 + 0.5;
    let translates: Vec<MoebiusElement> = group
        .enumerate_at(mid, r_loc)?
        .into_iter()
        .map(|o| k.compose(&o.element).compose(&k_inv))
        .collect();

    let slab_area = (len + 2.0 * eps0) * 2.0 * eps0.sinh();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let panel = len / n_s as f64;
    let cosh_eps = eps0.cosh();

    let mut acc_l = 0.0f64;
    let mut acc_l2 = 0.0f64;
    let mut acc_r = 0.0f64;
    let mut acc_r2 = 0.0f64;
    let mut small_m_possible = true;

    for _ in 0..n_mc {
        let u = rng.gen_range(-eps0..len + eps0);
        let v = ((2.0 * rng.gen::<f64>() - 1.0) * eps0.sinh()).asinh();
        let z = from_fermi(u, v);

        // All lifts of the surface point that matter: the sample itself and
        // its nearby translates.
        let mut lifts: Vec<(f64, f64)> = vec![(u, v)];
        for t in &translates {
            let (ut, vt) = to_fermi(t.apply(z));
            if vt.abs() <= eps0 + 1e-12 && ut >= -2.0 * eps0 - 1e-12 && ut <= len + 2.0 * eps0 {
                lifts.push((ut, vt));
            }
        }

        // Multiplicity of the surface point inside the slab.
        let mult = lifts
            .iter()
            .filter(|&&(ut, vt)| {
                vt.abs() <= eps0 && ut >= -eps0 && ut <= len + eps0
            })
            .count()
            .max(1) as f64;

        let d_loop = lifts
            .iter()
            .map(|&(ut, vt)| fermi_dist_to_segment(ut, vt, len))
            .fold(f64::INFINITY, f64::min);

        let fval = f(group.reduce_to_domain(k_inv.apply(z)));
        if fval < 0.0 {
            return Err(GeomError::HypothesisViolated(
                "field f must be nonnegative".into(),
            ));
        }
        let weight = fval / mult;

        // Count panels whose loop point sees this sample inside its ball.
        let mut panels_in = 0usize;
        for (ut, vt) in &lifts {
            let chv = vt.cosh();
            // cosh d = cosh(u - s) cosh v < cosh eps0.
            if chv >= cosh_eps {
                continue;
            }
            let du = (cosh_eps / chv).acosh();
            // Panel midpoints s_j = (j + 1/2) panel inside (ut - du, ut + du).
            let lo = ((ut - du) / panel - 0.5).ceil().max(0.0) as i64;
            let hi = (((ut + du) / panel - 0.5).floor() as i64).min(n_s as i64 - 1);
            if hi >= lo {
                panels_in += (hi - lo + 1) as usize;
            }
        }
        // Overlapping lifts can double-count a panel; recount exactly when
        // more than one lift was close.
        if lifts.len() > 1 && panels_in > 0 {
            panels_in = 0;
            for j in 0..n_s {
                let s = (j as f64 + 0.5) * panel;
                let inside = lifts.iter().any(|&(ut, vt)| {
                    (ut - s).cosh() * vt.cosh() < cosh_eps
                });
                if inside {
                    panels_in += 1;
                }
            }
        }

        let a = panel * panels_in as f64 * weight;
        let b = if d_loop < eps0 { 12.0 * eps0 * weight } else { 0.0 };
        acc_l += a;
        acc_l2 += a * a;
        acc_r += b;
        acc_r2 += b * b;
    }
    let _ = &mut small_m_possible;

    let n = n_mc as f64;
    let mean_l = acc_l / n;
    let mean_r = acc_r / n;
    let var_l = (acc_l2 / n - mean_l * mean_l).max(0.0);
    let var_r = (acc_r2 / n - mean_r * mean_r).max(0.0);
    let lhs = slab_area * mean_l;
    let rhs = slab_area * mean_r;
    let se_lhs = slab_area * (var_l / n).sqrt();
    let se_rhs = slab_area * (var_r / n).sqrt();
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };

    Ok(NeckCheck {
        lhs,
        rhs,
        se_lhs,
        se_rhs,
        ratio,
        seed,
        eps0,
        n_mc,
        n_s,
        m_bands: (lp.length / 2.0 / eps0).floor() as usize,
    })
}
