//! Closed-surface Fuchsian groups: construction of the built-in families,
//! pruned orbit enumeration, systole computation, and Dirichlet-domain
//! Monte-Carlo sampling.
//!
//! A group is stored together with a curated set of short elements around
//! its basepoint. Orbit enumeration expands words over the face-pairing
//! subset of those short elements and prunes at
//! `radius + 2 * diameter_bound + slack`; the classical Dirichlet-domain
//! factorization argument makes that corridor sufficient once the expansion
//! set contains every face pairing. The short set itself is grown by an
//! iterated product closure and then validated by the Gauss-Bonnet area
//! certificate, which fails loudly if a face pairing were missing.

use crate::error::{GeomError, Result};
use crate::hplane::{ball_area, dist, ElementClass, Geodesic, HPoint, MoebiusElement};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Hard cap on enumeration radius.
pub const RADIUS_CAP: f64 = 25.0;
/// Hard cap on accepted orbit elements.
pub const ELEMENT_CAP: usize = 5_000_000;
/// Hard cap on explored corridor nodes.
const NODE_CAP: usize = 45_000_000;
/// Hard cap on word length counted in expansion letters.
const DEPTH_CAP: usize = 24;

/// A group element annotated with how far it moves the enumeration point.
#[derive(Debug, Clone)]
pub struct OrbitElement {
    pub element: MoebiusElement,
    pub displacement: f64,
}

/// A labeled word over the group generators (distinguished closed curves).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkedCurve {
    pub label: String,
    pub word: Vec<i32>,
}

/// A cocompact Fuchsian group presenting a closed genus-`g` surface.
#[derive(Debug, Clone)]
pub struct FuchsianGroup {
    generators: Vec<MoebiusElement>,
    genus: u32,
    basepoint: HPoint,
    diameter_bound: f64,
    domain_radius: f64,
    short_elements: Vec<OrbitElement>,
    face_elements: Vec<MoebiusElement>,
    marked_curves: Vec<MarkedCurve>,
}

/// Options for [`FuchsianGroup::from_generators_with`].
#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Skip the Monte-Carlo Gauss-Bonnet certificate (it is recomputable
    /// later via [`FuchsianGroup::mc_area`]).
    pub skip_area_check: bool,
    /// Seed for the construction-time Monte-Carlo passes.
    pub seed: u64,
    /// Sample count for the construction-time area certificate.
    pub area_samples: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            skip_area_check: false,
            seed: 0xD1C1_57B1,
            area_samples: 20_000,
        }
    }
}

// ---------------------------------------------------------------------------
// small dense 2x2 helper for reflection products (determinant -1 factors)

#[derive(Debug, Clone, Copy)]
struct RawMat([f64; 4]);

impl RawMat {
    fn mul(&self, o: &RawMat) -> RawMat {
        let a = self.0;
        let b = o.0;
        RawMat([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    fn from_moebius(m: &MoebiusElement) -> RawMat {
        RawMat(m.entries())
    }

    fn inverse_unit(&self) -> RawMat {
        // valid for |det| = 1
        let [a, b, c, d] = self.0;
        let det = a * d - b * c;
        RawMat([d / det, -b / det, -c / det, a / det])
    }

    fn to_moebius(self) -> Result<MoebiusElement> {
        MoebiusElement::from_entries(self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

// ---------------------------------------------------------------------------
// orbit-point dedup keyed on quantized (x/y, ln y)

const DEDUP_QUANTUM: f64 = 1e-3;
/// Orbit points of distinct elements of a cocompact torsion-free group are
/// separated by the systole; anything closer is the same element.
const SAME_POINT_TOL: f64 = 1e-5;

fn point_key(p: HPoint) -> u64 {
    let a = (p.x() / p.y() / DEDUP_QUANTUM).round() as i64;
    let b = (p.y().ln() / DEDUP_QUANTUM).round() as i64;
    let mut h = (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    h ^= (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    h ^= h >> 29;
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 32;
    h
}

struct PointDedup {
    map: HashMap<u64, u32>,
    points: Vec<HPoint>,
}

impl PointDedup {
    fn with_capacity(n: usize) -> Self {
        Self {
            map: HashMap::with_capacity(n),
            points: Vec::with_capacity(n),
        }
    }

    /// Inserts the orbit point; returns `None` when an equal point is
    /// already present, otherwise its new index.
    fn insert(&mut self, p: HPoint) -> Option<u32> {
        let mut key = point_key(p);
        loop {
            match self.map.get(&key) {
                None => {
                    let idx = self.points.len() as u32;
                    self.map.insert(key, idx);
                    self.points.push(p);
                    return Some(idx);
                }
                Some(&idx) => {
                    if dist(self.points[idx as usize], p) < SAME_POINT_TOL {
                        return None;
                    }
                    // distinct element whose cell hashed identically; probe on
                    key = key.wrapping_add(0x9E37_79B9);
                }
            }
        }
    }

    fn len(&self) -> usize {
        self.points.len()
    }
}

// ---------------------------------------------------------------------------

struct BfsNode {
    mat: [f64; 4],
    disp: f64,
    parent: u32,
    letter: i16,
    depth: u16,
}

fn word_cmp(a: &[i32], b: &[i32]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl FuchsianGroup {
    // -- constructors -------------------------------------------------------

    /// Validates raw generator matrices and builds the group.
    pub fn from_generators(mats: &[[f64; 4]], genus: u32) -> Result<Self> {
        Self::from_generators_with(mats, genus, &BuildOptions::default())
    }

    pub fn from_generators_with(
        mats: &[[f64; 4]],
        genus: u32,
        opts: &BuildOptions,
    ) -> Result<Self> {
        if mats.is_empty() {
            return Err(GeomError::InvalidGenerators("empty generator list".into()));
        }
        if genus < 2 {
            return Err(GeomError::InvalidGenerators(format!(
                "genus must be >= 2, got {genus}"
            )));
        }
        let mut generators = Vec::with_capacity(mats.len());
        for (index, m) in mats.iter().enumerate() {
            let el = MoebiusElement::from_entries(m[0], m[1], m[2], m[3])
                .map_err(|_| GeomError::NotHyperbolicGenerator {
                    index,
                    trace_abs: f64::NAN,
                })?
                .with_word(vec![index as i32 + 1]);
            if el.classify() != ElementClass::Hyperbolic {
                return Err(GeomError::NotHyperbolicGenerator {
                    index,
                    trace_abs: el.trace().abs(),
                });
            }
            generators.push(el);
        }
        Self::assemble(generators, genus, Vec::new(), opts)
    }

    /// The maximal-symmetry genus-2 surface: the group generated by the four
    /// opposite-side pairings of the regular octagon with vertex angle pi/4,
    /// centered at the basepoint `i`. Its systole is `2 acosh(1 + sqrt 2)`.
    pub fn bolza() -> Self {
        let alpha = 1.0 + 2.0f64.sqrt();
        let beta = (2.0 + 2.0 * 2.0f64.sqrt()).sqrt();
        let mut mats = Vec::new();
        for k in 0..4 {
            let phi = std::f64::consts::PI * k as f64 / 4.0;
            let (s, c) = phi.sin_cos();
            mats.push([alpha + beta * c, -beta * s, -beta * s, alpha - beta * c]);
        }
        let mut group = Self::from_generators_with(
            &mats,
            2,
            &BuildOptions {
                skip_area_check: false,
                ..BuildOptions::default()
            },
        )
        .expect("bolza construction");
        group.marked_curves = vec![MarkedCurve {
            label: "systolic".into(),
            word: vec![1],
        }];
        group
    }

    /// Genus-2 surface obtained by doubling a pair of pants with boundary
    /// lengths `(l1, l2, l3)` across its boundary, with zero twists.
    ///
    /// Built from the right-angled hexagon with alternating sides
    /// `l_i / 2`: reflections in the hexagon sides generate a Coxeter
    /// group, and the even subgroup fixing both mirror classes is the
    /// surface group of the double. The generator list is the Schreier
    /// set of that index-four subgroup; the first three generators are the
    /// three gluing curves, with translation lengths `l1, l2, l3`.
    pub fn doubled_pants(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        for &l in &[l1, l2, l3] {
            if !(1e-4..=30.0).contains(&l) {
                return Err(GeomError::DegenerateLength { length: l });
            }
        }
        let half = [l1 / 2.0, l2 / 2.0, l3 / 2.0];
        // Right-angled hexagon relation: the seam opposite side b_k.
        let seam = |i: usize, j: usize, k: usize| -> f64 {
            ((half[k].cosh() + half[i].cosh() * half[j].cosh())
                / (half[i].sinh() * half[j].sinh()))
            .acosh()
        };
        let a = [seam(1, 2, 0), seam(2, 0, 1), seam(0, 1, 2)];

        // Walk the hexagon: sides in cyclic order b1 a3 b2 a1 b3 a2, right
        // angles throughout. Frame F maps (i, up) to the current vertex and
        // direction; side k lies on F_k(imaginary axis).
        let side_lengths = [half[0], a[2], half[1], a[0], half[2], a[1]];
        let walk = |turn: f64| -> (Vec<MoebiusElement>, MoebiusElement) {
            let rot = MoebiusElement::rotation_about_i(turn);
            let mut frame = MoebiusElement::identity();
            let mut frames = Vec::with_capacity(6);
            for &len in &side_lengths {
                frames.push(frame.clone());
                frame = frame
                    .compose(&MoebiusElement::axis_translation(len))
                    .compose(&rot);
            }
            (frames, frame)
        };
        let (frames, closure) = {
            let (f, c) = walk(std::f64::consts::FRAC_PI_2);
            if c.is_identity(1e-6) {
                (f, c)
            } else {
                walk(-std::f64::consts::FRAC_PI_2)
            }
        };
        assert!(
            closure.is_identity(1e-8),
            "hexagon walk failed to close: {closure:?}"
        );

        // Reflections in the six side lines, as determinant -1 matrices.
        let mirror = RawMat([-1.0, 0.0, 0.0, 1.0]);
        let refl: Vec<RawMat> = frames
            .iter()
            .map(|f| {
                let fm = RawMat::from_moebius(f);
                fm.mul(&mirror).mul(&fm.inverse_unit())
            })
            .collect();
        // Cyclic order b1 a3 b2 a1 b3 a2 -> indices of each side line.
        let (rb1, ra3, rb2, ra1, rb3, ra2) =
            (refl[0], refl[1], refl[2], refl[3], refl[4], refl[5]);

        let pair = |x: &RawMat, y: &RawMat| -> Result<MoebiusElement> { x.mul(y).to_moebius() };
        let quad = |x: &RawMat, y: &RawMat, z: &RawMat, w: &RawMat| -> Result<MoebiusElement> {
            x.mul(y).mul(&z.mul(w)).to_moebius()
        };

        // Schreier generators of the even-even subgroup, with the coset
        // transversal built from the two adjacent central mirrors a3, b2.
        // Adjacent perpendicular sides make the transversal's vertex
        // rotation square to the identity, so every mixed generator stays
        // hexagon-sized; that keeps matrix entries small enough that long
        // cancelling products downstream do not lose the orbit geometry to
        // roundoff. The first three entries are the gluing curves
        // (translation lengths l1, l2, l3), the next three the doubled
        // seams, the last two bridge the mirror classes.
        let raw_gens: Vec<MoebiusElement> = vec![
            pair(&ra2, &ra3)?,             // gluing curve 1, axis on side b1
            pair(&ra3, &ra1)?,             // gluing curve 2
            pair(&ra1, &ra2)?,             // gluing curve 3
            pair(&rb2, &rb3)?,             // doubled seam 1, axis on side a1
            pair(&rb3, &rb1)?,             // doubled seam 2
            pair(&rb1, &rb2)?,             // doubled seam 3
            quad(&ra3, &rb3, &rb2, &ra3)?, // mixed Schreier elements
            quad(&rb2, &ra2, &rb2, &ra3)?,
        ];

        // Center the basepoint: midpoint of the two hexagon vertices v0, v3.
        let v0 = HPoint::i();
        let v3 = frames[3].apply(HPoint::i());
        let m = hyperbolic_midpoint(v0, v3)?;
        let center = MoebiusElement::point_to_i(m);
        let generators: Vec<MoebiusElement> = raw_gens
            .iter()
            .enumerate()
            .map(|(k, g)| g.conjugate_by(&center).with_word(vec![k as i32 + 1]))
            .collect();

        // Construction self-checks: gluing curves and seams must have the
        // lengths right-angled hexagon trigonometry dictates.
        for (k, expect) in [(0usize, l1), (1, l2), (2, l3)] {
            let got = generators[k].translation_length()?;
            if (got - expect).abs() > 1e-9 * (1.0 + expect) {
                return Err(GeomError::InvalidGenerators(format!(
                    "gluing curve {k} has length {got}, expected {expect}"
                )));
            }
        }
        for k in 0..3 {
            let got = generators[3 + k].translation_length()?;
            let expect = 2.0 * a[k];
            if (got - expect).abs() > 1e-9 * (1.0 + expect) {
                return Err(GeomError::InvalidGenerators(format!(
                    "doubled seam {k} has length {got}, expected {expect}"
                )));
            }
        }

        for (index, g) in generators.iter().enumerate() {
            if g.classify() != ElementClass::Hyperbolic {
                return Err(GeomError::NotHyperbolicGenerator {
                    index,
                    trace_abs: g.trace().abs(),
                });
            }
        }

        let marked = vec![
            MarkedCurve {
                label: "core1".into(),
                word: vec![1],
            },
            MarkedCurve {
                label: "core2".into(),
                word: vec![2],
            },
            MarkedCurve {
                label: "core3".into(),
                word: vec![3],
            },
        ];
        Self::assemble(generators, 2, marked, &BuildOptions::default())
    }

    // -- construction internals --------------------------------------------

    fn assemble(
        generators: Vec<MoebiusElement>,
        genus: u32,
        marked_curves: Vec<MarkedCurve>,
        opts: &BuildOptions,
    ) -> Result<Self> {
        let basepoint = HPoint::i();
        Self::discreteness_tripwire(&generators, basepoint)?;

        let mut d_short = 8.0f64;
        for _attempt in 0..4 {
            let short_elements = Self::bootstrap_shorts(&generators, basepoint, d_short)?;
            if short_elements.is_empty() {
                return Err(GeomError::InvalidGenerators(
                    "no nontrivial short elements found".into(),
                ));
            }
            // Probe a covering radius for the Dirichlet domain. The short
            // set only certifies the indicator out to d_short/2, so failing
            // past max_r retries with a larger short ball.
            let mut domain_radius = 2.2f64;
            let max_r = (d_short - 0.3) / 2.0;
            let covered = loop {
                if Self::ring_covered(basepoint, domain_radius, &short_elements) {
                    break true;
                }
                domain_radius += 0.35;
                if domain_radius > max_r {
                    break false;
                }
            };
            if !covered {
                d_short = 2.0 * (max_r + 0.55) + 0.4;
                continue;
            }

            let mut group = Self {
                generators: generators.clone(),
                genus,
                basepoint,
                diameter_bound: domain_radius, // provisional, refined below
                domain_radius,
                short_elements,
                face_elements: Vec::new(),
                marked_curves: marked_curves.clone(),
            };
            let (samples, estimate, se) =
                group.mc_domain_pass(opts.area_samples.max(4000), opts.seed)?;
            let max_dist = samples
                .iter()
                .map(|z| dist(basepoint, *z))
                .fold(0.0f64, f64::max);
            group.diameter_bound = 1.1 * max_dist;
            if 2.0 * group.diameter_bound + 0.4 > d_short {
                d_short = 2.0 * group.diameter_bound + 0.6;
                continue;
            }
            if !opts.skip_area_check {
                let expected = 4.0 * std::f64::consts::PI * (genus as f64 - 1.0);
                if (estimate - expected).abs() > 3.0 * se {
                    return Err(GeomError::AreaMismatch {
                        estimate,
                        expected,
                        three_sigma: 3.0 * se,
                    });
                }
            }
            group.face_elements = group.extract_faces(&samples);
            return Ok(group);
        }
        Err(GeomError::InvalidGenerators(
            "short-element closure failed to stabilize".into(),
        ))
    }

    fn discreteness_tripwire(gens: &[MoebiusElement], basepoint: HPoint) -> Result<()> {
        let mut letters: Vec<MoebiusElement> = Vec::new();
        for g in gens {
            letters.push(g.clone());
            letters.push(g.inverse());
        }
        let mut words: Vec<MoebiusElement> = vec![MoebiusElement::identity()];
        for l in &letters {
            words.push(l.clone());
        }
        for l1 in &letters {
            for l2 in &letters {
                words.push(l1.compose(l2));
            }
        }
        for i in 0..words.len() {
            for j in (i + 1)..words.len() {
                // Scale-aware identity test: redundant generator sets satisfy
                // exact relations whose matrices only agree up to roundoff
                // proportional to the entry magnitudes.
                let e = words[i].inverse().compose(&words[j]);
                if e.is_identity(1e-4) {
                    continue;
                }
                let sep = dist(words[i].apply(basepoint), words[j].apply(basepoint));
                if sep < 1e-6 {
                    return Err(GeomError::DiscretenessSuspect { separation: sep });
                }
            }
        }
        Ok(())
    }

    /// Iterated product closure collecting all elements with displacement at
    /// most `d_short` at the basepoint.
    ///
    /// Every element of displacement `d` splits through a covering orbit
    /// point into two factors of displacement at most `d/2 + cov`, so the
    /// closure of short-by-short products converges to the full short ball
    /// once the covering-scale elements are seeded; the generators and their
    /// pairwise products act as that seed, and the Gauss-Bonnet certificate
    /// downstream fails loudly if anything is missing.
    fn bootstrap_shorts(
        gens: &[MoebiusElement],
        basepoint: HPoint,
        d_short: f64,
    ) -> Result<Vec<OrbitElement>> {
        const POOL_CAP: usize = 40_000;
        let keep_bound = d_short + 1.5;

        let mut dedup = PointDedup::with_capacity(4096);
        dedup.insert(basepoint); // identity sentinel
        let mut pool: Vec<OrbitElement> = Vec::new();
        let mut push = |dedup: &mut PointDedup, pool: &mut Vec<OrbitElement>, el: MoebiusElement| {
            let zp = el.apply(basepoint);
            let d = dist(basepoint, zp);
            if d <= keep_bound && dedup.insert(zp).is_some() {
                pool.push(OrbitElement {
                    displacement: d,
                    element: el,
                });
            }
        };

        // Seed: letters plus all products of two and three letters that land
        // short. Triples matter because a Schreier generator pair can bridge
        // through a long intermediate the sweeps below would never form.
        let mut letters: Vec<MoebiusElement> = Vec::new();
        for g in gens {
            letters.push(g.clone());
            letters.push(g.inverse());
        }
        for l in &letters {
            push(&mut dedup, &mut pool, l.clone());
        }
        for l1 in &letters {
            for l2 in &letters {
                let p2 = l1.compose(l2);
                push(&mut dedup, &mut pool, p2.clone());
                for l3 in &letters {
                    push(&mut dedup, &mut pool, p2.compose(l3));
                }
            }
        }

        // Closure sweeps: products of newly found short elements with all
        // short elements, until a fixpoint. Products are pushed inline; a
        // work budget guards degenerate inputs.
        let mut new_from = 0usize;
        let mut work = 0usize;
        for _pass in 0..16 {
            let new_to = pool.len();
            if new_to > POOL_CAP {
                return Err(GeomError::EnumerationBudgetExceeded {
                    count: new_to,
                    cap: POOL_CAP,
                    radius: d_short,
                });
            }
            work += 2 * (new_to - new_from) * new_to;
            if work > 1_200_000_000 {
                return Err(GeomError::EnumerationBudgetExceeded {
                    count: work,
                    cap: 1_200_000_000,
                    radius: d_short,
                });
            }
            for i in new_from..new_to {
                let gi = pool[i].element.clone();
                for j in 0..new_to {
                    let cand = gi.compose(&pool[j].element);
                    push(&mut dedup, &mut pool, cand);
                    if j < new_from {
                        let cand = pool[j].element.compose(&gi);
                        push(&mut dedup, &mut pool, cand);
                    }
                }
            }
            new_from = new_to;
            if pool.len() == new_from {
                break;
            }
        }

        let mut shorts: Vec<OrbitElement> = pool
            .into_iter()
            .filter(|o| o.displacement <= d_short)
            .collect();
        shorts.sort_by(|a, b| {
            a.displacement
                .partial_cmp(&b.displacement)
                .unwrap()
                .then_with(|| word_cmp(a.element.word(), b.element.word()))
        });
        Ok(shorts)
    }

    /// True when every probe point on the ring of the given radius lies
    /// strictly outside the Dirichlet domain.
    fn ring_covered(basepoint: HPoint, radius: f64, shorts: &[OrbitElement]) -> bool {
        let n = 512;
        let to_base = MoebiusElement::point_to_i(basepoint).inverse();
        'probe: for k in 0..n {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let z = to_base.apply(
                MoebiusElement::rotation_about_i(phi)
                    .apply(HPoint::new(0.0, radius.exp()).unwrap()),
            );
            let d0 = dist(z, basepoint);
            for o in shorts {
                if o.displacement > 2.0 * radius + 0.2 {
                    break;
                }
                if dist(z, o.element.apply(basepoint)) < d0 - 1e-9 {
                    continue 'probe;
                }
            }
            return false;
        }
        true
    }

    /// One construction-time Monte-Carlo pass: returns accepted samples, the
    /// area estimate, and its standard error.
    fn mc_domain_pass(&self, n: usize, seed: u64) -> Result<(Vec<HPoint>, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total_area = ball_area(self.domain_radius);
        let mut accepted = Vec::new();
        for _ in 0..n {
            let z = self.sample_ball_point(&mut rng);
            if self.in_dirichlet_domain(z) {
                accepted.push(z);
            }
        }
        let p = accepted.len() as f64 / n as f64;
        let estimate = p * total_area;
        let se = total_area * (p * (1.0 - p) / n as f64).sqrt();
        Ok((accepted, estimate, se))
    }

    fn sample_ball_point(&self, rng: &mut ChaCha8Rng) -> HPoint {
        // Area-uniform in the ball: P(rho < r) ~ cosh r - 1.
        let u: f64 = rng.gen();
        let rho = (1.0 + u * (self.domain_radius.cosh() - 1.0)).acosh();
        let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let local = MoebiusElement::rotation_about_i(phi).apply(HPoint::new(0.0, rho.exp()).unwrap());
        MoebiusElement::point_to_i(self.basepoint)
            .inverse()
            .apply(local)
    }

    /// Dirichlet indicator: closer to the basepoint than to any short-orbit
    /// translate (tolerance keeps boundary points in exactly one cell copy).
    fn in_dirichlet_domain(&self, z: HPoint) -> bool {
        let d0 = dist(z, self.basepoint);
        let cut = 2.0 * d0 + 0.1;
        for o in &self.short_elements {
            if o.displacement > cut {
                break;
            }
            if dist(z, o.element.apply(self.basepoint)) < d0 - 1e-12 {
                return false;
            }
        }
        true
    }

    /// Short elements whose bisector comes close to the sampled domain:
    /// the face pairings plus a safety belt.
    fn extract_faces(&self, samples: &[HPoint]) -> Vec<MoebiusElement> {
        let mut margins: Vec<f64> = vec![f64::INFINITY; self.short_elements.len()];
        for &z in samples {
            let d0 = dist(z, self.basepoint);
            for (k, o) in self.short_elements.iter().enumerate() {
                if o.displacement > 2.0 * d0 + 0.6 {
                    break;
                }
                let margin = dist(z, o.element.apply(self.basepoint)) - d0;
                if margin < margins[k] {
                    margins[k] = margin;
                }
            }
        }
        let mut idx: Vec<usize> = (0..self.short_elements.len())
            .filter(|&k| margins[k] < 0.3)
            .collect();
        idx.sort_by(|&i, &j| margins[i].partial_cmp(&margins[j]).unwrap());
        idx.truncate(64);
        let mut faces: Vec<MoebiusElement> = idx
            .into_iter()
            .map(|k| self.short_elements[k].element.clone())
            .collect();
        if faces.len() < 6 {
            // Degenerate extraction; fall back to every short element within
            // twice the diameter bound.
            faces = self
                .short_elements
                .iter()
                .filter(|o| o.displacement <= 2.0 * self.diameter_bound + 0.5)
                .map(|o| o.element.clone())
                .collect();
        }
        // Closed under inverses for symmetric expansion.
        let mut all = faces.clone();
        for f in faces {
            let inv = f.inverse();
            if !all.iter().any(|g| g.approx_eq_psl(&inv, 1e-9)) {
                all.push(inv);
            }
        }
        all.sort_by(|a, b| word_cmp(a.word(), b.word()));
        all
    }

    // -- BFS core ------------------------------------------------------------

    /// Deterministic breadth-first search over products of `letters`,
    /// pruned at `corridor`, returning all elements with displacement at
    /// most `radius` (identity excluded), sorted by displacement then word.
    fn bfs(
        point: HPoint,
        letters: &[MoebiusElement],
        radius: f64,
        corridor: f64,
        element_cap: usize,
        node_cap: usize,
    ) -> Result<Vec<OrbitElement>> {
        let mut nodes: Vec<BfsNode> = Vec::new();
        let mut dedup = PointDedup::with_capacity(1 << 16);

        let id = MoebiusElement::identity();
        dedup.insert(point).expect("fresh dedup");
        nodes.push(BfsNode {
            mat: id.entries(),
            disp: 0.0,
            parent: u32::MAX,
            letter: -1,
            depth: 0,
        });

        let letter_mats: Vec<[f64; 4]> = letters.iter().map(|l| l.entries()).collect();
        let mut accepted_count = 0usize;

        // Plain FIFO: explores by word length, so the first discovery of an
        // element carries its shortest (and lexicographically first) word.
        let mut qi = 0usize;
        while qi < nodes.len() {
            let node_idx = qi as u32;
            qi += 1;
            let (mat, depth) = {
                let n = &nodes[node_idx as usize];
                (n.mat, n.depth)
            };
            if depth as usize >= DEPTH_CAP {
                continue;
            }
            for (li, lm) in letter_mats.iter().enumerate() {
                let child = mat_mul(&mat, lm);
                let zp = apply_mat(&child, point);
                let d = dist(point, zp);
                if d > corridor {
                    continue;
                }
                if dedup.insert(zp).is_none() {
                    continue;
                }
                if d <= radius {
                    accepted_count += 1;
                    if accepted_count > element_cap {
                        return Err(GeomError::EnumerationBudgetExceeded {
                            count: accepted_count,
                            cap: element_cap,
                            radius,
                        });
                    }
                }
                if nodes.len() >= node_cap {
                    return Err(GeomError::EnumerationBudgetExceeded {
                        count: nodes.len(),
                        cap: node_cap,
                        radius,
                    });
                }
                nodes.push(BfsNode {
                    mat: child,
                    disp: d,
                    parent: node_idx,
                    letter: li as i16,
                    depth: depth + 1,
                });
            }
        }

        // Collect accepted, rebuild words through parent chains.
        let mut out: Vec<OrbitElement> = Vec::with_capacity(accepted_count);
        for n in nodes.iter().skip(1) {
            if n.disp <= radius + 1e-9 {
                let mut chain: Vec<i16> = Vec::new();
                let mut cur = n;
                loop {
                    chain.push(cur.letter);
                    if cur.parent == 0 {
                        break;
                    }
                    cur = &nodes[cur.parent as usize];
                }
                chain.reverse();
                let mut word: Vec<i32> = Vec::new();
                for li in chain {
                    word.extend_from_slice(letters[li as usize].word());
                }
                let el = MoebiusElement::from_entries(n.mat[0], n.mat[1], n.mat[2], n.mat[3])
                    .expect("unit determinant preserved")
                    .with_word(word);
                out.push(OrbitElement {
                    element: el,
                    displacement: n.disp,
                });
            }
        }
        out.sort_by(|a, b| {
            a.displacement
                .partial_cmp(&b.displacement)
                .unwrap()
                .then_with(|| word_cmp(a.element.word(), b.element.word()))
        });
        // Final exact dedup: straddled cells can produce rare duplicates.
        let mut cleaned: Vec<OrbitElement> = Vec::with_capacity(out.len());
        for o in out {
            let zp = o.element.apply(point);
            let dup = cleaned
                .iter()
                .rev()
                .take_while(|p| (p.displacement - o.displacement).abs() < 1e-6)
                .any(|p| dist(p.element.apply(point), zp) < SAME_POINT_TOL);
            if !dup {
                cleaned.push(o);
            }
        }
        Ok(cleaned)
    }

    // -- public operations ---------------------------------------------------

    pub fn generators(&self) -> &[MoebiusElement] {
        &self.generators
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn basepoint(&self) -> HPoint {
        self.basepoint
    }

    /// Certified (Monte-Carlo grade) upper bound on the distance from the
    /// basepoint to any point of its Dirichlet domain.
    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    pub fn marked_curves(&self) -> &[MarkedCurve] {
        &self.marked_curves
    }

    /// Short elements around the basepoint, sorted by displacement.
    pub fn short_elements(&self) -> &[OrbitElement] {
        &self.short_elements
    }

    /// Evaluates a word of signed 1-based generator indices.
    pub fn word_eval(&self, word: &[i32]) -> Result<MoebiusElement> {
        let mut acc = MoebiusElement::identity();
        for &idx in word {
            if idx == 0 || idx.unsigned_abs() as usize > self.generators.len() {
                return Err(GeomError::WordIndexOutOfRange {
                    index: idx,
                    count: self.generators.len(),
                });
            }
            let g = &self.generators[(idx.abs() - 1) as usize];
            let factor = if idx > 0 { g.clone() } else { g.inverse() };
            acc = acc.compose(&factor);
        }
        Ok(acc)
    }

    /// All nonidentity elements moving the basepoint at most `radius`.
    pub fn enumerate(&self, radius: f64) -> Result<Vec<OrbitElement>> {
        self.enumerate_at(self.basepoint, radius)
    }

    /// All nonidentity elements moving `point` at most `radius`.
    ///
    /// Completeness: a target `g` factors through the chain of basepoint
    /// Dirichlet cells crossed by the geodesic from `point` to `g point`, so
    /// every word prefix `w` satisfies
    /// `dist(point, w point) <= radius + diameter_bound + dist(basepoint, point)`;
    /// that corridor prunes the search. The expansion set must contain the
    /// cell face pairings, which the construction certifies via the area
    /// check and the suites re-check by radius monotonicity and replay.
    pub fn enumerate_at(&self, point: HPoint, radius: f64) -> Result<Vec<OrbitElement>> {
        if radius > RADIUS_CAP {
            return Err(GeomError::RadiusCapExceeded {
                radius,
                cap: RADIUS_CAP,
            });
        }
        let corridor =
            radius + self.diameter_bound + dist(self.basepoint, point) + 0.6;
        Self::bfs(
            point,
            &self.face_elements,
            radius,
            corridor,
            ELEMENT_CAP,
            NODE_CAP,
        )
    }

    /// Shortest closed geodesic: minimal translation length over all
    /// elements with displacement at most `cutoff`, with a completeness
    /// certificate `found <= cutoff - 2 * diameter_bound`.
    pub fn systole(&self, cutoff: f64) -> Result<(f64, MoebiusElement)> {
        let orbit = self.enumerate(cutoff)?;
        let mut best: Option<(f64, MoebiusElement)> = None;
        for o in &orbit {
            if let Ok(len) = o.element.translation_length() {
                match &best {
                    Some((blen, bel)) => {
                        if len < blen - 1e-12
                            || (len < blen + 1e-12
                                && word_cmp(o.element.word(), bel.word())
                                    == std::cmp::Ordering::Less)
                        {
                            best = Some((len, o.element.clone()));
                        }
                    }
                    None => best = Some((len, o.element.clone())),
                }
            }
        }
        let required = match &best {
            Some((len, _)) => len + 2.0 * self.diameter_bound,
            None => f64::INFINITY,
        };
        match best {
            Some((len, el)) if required <= cutoff => Ok((len, el)),
            Some((len, _)) => Err(GeomError::InconclusiveCutoff {
                cutoff,
                found: len,
                required,
            }),
            None => Err(GeomError::InconclusiveCutoff {
                cutoff,
                found: f64::INFINITY,
                required: f64::INFINITY,
            }),
        }
    }

    /// `n` points distributed with hyperbolic-area density over the
    /// Dirichlet domain at the basepoint; deterministic in `seed`.
    pub fn mc_sample_domain(&self, n: usize, seed: u64) -> Result<Vec<HPoint>> {
        if n == 0 {
            return Err(GeomError::McBudget {
                requested: 0,
                cap: 0,
            });
        }
        let cap = 200_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let mut draws = 0usize;
        while out.len() < n {
            draws += 1;
            if draws > cap {
                return Err(GeomError::McBudget {
                    requested: n,
                    cap,
                });
            }
            let z = self.sample_ball_point(&mut rng);
            if self.in_dirichlet_domain(z) {
                out.push(z);
            }
        }
        Ok(out)
    }

    /// Monte-Carlo Gauss-Bonnet area estimate and its standard error.
    pub fn mc_area(&self, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total_area = ball_area(self.domain_radius);
        let mut hits = 0usize;
        for _ in 0..n {
            let z = self.sample_ball_point(&mut rng);
            if self.in_dirichlet_domain(z) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        (
            p * total_area,
            total_area * (p * (1.0 - p) / n as f64).sqrt(),
        )
    }

    /// Moves `z` to the Dirichlet-domain representative of its orbit.
    pub fn reduce_to_domain(&self, z: HPoint) -> HPoint {
        let mut cur = z;
        let mut d0 = dist(cur, self.basepoint);
        loop {
            let mut improved = false;
            for o in &self.short_elements {
                let cand = o.element.inverse().apply(cur);
                let d = dist(cand, self.basepoint);
                if d < d0 - 1e-13 {
                    cur = cand;
                    d0 = d;
                    improved = true;
                    break;
                }
            }
            if !improved {
                return cur;
            }
        }
    }

    /// The same group with every stored element conjugated by `h` and the
    /// basepoint moved along; no revalidation needed, the geometry is
    /// carried over isometrically.
    pub fn conjugated(&self, h: &MoebiusElement) -> Self {
        let conj =
            |g: &MoebiusElement| g.conjugate_by(h).with_word(g.word().to_vec());
        Self {
            generators: self.generators.iter().map(conj).collect(),
            genus: self.genus,
            basepoint: h.apply(self.basepoint),
            diameter_bound: self.diameter_bound,
            domain_radius: self.domain_radius,
            short_elements: self
                .short_elements
                .iter()
                .map(|o| OrbitElement {
                    element: conj(&o.element),
                    displacement: o.displacement,
                })
                .collect(),
            face_elements: self.face_elements.iter().map(conj).collect(),
            marked_curves: self.marked_curves.clone(),
        }
    }
}

fn mat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn apply_mat(m: &[f64; 4], z: HPoint) -> HPoint {
    let cx = m[2] * z.x() + m[3];
    let cy = m[2] * z.y();
    let den = cx * cx + cy * cy;
    let nx = (m[0] * z.x() + m[1]) * cx + m[0] * z.y() * cy;
    let ny = z.y() * (m[0] * m[3] - m[1] * m[2]);
    HPoint::new(nx / den, ny / den).expect("moebius image stays in half-plane")
}

/// Midpoint of the geodesic segment between two points.
pub fn hyperbolic_midpoint(z: HPoint, w: HPoint) -> Result<HPoint> {
    if dist(z, w) < 1e-14 {
        return Ok(z);
    }
    let geo = Geodesic::through(z, w)?;
    let m = geo.map_to_imaginary_axis();
    let a = m.apply(z);
    let b = m.apply(w);
    let mid = HPoint::new(0.0, (a.y().ln() * 0.5 + b.y().ln() * 0.5).exp())?;
    Ok(m.inverse().apply(mid))
}
