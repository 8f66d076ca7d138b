//! Runs, detection statistics and the slit comparison.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::PathBuf;

use rayon::prelude::*;
use rqm_kernel::KernelError;
use sha2::{Digest, Sha256};

use crate::render::{ascii, FrameBuffer};
use crate::scenario::{build_world, to_text, BuildOptions, ScenarioError, ScenarioSpec};
use crate::world::World;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("scenario has no detector {0}")]
    NoDetector(usize),
    #[error("detector {detector} not reached within {instants} instants")]
    NotReached { detector: usize, instants: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorStats {
    /// Births per basic state, counted on the particle chosen in the detected
    /// superposition.
    pub counts: Vec<u64>,
    /// Sum of `counts`.
    pub total: u64,
    /// Detections whose reduction had not completed when the run stopped.
    pub pending: u64,
    /// Smallest and largest superposition size at contact.
    pub size: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub label: String,
    pub seed: u64,
    pub instants: u64,
    /// SHA-256 of the scenario text, seed included.
    pub digest: String,
    pub base: u8,
    pub detectors: Vec<DetectorStats>,
    pub particles: usize,
    pub collisions: u64,
}

impl RunReport {
    fn collect(label: &str, spec: &ScenarioSpec, world: &World, instants: u64) -> Self {
        let mut detectors: Vec<DetectorStats> = (0..world.detectors.len())
            .map(|_| DetectorStats {
                counts: vec![0; spec.base as usize],
                total: 0,
                pending: 0,
                size: None,
            })
            .collect();
        for record in world.detections.iter().filter(|r| r.measured) {
            let stats = &mut detectors[record.detector];
            // births are kept on the first record of each R
            let primary = world.detection_for(record.r).unwrap_or(record);
            match primary.births.iter().find(|b| b.signal == record.signal) {
                Some(birth) => {
                    stats.counts[birth.state.value() as usize] += 1;
                    stats.total += 1;
                }
                None => stats.pending += 1,
            }
            stats.size = Some(match stats.size {
                None => (record.size, record.size),
                Some((lo, hi)) => (lo.min(record.size), hi.max(record.size)),
            });
        }
        Self {
            label: label.to_owned(),
            seed: spec.seed,
            instants,
            digest: digest(spec),
            base: spec.base,
            detectors,
            particles: world.particles.len(),
            collisions: world.diagnostics.collisions,
        }
    }

    /// Counts of every detector added together.
    pub fn merged_counts(&self) -> Vec<u64> {
        let mut counts = vec![0; self.base as usize];
        for d in &self.detectors {
            for (c, n) in counts.iter_mut().zip(&d.counts) {
                *c += n;
            }
        }
        counts
    }

    /// Comma-separated per-detector counts preceded by `#` header lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# scenario,{}", self.label);
        let _ = writeln!(out, "# digest,{}", self.digest);
        let _ = writeln!(out, "# seed,{}", self.seed);
        let _ = writeln!(out, "# instants,{}", self.instants);
        let _ = writeln!(out, "detector,state,count,frequency");
        for (i, d) in self.detectors.iter().enumerate() {
            for (state, &n) in d.counts.iter().enumerate() {
                let f = if d.total == 0 { 0.0 } else { n as f64 / d.total as f64 };
                let _ = writeln!(out, "{i},{state},{n},{f:.6}");
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario:   {}", self.label);
        let _ = writeln!(out, "digest:     {}", self.digest);
        let _ = writeln!(out, "seed:       {}", self.seed);
        let _ = writeln!(out, "instants:   {}", self.instants);
        let _ = writeln!(out, "particles:  {}", self.particles);
        let _ = writeln!(out, "collisions: {}", self.collisions);
        for (i, d) in self.detectors.iter().enumerate() {
            let _ = write!(out, "detector {i}: {} detections", d.total);
            if d.pending > 0 {
                let _ = write!(out, ", {} pending", d.pending);
            }
            if let Some((lo, hi)) = d.size {
                let _ = write!(out, ", superposition size {lo}..={hi}");
            }
            out.push('\n');
            for (state, &n) in d.counts.iter().enumerate() {
                let f = if d.total == 0 { 0.0 } else { n as f64 / d.total as f64 };
                let _ = writeln!(out, "  state {state}: {n:>6}  {f:.6}");
            }
        }
        out
    }
}

/// SHA-256 of the canonical text of `spec`, in hex.
pub fn digest(spec: &ScenarioSpec) -> String {
    hex::encode(Sha256::digest(to_text(spec).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Directory receiving `frame_NNNNNN.ppm` files.
    pub frames: Option<PathBuf>,
    /// Render every k-th instant; 0 is read as 1.
    pub frame_every: u64,
    pub remanence: bool,
    /// Also write `frame_NNNNNN.txt` ASCII dumps next to the pixmaps.
    pub ascii: bool,
    pub scale: u32,
    /// Micro-steps allowed per instant; the kernel default when `None`.
    pub step_budget: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            frames: None,
            frame_every: 1,
            remanence: false,
            ascii: false,
            scale: 1,
            step_budget: None,
        }
    }
}

/// Runs `spec` with `seed` for at most `instants` instants, stopping early
/// once every shot has been fired and every wavefront and reduction is over.
pub fn run(spec: &ScenarioSpec, instants: u64, seed: u64, options: &RunOptions) -> Result<RunReport, RunError> {
    let mut spec = spec.clone();
    spec.seed = seed;
    spec.run_length = instants;
    run_labelled(&spec.name.clone(), &spec, options)
}

fn run_labelled(label: &str, spec: &ScenarioSpec, options: &RunOptions) -> Result<RunReport, RunError> {
    let instants = spec.run_length;
    let frames = options.frames.as_ref();
    let mut build = BuildOptions {
        paint_log: frames.is_some() && options.remanence,
        ..BuildOptions::default()
    };
    if let Some(budget) = options.step_budget {
        build.kernel.step_budget = budget;
    }
    let mut sim = build_world(spec, build)?;
    if let Some(dir) = frames {
        fs::create_dir_all(dir)?;
    }
    let mut fb = FrameBuffer::for_world(&sim.world, options.scale, options.remanence);
    let every = options.frame_every.max(1);
    let mut executed = 0;
    while executed < instants && !sim.is_settled() {
        let report = sim.step()?;
        executed += 1;
        if let Some(dir) = frames {
            if report.instant % every == 0 {
                fb.render(&mut sim.world);
                let name = format!("frame_{:06}", report.instant);
                fs::write(dir.join(format!("{name}.ppm")), fb.to_ppm())?;
                if options.ascii {
                    fs::write(dir.join(format!("{name}.txt")), ascii(&sim.world))?;
                }
            }
        }
    }
    Ok(RunReport::collect(label, spec, &sim.world, executed))
}

/// One row per report: label, total, then the frequency of every state.
/// A report without detections gets zeros and the `empty` flag.
pub fn frequency_table(reports: &[RunReport]) -> String {
    let base = reports.iter().map(|r| r.base).max().unwrap_or(0);
    let mut out = String::from("variant,total");
    for s in 0..base {
        let _ = write!(out, ",{s}");
    }
    out.push_str(",flag\n");
    for report in reports {
        let counts = report.merged_counts();
        let total: u64 = counts.iter().sum();
        let _ = write!(out, "{},{total}", report.label);
        for s in 0..base as usize {
            let n = counts.get(s).copied().unwrap_or(0);
            let f = if total == 0 { 0.0 } else { n as f64 / total as f64 };
            let _ = write!(out, ",{f:.6}");
        }
        out.push_str(if total == 0 { ",empty\n" } else { ",\n" });
    }
    out
}

/// Fractions `(#a in S) / (#S)` of each state of a multiset count vector.
pub fn fractions(counts: &[u32]) -> Vec<f64> {
    let total: u32 = counts.iter().sum();
    counts
        .iter()
        .map(|&n| if total == 0 { 0.0 } else { n as f64 / total as f64 })
        .collect()
}

/// State fractions of the superposition at the first contact with
/// `detector`, from a run where detectors never fire R and every source
/// fires once.
pub fn expected_distribution(spec: &ScenarioSpec, detector: usize) -> Result<Vec<f64>, RunError> {
    if detector >= spec.detectors.len() {
        return Err(RunError::NoDetector(detector));
    }
    let mut spec = spec.clone();
    for src in &mut spec.sources {
        src.shots = src.shots.min(1);
    }
    let build = BuildOptions {
        measure: false,
        ..BuildOptions::default()
    };
    let mut sim = build_world(&spec, build)?;
    for _ in 0..spec.run_length {
        sim.step()?;
        if let Some(record) = sim.world.detections.iter().find(|r| r.detector == detector) {
            return Ok(fractions(&record.counts));
        }
        if sim.is_settled() {
            break;
        }
    }
    Err(RunError::NotReached {
        detector,
        instants: spec.run_length,
    })
}

/// Slit variants: every slit open, then each slit open alone. A scenario
/// without slits has the single variant of itself.
pub fn slit_variants(spec: &ScenarioSpec) -> Vec<(String, ScenarioSpec)> {
    let n = spec.slits.len();
    let mut all = spec.clone();
    for slit in &mut all.slits {
        slit.open = true;
    }
    if n == 0 {
        return vec![(spec.name.clone(), all)];
    }
    let mut variants = vec![(format!("{n} slits"), all.clone())];
    if n > 1 {
        for k in 0..n {
            let closed: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            variants.push((format!("slit {k}"), all.with_slits_closed(&closed)));
        }
    } else {
        variants[0].0 = String::from("1 slit");
    }
    variants
}

/// Runs every slit variant with the same seed, in parallel. Reports come
/// back in variant order.
pub fn compare(spec: &ScenarioSpec, instants: u64, seed: u64) -> Result<Vec<RunReport>, RunError> {
    slit_variants(spec)
        .into_par_iter()
        .map(|(label, mut variant)| {
            variant.seed = seed;
            variant.run_length = instants;
            run_labelled(&label, &variant, &RunOptions::default())
        })
        .collect()
}
