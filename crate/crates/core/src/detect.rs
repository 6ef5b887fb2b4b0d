//! Color-separability scoring of labeled images.
//!
//! The score measures how well the actor's colors stand out from the
//! background: per-pixel log-likelihood ratios of actor vs background color
//! densities are histogrammed per pixel class, and the variance ratio of
//! between-class to within-class spread becomes the detectability score R.
//! Background pixels near the actor centroid count with extra weight, so
//! ambiguous colors right next to the actor hurt more than the same colors
//! far away. The planner consumes the score through the reciprocal cost
//! `L = 1/(R + eps)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::geom::{look_at_pose, transform_cloud, ColorRgb, Pose, RgbPointCloud, Vec3};
use crate::render::{synthesize_view, CameraIntrinsics, LabeledImage, PixelLabel};
use crate::{Error, Result};

/// 3D color-density bin over the RGB cube.
#[derive(Debug, Clone)]
pub struct RgbBin {
    pub bins_per_channel: u32,
    /// Flat `bins_per_channel^3` occupancy counts, r-major.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl RgbBin {
    fn bin_of(&self, c: ColorRgb) -> usize {
        let step = 256 / self.bins_per_channel as usize;
        let n = self.bins_per_channel as usize;
        (c.r as usize / step) * n * n + (c.g as usize / step) * n + (c.b as usize / step)
    }

    /// Density of the query color's bin, in [0, 1].
    pub fn density(&self, c: ColorRgb) -> f64 {
        self.counts[self.bin_of(c)] as f64 / self.total as f64
    }

    fn from_single_color(color: ColorRgb, bins_per_channel: u32) -> Self {
        let n = bins_per_channel as usize;
        let mut bin = Self {
            bins_per_channel,
            counts: vec![0; n * n * n],
            total: 1,
        };
        let idx = bin.bin_of(color);
        bin.counts[idx] = 1;
        bin
    }
}

/// Counts the colors of one pixel class into an RGB bin.
///
/// `bins_per_channel` must divide 256. Errors when the class has no pixels,
/// since a density over an empty set is undefined.
pub fn build_rgb_bin(
    image: &LabeledImage,
    pixel_set: PixelLabel,
    bins_per_channel: u32,
) -> Result<RgbBin> {
    assert!(
        bins_per_channel >= 2 && 256 % bins_per_channel == 0,
        "bins_per_channel must divide 256"
    );
    let n = bins_per_channel as usize;
    let mut bin = RgbBin {
        bins_per_channel,
        counts: vec![0; n * n * n],
        total: 0,
    };
    for (label, color) in image.labels.iter().zip(&image.colors) {
        if *label == pixel_set {
            let idx = bin.bin_of(*color);
            bin.counts[idx] += 1;
            bin.total += 1;
        }
    }
    if bin.total == 0 {
        return Err(Error::EmptyPixelSet(match pixel_set {
            PixelLabel::Actor => "actor",
            PixelLabel::Background => "background",
            PixelLabel::Empty => "empty",
        }));
    }
    Ok(bin)
}

/// Per-pixel log-likelihood ratio of actor to background color density,
/// defined only on labeled (non-empty) pixels.
#[derive(Debug, Clone)]
pub struct LikelihoodImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Option<f64>>,
    /// Shared value range `[ln eps, -ln eps]`; every value lies inside it.
    pub h_min: f64,
    pub h_max: f64,
}

impl LikelihoodImage {
    pub fn value(&self, u: usize, v: usize) -> Option<f64> {
        self.values[v * self.width + u]
    }
}

/// `h(u) = ln(max(phi_a(c), eps) / max(phi_b(c), eps))` with `c` the pixel
/// color, for every actor or background pixel.
pub fn likelihood_image(
    image: &LabeledImage,
    bin_a: &RgbBin,
    bin_b: &RgbBin,
    eps: f64,
) -> LikelihoodImage {
    assert!(eps > 0.0, "eps must be positive");
    let values = image
        .labels
        .iter()
        .zip(&image.colors)
        .map(|(label, color)| match label {
            PixelLabel::Empty => None,
            _ => Some(log_ratio(bin_a.density(*color), bin_b.density(*color), eps)),
        })
        .collect();
    LikelihoodImage {
        width: image.width,
        height: image.height,
        values,
        h_min: eps.ln(),
        h_max: -eps.ln(),
    }
}

#[inline]
fn log_ratio(phi_a: f64, phi_b: f64, eps: f64) -> f64 {
    (phi_a.max(eps) / phi_b.max(eps)).ln()
}

/// Proximity weight for background pixels: `w_max` at the actor centroid,
/// linearly down to 1 at distance `d_c`, and exactly 1 beyond.
pub fn pixel_weight(pixel: (usize, usize), actor_centroid: (f64, f64), d_c: f64, w_max: f64) -> f64 {
    debug_assert!(d_c > 0.0 && w_max >= 1.0);
    let du = pixel.0 as f64 - actor_centroid.0;
    let dv = pixel.1 as f64 - actor_centroid.1;
    let d = (du * du + dv * dv).sqrt();
    if d <= d_c {
        w_max * (1.0 - d / d_c) + d / d_c
    } else {
        1.0
    }
}

/// Normalized 1D histogram over a fixed value range.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    pub bin_count: usize,
    pub h_min: f64,
    pub h_max: f64,
    /// Nonnegative weights, normalized to sum 1.
    pub weights: Vec<f64>,
}

impl Histogram1D {
    /// Accumulates weighted samples into `bin_count` bins on `[h_min, h_max]`
    /// and normalizes. Errors if the total weight is zero.
    pub fn from_samples(
        samples: impl IntoIterator<Item = (f64, f64)>,
        bin_count: usize,
        h_min: f64,
        h_max: f64,
    ) -> Result<Self> {
        let mut weights = vec![0.0; bin_count];
        let width = (h_max - h_min) / bin_count as f64;
        let mut total = 0.0;
        for (h, w) in samples {
            let idx = (((h - h_min) / width) as usize).min(bin_count - 1);
            weights[idx] += w;
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::EmptyPixelSet("histogram"));
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self {
            bin_count,
            h_min,
            h_max,
            weights,
        })
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        let width = (self.h_max - self.h_min) / self.bin_count as f64;
        self.h_min + (i as f64 + 0.5) * width
    }

    fn same_bins(&self, other: &Self) -> bool {
        self.bin_count == other.bin_count && self.h_min == other.h_min && self.h_max == other.h_max
    }
}

/// Variance of the bin centers under the given per-bin masses.
fn moments_variance(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let (mut mean, mut second) = (0.0, 0.0);
    for (h, mass) in pairs {
        mean += mass * h;
        second += mass * h * h;
    }
    second - mean * mean
}

/// Builds the unweighted actor histogram and the proximity-weighted
/// background histogram over the shared likelihood range.
///
/// The actor centroid is the arithmetic mean of the actor pixel coordinates.
pub fn build_histograms(
    lik: &LikelihoodImage,
    image: &LabeledImage,
    bin_count: usize,
    d_c: f64,
    w_max: f64,
) -> Result<(Histogram1D, Histogram1D)> {
    let mut centroid = (0.0, 0.0);
    let mut n_a = 0usize;
    for v in 0..image.height {
        for u in 0..image.width {
            if image.label(u, v) == PixelLabel::Actor {
                centroid.0 += u as f64;
                centroid.1 += v as f64;
                n_a += 1;
            }
        }
    }
    if n_a == 0 {
        return Err(Error::EmptyPixelSet("actor"));
    }
    centroid = (centroid.0 / n_a as f64, centroid.1 / n_a as f64);

    let class_samples = |label: PixelLabel, weighted: bool| {
        let mut samples = Vec::new();
        for v in 0..image.height {
            for u in 0..image.width {
                if image.label(u, v) == label {
                    let h = lik.value(u, v).expect("labeled pixel has a likelihood");
                    let w = if weighted {
                        pixel_weight((u, v), centroid, d_c, w_max)
                    } else {
                        1.0
                    };
                    samples.push((h, w));
                }
            }
        }
        samples
    };

    let p_a = Histogram1D::from_samples(
        class_samples(PixelLabel::Actor, false),
        bin_count,
        lik.h_min,
        lik.h_max,
    )?;
    let p_b = Histogram1D::from_samples(
        class_samples(PixelLabel::Background, true),
        bin_count,
        lik.h_min,
        lik.h_max,
    )
    .map_err(|_| Error::EmptyPixelSet("background"))?;
    Ok((p_a, p_b))
}

/// Between-class variance of the equal mixture over the summed within-class
/// variances. Higher means the two histograms separate better.
pub fn variance_ratio(p_a: &Histogram1D, p_b: &Histogram1D, eps_den: f64) -> Result<f64> {
    if !p_a.same_bins(p_b) {
        return Err(Error::HistogramMismatch(format!(
            "{} bins on [{}, {}] vs {} bins on [{}, {}]",
            p_a.bin_count, p_a.h_min, p_a.h_max, p_b.bin_count, p_b.h_min, p_b.h_max
        )));
    }
    let var_a = moments_variance((0..p_a.bin_count).map(|i| (p_a.bin_center(i), p_a.weights[i])));
    let var_b = moments_variance((0..p_b.bin_count).map(|i| (p_b.bin_center(i), p_b.weights[i])));
    let var_mix = moments_variance(
        (0..p_a.bin_count).map(|i| (p_a.bin_center(i), 0.5 * (p_a.weights[i] + p_b.weights[i]))),
    );
    Ok(var_mix / (var_a + var_b + eps_den))
}

/// Planner cost `L = 1/(R + eps_r)`: positive and strictly decreasing in R.
pub fn detectability_cost(r: f64, eps_r: f64) -> f64 {
    debug_assert!(r >= 0.0 && eps_r > 0.0);
    1.0 / (r + eps_r)
}

/// Knobs of the detectability metric and the image synthesis behind it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectParams {
    pub bins_per_channel: u32,
    pub hist_bins: usize,
    /// Density clamp in the log-likelihood ratio.
    pub eps: f64,
    /// Guard for the zero-within-variance degenerate case.
    pub eps_den: f64,
    /// Floor in the reciprocal cost.
    pub eps_cost: f64,
    pub w_max: f64,
    /// Proximity boundary `d_c` as a fraction of the image diagonal.
    pub d_c_fraction: f64,
    pub splat_radius: u32,
    pub clear_color: ColorRgb,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            bins_per_channel: 8,
            hist_bins: 32,
            eps: 1e-6,
            eps_den: 1e-9,
            eps_cost: 1e-3,
            w_max: 5.0,
            d_c_fraction: 0.5,
            splat_radius: 1,
            clear_color: ColorRgb::new(128, 128, 128),
        }
    }
}

/// Scores of one synthesized view.
#[derive(Debug, Clone, Copy)]
pub struct DetectabilityReport {
    pub variance_ratio: f64,
    pub cost: f64,
    pub actor_pixel_count: usize,
    pub background_pixel_count: usize,
}

/// Result of scoring a candidate viewpoint.
#[derive(Debug, Clone, Copy)]
pub enum ViewpointOutcome {
    Visible(DetectabilityReport),
    /// The actor fills the view; R is scored against a single virtual
    /// background sample of the clear color.
    NoBackground(DetectabilityReport),
    /// No actor pixel is visible; the planner treats this as infinite cost.
    Occluded,
}

impl ViewpointOutcome {
    pub fn report(&self) -> Option<&DetectabilityReport> {
        match self {
            ViewpointOutcome::Visible(r) | ViewpointOutcome::NoBackground(r) => Some(r),
            ViewpointOutcome::Occluded => None,
        }
    }

    /// Planner edge cost; `None` when occluded.
    pub fn cost(&self) -> Option<f64> {
        self.report().map(|r| r.cost)
    }
}

/// Full evaluation output, keeping the intermediates around for dumps.
#[derive(Debug, Clone)]
pub struct ImageEvaluation {
    pub outcome: ViewpointOutcome,
    /// Absent when the actor is occluded.
    pub likelihood: Option<LikelihoodImage>,
    pub histograms: Option<(Histogram1D, Histogram1D)>,
}

/// Scores an already-rendered labeled image, returning the intermediate
/// likelihood image and histograms alongside the outcome.
pub fn evaluate_image_detailed(
    image: &LabeledImage,
    params: &DetectParams,
) -> Result<ImageEvaluation> {
    let n_a = image.count_label(PixelLabel::Actor);
    if n_a == 0 {
        return Ok(ImageEvaluation {
            outcome: ViewpointOutcome::Occluded,
            likelihood: None,
            histograms: None,
        });
    }
    let n_b = image.count_label(PixelLabel::Background);

    let bin_a = build_rgb_bin(image, PixelLabel::Actor, params.bins_per_channel)?;
    let d_c = params.d_c_fraction
        * ((image.width * image.width + image.height * image.height) as f64).sqrt();

    let (lik, p_a, p_b, no_background) = if n_b > 0 {
        let bin_b = build_rgb_bin(image, PixelLabel::Background, params.bins_per_channel)?;
        let lik = likelihood_image(image, &bin_a, &bin_b, params.eps);
        let (p_a, p_b) = build_histograms(&lik, image, params.hist_bins, d_c, params.w_max)?;
        (lik, p_a, p_b, false)
    } else {
        let bin_b = RgbBin::from_single_color(params.clear_color, params.bins_per_channel);
        let lik = likelihood_image(image, &bin_a, &bin_b, params.eps);
        let actor_samples: Vec<(f64, f64)> = lik
            .values
            .iter()
            .zip(&image.labels)
            .filter(|(_, l)| **l == PixelLabel::Actor)
            .map(|(v, _)| (v.unwrap(), 1.0))
            .collect();
        let p_a = Histogram1D::from_samples(actor_samples, params.hist_bins, lik.h_min, lik.h_max)?;
        let h_clear = log_ratio(bin_a.density(params.clear_color), 1.0, params.eps);
        let p_b =
            Histogram1D::from_samples([(h_clear, 1.0)], params.hist_bins, lik.h_min, lik.h_max)?;
        (lik, p_a, p_b, true)
    };

    let r = variance_ratio(&p_a, &p_b, params.eps_den)?;
    let report = DetectabilityReport {
        variance_ratio: r,
        cost: detectability_cost(r, params.eps_cost),
        actor_pixel_count: n_a,
        background_pixel_count: n_b,
    };
    Ok(ImageEvaluation {
        outcome: if no_background {
            ViewpointOutcome::NoBackground(report)
        } else {
            ViewpointOutcome::Visible(report)
        },
        likelihood: Some(lik),
        histograms: Some((p_a, p_b)),
    })
}

/// Scores an already-rendered labeled image.
pub fn evaluate_image(image: &LabeledImage, params: &DetectParams) -> Result<ViewpointOutcome> {
    Ok(evaluate_image_detailed(image, params)?.outcome)
}

/// Renders the scene from `camera_center` looking at the actor and scores
/// the resulting image.
pub fn evaluate_viewpoint(
    actor: &RgbPointCloud,
    actor_pose: &Pose,
    background: &RgbPointCloud,
    camera_center: Vec3,
    intrinsics: &CameraIntrinsics,
    params: &DetectParams,
) -> Result<ViewpointOutcome> {
    let camera_pose = look_at_pose(camera_center, actor_pose.translation, Vec3::z())?;
    let actor_world = transform_cloud(actor, actor_pose);
    let image = synthesize_view(
        &actor_world,
        background,
        &camera_pose,
        intrinsics,
        params.splat_radius,
        params.clear_color,
    );
    evaluate_image(&image, params)
}

/// Dumps a likelihood image as binary PGM, with the fixed range
/// `[h_min, h_max]` mapped to `[0, 255]`. Unlabeled pixels write 0.
pub fn write_likelihood_pgm(lik: &LikelihoodImage, out: &mut impl Write) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", lik.width, lik.height)?;
    let span = lik.h_max - lik.h_min;
    let bytes: Vec<u8> = lik
        .values
        .iter()
        .map(|v| match v {
            Some(h) => (((h - lik.h_min) / span * 255.0).round()).clamp(0.0, 255.0) as u8,
            None => 0,
        })
        .collect();
    out.write_all(&bytes)
}
