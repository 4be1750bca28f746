use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracint::{image_handle, FracOrder};
use crate::funcspace::{make_grid, FunctionHandle};
use crate::variation::{detect_uvp, DetectOptions, UvpDetection};

/// Outcome of a single hypothesis-filtered check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
    /// The theorem's hypothesis does not hold for this input.
    NotApplicable,
}

/// Detector and image resolution shared by the classifier-based checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckSettings {
    pub detect: DetectOptions,
    /// Cells of the candidate grid over the scanned interval.
    pub candidate_cells: usize,
    /// Cells of the grid the image is computed on before re-interpolation.
    pub image_n: usize,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self { detect: DetectOptions::default(), candidate_cells: 16, image_n: 1 << 14 }
    }
}

/// Classifier counts for one side of a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideCounts {
    pub unbounded: Vec<f64>,
    pub inconclusive: Vec<f64>,
}

impl From<&UvpDetection> for SideCounts {
    fn from(d: &UvpDetection) -> Self {
        Self { unbounded: d.unbounded.clone(), inconclusive: d.inconclusive.clone() }
    }
}

impl SideCounts {
    fn optimistic(&self) -> usize {
        self.unbounded.len()
    }

    fn pessimistic(&self) -> usize {
        self.unbounded.len() + self.inconclusive.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservationOutcome {
    pub function: String,
    pub alpha: f64,
    pub window: (f64, f64),
    pub verdict: CheckVerdict,
    pub f: SideCounts,
    /// Absent when the hypothesis fails and the image is never examined.
    pub image: Option<SideCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UvpCountOutcome {
    pub function: String,
    pub alpha: f64,
    pub verdict: CheckVerdict,
    pub f: SideCounts,
    pub image: SideCounts,
}

pub(crate) fn detect_on(f: &FunctionHandle, lo: f64, hi: f64, settings: &CheckSettings) -> Result<UvpDetection> {
    let grid = make_grid(lo, hi, settings.candidate_cells)?;
    detect_uvp(f, &grid, &settings.detect)
}

fn check_window(f: &FunctionHandle, window: (f64, f64)) -> Result<()> {
    let (a, b) = f.domain();
    let (c, d) = window;
    if !(c < d && c >= a && d <= b) {
        return Err(Error::Precondition(format!("window [{c}, {d}] is not a subinterval of [{a}, {b}]")));
    }
    Ok(())
}

/// If `f` classifies as bounded at every candidate of `[c, d]`, the re-interpolated image
/// must classify as bounded there too.
pub fn preservation_check(f: &FunctionHandle, order: FracOrder, window: (f64, f64)) -> Result<PreservationOutcome> {
    preservation_check_with(f, order, window, &CheckSettings::default())
}

pub fn preservation_check_with(
    f: &FunctionHandle,
    order: FracOrder,
    window: (f64, f64),
    settings: &CheckSettings,
) -> Result<PreservationOutcome> {
    check_window(f, window)?;
    let f_det = detect_on(f, window.0, window.1, settings)?;
    let image = if f_det.unbounded.is_empty() && f_det.inconclusive.is_empty() {
        Some(image_handle(f, order, settings.image_n)?)
    } else {
        None
    };
    preservation_from(f, order, window, &f_det, image.as_ref(), settings)
}

/// Same as [`preservation_check_with`] with the source detection and the image supplied.
pub(crate) fn preservation_from(
    f: &FunctionHandle,
    order: FracOrder,
    window: (f64, f64),
    f_det: &UvpDetection,
    image: Option<&FunctionHandle>,
    settings: &CheckSettings,
) -> Result<PreservationOutcome> {
    let f_counts = SideCounts::from(f_det);
    let mut out = PreservationOutcome {
        function: f.describe(),
        alpha: order.alpha(),
        window,
        verdict: CheckVerdict::NotApplicable,
        f: f_counts,
        image: None,
    };
    if !out.f.unbounded.is_empty() {
        return Ok(out);
    }
    if !out.f.inconclusive.is_empty() {
        out.verdict = CheckVerdict::Inconclusive;
        return Ok(out);
    }
    let image = image.ok_or_else(|| Error::Precondition("image handle required".into()))?;
    let img = SideCounts::from(&detect_on(image, window.0, window.1, settings)?);
    out.verdict = if !img.unbounded.is_empty() {
        CheckVerdict::Fail
    } else if !img.inconclusive.is_empty() {
        CheckVerdict::Inconclusive
    } else {
        CheckVerdict::Pass
    };
    out.image = Some(img);
    Ok(out)
}

/// Compare the detected unbounded-variation points of `f` and of its image on identical
/// candidate sets: for `α < 1` the image may not have more, for `α ≥ 1` it must have none.
///
/// Inconclusive points count against the claim when deciding `pass` and in its favour when
/// deciding `fail`; anything in between is inconclusive.
pub fn uvp_count_check(f: &FunctionHandle, order: FracOrder) -> Result<UvpCountOutcome> {
    uvp_count_check_with(f, order, &CheckSettings::default())
}

pub fn uvp_count_check_with(f: &FunctionHandle, order: FracOrder, settings: &CheckSettings) -> Result<UvpCountOutcome> {
    let (a, b) = f.domain();
    let f_det = detect_on(f, a, b, settings)?;
    let image = image_handle(f, order, settings.image_n)?;
    let img_det = detect_on(&image, a, b, settings)?;
    Ok(uvp_count_from(f, order, &f_det, &img_det))
}

pub(crate) fn uvp_count_from(
    f: &FunctionHandle,
    order: FracOrder,
    f_det: &UvpDetection,
    img_det: &UvpDetection,
) -> UvpCountOutcome {
    let fc = SideCounts::from(f_det);
    let ic = SideCounts::from(img_det);
    let verdict = if order.alpha() >= 1.0 {
        if ic.pessimistic() == 0 {
            CheckVerdict::Pass
        } else if ic.optimistic() > 0 {
            CheckVerdict::Fail
        } else {
            CheckVerdict::Inconclusive
        }
    } else if ic.pessimistic() <= fc.optimistic() {
        CheckVerdict::Pass
    } else if ic.optimistic() > fc.pessimistic() {
        CheckVerdict::Fail
    } else {
        CheckVerdict::Inconclusive
    };
    UvpCountOutcome { function: f.describe(), alpha: order.alpha(), verdict, f: fc, image: ic }
}
