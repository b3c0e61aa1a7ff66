//! C ABI over the `lpnml` library.
//!
//! Datasets and models are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`LpnmlStatus`]; on failure the
//! message is available from [`lpnml_last_error_message`] on the same thread.
//! Matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lpnml::data::{load_csv, LabelColumn};
use lpnml::nalgebra::{DMatrix, DVector};
use lpnml::{Dataset, Error, Learner, Loss, RidgeModel, TuningGrid};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpnmlStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    SingularMatrix = 3,
    NumericalFailure = 4,
    InvalidParameter = 5,
    InsufficientData = 6,
    DivisionByZero = 7,
    Io = 8,
    Parse = 9,
    MissingLabelColumn = 10,
    EmptySide = 11,
    Panic = 12,
}

impl From<&Error> for LpnmlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => LpnmlStatus::DimensionMismatch,
            Error::SingularMatrix(_) => LpnmlStatus::SingularMatrix,
            Error::NumericalFailure(_) => LpnmlStatus::NumericalFailure,
            Error::InvalidParameter(_) => LpnmlStatus::InvalidParameter,
            Error::InsufficientData { .. } => LpnmlStatus::InsufficientData,
            Error::DivisionByZero(_) => LpnmlStatus::DivisionByZero,
            Error::Io { .. } => LpnmlStatus::Io,
            Error::Parse { .. } => LpnmlStatus::Parse,
            Error::MissingLabelColumn(_) => LpnmlStatus::MissingLabelColumn,
            Error::EmptySide(_) => LpnmlStatus::EmptySide,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpnmlLearner {
    Ridge = 0,
    Bayes = 1,
    Pnml = 2,
    Lpnml = 3,
}

impl From<LpnmlLearner> for Learner {
    fn from(l: LpnmlLearner) -> Self {
        match l {
            LpnmlLearner::Ridge => Learner::RidgeErm,
            LpnmlLearner::Bayes => Learner::Bayesian,
            LpnmlLearner::Pnml => Learner::Pnml,
            LpnmlLearner::Lpnml => Learner::Lpnml,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpnmlLoss {
    SquaredError = 0,
    LogLoss = 1,
}

impl From<LpnmlLoss> for Loss {
    fn from(l: LpnmlLoss) -> Self {
        match l {
            LpnmlLoss::SquaredError => Loss::SquaredError,
            LpnmlLoss::LogLoss => Loss::LogLoss,
        }
    }
}

/// Gaussian predictive distribution.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LpnmlPrediction {
    pub mean: f64,
    pub variance: f64,
}

/// Per-point LpNML constants; `log_c` is the log of the normalizer weight.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LpnmlPointConstants {
    pub mu_shift: f64,
    pub variance: f64,
    pub log_c: f64,
    pub k_lambda: f64,
}

/// Opaque training set.
pub struct LpnmlDataset(Dataset);

/// Opaque fitted ridge state.
pub struct LpnmlModel(RidgeModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), LpnmlStatusError>) -> LpnmlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LpnmlStatus::Ok,
        Ok(Err(LpnmlStatusError::Lib(e))) => {
            set_last_error(e.to_string());
            LpnmlStatus::from(&e)
        }
        Ok(Err(LpnmlStatusError::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            LpnmlStatus::NullPointer
        }
        Err(_) => {
            set_last_error("internal panic".into());
            LpnmlStatus::Panic
        }
    }
}

enum LpnmlStatusError {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for LpnmlStatusError {
    fn from(e: Error) -> Self {
        LpnmlStatusError::Lib(e)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, LpnmlStatusError> {
    p.as_ref().ok_or(LpnmlStatusError::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], LpnmlStatusError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(LpnmlStatusError::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), LpnmlStatusError> {
    if out.is_null() {
        return Err(LpnmlStatusError::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lpnml_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies a row-major `n_samples × n_features` matrix and its labels.
///
/// # Safety
/// `features` must point to `n_samples * n_features` doubles, `labels` to
/// `n_samples` doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpnml_dataset_new(
    features: *const f64,
    labels: *const f64,
    n_samples: usize,
    n_features: usize,
    out: *mut *mut LpnmlDataset,
) -> LpnmlStatus {
    guard(|| {
        let len = n_samples
            .checked_mul(n_features)
            .ok_or_else(|| Error::InvalidParameter("matrix size overflows".into()))?;
        let x = slice(features, len, "features")?;
        let y = slice(labels, n_samples, "labels")?;
        let data = Dataset::new(
            DMatrix::from_row_slice(n_samples, n_features, x),
            DVector::from_column_slice(y),
        )?;
        write_out(out, Box::into_raw(Box::new(LpnmlDataset(data))), "out")
    })
}

/// Loads a CSV file. `label_column` is a header name, a 0-based index, or
/// NULL for the last column.
///
/// # Safety
/// `path` and a non-NULL `label_column` must be NUL-terminated UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn lpnml_dataset_load_csv(
    path: *const c_char,
    label_column: *const c_char,
    has_header: bool,
    out: *mut *mut LpnmlDataset,
) -> LpnmlStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let label = if label_column.is_null() {
            LabelColumn::Last
        } else {
            c_str(label_column, "label_column")?.parse()?
        };
        let data = load_csv(path, &label, has_header)?;
        write_out(out, Box::into_raw(Box::new(LpnmlDataset(data))), "out")
    })
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, LpnmlStatusError> {
    if p.is_null() {
        return Err(LpnmlStatusError::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidParameter(format!("{what} is not valid UTF-8")).into())
}

/// # Safety
/// `dataset` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpnml_dataset_free(dataset: *mut LpnmlDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpnml_dataset_shape(
    dataset: *const LpnmlDataset,
    n_samples: *mut usize,
    n_features: *mut usize,
) -> LpnmlStatus {
    guard(|| {
        let d = &deref(dataset, "dataset")?.0;
        write_out(n_samples, d.n_samples(), "n_samples")?;
        write_out(n_features, d.n_features(), "n_features")
    })
}

/// # Safety
/// `dataset` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lpnml_model_fit(
    dataset: *const LpnmlDataset,
    lambda: f64,
    noise_variance: f64,
    out: *mut *mut LpnmlModel,
) -> LpnmlStatus {
    guard(|| {
        let d = &deref(dataset, "dataset")?.0;
        let model = lpnml::fit_ridge(d, lambda, noise_variance)?;
        write_out(out, Box::into_raw(Box::new(LpnmlModel(model))), "out")
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpnml_model_free(model: *mut LpnmlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Feature count the model expects, or 0 for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpnml_model_n_features(model: *const LpnmlModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_features())
}

/// Copies the ridge coefficients into `out` (length `len`, which must equal
/// the feature count).
///
/// # Safety
/// `model` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lpnml_model_theta(model: *const LpnmlModel, out: *mut f64, len: usize) -> LpnmlStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let theta = m.theta_hat();
        if len != theta.len() {
            return Err(Error::DimensionMismatch {
                context: "theta buffer",
                expected: theta.len(),
                found: len,
            }
            .into());
        }
        if out.is_null() {
            return Err(LpnmlStatusError::Null("out"));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(theta.as_slice());
        Ok(())
    })
}

unsafe fn query<'a>(model: *const LpnmlModel, x: *const f64, len: usize) -> Result<(&'a RidgeModel, DVector<f64>), LpnmlStatusError> {
    let m = &deref(model, "model")?.0;
    Ok((m, DVector::from_column_slice(slice(x, len, "x")?)))
}

/// # Safety
/// `model` must be a live handle, `x` must hold `len` doubles and `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn lpnml_predict(
    model: *const LpnmlModel,
    learner: LpnmlLearner,
    x: *const f64,
    len: usize,
    out: *mut LpnmlPrediction,
) -> LpnmlStatus {
    guard(|| {
        let (m, x) = query(model, x, len)?;
        let d = Learner::from(learner).predict(m, &x)?;
        write_out(
            out,
            LpnmlPrediction {
                mean: d.mean,
                variance: d.variance,
            },
            "out",
        )
    })
}

/// # Safety
/// As [`lpnml_predict`].
#[no_mangle]
pub unsafe extern "C" fn lpnml_point_constants(
    model: *const LpnmlModel,
    x: *const f64,
    len: usize,
    out: *mut LpnmlPointConstants,
) -> LpnmlStatus {
    guard(|| {
        let (m, x) = query(model, x, len)?;
        let c = lpnml::lpnml_constants(m, &x)?;
        write_out(
            out,
            LpnmlPointConstants {
                mu_shift: c.mu_shift,
                variance: c.variance,
                log_c: c.log_c,
                k_lambda: c.k_lambda,
            },
            "out",
        )
    })
}

/// Min-max regret of the LpNML at `x`.
///
/// # Safety
/// As [`lpnml_predict`].
#[no_mangle]
pub unsafe extern "C" fn lpnml_minmax_regret(model: *const LpnmlModel, x: *const f64, len: usize, out: *mut f64) -> LpnmlStatus {
    guard(|| {
        let (m, x) = query(model, x, len)?;
        write_out(out, lpnml::minmax_regret(m, &x)?, "out")
    })
}

/// Leave-one-out selection over the given grids.
///
/// # Safety
/// `dataset` must be a live handle; the grids must hold their stated lengths
/// and the outputs must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lpnml_tune(
    dataset: *const LpnmlDataset,
    learner: LpnmlLearner,
    loss: LpnmlLoss,
    lambdas: *const f64,
    n_lambdas: usize,
    noise_variances: *const f64,
    n_noise_variances: usize,
    out_lambda: *mut f64,
    out_noise_variance: *mut f64,
) -> LpnmlStatus {
    guard(|| {
        let d = &deref(dataset, "dataset")?.0;
        let grid = TuningGrid::new(
            slice(lambdas, n_lambdas, "lambdas")?.to_vec(),
            slice(noise_variances, n_noise_variances, "noise_variances")?.to_vec(),
        )?;
        let r = lpnml::leave_one_out_tune(d, &grid, learner.into(), loss.into())?;
        write_out(out_lambda, r.lambda, "out_lambda")?;
        write_out(out_noise_variance, r.noise_variance, "out_noise_variance")
    })
}
