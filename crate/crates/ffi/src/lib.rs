//! C interface to trained tacdss models and generated datasets.
//!
//! Every fallible function returns a [`TacdssStatus`]; on failure the message
//! is available from [`tacdss_last_error`] on the calling thread. Handles are
//! opaque and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tacdss::data::{generate, split, Dataset, GenerateOptions};
use tacdss::model_file::ModelFile;
use tacdss::pipeline::{train_model, ModelKind, TrainConfig};
use tacdss::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TacdssStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Io = 4,
    Parse = 5,
    Numerical = 6,
    Panic = 7,
}

/// A trained model with its normalisation.
pub struct TacdssModel {
    inner: ModelFile,
}

/// A set of physical-unit samples.
pub struct TacdssDataset {
    inner: Dataset,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TacdssStatus {
    match e {
        Error::InvalidArgument(_) => TacdssStatus::InvalidArgument,
        Error::OutOfRange { .. } => TacdssStatus::OutOfRange,
        Error::Io { .. } => TacdssStatus::Io,
        Error::Parse { .. } | Error::Json(_) => TacdssStatus::Parse,
        Error::Singular(_) | Error::DegenerateCoverage { .. } | Error::Diverged { .. } => TacdssStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TacdssStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TacdssStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            TacdssStatus::NullPointer
        }
        Ok(Err(Fail::Invalid(msg))) => {
            set_error(msg);
            TacdssStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            TacdssStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Invalid(format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn tacdss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tacdss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tacdss_model_load(path: *const c_char, out: *mut *mut TacdssModel) -> TacdssStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(TacdssModel {
            inner: ModelFile::load(path)?,
        }));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tacdss_model_from_json(json: *const c_char, out: *mut *mut TacdssModel) -> TacdssStatus {
    guard(|| {
        let json = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(TacdssModel {
            inner: ModelFile::from_json(json)?,
        }));
        Ok(())
    })
}

/// Serialises the model; free the result with [`tacdss_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tacdss_model_to_json(model: *const TacdssModel, out: *mut *mut c_char) -> TacdssStatus {
    guard(|| {
        let model = model.as_ref().ok_or(Fail::Null("model"))?;
        let out = out_arg(out, "out")?;
        let s = CString::new(model.inner.to_json()?).map_err(|e| Fail::Invalid(e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// Decision score in points for physical inputs.
///
/// # Safety
/// `model` must be a live handle and `score` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tacdss_model_predict(
    model: *const TacdssModel,
    fuel: f64,
    intercept_time: f64,
    weapon: f64,
    danger: f64,
    score: *mut f64,
) -> TacdssStatus {
    guard(|| {
        let model = model.as_ref().ok_or(Fail::Null("model"))?;
        let score = out_arg(score, "score")?;
        *score = model.inner.predict(&[fuel, intercept_time, weapon, danger])?;
        Ok(())
    })
}

/// Static name of the model family ("anfis", "mamdani", "mlp" or "cart"), or NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tacdss_model_kind(model: *const TacdssModel) -> *const c_char {
    match model.as_ref().map(|m| m.inner.model.kind()) {
        Some("anfis") => c"anfis".as_ptr(),
        Some("mamdani") => c"mamdani".as_ptr(),
        Some("mlp") => c"mlp".as_ptr(),
        Some("cart") => c"cart".as_ptr(),
        _ => ptr::null(),
    }
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tacdss_model_free(model: *mut TacdssModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tacdss_dataset_generate(seed: u64, n: usize, jitter: bool, out: *mut *mut TacdssDataset) -> TacdssStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let opts = GenerateOptions { jitter, grid: false };
        *out = Box::into_raw(Box::new(TacdssDataset {
            inner: generate(seed, n, opts)?,
        }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tacdss_dataset_read_csv(path: *const c_char, out: *mut *mut TacdssDataset) -> TacdssStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(TacdssDataset {
            inner: Dataset::read_csv(path)?,
        }));
        Ok(())
    })
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tacdss_dataset_len(dataset: *const TacdssDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.len())
}

/// Copies sample `index` as fuel, intercept time, weapon, danger, score into `row[5]`.
///
/// # Safety
/// `dataset` must be a live handle and `row` point to 5 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tacdss_dataset_sample(dataset: *const TacdssDataset, index: usize, row: *mut f64) -> TacdssStatus {
    guard(|| {
        let d = dataset.as_ref().ok_or(Fail::Null("dataset"))?;
        if row.is_null() {
            return Err(Fail::Null("row"));
        }
        let s = d
            .inner
            .samples
            .get(index)
            .ok_or_else(|| Fail::Invalid(format!("index {index} out of bounds for {} samples", d.inner.len())))?;
        ptr::copy_nonoverlapping(s.row().as_ptr(), row, 5);
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tacdss_dataset_write_csv(dataset: *const TacdssDataset, path: *const c_char) -> TacdssStatus {
    guard(|| {
        let d = dataset.as_ref().ok_or(Fail::Null("dataset"))?;
        d.inner.write_csv(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tacdss_dataset_free(dataset: *mut TacdssDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Trains `kind` ("anfis", "anfis-bp", "mamdani-gd", "mamdani-ga", "mlp", "cart").
///
/// With `train_fraction` in (0,1) the rest of the data is held out and its
/// normalised RMSE written to `test_rmse` (NaN otherwise). `config_json` may
/// be NULL for defaults; `test_rmse` may be NULL.
///
/// # Safety
/// Pointers must be valid as described; `out` receives a new model handle.
#[no_mangle]
pub unsafe extern "C" fn tacdss_train(
    kind: *const c_char,
    dataset: *const TacdssDataset,
    train_fraction: f64,
    seed: u64,
    config_json: *const c_char,
    out: *mut *mut TacdssModel,
    test_rmse: *mut f64,
) -> TacdssStatus {
    guard(|| {
        let kind: ModelKind = str_arg(kind, "kind")?.parse()?;
        let d = dataset.as_ref().ok_or(Fail::Null("dataset"))?;
        let out = out_arg(out, "out")?;
        let config: TrainConfig = if config_json.is_null() {
            TrainConfig::default()
        } else {
            serde_json::from_str(str_arg(config_json, "config_json")?).map_err(Error::from)?
        };
        let (train, test) = if train_fraction > 0.0 && train_fraction < 1.0 {
            split(&d.inner, train_fraction, seed)?
        } else if train_fraction == 0.0 || train_fraction == 1.0 {
            (d.inner.clone(), Dataset::new(Vec::new(), d.inner.seed))
        } else {
            return Err(Fail::Invalid(format!("train fraction {train_fraction} not in [0,1]")));
        };
        let t = train_model(kind, &train, &test, &config, seed)?;
        if let Some(r) = test_rmse.as_mut() {
            *r = t.report.final_test_rmse;
        }
        *out = Box::into_raw(Box::new(TacdssModel { inner: t.file }));
        Ok(())
    })
}
