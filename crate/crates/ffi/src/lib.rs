//! C ABI over the rhythmsvm classifier.
//!
//! Every function returns an [`RsvmStatus`]; results come back through out
//! pointers. On failure, `rsvm_last_error_message` holds a description
//! that stays valid until the next call on the same thread. Records and
//! models are opaque handles released with their `_free` function.
//!
//! Label indices are 0 = SR, 1 = VT, 2 = VF.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rhythmsvm::ecoc::{decode, CodingMatrix, EcocModel, LossFn};
use rhythmsvm::ensemble::{ensemble_predict_row, Aggregation, EnsembleConfig};
use rhythmsvm::ingest::{load_record, AnnotatedRecord};
use rhythmsvm::represent::{magnitude_spectrum, psa_count, psm_count};
use rhythmsvm::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsvmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsvmAggregation {
    Mean = 0,
    Median = 1,
    Majority = 2,
    Max = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsvmLoss {
    Hinge = 0,
    Hamming = 1,
    Exponential = 2,
    Linear = 3,
}

/// Opaque annotated record.
pub struct RsvmRecord(AnnotatedRecord);

/// Opaque trained model.
pub struct RsvmModel(EcocModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(RsvmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => RsvmStatus::Io,
            Error::Parse { .. } | Error::Serde(_) | Error::FormatVersion { .. } => RsvmStatus::Parse,
            Error::NonFinite(_) | Error::NotConverged { .. } => RsvmStatus::Numeric,
            _ => RsvmStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: String) -> Failure {
    Failure(RsvmStatus::InvalidArgument, msg)
}

fn null(what: &str) -> Failure {
    Failure(RsvmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RsvmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RsvmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RsvmStatus::Panic
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(RsvmStatus::InvalidArgument, "path is not UTF-8".into()))
}

/// Copies `values` into `buf` when it fits; always reports the length.
unsafe fn copy_out(values: &[f64], buf: *mut f64, cap: usize, written: *mut usize) -> Result<(), Failure> {
    *out(written, "written")? = values.len();
    if values.len() > cap {
        return Err(Failure(
            RsvmStatus::BufferTooSmall,
            format!("need {} values, buffer holds {cap}", values.len()),
        ));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rsvm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Description of the last failure on this thread; empty after success.
#[no_mangle]
pub extern "C" fn rsvm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a record and its `.ann` sidecar.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_record` writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_record_load(path: *const c_char, out_record: *mut *mut RsvmRecord) -> RsvmStatus {
    guard(|| {
        let slot = out(out_record, "out_record")?;
        *slot = ptr::null_mut();
        let record = load_record(path_arg(path)?)?;
        *slot = Box::into_raw(Box::new(RsvmRecord(record)));
        Ok(())
    })
}

/// # Safety
/// `record` must come from `rsvm_record_load` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rsvm_record_free(record: *mut RsvmRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// # Safety
/// `record` must be a live handle and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_record_len(record: *const RsvmRecord, out_len: *mut usize) -> RsvmStatus {
    guard(|| {
        let r = record.as_ref().ok_or_else(|| null("record"))?;
        *out(out_len, "out_len")? = r.0.samples.len();
        Ok(())
    })
}

/// # Safety
/// `record` must be a live handle and `out_fs` writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_record_fs(record: *const RsvmRecord, out_fs: *mut u32) -> RsvmStatus {
    guard(|| {
        let r = record.as_ref().ok_or_else(|| null("record"))?;
        *out(out_fs, "out_fs")? = r.0.fs;
        Ok(())
    })
}

/// Copies the samples into `buf`. `written` receives the sample count even
/// when the buffer is too small.
///
/// # Safety
/// `buf` must hold `cap` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_record_samples(
    record: *const RsvmRecord,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> RsvmStatus {
    guard(|| {
        let r = record.as_ref().ok_or_else(|| null("record"))?;
        copy_out(&r.0.samples, buf, cap, written)
    })
}

/// Loads a model written by `rhythmsvm run` (`model.json`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_model` writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_model_load(path: *const c_char, out_model: *mut *mut RsvmModel) -> RsvmStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        *slot = ptr::null_mut();
        let model = EcocModel::load(path_arg(path)?)?;
        *slot = Box::into_raw(Box::new(RsvmModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `rsvm_model_load` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rsvm_model_free(model: *mut RsvmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Segment length in 100 Hz samples the model expects.
///
/// # Safety
/// `model` must be a live handle and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_model_segment_len(model: *const RsvmModel, out_len: *mut usize) -> RsvmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *out(out_len, "out_len")? = m.0.featurizer.segment_len;
        Ok(())
    })
}

/// Number of binary classifiers (decision values per segment).
///
/// # Safety
/// `model` must be a live handle and `out_n` writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_model_n_classifiers(model: *const RsvmModel, out_n: *mut usize) -> RsvmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *out(out_n, "out_n")? = m.0.classifiers.len();
        Ok(())
    })
}

/// Decision values of one preprocessed segment.
///
/// # Safety
/// `samples` must hold `len` doubles and `buf` `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn rsvm_model_decision_values(
    model: *const RsvmModel,
    samples: *const f64,
    len: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> RsvmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let values = m.0.segment_decision_values(slice(samples, len, "samples")?)?;
        copy_out(&values, buf, cap, written)
    })
}

/// Predicted class of one preprocessed segment. For three-way models this
/// is the label index; for binary tasks it is the group index (0 for the
/// first group, 1 for VF).
///
/// # Safety
/// `samples` must hold `len` doubles and `out_class` be writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_model_classify(
    model: *const RsvmModel,
    samples: *const f64,
    len: usize,
    out_class: *mut u32,
) -> RsvmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let x = m.0.featurizer.featurize(slice(samples, len, "samples")?)?;
        *out(out_class, "out_class")? = m.0.predict_row(&x)? as u32;
        Ok(())
    })
}

/// Classifies a window from shifted sub-segments of the model's segment
/// length. `segment_s` must match the model; `aggregation` is an
/// `RsvmAggregation` value.
///
/// # Safety
/// `window` must hold `len` doubles and `out_class` be writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_ensemble_classify(
    model: *const RsvmModel,
    window: *const f64,
    len: usize,
    window_s: f64,
    segment_s: f64,
    shift_s: f64,
    aggregation: u32,
    out_class: *mut u32,
) -> RsvmStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let aggregation = match aggregation {
            x if x == RsvmAggregation::Mean as u32 => Aggregation::Mean,
            x if x == RsvmAggregation::Median as u32 => Aggregation::Median,
            x if x == RsvmAggregation::Majority as u32 => Aggregation::Majority,
            x if x == RsvmAggregation::Max as u32 => Aggregation::Max,
            other => return Err(invalid(format!("unknown aggregation {other}"))),
        };
        let cfg = EnsembleConfig {
            window_s,
            segment_s,
            shift_s,
            aggregation,
        };
        let row = ensemble_predict_row(&m.0, slice(window, len, "window")?, &cfg)?;
        *out(out_class, "out_class")? = row as u32;
        Ok(())
    })
}

/// PSA grid occupancy η of a segment sampled at `fs`.
///
/// # Safety
/// `samples` must hold `len` doubles and `out_eta` be writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_psa_eta(samples: *const f64, len: usize, fs: u32, out_eta: *mut f64) -> RsvmStatus {
    guard(|| {
        let r = psa_count(slice(samples, len, "samples")?, fs)?;
        *out(out_eta, "out_eta")? = r.eta;
        Ok(())
    })
}

/// PSM grid occupancy η of a segment.
///
/// # Safety
/// `samples` must hold `len` doubles and `out_eta` be writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_psm_eta(samples: *const f64, len: usize, out_eta: *mut f64) -> RsvmStatus {
    guard(|| {
        let r = psm_count(slice(samples, len, "samples")?)?;
        *out(out_eta, "out_eta")? = r.eta;
        Ok(())
    })
}

/// Magnitude spectrum (`len / 2` bins) of an even-length segment.
///
/// # Safety
/// `samples` must hold `len` doubles and `buf` `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn rsvm_magnitude_spectrum(
    samples: *const f64,
    len: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> RsvmStatus {
    guard(|| {
        let spectrum = magnitude_spectrum(slice(samples, len, "samples")?)?;
        copy_out(&spectrum, buf, cap, written)
    })
}

/// Decodes six decision values with the standard SR/VT/VF code. `loss` is
/// an `RsvmLoss` value.
///
/// # Safety
/// `values` must hold `n` doubles and `out_label` be writable.
#[no_mangle]
pub unsafe extern "C" fn rsvm_decode(
    values: *const f64,
    n: usize,
    loss: u32,
    out_label: *mut u32,
) -> RsvmStatus {
    guard(|| {
        let loss = match loss {
            x if x == RsvmLoss::Hinge as u32 => LossFn::Hinge,
            x if x == RsvmLoss::Hamming as u32 => LossFn::Hamming,
            x if x == RsvmLoss::Exponential as u32 => LossFn::Exponential,
            x if x == RsvmLoss::Linear as u32 => LossFn::Linear,
            other => return Err(invalid(format!("unknown loss {other}"))),
        };
        let label = decode(slice(values, n, "values")?, &CodingMatrix::standard(), loss)?;
        *out(out_label, "out_label")? = label.index() as u32;
        Ok(())
    })
}
