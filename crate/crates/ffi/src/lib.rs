//! C ABI over `entailkit`.
//!
//! Objects cross the boundary as opaque pointers created by `ek_*_load` /
//! `ek_*_new` and released by the matching `ek_*_free`. Every fallible call
//! returns an [`EkStatus`]; on failure `ek_last_error()` holds a message for
//! the calling thread until its next failing call.
//!
//! Strings are NUL-terminated UTF-8. Output buffers are caller-owned.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use entailkit::embedstore::{load_embeddings, EmbeddingFormat, EmbeddingStore};
use entailkit::features::{assemble, FeatureSet, Stores};
use entailkit::learners::{load_model, SavedModel};
use entailkit::semrep::{represent, Strategy};
use entailkit::textprep::{preprocess, PrepConfig};
use entailkit::{EntailmentLabel, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Dimension = 5,
    Model = 6,
    InvalidArgument = 7,
    BufferTooSmall = 8,
    NotFound = 9,
    Panic = 10,
}

/// Values for the `format` argument of `ek_store_load`.
pub const EK_FORMAT_BINARY: i32 = 0;
pub const EK_FORMAT_TEXT: i32 = 1;

/// Values for the `strategy` argument of `ek_represent`.
pub const EK_STRATEGY_THRESHOLD: i32 = 0;
pub const EK_STRATEGY_MEAN: i32 = 1;

/// Values for the `feature_set` argument of `ek_pair_features`.
pub const EK_FEATURES_EMDV_THR: i32 = 0;
pub const EK_FEATURES_EMDV_PLAIN: i32 = 1;
pub const EK_FEATURES_HAND_THR: i32 = 2;
pub const EK_FEATURES_HAND_PLAIN: i32 = 3;

/// Labels written by `ek_model_predict`.
pub const EK_LABEL_NEUTRAL: i32 = 0;
pub const EK_LABEL_ENTAILMENT: i32 = 1;
pub const EK_LABEL_CONTRADICTION: i32 = 2;

/// Word-embedding store.
pub struct EkStore {
    inner: EmbeddingStore,
}

/// Stopword list and lemma table.
pub struct EkPrep {
    inner: PrepConfig,
}

/// Trained single model or ensemble.
pub struct EkModel {
    inner: SavedModel,
    dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(EkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = status_of(&e);
        Failure(status, e.to_string())
    }
}

fn status_of(e: &Error) -> EkStatus {
    match e {
        Error::Io { .. } => EkStatus::Io,
        Error::Dimension { .. } => EkStatus::Dimension,
        Error::Model(_) => EkStatus::Model,
        Error::Config(_) | Error::Data(_) | Error::Split(_) => EkStatus::InvalidArgument,
        Error::Stage { source, .. } => status_of(source),
        _ => EkStatus::Parse,
    }
}

fn fail(status: EkStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            EkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(EkStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EkStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(EkStatus::NullPointer, format!("{name} is NULL")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(EkStatus::NullPointer, format!("{name} is NULL")))
}

/// Copies `values` into `out[0..len]`, or reports the size needed.
unsafe fn copy_out(values: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if len < values.len() {
        return Err(fail(
            EkStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(fail(EkStatus::NullPointer, "output buffer is NULL"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Message of the last failing call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ek_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ek_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a word2vec file. `format` is `EK_FORMAT_BINARY` or `EK_FORMAT_TEXT`.
///
/// # Safety
/// `path` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ek_store_load(path: *const c_char, format: i32, out: *mut *mut EkStore) -> EkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let format = match format {
            EK_FORMAT_BINARY => EmbeddingFormat::Binary,
            EK_FORMAT_TEXT => EmbeddingFormat::Text,
            other => return Err(fail(EkStatus::InvalidArgument, format!("unknown format {other}"))),
        };
        let inner = load_embeddings(path, format, None)?;
        *out = Box::into_raw(Box::new(EkStore { inner }));
        Ok(())
    })
}

/// # Safety
/// `store` must come from `ek_store_load` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ek_store_free(store: *mut EkStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Vector dimension, or 0 for a NULL store.
///
/// # Safety
/// `store` must be NULL or a live store.
#[no_mangle]
pub unsafe extern "C" fn ek_store_dimension(store: *const EkStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.dimension())
}

/// Number of words, or 0 for a NULL store.
///
/// # Safety
/// `store` must be NULL or a live store.
#[no_mangle]
pub unsafe extern "C" fn ek_store_len(store: *const EkStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.len())
}

/// Copies the vector of `word` into `out` (length `len` >= dimension).
/// Returns `EK_STATUS_NOT_FOUND` for unknown words.
///
/// # Safety
/// Pointers must be valid; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ek_store_lookup(
    store: *const EkStore,
    word: *const c_char,
    out: *mut f64,
    len: usize,
) -> EkStatus {
    guard(|| {
        let store = ref_arg(store, "store")?;
        let word = str_arg(word, "word")?;
        let v = store
            .inner
            .lookup(word)
            .ok_or_else(|| fail(EkStatus::NotFound, format!("{word:?} is not in the store")))?;
        copy_out(v, out, len)
    })
}

/// Built-in stopwords and lemma table.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ek_prep_builtin(out: *mut *mut EkPrep) -> EkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(EkPrep {
            inner: PrepConfig::builtin(),
        }));
        Ok(())
    })
}

/// Loads preprocessing resources; a NULL path keeps the built-in resource.
///
/// # Safety
/// Paths must be NULL or valid C strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ek_prep_load(
    stopwords_path: *const c_char,
    lemmas_path: *const c_char,
    out: *mut *mut EkPrep,
) -> EkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let sw = opt_str_arg(stopwords_path, "stopwords_path")?;
        let lem = opt_str_arg(lemmas_path, "lemmas_path")?;
        let inner = PrepConfig::from_files(sw.map(Path::new), lem.map(Path::new))?;
        *out = Box::into_raw(Box::new(EkPrep { inner }));
        Ok(())
    })
}

/// # Safety
/// `prep` must come from `ek_prep_*` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ek_prep_free(prep: *mut EkPrep) {
    if !prep.is_null() {
        drop(Box::from_raw(prep));
    }
}

/// Preprocesses `sentence` and writes its sentence vector to `out`.
/// `in_vocab` (optional) receives the number of tokens found in the store.
///
/// # Safety
/// Pointers must be valid; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ek_represent(
    store: *const EkStore,
    prep: *const EkPrep,
    sentence: *const c_char,
    strategy: i32,
    out: *mut f64,
    len: usize,
    in_vocab: *mut usize,
) -> EkStatus {
    guard(|| {
        let store = ref_arg(store, "store")?;
        let prep = ref_arg(prep, "prep")?;
        let sentence = str_arg(sentence, "sentence")?;
        let strategy = match strategy {
            EK_STRATEGY_THRESHOLD => Strategy::Thresholded,
            EK_STRATEGY_MEAN => Strategy::PlainMean,
            other => return Err(fail(EkStatus::InvalidArgument, format!("unknown strategy {other}"))),
        };
        let tokens = preprocess(sentence, &prep.inner);
        let v = represent(&tokens, &store.inner, strategy);
        copy_out(&v.values, out, len)?;
        if let Some(n) = in_vocab.as_mut() {
            *n = v.in_vocab_count;
        }
        Ok(())
    })
}

/// Feature vector of one text/hypothesis pair. `sts_store` may be NULL to
/// reuse `word_store`. `out_len` receives the feature count, also when the
/// call fails with `EK_STATUS_BUFFER_TOO_SMALL`.
///
/// # Safety
/// Pointers must be valid; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ek_pair_features(
    word_store: *const EkStore,
    sts_store: *const EkStore,
    prep: *const EkPrep,
    text: *const c_char,
    hypothesis: *const c_char,
    feature_set: i32,
    out: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> EkStatus {
    guard(|| {
        let word = ref_arg(word_store, "word_store")?;
        let sts = sts_store.as_ref().unwrap_or(word);
        let prep = ref_arg(prep, "prep")?;
        let text = str_arg(text, "text")?;
        let hyp = str_arg(hypothesis, "hypothesis")?;
        let set = match feature_set {
            EK_FEATURES_EMDV_THR => FeatureSet::EmdvThr,
            EK_FEATURES_EMDV_PLAIN => FeatureSet::EmdvPlain,
            EK_FEATURES_HAND_THR => FeatureSet::HandThr,
            EK_FEATURES_HAND_PLAIN => FeatureSet::HandPlain,
            other => return Err(fail(EkStatus::InvalidArgument, format!("unknown feature set {other}"))),
        };
        let t = preprocess(text, &prep.inner);
        let h = preprocess(hyp, &prep.inner);
        let fv = assemble(&t, &h, set, Stores::new(&word.inner, &sts.inner))?;
        if let Some(n) = out_len.as_mut() {
            *n = fv.values.len();
        }
        copy_out(&fv.values, out, len)
    })
}

/// Loads a model file written by `entailkit experiment --save-model`.
///
/// # Safety
/// `path` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ek_model_load(path: *const c_char, out: *mut *mut EkModel) -> EkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let file = std::fs::File::open(path).map_err(|e| fail(EkStatus::Io, format!("{path}: {e}")))?;
        let inner = load_model(BufReader::new(file))?;
        let dim = match &inner {
            SavedModel::Single(m) => m.dim,
            SavedModel::Ensemble(e) => e.members().first().map_or(0, |m| m.dim),
        };
        *out = Box::into_raw(Box::new(EkModel { inner, dim }));
        Ok(())
    })
}

/// Number of features the model expects, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live model.
#[no_mangle]
pub unsafe extern "C" fn ek_model_dimension(model: *const EkModel) -> usize {
    model.as_ref().map_or(0, |m| m.dim)
}

/// Predicts one row; `label` receives one of the `EK_LABEL_*` values.
///
/// # Safety
/// `features` must point to `len` doubles; `label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ek_model_predict(
    model: *const EkModel,
    features: *const f64,
    len: usize,
    label: *mut i32,
) -> EkStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let label = out_arg(label, "label")?;
        if features.is_null() {
            return Err(fail(EkStatus::NullPointer, "features is NULL"));
        }
        let x = std::slice::from_raw_parts(features, len);
        let predicted = match &model.inner {
            SavedModel::Single(m) => m.predict(x)?,
            SavedModel::Ensemble(e) => e.predict(x)?,
        };
        *label = match predicted {
            EntailmentLabel::Neutral => EK_LABEL_NEUTRAL,
            EntailmentLabel::Entailment => EK_LABEL_ENTAILMENT,
            EntailmentLabel::Contradiction => EK_LABEL_CONTRADICTION,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must come from `ek_model_load` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ek_model_free(model: *mut EkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
