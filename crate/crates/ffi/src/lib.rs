//! C ABI over the lexbias core.
//!
//! Every fallible function returns a [`LexbiasStatus`]. On failure the
//! calling thread's last error message is set and can be read with
//! [`lexbias_last_error`]. Strings returned through out-parameters are owned
//! by the caller and must be released with [`lexbias_string_free`]. Handles
//! are opaque and released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lexbias::annotate::{parse_label, LabelPhrases, ParsedLabel};
use lexbias::baseline::TrainedModel;
use lexbias::metrics::{mcc, mcnemar_counts, ConfusionCounts};
use lexbias::prompting::{load_examples, render_prompt, ExamplePool, HashingEmbedder, PromptSettings};
use lexbias::BiasLabel;

pub const LEXBIAS_LABEL_NOT_BIASED: i32 = 0;
pub const LEXBIAS_LABEL_BIASED: i32 = 1;
pub const LEXBIAS_LABEL_INCONCLUSIVE: i32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexbiasStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Format = 5,
    Domain = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LexbiasStatus, String);

impl From<lexbias::Error> for Failure {
    fn from(e: lexbias::Error) -> Self {
        let status = match e {
            lexbias::Error::Io { .. } => LexbiasStatus::Io,
            lexbias::Error::Format { .. } | lexbias::Error::Config(_) => LexbiasStatus::Format,
            _ => LexbiasStatus::Domain,
        };
        Failure(status, format!("module={} kind={} message={}", e.module(), e.kind(), e))
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LexbiasStatus::InvalidArgument, msg.into())
}

/// Runs `body`, converting errors and panics into a status and last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LexbiasStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LexbiasStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LexbiasStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(LexbiasStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LexbiasStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(LexbiasStatus::NullArgument, format!("{name} is null")))
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("result contains an interior nul byte"))
}

fn label_code(l: BiasLabel) -> i32 {
    match l {
        BiasLabel::Biased => LEXBIAS_LABEL_BIASED,
        BiasLabel::NotBiased => LEXBIAS_LABEL_NOT_BIASED,
    }
}

/// Last error message on this thread, or null. Valid until the next call
/// into this library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn lexbias_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn lexbias_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer previously returned through an out-parameter
/// of this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lexbias_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Matthews correlation of a confusion matrix with Biased as the positive class.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lexbias_mcc(tp: u64, tn: u64, fp: u64, fn_: u64, out: *mut f64) -> LexbiasStatus {
    guard(|| {
        *out_arg(out, "out")? = mcc(&ConfusionCounts { tp, tn, fp, fn_ });
        Ok(())
    })
}

/// McNemar test from the two discordant counts.
///
/// # Safety
/// `statistic` and `p_value` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lexbias_mcnemar(b: u64, c: u64, statistic: *mut f64, p_value: *mut f64) -> LexbiasStatus {
    guard(|| {
        let stat = out_arg(statistic, "statistic")?;
        let p = out_arg(p_value, "p_value")?;
        let r = mcnemar_counts(b, c).map_err(lexbias::Error::from)?;
        *stat = r.statistic;
        *p = r.p_value;
        Ok(())
    })
}

/// Parse a model response with the default phrases into one of the
/// `LEXBIAS_LABEL_*` codes.
///
/// # Safety
/// `response` must be null or a nul-terminated string; `label` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lexbias_parse_label(response: *const c_char, label: *mut i32) -> LexbiasStatus {
    guard(|| {
        let raw = str_arg(response, "response")?;
        let out = out_arg(label, "label")?;
        *out = match parse_label(raw, &LabelPhrases::default()) {
            ParsedLabel::Biased => LEXBIAS_LABEL_BIASED,
            ParsedLabel::NotBiased => LEXBIAS_LABEL_NOT_BIASED,
            ParsedLabel::Inconclusive => LEXBIAS_LABEL_INCONCLUSIVE,
        };
        Ok(())
    })
}

/// Demonstration pool with hashing embeddings, used to render prompts.
pub struct LexbiasPool {
    pool: ExamplePool,
    embedder: HashingEmbedder,
}

/// Load a `text,label,explanation` CSV and embed it.
///
/// # Safety
/// `path` must be null or a nul-terminated string; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lexbias_pool_load(
    path: *const c_char,
    embed_dim: u32,
    embed_seed: u64,
    out: *mut *mut LexbiasPool,
) -> LexbiasStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        if embed_dim == 0 {
            return Err(invalid("embed_dim must be positive"));
        }
        let embedder = HashingEmbedder {
            dim: embed_dim as usize,
            seed: embed_seed,
        };
        let examples = load_examples(Path::new(path))?;
        let pool = ExamplePool::new(examples, &embedder).map_err(lexbias::Error::from)?;
        *out = Box::into_raw(Box::new(LexbiasPool { pool, embedder }));
        Ok(())
    })
}

/// Number of examples in the pool, 0 for null.
///
/// # Safety
/// `pool` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lexbias_pool_len(pool: *const LexbiasPool) -> usize {
    pool.as_ref().map_or(0, |p| p.pool.len())
}

/// Render the prompt for `target` under `settings` (for example `8-shot-exp`),
/// retrieving the nearest demonstrations. The result is freed with
/// [`lexbias_string_free`].
///
/// # Safety
/// `pool` must be null or a live handle; string arguments must be null or
/// nul-terminated; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lexbias_pool_render(
    pool: *const LexbiasPool,
    target: *const c_char,
    settings: *const c_char,
    out: *mut *mut c_char,
) -> LexbiasStatus {
    guard(|| {
        let p = pool
            .as_ref()
            .ok_or_else(|| Failure(LexbiasStatus::NullArgument, "pool is null".into()))?;
        let target = str_arg(target, "target")?;
        let settings: PromptSettings = str_arg(settings, "settings")?
            .parse()
            .map_err(|e: lexbias::prompting::PromptError| invalid(e.to_string()))?;
        let out = out_arg(out, "out")?;
        let ids = p
            .pool
            .retrieve(target, settings.shots, &p.embedder)
            .map_err(lexbias::Error::from)?;
        let examples: Vec<_> = ids.iter().map(|&i| p.pool.examples[i].clone()).collect();
        let prompt = render_prompt(target, &examples, settings).map_err(lexbias::Error::from)?;
        *out = to_c_string(prompt.text)?;
        Ok(())
    })
}

/// # Safety
/// `pool` must be null or a handle from [`lexbias_pool_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lexbias_pool_free(pool: *mut LexbiasPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

/// Trained baseline classifier.
pub struct LexbiasModel {
    model: TrainedModel,
}

/// Load a model file written by `baseline train`.
///
/// # Safety
/// `path` must be null or nul-terminated; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lexbias_model_load(path: *const c_char, out: *mut *mut LexbiasModel) -> LexbiasStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let model = TrainedModel::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(LexbiasModel { model }));
        Ok(())
    })
}

/// Classify one sentence. `probability` receives P(Biased) and may be null.
///
/// # Safety
/// `model` must be null or a live handle; `text` must be null or
/// nul-terminated; `label` must be null or valid for writes; `probability`
/// must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lexbias_model_predict(
    model: *const LexbiasModel,
    text: *const c_char,
    label: *mut i32,
    probability: *mut f64,
) -> LexbiasStatus {
    guard(|| {
        let m = model
            .as_ref()
            .ok_or_else(|| Failure(LexbiasStatus::NullArgument, "model is null".into()))?;
        let text = str_arg(text, "text")?;
        let out = out_arg(label, "label")?;
        let (p, l) = m.model.predict(text);
        *out = label_code(l);
        if let Some(prob) = probability.as_mut() {
            *prob = p;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`lexbias_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lexbias_model_free(model: *mut LexbiasModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
