//! C ABI over the vulnerability-knowledge-graph library: load a saved graph
//! and a trained checkpoint behind opaque handles, then rank candidate links
//! for an anchor entity. Prediction results come back as a JSON string so
//! bindings stay allocation-simple; every fallible call returns a status
//! code and stores a message retrievable via `vkg_last_error_message`.
//!
//! Text fusion uses the deterministic local embedder; no call here touches
//! the network.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use vulnkg::eval::{predict_report, GnnPredictor};
use vulnkg::fusion::{EmbeddingCache, EmbeddingService, FusionContext};
use vulnkg::graph::{graph_stats, load_graph, KnowledgeGraph};
use vulnkg::model::ModelParams;
use vulnkg::train::load_checkpoint;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VkgStatus {
    VkgOk = 0,
    VkgNullArgument = 1,
    VkgInvalidUtf8 = 2,
    VkgGraphError = 3,
    VkgCheckpointError = 4,
    VkgPredictError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Opaque handle over a loaded knowledge graph.
pub struct VkgGraph {
    inner: KnowledgeGraph,
}

/// Opaque handle over a loaded model bound to one graph (inverse-augmented,
/// with its fused text features prebuilt).
pub struct VkgModel {
    graph: KnowledgeGraph,
    params: ModelParams,
    fusion: Option<FusionContext>,
}

unsafe fn cstr_arg<'a>(p: *const c_char) -> Result<&'a str, VkgStatus> {
    if p.is_null() {
        set_error("null pointer argument".into());
        return Err(VkgStatus::VkgNullArgument);
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        VkgStatus::VkgInvalidUtf8
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn vkg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent error on this thread, or NULL. Free with
/// `vkg_string_free`.
#[no_mangle]
pub extern "C" fn vkg_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `vulnkg` function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn vkg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Loads graph files from a directory into an opaque handle.
///
/// # Safety
/// `dir` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn vkg_graph_load(dir: *const c_char, out: *mut *mut VkgGraph) -> VkgStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return VkgStatus::VkgNullArgument;
    }
    let dir = match unsafe { cstr_arg(dir) } {
        Ok(s) => s,
        Err(code) => return code,
    };
    match load_graph(Path::new(dir)) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(VkgGraph { inner })) };
            VkgStatus::VkgOk
        }
        Err(e) => {
            set_error(e.to_string());
            VkgStatus::VkgGraphError
        }
    }
}

/// Frees a graph handle.
///
/// # Safety
/// `g` must be a handle from `vkg_graph_load`, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn vkg_graph_free(g: *mut VkgGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Entity count of a loaded graph (0 for NULL).
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn vkg_graph_entity_count(g: *const VkgGraph) -> u64 {
    unsafe { g.as_ref() }.map_or(0, |g| g.inner.entity_count() as u64)
}

/// Triple count of a loaded graph (0 for NULL).
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn vkg_graph_triple_count(g: *const VkgGraph) -> u64 {
    unsafe { g.as_ref() }.map_or(0, |g| g.inner.triple_count() as u64)
}

/// Relation-type count of a loaded graph (0 for NULL).
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn vkg_graph_relation_count(g: *const VkgGraph) -> u64 {
    unsafe { g.as_ref() }.map_or(0, |g| g.inner.relation_count() as u64)
}

/// Graph statistics as a JSON string, or NULL for a NULL handle. Free with
/// `vkg_string_free`.
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn vkg_graph_stats_json(g: *const VkgGraph) -> *mut c_char {
    let Some(g) = (unsafe { g.as_ref() }) else {
        return ptr::null_mut();
    };
    let stats = graph_stats(&g.inner);
    let per_kind: serde_json::Map<String, serde_json::Value> = stats
        .entities_per_kind
        .iter()
        .map(|(k, v)| (k.name().to_string(), serde_json::json!(v)))
        .collect();
    let json = serde_json::json!({
        "entities": stats.total_entities,
        "triples": stats.total_triples,
        "relation_types": stats.relation_types,
        "entities_per_kind": per_kind,
    });
    CString::new(json.to_string()).map_or(ptr::null_mut(), CString::into_raw)
}

/// Loads a checkpoint against a graph. The model handle owns an
/// inverse-augmented copy of the graph plus the fused text features, so the
/// graph handle may be freed afterwards. `force` skips the
/// trained-against-this-graph checksum guard.
///
/// # Safety
/// `path` must be a valid NUL-terminated string, `graph` a live handle, and
/// `out` a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn vkg_model_load(
    path: *const c_char,
    graph: *const VkgGraph,
    force: bool,
    out: *mut *mut VkgModel,
) -> VkgStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return VkgStatus::VkgNullArgument;
    }
    let Some(graph) = (unsafe { graph.as_ref() }) else {
        set_error("null graph handle".into());
        return VkgStatus::VkgNullArgument;
    };
    let path = match unsafe { cstr_arg(path) } {
        Ok(s) => s,
        Err(code) => return code,
    };

    let ckpt = match load_checkpoint(Path::new(path), Some(&graph.inner), force) {
        Ok(c) => c,
        Err(e) => {
            set_error(e.to_string());
            return VkgStatus::VkgCheckpointError;
        }
    };
    let params = match ckpt.to_params() {
        Ok(p) => p,
        Err(e) => {
            set_error(e.to_string());
            return VkgStatus::VkgCheckpointError;
        }
    };
    let ranking_graph = if ckpt.train_config.augment_inverses {
        match graph.inner.augment_inverses() {
            Ok(g) => g,
            Err(e) => {
                set_error(e.to_string());
                return VkgStatus::VkgGraphError;
            }
        }
    } else {
        graph.inner.clone()
    };
    let fusion = if ckpt.model_config.fusion_enabled {
        let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
        match FusionContext::build(&ranking_graph, &mut service) {
            Ok(f) => Some(f),
            Err(e) => {
                set_error(e.to_string());
                return VkgStatus::VkgCheckpointError;
            }
        }
    } else {
        None
    };

    let handle = VkgModel {
        graph: ranking_graph,
        params,
        fusion,
    };
    unsafe { *out = Box::into_raw(Box::new(handle)) };
    VkgStatus::VkgOk
}

/// Frees a model handle.
///
/// # Safety
/// `m` must be a handle from `vkg_model_load`, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn vkg_model_free(m: *mut VkgModel) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Ranks candidates linked to `anchor` under `relation` and writes a JSON
/// array `[{"rank":1,"label":"...","score":0.9}, ...]` to `out_json`.
/// Free the string with `vkg_string_free`.
///
/// # Safety
/// `model` must be a live handle; `anchor`/`relation` valid NUL-terminated
/// strings; `out_json` a valid pointer to receive the string.
#[no_mangle]
pub unsafe extern "C" fn vkg_predict_json(
    model: *const VkgModel,
    anchor: *const c_char,
    relation: *const c_char,
    top_n: u32,
    exclude_known: bool,
    out_json: *mut *mut c_char,
) -> VkgStatus {
    if out_json.is_null() {
        set_error("null output pointer".into());
        return VkgStatus::VkgNullArgument;
    }
    let Some(model) = (unsafe { model.as_ref() }) else {
        set_error("null model handle".into());
        return VkgStatus::VkgNullArgument;
    };
    let anchor = match unsafe { cstr_arg(anchor) } {
        Ok(s) => s,
        Err(code) => return code,
    };
    let relation = match unsafe { cstr_arg(relation) } {
        Ok(s) => s,
        Err(code) => return code,
    };

    let predictor = GnnPredictor::new(&model.params, &model.graph, model.fusion.clone());
    match predict_report(&predictor, anchor, relation, top_n as usize, exclude_known) {
        Ok(rows) => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "rank": r.rank,
                        "label": r.label,
                        "score": r.score,
                    })
                })
                .collect();
            let json = serde_json::Value::Array(items).to_string();
            match CString::new(json) {
                Ok(c) => {
                    unsafe { *out_json = c.into_raw() };
                    VkgStatus::VkgOk
                }
                Err(_) => {
                    set_error("prediction contained an interior NUL".into());
                    VkgStatus::VkgPredictError
                }
            }
        }
        Err(e) => {
            set_error(e.to_string());
            VkgStatus::VkgPredictError
        }
    }
}
