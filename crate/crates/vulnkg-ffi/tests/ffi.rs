//! Drives the C ABI end to end from Rust: build a graph and a checkpoint on
//! disk with the library, then load and predict purely through the extern
//! functions.

use std::ffi::{CStr, CString};
use std::ptr;

use vulnkg::graph::save_graph;
use vulnkg::model::ModelConfig;
use vulnkg::synth;
use vulnkg::train::{save_checkpoint, train, Checkpoint, TrainConfig};

use vulnkg_ffi::*;

fn cstring(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = vkg_last_error_message();
    if p.is_null() {
        return String::new();
    }
    let msg = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { vkg_string_free(p) };
    msg
}

/// Writes a trained toy model + graph into a temp dir.
fn prepare_artifacts(dir: &std::path::Path) {
    let g = synth::memorization_toy();
    save_graph(&g, &dir.join("graph")).unwrap();

    let cfg = TrainConfig {
        learning_rate: 5e-3,
        negatives: 4,
        epochs: 5,
        batches_per_epoch: 4,
        batch_size: 8,
        seed: 9,
        augment_inverses: true,
        fusion_enabled: false,
        mask_target_edges: false,
    };
    let model_cfg = ModelConfig {
        dim: 8,
        rel_layers: 2,
        ent_layers: 2,
        fusion_hidden: 8,
        text_dim: 1536,
        fusion_enabled: false,
    };
    let outcome = train(&g, &[], model_cfg, &cfg, None).unwrap();
    let ckpt = Checkpoint::from_params("gnn", &outcome.params, &cfg, &g, cfg.epochs, &[]);
    save_checkpoint(&ckpt, &dir.join("model.ckpt")).unwrap();
}

#[test]
fn version_is_non_null() {
    let v = vkg_version();
    assert!(!v.is_null());
    let s = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
    assert!(!s.is_empty());
}

#[test]
fn load_predict_free_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    prepare_artifacts(dir.path());

    let mut graph: *mut VkgGraph = ptr::null_mut();
    let path = cstring(dir.path().join("graph").to_str().unwrap());
    let status = unsafe { vkg_graph_load(path.as_ptr(), &mut graph) };
    assert_eq!(status, VkgStatus::VkgOk, "{}", last_error());
    assert!(!graph.is_null());
    assert_eq!(unsafe { vkg_graph_entity_count(graph) }, 30);
    assert_eq!(unsafe { vkg_graph_triple_count(graph) }, 20);
    assert_eq!(unsafe { vkg_graph_relation_count(graph) }, 2);

    let stats = unsafe { vkg_graph_stats_json(graph) };
    assert!(!stats.is_null());
    let parsed: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(stats) }.to_str().unwrap()).unwrap();
    assert_eq!(parsed["entities"], 30);
    unsafe { vkg_string_free(stats) };

    let mut model: *mut VkgModel = ptr::null_mut();
    let ckpt_path = cstring(dir.path().join("model.ckpt").to_str().unwrap());
    let status = unsafe { vkg_model_load(ckpt_path.as_ptr(), graph, false, &mut model) };
    assert_eq!(status, VkgStatus::VkgOk, "{}", last_error());

    let anchor = cstring("a0");
    let relation = cstring("f");
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe {
        vkg_predict_json(model, anchor.as_ptr(), relation.as_ptr(), 5, false, &mut out)
    };
    assert_eq!(status, VkgStatus::VkgOk, "{}", last_error());
    let json = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { vkg_string_free(out) };
    let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["rank"], 1);
    assert!(rows[0]["label"].as_str().unwrap().starts_with('b'));

    unsafe {
        vkg_model_free(model);
        vkg_graph_free(graph);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut graph: *mut VkgGraph = ptr::null_mut();
    let bad = cstring("/no/such/graph/dir");
    let status = unsafe { vkg_graph_load(bad.as_ptr(), &mut graph) };
    assert_eq!(status, VkgStatus::VkgGraphError);
    assert!(!last_error().is_empty());

    let status = unsafe { vkg_graph_load(ptr::null(), &mut graph) };
    assert_eq!(status, VkgStatus::VkgNullArgument);

    // Wrong-graph checkpoint is refused unless forced.
    let dir = tempfile::tempdir().unwrap();
    prepare_artifacts(dir.path());
    let other = synth::planted_composition_graph(&synth::SynthConfig {
        heads: 6,
        mids: 3,
        tails: 6,
        ..synth::SynthConfig::default()
    });
    save_graph(&other, &dir.path().join("other")).unwrap();

    let mut gh: *mut VkgGraph = ptr::null_mut();
    let p = cstring(dir.path().join("other").to_str().unwrap());
    assert_eq!(unsafe { vkg_graph_load(p.as_ptr(), &mut gh) }, VkgStatus::VkgOk);
    let mut model: *mut VkgModel = ptr::null_mut();
    let ckpt = cstring(dir.path().join("model.ckpt").to_str().unwrap());
    let status = unsafe { vkg_model_load(ckpt.as_ptr(), gh, false, &mut model) };
    assert_eq!(status, VkgStatus::VkgCheckpointError);
    assert!(last_error().contains("graph"));
    let status = unsafe { vkg_model_load(ckpt.as_ptr(), gh, true, &mut model) };
    assert_eq!(status, VkgStatus::VkgOk, "{}", last_error());
    unsafe {
        vkg_model_free(model);
        vkg_graph_free(gh);
    }
}
