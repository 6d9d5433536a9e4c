//! C interface to the pinch graph-clustering library.
//!
//! The surface is a conventional handle-and-status API: a [`PinchGraph`] is
//! an opaque pointer created by `pinch_graph_from_file` or
//! `pinch_graph_from_edges` and released with `pinch_graph_free`; every
//! fallible call returns a [`PinchStatus`] and, on failure, leaves a
//! human-readable message readable through `pinch_last_error_message` (the
//! message is thread-local and valid until the same thread's next failing
//! call). Result buffers are allocated by the caller and sized to
//! `pinch_graph_vertex_count`, so no ownership crosses the boundary except
//! the graph handle itself.
//!
//! Panics never unwind across the boundary: every entry point catches them
//! and reports `PINCH_STATUS_PANICKED`.
//!
//! The matching header is generated into `include/pinch.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::slice;

use pinch::dataset::MatrixFormat;
use pinch::graph::GraphBuilder;
use pinch::predict::{bagged_predict, BagConfig, LabelAssignment};
use pinch::search::{cluster_graph, DEFAULT_CLUSTER_STARTS};
use pinch::{weight, Error, VertexId, WeightedGraph};

/// Outcome of a call. Anything other than `Ok` leaves a message for
/// `pinch_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinchStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A file could not be read or written.
    Io = 3,
    /// A file was readable but malformed.
    ParseFailed = 4,
    /// An argument value was rejected (unknown vertex, duplicate edge, ...).
    InvalidInput = 5,
    /// A configuration parameter was out of its legal range.
    InvalidConfig = 6,
    /// Arguments were individually fine but inconsistent with each other.
    DomainViolation = 7,
    /// The input exceeds what the fixed-width arithmetic can represent.
    CapacityExceeded = 8,
    /// An operation needing both label classes saw only one.
    SingleClass = 9,
    /// A score could not be computed from the given predictions.
    EvaluationFailed = 10,
    /// A panic was caught at the boundary; state may be stale but memory is
    /// intact.
    Panicked = 11,
}

/// An immutable weighted graph, opaque to C. Owns the vertex-name strings
/// handed out by `pinch_graph_vertex_name`.
pub struct PinchGraph {
    graph: WeightedGraph,
    names: Vec<CString>,
}

impl PinchGraph {
    fn wrap(graph: WeightedGraph) -> Result<Box<PinchGraph>, Failure> {
        let names = graph
            .ids()
            .iter()
            .map(|id| CString::new(id.as_str()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure {
                status: PinchStatus::InvalidInput,
                message: format!("vertex name contains a NUL byte: {e}"),
            })?;
        Ok(Box::new(PinchGraph { graph, names }))
    }
}

struct Failure {
    status: PinchStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match e {
            Error::Io { .. } => PinchStatus::Io,
            Error::Parse { .. } => PinchStatus::ParseFailed,
            Error::InvalidInput(_) => PinchStatus::InvalidInput,
            Error::InvalidConfig(_) => PinchStatus::InvalidConfig,
            Error::Domain(_) => PinchStatus::DomainViolation,
            Error::Capacity(_) => PinchStatus::CapacityExceeded,
            Error::SingleClass(_) => PinchStatus::SingleClass,
            Error::Evaluation(_) => PinchStatus::EvaluationFailed,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn record(message: &str) {
    let c = CString::new(message.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn panic_text(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic of unknown type".to_string()
    }
}

/// Runs `body`, translating failures and panics into a status plus a
/// recorded message.
fn run(body: impl FnOnce() -> Result<(), Failure>) -> PinchStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PinchStatus::Ok,
        Ok(Err(f)) => {
            record(&f.message);
            f.status
        }
        Err(payload) => {
            record(&panic_text(payload));
            PinchStatus::Panicked
        }
    }
}

fn null_argument(name: &str) -> Failure {
    Failure {
        status: PinchStatus::NullArgument,
        message: format!("argument `{name}` is null"),
    }
}

/// # Safety
/// `ptr` must be null or valid for reads for the lifetime of the call.
unsafe fn require<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: Non-null per the check; validity is the caller's contract.
    unsafe { ptr.as_ref() }.ok_or_else(|| null_argument(name))
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for the call.
unsafe fn require_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null_argument(name));
    }
    // SAFETY: Non-null and NUL-terminated per the caller's contract.
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|e| Failure {
        status: PinchStatus::InvalidUtf8,
        message: format!("argument `{name}` is not valid UTF-8: {e}"),
    })
}

/// # Safety
/// `ptr` must point to `len` readable elements, or `len` must be zero.
unsafe fn require_slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null_argument(name));
    }
    // SAFETY: Non-null with `len` readable elements per the caller's contract.
    Ok(unsafe { slice::from_raw_parts(ptr, len) })
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pinch_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The message recorded by the current thread's most recent failing call,
/// or null if none has failed yet. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn pinch_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Loads a graph from `path`, writing the new handle to `*out`. The format
/// is recognized from the content: a `%%MatrixMarket` banner selects the
/// coordinate Matrix Market reader, anything else the tab-separated edge
/// list `u<TAB>v<TAB>weight`. Matrix entries with absolute value below
/// `threshold` are dropped; pass 0.0 to keep every entry.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid location to
/// store a pointer. On success the caller owns the handle and must release
/// it with `pinch_graph_free`; on failure `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn pinch_graph_from_file(
    path: *const c_char,
    threshold: f64,
    out: *mut *mut PinchGraph,
) -> PinchStatus {
    run(|| {
        if out.is_null() {
            return Err(null_argument("out"));
        }
        // SAFETY: Caller contract for `path`.
        let path = Path::new(unsafe { require_str(path, "path")? });
        let format = MatrixFormat::sniff(path)?;
        let graph = pinch::dataset::load_graph(path, format, threshold)?;
        let handle = PinchGraph::wrap(graph)?;
        // SAFETY: `out` is non-null and valid per the caller's contract.
        unsafe { out.write(Box::into_raw(handle)) };
        Ok(())
    })
}

/// Builds a graph from parallel edge arrays: edge `k` joins the vertices
/// named `sources[k]` and `targets[k]` with weight `weights[k]`. Vertices
/// are numbered 0.. in first-mention order. Weights must be nonnegative,
/// finite, and carry at most nine decimal digits; zero-weight edges record
/// their endpoints but no edge. Self-loops and repeated vertex pairs are
/// rejected.
///
/// # Safety
/// The three arrays must hold `edge_count` readable elements each, every
/// name must be a NUL-terminated string, and `out` must be a valid location
/// to store a pointer. On success the caller owns the handle and must
/// release it with `pinch_graph_free`; on failure `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn pinch_graph_from_edges(
    sources: *const *const c_char,
    targets: *const *const c_char,
    weights: *const f64,
    edge_count: usize,
    out: *mut *mut PinchGraph,
) -> PinchStatus {
    run(|| {
        if out.is_null() {
            return Err(null_argument("out"));
        }
        // SAFETY: Caller contract for the three arrays.
        let sources = unsafe { require_slice(sources, edge_count, "sources")? };
        let targets = unsafe { require_slice(targets, edge_count, "targets")? };
        let weights = unsafe { require_slice(weights, edge_count, "weights")? };
        let mut builder = GraphBuilder::new();
        for k in 0..edge_count {
            // SAFETY: Each name is NUL-terminated per the caller's contract.
            let u = unsafe { require_str(sources[k], "sources[k]")? };
            let v = unsafe { require_str(targets[k], "targets[k]")? };
            let w = weight::from_f64(weights[k])?;
            if w.value() == 0.0 {
                builder.vertex(u);
                builder.vertex(v);
            } else {
                builder.add_edge(u, v, w)?;
            }
        }
        let handle = PinchGraph::wrap(builder.build()?)?;
        // SAFETY: `out` is non-null and valid per the caller's contract.
        unsafe { out.write(Box::into_raw(handle)) };
        Ok(())
    })
}

/// Releases a graph handle. Null is ignored.
///
/// # Safety
/// `graph` must be null or a handle from a `pinch_graph_*` constructor that
/// has not been freed yet; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pinch_graph_free(graph: *mut PinchGraph) {
    if !graph.is_null() {
        // SAFETY: The handle came from Box::into_raw and is freed only once.
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// The number of vertices, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_graph_vertex_count(graph: *const PinchGraph) -> usize {
    // SAFETY: Live per the caller's contract.
    unsafe { graph.as_ref() }.map_or(0, |g| g.graph.vertex_count())
}

/// The number of positive-weight edges, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_graph_edge_count(graph: *const PinchGraph) -> usize {
    // SAFETY: Live per the caller's contract.
    unsafe { graph.as_ref() }.map_or(0, |g| g.graph.edge_count())
}

/// The name of vertex `vertex`, or null if the handle is null or the index
/// out of range. The string is borrowed from the graph and lives until
/// `pinch_graph_free`.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_graph_vertex_name(
    graph: *const PinchGraph,
    vertex: u32,
) -> *const c_char {
    // SAFETY: Live per the caller's contract.
    unsafe { graph.as_ref() }
        .and_then(|g| g.names.get(vertex as usize))
        .map_or(std::ptr::null(), |c| c.as_ptr())
}

/// Looks up a vertex by name, writing its index to `*out`.
///
/// # Safety
/// `graph` must be a live handle, `name` a NUL-terminated string, and `out`
/// a valid location to store a `uint32_t`.
#[no_mangle]
pub unsafe extern "C" fn pinch_graph_vertex_index(
    graph: *const PinchGraph,
    name: *const c_char,
    out: *mut u32,
) -> PinchStatus {
    run(|| {
        // SAFETY: Caller contract for `graph` and `name`.
        let g = unsafe { require(graph, "graph")? };
        let name = unsafe { require_str(name, "name")? };
        if out.is_null() {
            return Err(null_argument("out"));
        }
        let v = g.graph.lookup(name).ok_or_else(|| Failure {
            status: PinchStatus::InvalidInput,
            message: format!("no vertex named {name:?}"),
        })?;
        // SAFETY: `out` is non-null and valid per the caller's contract.
        unsafe { out.write(v) };
        Ok(())
    })
}

/// Clusters the graph deterministically under `seed` and writes each
/// vertex's cluster id to `out_clusters[vertex]`. Ids are dense, starting
/// at 0, and never straddle connected components.
///
/// # Safety
/// `graph` must be a live handle and `out_clusters` must point to
/// `pinch_graph_vertex_count(graph)` writable `uint32_t` slots.
#[no_mangle]
pub unsafe extern "C" fn pinch_cluster(
    graph: *const PinchGraph,
    seed: u64,
    out_clusters: *mut u32,
) -> PinchStatus {
    run(|| {
        // SAFETY: Caller contract for `graph`.
        let g = unsafe { require(graph, "graph")? };
        let n = g.graph.vertex_count();
        if n > 0 && out_clusters.is_null() {
            return Err(null_argument("out_clusters"));
        }
        let clusters = cluster_graph(&g.graph, seed, DEFAULT_CLUSTER_STARTS)?;
        // SAFETY: `out_clusters` has `n` writable slots per the contract.
        unsafe { slice::from_raw_parts_mut(out_clusters, n) }.copy_from_slice(&clusters);
        Ok(())
    })
}

/// Predicts a probability of class one for every vertex from a partial
/// binary labeling, using `runs` bagged clustering passes that each keep a
/// `lambda` fraction of the unlabeled vertices. The labeling is given as
/// `labeled_count` parallel entries: vertex index and label (zero or
/// nonzero).
///
/// `out_probabilities[v]` receives the prediction for every vertex;
/// labeled vertices echo their own label. If `out_support` is non-null,
/// `out_support[v]` receives the number of runs whose bag contained `v` —
/// zero marks a value not produced by propagation (a labeled vertex, or an
/// unlabeled vertex no bag sampled, which falls back to the majority
/// label).
///
/// # Safety
/// `graph` must be a live handle; `labeled_vertices` and `labels` must hold
/// `labeled_count` readable elements each; `out_probabilities` must point
/// to `pinch_graph_vertex_count(graph)` writable doubles, and `out_support`
/// must be null or point to as many writable `uint32_t` slots.
#[no_mangle]
pub unsafe extern "C" fn pinch_predict(
    graph: *const PinchGraph,
    labeled_vertices: *const u32,
    labels: *const u8,
    labeled_count: usize,
    runs: u32,
    lambda: f64,
    seed: u64,
    out_probabilities: *mut f64,
    out_support: *mut u32,
) -> PinchStatus {
    run(|| {
        // SAFETY: Caller contract for `graph` and the two input arrays.
        let g = unsafe { require(graph, "graph")? };
        let ids = unsafe { require_slice(labeled_vertices, labeled_count, "labeled_vertices")? };
        let values = unsafe { require_slice(labels, labeled_count, "labels")? };
        let n = g.graph.vertex_count();
        if n > 0 && out_probabilities.is_null() {
            return Err(null_argument("out_probabilities"));
        }

        let assignment = LabelAssignment::new(
            &g.graph,
            ids.iter().zip(values).map(|(&v, &y)| (v, y != 0)),
        )?;
        let cfg = BagConfig::new(runs, lambda, seed)?;
        let preds = bagged_predict(&g.graph, &assignment, &cfg)?;

        // SAFETY: The out buffers have `n` writable slots per the contract.
        let probs = unsafe { slice::from_raw_parts_mut(out_probabilities, n) };
        let mut support = if out_support.is_null() {
            None
        } else {
            Some(unsafe { slice::from_raw_parts_mut(out_support, n) })
        };
        for v in 0..n as VertexId {
            let (p, s) = match assignment.get(v) {
                Some(y) => (f64::from(y as u8), 0),
                None => {
                    let pred = preds.get(v).expect("prediction for every unlabeled vertex");
                    (pred.probability, pred.contributing_runs)
                }
            };
            probs[v as usize] = p;
            if let Some(ref mut out) = support {
                out[v as usize] = s;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_keep_their_contractual_values() {
        assert_eq!(PinchStatus::Ok as i32, 0);
        assert_eq!(PinchStatus::NullArgument as i32, 1);
        assert_eq!(PinchStatus::Panicked as i32, 11);
    }

    #[test]
    fn failures_map_to_distinct_statuses() {
        let io = Error::io("/nope", std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(Failure::from(io).status, PinchStatus::Io);
        let cfg = Error::InvalidConfig("bad".into());
        assert_eq!(Failure::from(cfg).status, PinchStatus::InvalidConfig);
    }

    #[test]
    fn recorded_messages_survive_interior_nul() {
        record("a\0b");
        let ptr = pinch_last_error_message();
        let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
        assert_eq!(text, "a\\0b");
    }
}
