/* C interface to the pinch graph-clustering library. */

#ifndef PINCH_H
#define PINCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call. Anything other than `Ok` leaves a message for
 * `pinch_last_error_message`.
 */
typedef enum PinchStatus {
  /**
   * The call succeeded.
   */
  PINCH_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PINCH_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  PINCH_STATUS_INVALID_UTF8 = 2,
  /**
   * A file could not be read or written.
   */
  PINCH_STATUS_IO = 3,
  /**
   * A file was readable but malformed.
   */
  PINCH_STATUS_PARSE_FAILED = 4,
  /**
   * An argument value was rejected (unknown vertex, duplicate edge, ...).
   */
  PINCH_STATUS_INVALID_INPUT = 5,
  /**
   * A configuration parameter was out of its legal range.
   */
  PINCH_STATUS_INVALID_CONFIG = 6,
  /**
   * Arguments were individually fine but inconsistent with each other.
   */
  PINCH_STATUS_DOMAIN_VIOLATION = 7,
  /**
   * The input exceeds what the fixed-width arithmetic can represent.
   */
  PINCH_STATUS_CAPACITY_EXCEEDED = 8,
  /**
   * An operation needing both label classes saw only one.
   */
  PINCH_STATUS_SINGLE_CLASS = 9,
  /**
   * A score could not be computed from the given predictions.
   */
  PINCH_STATUS_EVALUATION_FAILED = 10,
  /**
   * A panic was caught at the boundary; state may be stale but memory is
   * intact.
   */
  PINCH_STATUS_PANICKED = 11,
} PinchStatus;

/**
 * An immutable weighted graph, opaque to C. Owns the vertex-name strings
 * handed out by `pinch_graph_vertex_name`.
 */
typedef struct PinchGraph PinchGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static NUL-terminated string.
 */
const char *pinch_version(void);

/**
 * The message recorded by the current thread's most recent failing call,
 * or null if none has failed yet. The pointer stays valid until the next
 * failing call on the same thread.
 */
const char *pinch_last_error_message(void);

/**
 * Loads a graph from `path`, writing the new handle to `*out`. The format
 * is recognized from the content: a `%%MatrixMarket` banner selects the
 * coordinate Matrix Market reader, anything else the tab-separated edge
 * list `u<TAB>v<TAB>weight`. Matrix entries with absolute value below
 * `threshold` are dropped; pass 0.0 to keep every entry.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid location to
 * store a pointer. On success the caller owns the handle and must release
 * it with `pinch_graph_free`; on failure `*out` is untouched.
 */
enum PinchStatus pinch_graph_from_file(const char *path, double threshold, struct PinchGraph **out);

/**
 * Builds a graph from parallel edge arrays: edge `k` joins the vertices
 * named `sources[k]` and `targets[k]` with weight `weights[k]`. Vertices
 * are numbered 0.. in first-mention order. Weights must be nonnegative,
 * finite, and carry at most nine decimal digits; zero-weight edges record
 * their endpoints but no edge. Self-loops and repeated vertex pairs are
 * rejected.
 *
 * # Safety
 * The three arrays must hold `edge_count` readable elements each, every
 * name must be a NUL-terminated string, and `out` must be a valid location
 * to store a pointer. On success the caller owns the handle and must
 * release it with `pinch_graph_free`; on failure `*out` is untouched.
 */
enum PinchStatus pinch_graph_from_edges(const char *const *sources,
                                        const char *const *targets,
                                        const double *weights,
                                        size_t edge_count,
                                        struct PinchGraph **out);

/**
 * Releases a graph handle. Null is ignored.
 *
 * # Safety
 * `graph` must be null or a handle from a `pinch_graph_*` constructor that
 * has not been freed yet; it is invalid afterwards.
 */
void pinch_graph_free(struct PinchGraph *graph);

/**
 * The number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t pinch_graph_vertex_count(const struct PinchGraph *graph);

/**
 * The number of positive-weight edges, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t pinch_graph_edge_count(const struct PinchGraph *graph);

/**
 * The name of vertex `vertex`, or null if the handle is null or the index
 * out of range. The string is borrowed from the graph and lives until
 * `pinch_graph_free`.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
const char *pinch_graph_vertex_name(const struct PinchGraph *graph, uint32_t vertex);

/**
 * Looks up a vertex by name, writing its index to `*out`.
 *
 * # Safety
 * `graph` must be a live handle, `name` a NUL-terminated string, and `out`
 * a valid location to store a `uint32_t`.
 */
enum PinchStatus pinch_graph_vertex_index(const struct PinchGraph *graph,
                                          const char *name,
                                          uint32_t *out);

/**
 * Clusters the graph deterministically under `seed` and writes each
 * vertex's cluster id to `out_clusters[vertex]`. Ids are dense, starting
 * at 0, and never straddle connected components.
 *
 * # Safety
 * `graph` must be a live handle and `out_clusters` must point to
 * `pinch_graph_vertex_count(graph)` writable `uint32_t` slots.
 */
enum PinchStatus pinch_cluster(const struct PinchGraph *graph,
                               uint64_t seed,
                               uint32_t *out_clusters);

/**
 * Predicts a probability of class one for every vertex from a partial
 * binary labeling, using `runs` bagged clustering passes that each keep a
 * `lambda` fraction of the unlabeled vertices. The labeling is given as
 * `labeled_count` parallel entries: vertex index and label (zero or
 * nonzero).
 *
 * `out_probabilities[v]` receives the prediction for every vertex;
 * labeled vertices echo their own label. If `out_support` is non-null,
 * `out_support[v]` receives the number of runs whose bag contained `v` —
 * zero marks a value not produced by propagation (a labeled vertex, or an
 * unlabeled vertex no bag sampled, which falls back to the majority
 * label).
 *
 * # Safety
 * `graph` must be a live handle; `labeled_vertices` and `labels` must hold
 * `labeled_count` readable elements each; `out_probabilities` must point
 * to `pinch_graph_vertex_count(graph)` writable doubles, and `out_support`
 * must be null or point to as many writable `uint32_t` slots.
 */
enum PinchStatus pinch_predict(const struct PinchGraph *graph,
                               const uint32_t *labeled_vertices,
                               const uint8_t *labels,
                               size_t labeled_count,
                               uint32_t runs,
                               double lambda,
                               uint64_t seed,
                               double *out_probabilities,
                               uint32_t *out_support);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PINCH_H */
