#ifndef VULNKG_H
#define VULNKG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum VkgStatus {
  VkgOk = 0,
  VkgNullArgument = 1,
  VkgInvalidUtf8 = 2,
  VkgGraphError = 3,
  VkgCheckpointError = 4,
  VkgPredictError = 5,
} VkgStatus;

/**
 * Opaque handle over a loaded knowledge graph.
 */
typedef struct VkgGraph VkgGraph;

/**
 * Opaque handle over a loaded model bound to one graph (inverse-augmented,
 * with its fused text features prebuilt).
 */
typedef struct VkgModel VkgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *vkg_version(void);

/**
 * Message for the most recent error on this thread, or NULL. Free with
 * `vkg_string_free`.
 */
char *vkg_last_error_message(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a `vulnkg` function and not freed before.
 */
void vkg_string_free(char *s);

/**
 * Loads graph files from a directory into an opaque handle.
 *
 * # Safety
 * `dir` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
enum VkgStatus vkg_graph_load(const char *dir, struct VkgGraph **out);

/**
 * Frees a graph handle.
 *
 * # Safety
 * `g` must be a handle from `vkg_graph_load`, freed at most once.
 */
void vkg_graph_free(struct VkgGraph *g);

/**
 * Entity count of a loaded graph (0 for NULL).
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
uint64_t vkg_graph_entity_count(const struct VkgGraph *g);

/**
 * Triple count of a loaded graph (0 for NULL).
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
uint64_t vkg_graph_triple_count(const struct VkgGraph *g);

/**
 * Relation-type count of a loaded graph (0 for NULL).
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
uint64_t vkg_graph_relation_count(const struct VkgGraph *g);

/**
 * Graph statistics as a JSON string, or NULL for a NULL handle. Free with
 * `vkg_string_free`.
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
char *vkg_graph_stats_json(const struct VkgGraph *g);

/**
 * Loads a checkpoint against a graph. The model handle owns an
 * inverse-augmented copy of the graph plus the fused text features, so the
 * graph handle may be freed afterwards. `force` skips the
 * trained-against-this-graph checksum guard.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string, `graph` a live handle, and
 * `out` a valid pointer to receive the handle.
 */
enum VkgStatus vkg_model_load(const char *path,
                              const struct VkgGraph *graph,
                              bool force,
                              struct VkgModel **out);

/**
 * Frees a model handle.
 *
 * # Safety
 * `m` must be a handle from `vkg_model_load`, freed at most once.
 */
void vkg_model_free(struct VkgModel *m);

/**
 * Ranks candidates linked to `anchor` under `relation` and writes a JSON
 * array `[{"rank":1,"label":"...","score":0.9}, ...]` to `out_json`.
 * Free the string with `vkg_string_free`.
 *
 * # Safety
 * `model` must be a live handle; `anchor`/`relation` valid NUL-terminated
 * strings; `out_json` a valid pointer to receive the string.
 */
enum VkgStatus vkg_predict_json(const struct VkgModel *model,
                                const char *anchor,
                                const char *relation,
                                uint32_t top_n,
                                bool exclude_known,
                                char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VULNKG_H */
