/*
 * binpack: regular 2D/3D bin packing with height-map placement, classical
 * ordering baselines and a pointer-network ordering policy.
 *
 * C interface. All objects are opaque handles created and released through
 * this API. Every fallible call returns a bp_status; on failure a
 * human-readable message is available from bp_last_error() on the calling
 * thread until the next failing call.
 *
 * Object indices are 0-based everywhere.
 */
#ifndef BINPACK_BINPACK_H_
#define BINPACK_BINPACK_H_

#include <stddef.h>
#include <stdint.h>

#if defined(BINPACK_BUILDING)
#define BINPACK_API __attribute__((visibility("default")))
#else
#define BINPACK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bp_status {
  BP_OK = 0,
  BP_ERR_INVALID_ARGUMENT = 1, /* bad configuration or argument */
  BP_ERR_IO = 2,               /* file could not be opened/read/written */
  BP_ERR_PARSE = 3,            /* malformed dataset, result or checkpoint */
  BP_ERR_INSTANCE = 4,         /* object violates the half-box size rule */
  BP_ERR_CONTRACT = 5,         /* caller broke a precondition */
  BP_ERR_NUMERIC = 6,          /* non-finite loss or gradient in training */
  BP_ERR_INTERNAL = 7
} bp_status;

BINPACK_API const char* bp_last_error(void);
BINPACK_API const char* bp_status_name(bp_status status);
BINPACK_API const char* bp_version(void);

typedef struct bp_dataset bp_dataset;
typedef struct bp_results bp_results;
typedef struct bp_model bp_model;

/* ---- datasets ---------------------------------------------------------- */

typedef struct bp_gen_config {
  int rank; /* 2 or 3 */
  int objects;
  int dim_low;
  int dim_high;
  int box[3]; /* (L, H) or (L, W, H); box[2] unused in 2D */
  uint64_t seed;
} bp_gen_config;

/* Defaults: 2D n=40, dims 1..5, box 10x10; 3D n=70, dims 2..5, box 10^3. */
BINPACK_API void bp_gen_config_default(int rank, bp_gen_config* out);

/* Instance k uses a seed derived from (seed, k) and id "<seed>-<k>". */
BINPACK_API bp_status bp_dataset_generate(const bp_gen_config* cfg, int count,
                                          bp_dataset** out);
BINPACK_API bp_status bp_dataset_create(bp_dataset** out);
/* dims holds n * rank integers, object-major. */
BINPACK_API bp_status bp_dataset_add(bp_dataset* ds, const char* id, int rank,
                                     const int* box, const int* dims, size_t n);
/* Newline-delimited JSON records {"box","id","objects"}. */
BINPACK_API bp_status bp_dataset_read(const char* path, bp_dataset** out);
BINPACK_API bp_status bp_dataset_write(const bp_dataset* ds, const char* path);
BINPACK_API size_t bp_dataset_size(const bp_dataset* ds);
BINPACK_API bp_status bp_dataset_instance_shape(const bp_dataset* ds, size_t index,
                                                int* rank, size_t* objects);
/* Copies object dims (objects * rank ints) into dims_out. */
BINPACK_API bp_status bp_dataset_instance_dims(const bp_dataset* ds, size_t index,
                                               int* dims_out, size_t capacity);
BINPACK_API void bp_dataset_free(bp_dataset* ds);

/* ---- packing ----------------------------------------------------------- */

typedef enum bp_method {
  BP_METHOD_RANDOM = 0,
  BP_METHOD_BBOX = 1,
  BP_METHOD_BRKGA = 2,
  BP_METHOD_DRL = 3
} bp_method;

BINPACK_API bp_status bp_method_parse(const char* name, bp_method* out);
/* "random", "bbox", "brkga", "drl" */
BINPACK_API const char* bp_method_name(bp_method method);
/* "Random", "B-Box Seq", "BRKGA", "DRL" */
BINPACK_API const char* bp_method_label(bp_method method);

typedef struct bp_reward_config {
  double alpha;
  double beta;
  double scale;
} bp_reward_config;

typedef struct bp_brkga_config {
  int population_size; /* 0: min(10 n, 500) */
  double elite_fraction;
  double mutant_fraction;
  double elite_inherit_prob;
  int generations;
  uint64_t seed;
} bp_brkga_config;

typedef struct bp_method_config {
  bp_method method;
  uint64_t seed; /* random order stream */
  bp_brkga_config brkga;
  bp_reward_config reward;
  const bp_model* model; /* required for BP_METHOD_DRL */
} bp_method_config;

BINPACK_API void bp_method_config_default(bp_method method, bp_method_config* out);

BINPACK_API bp_status bp_pack_dataset(const bp_dataset* ds, const bp_method_config* cfg,
                                      bp_results** out);
/* Packs one instance in an explicit order (order holds n indices). */
BINPACK_API bp_status bp_pack_order(const bp_dataset* ds, size_t index, const int* order,
                                    size_t n, bp_results** out);

/* ---- results ----------------------------------------------------------- */

BINPACK_API bp_status bp_results_read(const char* path, bp_results** out);
BINPACK_API bp_status bp_results_write(const bp_results* res, const char* path);
BINPACK_API size_t bp_results_size(const bp_results* res);
BINPACK_API bp_status bp_results_boxes_used(const bp_results* res, size_t index, int* out);
BINPACK_API bp_status bp_results_penalty(const bp_results* res, size_t index,
                                         const bp_reward_config* reward, double* out);

typedef struct bp_metrics {
  char label[32];
  double avg_compactness;
  double avg_pyramid;
  double avg_boxes;
  double avg_latency_ms; /* 0 for results read from disk */
  double avg_penalty;
  int instances;
} bp_metrics;

/* label may be NULL; reward may be NULL for alpha = beta = 0.5, scale 5. */
BINPACK_API bp_status bp_results_evaluate(const bp_results* res, const char* label,
                                          const bp_reward_config* reward, bp_metrics* out);

/* Writes "<prefix>_box<k>.svg" for each box of result `index`. */
BINPACK_API bp_status bp_results_render_svg(const bp_results* res, size_t index,
                                            const char* prefix, size_t* files_written);
BINPACK_API void bp_results_free(bp_results* res);

/* Formats rows as a text table (as_json = 0) or as a JSON record
 * {"rows":[...]} (as_json != 0). Release with bp_string_free. */
BINPACK_API bp_status bp_metrics_format(const bp_metrics* rows, size_t n, int as_json,
                                        char** out);
BINPACK_API void bp_string_free(char* s);

/* ---- policy model ------------------------------------------------------ */

BINPACK_API bp_status bp_model_create(int rank, int hidden, uint64_t init_seed,
                                      bp_model** out);
/* Accepts model and training checkpoints. */
BINPACK_API bp_status bp_model_load(const char* path, bp_model** out);
BINPACK_API bp_status bp_model_save(const bp_model* model, const char* path);
BINPACK_API bp_status bp_model_info(const bp_model* model, int* rank, int* hidden,
                                    size_t* parameter_count);
/* Greedy decode of one dataset instance; order_out receives n indices. */
BINPACK_API bp_status bp_model_decode(const bp_model* model, const bp_dataset* ds,
                                      size_t index, int* order_out, size_t capacity);
BINPACK_API void bp_model_free(bp_model* model);

/* ---- training ---------------------------------------------------------- */

typedef struct bp_train_config {
  int rank;
  int hidden;
  uint64_t init_seed;
  double learning_rate;
  int batch_size;
  int epochs;
  int train_size;
  int val_size;
  bp_reward_config reward;
  uint64_t seed;
  double clip_norm; /* 0 disables */
} bp_train_config;

/* lr 5e-4, batch 50, 5 epochs, 100000 train / 10000 validation, hidden 128. */
BINPACK_API void bp_train_config_default(int rank, bp_train_config* out);
/* 2D, 10 objects per instance, 10000 train / 1000 validation, 3 epochs. */
BINPACK_API void bp_train_config_desk(bp_train_config* out);
/* Generator settings matching bp_train_config_desk. */
BINPACK_API void bp_gen_config_desk(bp_gen_config* out);
/* Reads the training config stored in a training checkpoint. */
BINPACK_API bp_status bp_train_checkpoint_config(const char* path, bp_train_config* out);

typedef void (*bp_epoch_callback)(int epoch, double val_penalty, void* user);

/* Trains until cfg->epochs epochs are done. checkpoint_path, log_path and
 * resume_from may be NULL. When resuming, only cfg->epochs is taken from cfg.
 * model_out may be NULL. */
BINPACK_API bp_status bp_train(const bp_train_config* cfg, const bp_dataset* train,
                               const bp_dataset* val, const char* checkpoint_path,
                               const char* log_path, const char* resume_from,
                               bp_epoch_callback on_epoch, void* user,
                               bp_model** model_out);

#ifdef __cplusplus
}
#endif

#endif /* BINPACK_BINPACK_H_ */
