#ifndef QBENCH_H
#define QBENCH_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QbStatus {
  QB_STATUS_OK = 0,
  QB_STATUS_NULL_POINTER = 1,
  QB_STATUS_INVALID_ARGUMENT = 2,
  QB_STATUS_WIDTH_EXCEEDED = 3,
  QB_STATUS_NON_UNITARY = 4,
  QB_STATUS_UNSUPPORTED_GATE = 5,
  QB_STATUS_INVALID_DEVICE = 6,
  QB_STATUS_IO = 7,
  QB_STATUS_PARSE = 8,
  QB_STATUS_INTERNAL = 9,
} QbStatus;

typedef enum QbClass {
  QB_CLASS_SHALLOW = 0,
  QB_CLASS_SQUARE = 1,
  QB_CLASS_DEEP = 2,
} QbClass;

typedef enum QbStrategy {
  QB_STRATEGY_ROUTING_ONLY = 0,
  QB_STRATEGY_LINE_UNAWARE = 1,
  QB_STRATEGY_NOISE_AWARE = 2,
} QbStrategy;

typedef struct QbCircuit QbCircuit;

typedef struct QbCompiled QbCompiled;

typedef struct QbDevice QbDevice;

typedef struct QbSamples QbSamples;

typedef struct QbTable QbTable;

/**
 * Scores of one sample set against an ideal table.
 */
typedef struct QbScore {
  double hog;
  double ideal_hog;
  double ced;
  double l1;
} QbScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next `qb_*` call on the same thread.
 */
const char *qb_last_error(void);

/**
 * Library version as a static string.
 */
const char *qb_version(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void qb_string_free(char *s);

/**
 * Generates a circuit. `layers == 0` selects the class default.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QbStatus qb_circuit_generate(enum QbClass class_,
                                  size_t n_qubits,
                                  size_t layers,
                                  uint64_t seed,
                                  struct QbCircuit **out);

/**
 * # Safety
 * `qasm` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QbStatus qb_circuit_from_qasm(const char *qasm, struct QbCircuit **out);

/**
 * OpenQASM 2.0 text; release with `qb_string_free`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QbStatus qb_circuit_to_qasm(const struct QbCircuit *circuit, char **out);

/**
 * Number of qubits, or 0 for a null handle.
 *
 * # Safety
 * `circuit` must be a valid handle or null.
 */
size_t qb_circuit_n_qubits(const struct QbCircuit *circuit);

/**
 * Number of gates, or 0 for a null handle.
 *
 * # Safety
 * `circuit` must be a valid handle or null.
 */
size_t qb_circuit_len(const struct QbCircuit *circuit);

/**
 * Number of two-qubit gates, or 0 for a null handle.
 *
 * # Safety
 * `circuit` must be a valid handle or null.
 */
size_t qb_circuit_two_qubit_count(const struct QbCircuit *circuit);

/**
 * # Safety
 * `circuit` must come from this library or be null.
 */
void qb_circuit_free(struct QbCircuit *circuit);

/**
 * Ideal output distribution of a circuit.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QbStatus qb_probabilities(const struct QbCircuit *circuit, struct QbTable **out);

/**
 * # Safety
 * `table` must be a valid handle or null.
 */
size_t qb_table_n_qubits(const struct QbTable *table);

/**
 * Copies the `2^n` probabilities into `buf`, which must hold `len >= 2^n`
 * values. Index bit `n - 1 - i` is qubit `i`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum QbStatus qb_table_copy(const struct QbTable *table, double *buf, size_t len);

/**
 * # Safety
 * `table` must come from this library or be null.
 */
void qb_table_free(struct QbTable *table);

/**
 * `shots` draws from an ideal table.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QbStatus qb_sample_ideal(const struct QbTable *table,
                              uint64_t shots,
                              uint64_t seed,
                              struct QbSamples **out);

/**
 * `shots` uniformly random bitstrings.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QbStatus qb_sample_uniform(size_t n_qubits,
                                uint64_t shots,
                                uint64_t seed,
                                struct QbSamples **out);

/**
 * Number of times `outcome` was observed.
 *
 * # Safety
 * `samples` must be a valid handle or null.
 */
uint64_t qb_samples_count(const struct QbSamples *samples, uint64_t outcome);

/**
 * # Safety
 * `samples` must be a valid handle or null.
 */
uint64_t qb_samples_shots(const struct QbSamples *samples);

/**
 * # Safety
 * `samples` must come from this library or be null.
 */
void qb_samples_free(struct QbSamples *samples);

/**
 * HOG, ideal HOG, CED and ℓ1 distance of `samples` against `table`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QbStatus qb_score(const struct QbSamples *samples,
                       const struct QbTable *table,
                       struct QbScore *out);

/**
 * A bundled device by name (`ibmqx2`, `ibmq_ourense`, `ibmq_16_melbourne`,
 * `ibmq_singapore`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QbStatus qb_device_builtin(const char *name, struct QbDevice **out);

/**
 * A device from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QbStatus qb_device_load(const char *path, struct QbDevice **out);

/**
 * # Safety
 * `device` must be a valid handle or null.
 */
size_t qb_device_n_qubits(const struct QbDevice *device);

/**
 * # Safety
 * `device` must come from this library or be null.
 */
void qb_device_free(struct QbDevice *device);

/**
 * Compiles `circuit` onto `device`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QbStatus qb_compile(const struct QbCircuit *circuit,
                         const struct QbDevice *device,
                         enum QbStrategy strategy,
                         struct QbCompiled **out);

/**
 * A copy of the compiled circuit, on the compact qubit set.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QbStatus qb_compiled_circuit(const struct QbCompiled *compiled, struct QbCircuit **out);

/**
 * Writes the device qubit that holds each virtual qubit at the end of the
 * circuit into `buf[0..n_virtual]`.
 *
 * # Safety
 * `buf` must point to `len` writable values.
 */
enum QbStatus qb_compiled_final_layout(const struct QbCompiled *compiled, size_t *buf, size_t len);

/**
 * Samples the compiled circuit, noiselessly or with the device's
 * calibrated errors, and returns outcomes over the original qubits.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QbStatus qb_sample_compiled(const struct QbCompiled *compiled,
                                 const struct QbDevice *device,
                                 bool noisy,
                                 uint64_t shots,
                                 uint64_t seed,
                                 struct QbSamples **out);

/**
 * # Safety
 * `compiled` must come from this library or be null.
 */
void qb_compiled_free(struct QbCompiled *compiled);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBENCH_H */
