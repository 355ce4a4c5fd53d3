/* C interface of the biortho toolkit.
 *
 * Conventions: functions return a BqStatus code and write results through
 * out-pointers. Complex data is interleaved doubles [re, im]; matrices are
 * row-major, so an n x n matrix occupies 2*n*n doubles. BqFrame handles are
 * created by the bq_frame_* constructors and released with bq_frame_free.
 */

#ifndef BIORTHO_H
#define BIORTHO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum BqStatus {
  BQ_OK = 0,
  BQ_NON_SQUARE = 1,
  BQ_CONVERGENCE_FAILURE = 2,
  BQ_SINGULAR = 3,
  BQ_DEGENERATE_BASIS = 4,
  BQ_DIMENSION_MISMATCH = 5,
  BQ_FRAME_MISMATCH = 6,
  BQ_NOT_PHYSICAL = 7,
  BQ_ILL_CONDITIONED = 8,
  BQ_INDEX_OUT_OF_RANGE = 9,
  BQ_STEP_TOO_LARGE = 10,
  BQ_POSITIVITY_VIOLATION = 11,
  BQ_INVALID_INPUT = 12,
  BQ_NULL_POINTER = 13,
  BQ_BUFFER_TOO_SMALL = 14,
} BqStatus;

/* Opaque biorthogonal frame. */
typedef struct BqFrame BqFrame;

/* Static description of a status code; never freed by the caller. */
const char *bq_status_message(BqStatus status);

/* Frame constructors; every successful *out must be released with
 * bq_frame_free. */
BqStatus bq_frame_standard(size_t n, BqFrame **out);
BqStatus bq_frame_two_level(double xi, double eta, BqFrame **out);
BqStatus bq_frame_from_basis(size_t n, const double *u, BqFrame **out);
void bq_frame_free(BqFrame *frame);

/* Frame queries. Matrix outputs need 2*n*n doubles. */
size_t bq_frame_dim(const BqFrame *frame);
BqStatus bq_frame_u(const BqFrame *frame, double *out);
BqStatus bq_frame_v(const BqFrame *frame, double *out);
BqStatus bq_frame_metric(const BqFrame *frame, double *out);
BqStatus bq_frame_petermann(const BqFrame *frame, size_t index, double *out);

/* Extended Pauli matrix at (xi, eta); axis 0 = x, 1 = y, 2 = z; out holds
 * 8 doubles. */
BqStatus bq_pauli(int axis, double xi, double eta, double *out);

/* Measurement statistics. f_array is an n x n Hermitian coefficient array
 * (2*n*n doubles), state holds n coefficients (2*n doubles). */
BqStatus bq_expectation(const BqFrame *frame, const double *f_array,
                        const double *state, double *out);
BqStatus bq_outcome_probabilities(const BqFrame *frame, const double *f_array,
                                  const double *state, size_t capacity,
                                  double *out_values, double *out_probs,
                                  size_t *out_len);
BqStatus bq_sample_outcomes(const BqFrame *frame, const double *f_array,
                            const double *state, uint64_t n_samples,
                            uint64_t seed, size_t capacity,
                            uint64_t *out_counts, size_t *out_len);

/* Closed-system evolution: frame basis states are the eigenstates, energies
 * (n doubles) the real eigenvalues; out_state holds the coefficients at
 * time t (2*n doubles). */
BqStatus bq_evolve(const BqFrame *frame, const double *energies,
                   const double *state, double t, double *out_state);

/* Gain/loss Lindblad module. Labels: 0 oscillatory, 1 exceptional,
 * 2 overdamped. */
BqStatus bq_lindblad_classify(double kappa, double gamma_gain,
                              double gamma_loss, int *out_label,
                              double *out_gap, double *out_frequency);

/* Trajectory rows (t, x, y, z, purity) from the excited state; capacity is
 * a row count, each row is five doubles; row count is round(t_max/dt)+1. */
BqStatus bq_lindblad_trajectory(double kappa, double gamma, double t_max,
                                double dt, size_t capacity, double *out_rows,
                                size_t *out_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BIORTHO_H */
