#ifndef CQNLS_H
#define CQNLS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Which sampled component [`cqnls_mode_samples`] copies out.
typedef enum CqnlsComponent {
  CQNLS_COMPONENT_NODES = 0,
  CQNLS_COMPONENT_V1 = 1,
  CQNLS_COMPONENT_V2 = 2,
  CQNLS_COMPONENT_W1 = 3,
  CQNLS_COMPONENT_W2 = 4,
} CqnlsComponent;

// Result code of every fallible call.
typedef enum CqnlsStatus {
  CQNLS_STATUS_OK = 0,
  CQNLS_STATUS_NULL_POINTER = 1,
  CQNLS_STATUS_INVALID_ARGUMENT = 2,
  CQNLS_STATUS_DOMAIN = 3,
  CQNLS_STATUS_NO_CONVERGENCE = 4,
  CQNLS_STATUS_SINGULAR = 5,
  CQNLS_STATUS_MODE_INVALID = 6,
  CQNLS_STATUS_CONFIG = 7,
  CQNLS_STATUS_IO = 8,
  CQNLS_STATUS_CERTIFICATION = 9,
  CQNLS_STATUS_NUMERICAL = 10,
  CQNLS_STATUS_PANIC = 99,
} CqnlsStatus;

// Internal mode of the linearization at one ω.
typedef struct CqnlsMode CqnlsMode;

// Finished split-step run.
typedef struct CqnlsRun CqnlsRun;

// Soliton profile Q_ω(y) in rescaled variables.
typedef struct CqnlsSoliton CqnlsSoliton;

// Scalar data of a mode in rescaled units: ω, α, λ = 1 - α², and κ.
typedef struct CqnlsModeInfo {
  double omega;
  double alpha;
  double lambda;
  double kappa;
  // Number of grid samples per component.
  size_t len;
  double half_width;
} CqnlsModeInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *cqnls_last_error(void);

// Clears the per-thread error message.
void cqnls_clear_error(void);

// Library version as a static NUL-terminated string.
const char *cqnls_version(void);

// Frees a string returned by this library.
void cqnls_string_free(char *s);

// Builds the soliton at frequency `omega` >= 0.
enum CqnlsStatus cqnls_soliton_new(double omega, struct CqnlsSoliton **out);

void cqnls_soliton_free(struct CqnlsSoliton *s);

// Evaluates Q_ω at `n` points.
enum CqnlsStatus cqnls_soliton_eval(const struct CqnlsSoliton *s,
                                    const double *y,
                                    size_t n,
                                    double *out);

// Physical mass ‖φ_ω‖².
enum CqnlsStatus cqnls_soliton_mass(const struct CqnlsSoliton *s, double *out);

// Builds the internal mode at frequency `omega`.
enum CqnlsStatus cqnls_mode_build(double omega, struct CqnlsMode **out);

void cqnls_mode_free(struct CqnlsMode *m);

enum CqnlsStatus cqnls_mode_info(const struct CqnlsMode *m, struct CqnlsModeInfo *out);

// Copies one component into `out`, which must hold `len` doubles
// (see [`CqnlsModeInfo::len`]).
enum CqnlsStatus cqnls_mode_samples(const struct CqnlsMode *m,
                                    enum CqnlsComponent which,
                                    double *out,
                                    size_t len);

// Golden-rule constant Γ(ω) for a built mode, in the projected form.
enum CqnlsStatus cqnls_mode_gamma(const struct CqnlsMode *m, double *out);

// Checks in exact arithmetic that Γ₀ = (32/3) p₁ and writes its value.
// Returns `Certification` if the reduction does not hold.
enum CqnlsStatus cqnls_gamma0_certify(double *out);

// Runs a simulation described by a JSON config (same schema as the CLI).
// Fields left out take their default values.
enum CqnlsStatus cqnls_run_from_json(const char *config_json, struct CqnlsRun **out);

void cqnls_run_free(struct CqnlsRun *r);

// Number of recorded frames.
enum CqnlsStatus cqnls_run_frame_count(const struct CqnlsRun *r, size_t *out);

// Run summary as a JSON string; free it with [`cqnls_string_free`].
enum CqnlsStatus cqnls_run_summary_json(const struct CqnlsRun *r, char **out);

// All frame records as a JSON array; free it with [`cqnls_string_free`].
enum CqnlsStatus cqnls_run_frames_json(const struct CqnlsRun *r, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CQNLS_H */
