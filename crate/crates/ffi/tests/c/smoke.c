#include <stdio.h>
#include <string.h>

#include "lowrankseg.h"

#define CHECK(expr)                                                              \
  do {                                                                           \
    LrsStatus s_ = (expr);                                                       \
    if (s_ != LRS_STATUS_OK) {                                                   \
      fprintf(stderr, "%s failed (%d): %s\n", #expr, (int)s_, lrs_last_error_message()); \
      return 1;                                                                  \
    }                                                                            \
  } while (0)

int main(void) {
  LrsToyParams params = lrs_toy_params_default(1);
  size_t n = params.num_subspaces * params.samples_per;
  size_t truth[100], labels[100];
  if (n != 100) return 1;

  LrsMat *x = NULL, *z = NULL, *w = NULL;
  CHECK(lrs_generate_toy(&params, &x, truth, n));
  CHECK(lrs_lrr_closed_form(x, &z));
  CHECK(lrs_affinity(z, LRS_AFFINITY_MODE_PSD_DIRECT, &w));
  CHECK(lrs_spectral_cluster(w, 5, 0, labels, n));

  double acc = 0.0;
  CHECK(lrs_segmentation_accuracy(labels, truth, n, &acc));

  LrsMat *bad = NULL;
  LrsStatus s = lrs_svt(z, -1.0, &bad);
  if (s != LRS_STATUS_PARAMETER || bad != NULL || strlen(lrs_last_error_message()) == 0) return 2;

  LrsAlmConfig cfg = lrs_alm_config_default();
  cfg.lambda = 0.5;
  LrsSolveResult *res = NULL;
  CHECK(lrs_solve(x, &cfg, &res));
  int converged = lrs_solve_result_converged(res);

  printf("version %s accuracy %.3f converged %d iterations %zu\n", lrs_version(), acc, converged,
         lrs_solve_result_iterations(res));

  lrs_solve_result_free(res);
  lrs_mat_free(w);
  lrs_mat_free(z);
  lrs_mat_free(x);
  return acc == 1.0 && converged ? 0 : 3;
}
