#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "phasecert.h"

#define CHECK(call)                                                     \
  do {                                                                  \
    PcStatus s_ = (call);                                               \
    if (s_ != PC_STATUS_OK) {                                           \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, pc_last_error()); \
      return 1;                                                         \
    }                                                                   \
  } while (0)

int main(void) {
  PcField *f = NULL;
  CHECK(pc_field_from_state("gaussian_pure", 128, 0.0, 1.0, &f));
  if (pc_field_dim(f) != 1 || pc_field_len(f) != 128 * 128) return 2;

  char *report = NULL;
  CHECK(pc_moment_report_json(f, &report));
  if (!strstr(report, "\"covariance\"")) return 3;
  pc_string_free(report);

  PcField *g = NULL;
  CHECK(pc_symplectic_ft(f, &g));
  pc_field_free(g);
  pc_field_free(f);

  double cov[4] = {2.0, 0.0, 0.0, 0.125};
  double lam[1];
  CHECK(pc_symplectic_spectrum(cov, 2, lam));
  if (lam[0] < 0.5 - 1e-12 || lam[0] > 0.5 + 1e-12) return 4;

  char *bundle = NULL;
  int code = -1;
  CHECK(pc_certify_json("{\"state\":{\"kind\":\"example_final1\"},\"certificates\":[\"rsup\",\"refined_rsup_ineq1\"]}",
                        &bundle, &code));
  pc_string_free(bundle);
  if (code != 1) return 5;

  if (pc_field_from_state("no_such_kind", 0, 0.0, 1.0, &f) != PC_STATUS_INVALID) return 6;
  if (strlen(pc_last_error()) == 0) return 7;
  if (pc_field_load(NULL, &f) != PC_STATUS_NULL) return 8;

  puts("ok");
  return 0;
}
