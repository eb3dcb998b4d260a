#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "wppan.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      const char *err = wppan_last_error();                           \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,  \
              err ? err : "no error");                                \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  WppanConfig *cfg = NULL;
  CHECK(wppan_config_from_json("{\"num_users\": 2, \"rng_seed\": 5}", &cfg) == WPPAN_STATUS_OK);
  CHECK(wppan_config_set_p0_dbm(cfg, 35.0) == WPPAN_STATUS_OK);
  CHECK(wppan_config_set_num_users(cfg, 0) == WPPAN_STATUS_INVALID_CONFIG);
  CHECK(wppan_last_error() != NULL);

  WppanTrialResult *res = NULL;
  CHECK(wppan_run_trial(cfg, 1, WPPAN_MODE_SEARCH, &res) == WPPAN_STATUS_OK);
  CHECK(!wppan_trial_failed(res));
  size_t users = wppan_trial_num_users(res);
  CHECK(users == 2);
  double rates[2];
  CHECK(wppan_trial_rates(res, rates, users) == WPPAN_STATUS_OK);
  double v = wppan_trial_min_rate(res);
  CHECK(v > 0.0 && rates[0] >= v - 1e-12 && rates[1] >= v - 1e-12);
  wppan_trial_free(res);
  wppan_config_free(cfg);

  double p_max, a, b, out;
  CHECK(wppan_default_harvester(&p_max, &a, &b) == WPPAN_STATUS_OK);
  CHECK(wppan_harvested_power(b, p_max, a, b, &out) == WPPAN_STATUS_OK);
  CHECK(fabs(out - p_max * (1.0 - exp(-a * b)) / 2.0) <= 1e-12 * out);

  double harvest[2] = {0.01, 0.002};
  double gains[2] = {500.0, 2000.0};
  double tau_d[1], tau_u[2], min_rate;
  CHECK(wppan_solve_allocation(harvest, 2, 1, gains, 1.0, tau_d, tau_u, &min_rate) == WPPAN_STATUS_OK);
  CHECK(fabs(tau_d[0] + tau_u[0] + tau_u[1] - 1.0) < 1e-9 && min_rate > 0.0);

  printf("ok %s %.6f\n", wppan_version(), v);
  return 0;
}
