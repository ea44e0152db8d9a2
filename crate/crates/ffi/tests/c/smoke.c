#include <math.h>
#include <stdio.h>
#include <string.h>

#include "coalgp.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            const char *msg = coalgp_last_error_message();                 \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    msg ? msg : "no message");                             \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    CoalgpData *data = NULL;
    CHECK(coalgp_simulate_iso(20, "constant:1", 1.0, 7, 0, &data) == COALGP_STATUS_OK);
    CHECK(coalgp_data_num_tips(data) == 20);

    double lik = 0.0;
    CHECK(coalgp_log_likelihood(data, "constant:1", &lik) == COALGP_STATUS_OK);
    CHECK(isfinite(lik));

    CoalgpMcmcConfig cfg = coalgp_config_default();
    cfg.iterations = 400;
    cfg.burnin = 100;
    cfg.thin = 10;
    cfg.lambda_hat = 2.0;
    CoalgpChain *chain = NULL;
    CHECK(coalgp_run_chain(data, &cfg, coalgp_kernel_default(), 0, &chain) == COALGP_STATUS_OK);
    CHECK(coalgp_chain_num_draws(chain) == 30);

    double grid[5];
    double root = coalgp_data_tmrca(data);
    for (int i = 0; i < 5; i++) grid[i] = root * i / 4.0;
    CoalgpSummary *summary = NULL;
    CHECK(coalgp_summarize(chain, grid, 5, 1, &summary) == COALGP_STATUS_OK);
    double median[5], lo[5], hi[5];
    CHECK(coalgp_summary_values(summary, median, lo, hi, 5) == COALGP_STATUS_OK);
    for (int i = 0; i < 5; i++) CHECK(lo[i] <= median[i] && median[i] <= hi[i]);

    CoalgpData *bad = NULL;
    CHECK(coalgp_data_from_newick("((A:1,B:1);", 0, &bad) == COALGP_STATUS_PARSE);
    CHECK(bad == NULL);
    CHECK(strlen(coalgp_last_error_message()) > 0);

    coalgp_summary_free(summary);
    coalgp_chain_free(chain);
    coalgp_data_free(data);
    printf("ok %s\n", coalgp_version());
    return 0;
}
