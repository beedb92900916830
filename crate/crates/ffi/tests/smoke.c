#include <stdio.h>
#include "surfsim.h"

int main(void) {
    SurfsimConfig *cfg = NULL;
    if (surfsim_config_parse("{\"N\": 8, \"Ch\": 2, \"strategy\": \"ca\", \"radius\": 0.6}", &cfg) != SURFSIM_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", surfsim_last_error());
        return 1;
    }
    SurfsimRun *run = NULL;
    if (surfsim_run(cfg, 3, &run) != SURFSIM_STATUS_OK) {
        fprintf(stderr, "run: %s\n", surfsim_last_error());
        return 1;
    }
    double curve[16];
    size_t len = surfsim_run_accumulative(run, curve, 16);
    printf("%.17g %zu %.17g\n", surfsim_run_final_fraction(run), len, curve[len - 1]);
    surfsim_run_free(run);

    SurfsimConfig *bad = NULL;
    SurfsimStatus status = surfsim_config_parse("{\"N\": 2, \"Ch\": 0, \"strategy\": \"rd\"}", &bad);
    surfsim_config_free(cfg);
    return status == SURFSIM_STATUS_CONFIG && bad == NULL ? 0 : 2;
}
