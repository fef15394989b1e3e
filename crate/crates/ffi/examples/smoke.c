/* Parse a deal file, run it and print the features report. */
#include <stdio.h>
#include <stdlib.h>

#include "peal.h"

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    rewind(f);
    char *buf = malloc(n + 1);
    if (fread(buf, 1, n, f) != (size_t)n) { fclose(f); free(buf); return NULL; }
    buf[n] = 0;
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc < 2) { fprintf(stderr, "usage: %s DEAL.json\n", argv[0]); return 2; }
    char *text = slurp(argv[1]);
    if (!text) { perror(argv[1]); return 2; }

    PealDeal *deal = NULL;
    if (peal_deal_parse(text, &deal) != PEAL_STATUS_OK) {
        fprintf(stderr, "%s\n", peal_last_error());
        free(text);
        return 1;
    }
    free(text);

    PealRun *run = NULL;
    if (peal_run(deal, 100, 1, 0.0, &run) != PEAL_STATUS_OK) {
        fprintf(stderr, "%s\n", peal_last_error());
        peal_deal_free(deal);
        return 1;
    }

    char *id = NULL, *features = NULL;
    bool compliant = false;
    peal_run_id(run, &id);
    peal_run_compliant(run, &compliant);
    peal_run_report(run, "features.json", &features);
    printf("peal %s run %s compliant=%d\n%s\n", peal_version(), id, compliant, features);

    peal_string_free(id);
    peal_string_free(features);
    peal_run_free(run);
    peal_deal_free(deal);
    return 0;
}
