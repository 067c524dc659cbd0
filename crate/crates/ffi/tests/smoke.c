#include <math.h>
#include <stdio.h>
#include "quicktail.h"

#define CHECK(c) do { if (!(c)) { fprintf(stderr, "failed: %s (line %d)\n", #c, __LINE__); return 1; } } while (0)

int main(void) {
    double w = 0.0;
    CHECK(qt_solve_w(2.0 * exp(1.0), &w) == QT_STATUS_OK);
    CHECK(fabs(w - 1.0) < 1e-12);
    CHECK(qt_solve_w(1.0, &w) == QT_STATUS_DOMAIN);
    char msg[256];
    CHECK(qt_last_error(msg, sizeof msg) > 0);

    QtPmf *pmf = NULL;
    CHECK(qt_pmf_new(3, QT_MODE_RATIONAL, &pmf) == QT_STATUS_OK);
    uint64_t offset = 0;
    size_t len = 0;
    CHECK(qt_pmf_support(pmf, &offset, &len) == QT_STATUS_OK);
    CHECK(offset == 2 && len == 2);
    double probs[2];
    CHECK(qt_pmf_probs(pmf, probs, 1) == QT_STATUS_BUFFER_TOO_SMALL);
    CHECK(qt_pmf_probs(pmf, probs, 2) == QT_STATUS_OK);
    CHECK(fabs(probs[0] - 1.0 / 3.0) < 1e-15 && fabs(probs[1] - 2.0 / 3.0) < 1e-15);
    qt_pmf_free(pmf);

    QtPmf *big = NULL;
    CHECK(qt_pmf_new(1000, QT_MODE_FLOAT, &big) == QT_STATUS_SIZE_CAP);
    CHECK(big == NULL);
    puts("ok");
    return 0;
}
