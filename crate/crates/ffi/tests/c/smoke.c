#include <math.h>
#include <stdio.h>
#include <string.h>

#include "lpnml.h"

#define CHECK(cond)                                               \
    do {                                                          \
        if (!(cond)) {                                            \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                             \
        }                                                         \
    } while (0)

int main(void) {
    /* X = [[1,0]], Y = [1] */
    const double x[] = {1.0, 0.0};
    const double y[] = {1.0};
    LpnmlDataset *data = NULL;
    CHECK(lpnml_dataset_new(x, y, 1, 2, &data) == LPNML_STATUS_OK);

    LpnmlModel *model = NULL;
    CHECK(lpnml_model_fit(data, 0.1, 1.0, &model) == LPNML_STATUS_OK);
    CHECK(lpnml_model_n_features(model) == 2);

    const double null_dir[] = {0.0, 1.0};
    LpnmlPrediction p;
    CHECK(lpnml_predict(model, LPNML_LEARNER_LPNML, null_dir, 2, &p) == LPNML_STATUS_OK);
    CHECK(fabs(p.mean) < 1e-12);
    CHECK(fabs(p.variance - 11.0) < 1e-9);

    LpnmlPointConstants c;
    CHECK(lpnml_point_constants(model, null_dir, 2, &c) == LPNML_STATUS_OK);
    CHECK(fabs(c.k_lambda - 11.0) < 1e-9);

    const double bad[] = {1.0, 2.0, 3.0};
    CHECK(lpnml_predict(model, LPNML_LEARNER_RIDGE, bad, 3, &p) == LPNML_STATUS_DIMENSION_MISMATCH);
    CHECK(lpnml_last_error_message() != NULL);

    LpnmlModel *singular = NULL;
    CHECK(lpnml_model_fit(data, 0.0, 1.0, &singular) == LPNML_STATUS_SINGULAR_MATRIX);
    CHECK(singular == NULL);

    lpnml_model_free(model);
    lpnml_dataset_free(data);
    puts("ok");
    return 0;
}
