#include <stdio.h>
#include <stdlib.h>
#include "delone_ffi.h"

int main(void) {
    delone_set *set = NULL;
    if (delone_set_generate("{\"construction\": \"integer-lattice\", \"n\": 2}", 5.0, &set) != DELONE_STATUS_OK) {
        fprintf(stderr, "generate: %s\n", delone_last_error());
        return 1;
    }
    size_t n = delone_set_len(set), dim = delone_set_dimension(set), count = 0;
    double *buf = malloc(n * dim * sizeof(double));
    if (delone_set_positions(set, buf, n * dim) != DELONE_STATUS_OK) return 1;
    if (delone_atlas_count(set, 1.5, &count, NULL) != DELONE_STATUS_OK) return 1;
    char *rec = NULL;
    if (delone_recurrence_formula("golden", 7, &rec) != DELONE_STATUS_OK) return 1;
    if (delone_set_generate("{", 1.0, &set) != DELONE_STATUS_PARSE || delone_last_error() == NULL) return 2;
    printf("%zu %zu %zu %s\n", n, dim, count, rec);
    delone_string_free(rec);
    free(buf);
    delone_set_free(set);
    return 0;
}
