#include <stdio.h>
#include <string.h>
#include "lexbias.h"

int main(int argc, char **argv) {
    if (argc != 2) return 2;
    double m = 0.0;
    if (lexbias_mcc(3, 2, 1, 1, &m) != LEXBIAS_STATUS_OK) return 10;
    if (m < 0.4166 || m > 0.4167) return 11;

    int32_t label = -1;
    if (lexbias_parse_label("The answer is NOT BIASED.", &label) != LEXBIAS_STATUS_OK) return 12;
    if (label != LEXBIAS_LABEL_NOT_BIASED) return 13;
    if (lexbias_parse_label(NULL, &label) != LEXBIAS_STATUS_NULL_ARGUMENT) return 14;
    if (lexbias_last_error() == NULL) return 15;

    LexbiasPool *pool = NULL;
    if (lexbias_pool_load(argv[1], 64, 0, &pool) != LEXBIAS_STATUS_OK) return 16;
    char *prompt = NULL;
    if (lexbias_pool_render(pool, "A calm sentence.", "2-shot", &prompt) != LEXBIAS_STATUS_OK) return 17;
    if (strstr(prompt, "Instruction: 'A calm sentence.'") == NULL) return 18;
    lexbias_string_free(prompt);
    lexbias_pool_free(pool);

    printf("%s\n", lexbias_version());
    return 0;
}
