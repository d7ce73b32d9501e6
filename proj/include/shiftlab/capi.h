#ifndef SHIFTLAB_CAPI_H
#define SHIFTLAB_CAPI_H

/* C interface to the shift laboratory. All functionality is reached through
 * slab_run, which executes one CLI-style invocation and returns the JSON
 * report. Exit codes: 0 success, 1 check failure, 2 input/parse error. */

#ifdef __cplusplus
extern "C" {
#endif

typedef struct slab_ctx slab_ctx;

slab_ctx* slab_ctx_new(void);
void slab_ctx_free(slab_ctx* ctx);

/* Message for the last failed call on this context; empty string if none.
 * Owned by the context, valid until the next slab_run or slab_ctx_free. */
const char* slab_last_error(const slab_ctx* ctx);

/* Runs argv (argv[0] is the program name) and stores the JSON report in
 * *json_out (caller frees with slab_string_free; may be NULL to discard).
 * Returns the exit code. */
int slab_run(slab_ctx* ctx, int argc, const char* const* argv,
             char** json_out);

void slab_string_free(char* s);

const char* slab_version(void);

#ifdef __cplusplus
}
#endif

#endif
