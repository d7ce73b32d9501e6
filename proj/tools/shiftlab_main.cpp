#include <cstdio>

#include "shiftlab/capi.h"

int main(int argc, char** argv) {
  slab_ctx* ctx = slab_ctx_new();
  if (!ctx) {
    std::fprintf(stderr, "error: out of memory\n");
    return 2;
  }
  char* json = nullptr;
  const int code =
      slab_run(ctx, argc, const_cast<const char* const*>(argv), &json);
  if (json) {
    std::fputs(json, stdout);
    slab_string_free(json);
  }
  if (code != 0) {
    const char* msg = slab_last_error(ctx);
    if (msg && msg[0]) std::fprintf(stderr, "error: %s\n", msg);
  }
  slab_ctx_free(ctx);
  return code;
}
