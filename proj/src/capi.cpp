#include "shiftlab/capi.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "shiftlab/run.hpp"

struct slab_ctx {
  std::string last_error;
};

extern "C" {

slab_ctx* slab_ctx_new(void) { return new (std::nothrow) slab_ctx; }

void slab_ctx_free(slab_ctx* ctx) { delete ctx; }

const char* slab_last_error(const slab_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : "null context";
}

int slab_run(slab_ctx* ctx, int argc, const char* const* argv,
             char** json_out) {
  if (json_out) *json_out = nullptr;
  if (!ctx || argc < 1 || !argv) {
    if (ctx) ctx->last_error = "invalid arguments to slab_run";
    return 2;
  }
  try {
    const shiftlab::RunResult res = shiftlab::run_cli(argc, argv);
    ctx->last_error = res.error;
    if (json_out && !res.json.empty()) {
      char* buf = static_cast<char*>(std::malloc(res.json.size() + 1));
      if (buf) {
        std::memcpy(buf, res.json.c_str(), res.json.size() + 1);
        *json_out = buf;
      }
    }
    return res.exit_code;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return 2;
  } catch (...) {
    ctx->last_error = "unknown error";
    return 2;
  }
}

void slab_string_free(char* s) { std::free(s); }

const char* slab_version(void) { return SHIFTLAB_VERSION; }

}  // extern "C"
