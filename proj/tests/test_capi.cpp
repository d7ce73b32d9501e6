#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftlab/capi.h"

namespace {
struct Ctx {
  slab_ctx* p;
  Ctx() : p(slab_ctx_new()) {}
  ~Ctx() { slab_ctx_free(p); }
};

struct Run {
  int code;
  std::string json;
  std::string err;
};

Run run(slab_ctx* ctx, const std::vector<std::string>& args) {
  std::vector<const char*> argv{"shiftlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  char* out = nullptr;
  Run r;
  r.code = slab_run(ctx, static_cast<int>(argv.size()), argv.data(), &out);
  if (out) {
    r.json = out;
    slab_string_free(out);
  }
  r.err = slab_last_error(ctx);
  return r;
}

std::filesystem::path write_temp(const std::string& name,
                                 const nlohmann::json& j) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << j.dump(2);
  return path;
}

nlohmann::json flat_weight(long n_hi) {
  return {{"support", "Z+"},
          {"n_lo", 0},
          {"n_hi", n_hi},
          {"log_values", std::vector<double>(static_cast<size_t>(n_hi) + 1, 0.0)}};
}
}  // namespace

TEST_CASE("version string is exposed") {
  const char* v = slab_version();
  REQUIRE(v != nullptr);
  CHECK(std::string(v).find('.') != std::string::npos);
}

TEST_CASE("unknown subcommand reports a parse error") {
  Ctx ctx;
  const Run r = run(ctx.p, {"frobnicate"});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("help exits cleanly") {
  Ctx ctx;
  CHECK(run(ctx.p, {"--help"}).code == 0);
}

TEST_CASE("weight envelope round trip through the C interface") {
  Ctx ctx;
  const auto path = write_temp("capi_flat_weight.json", flat_weight(32));
  const Run r = run(ctx.p, {"weights", "envelope", "--weight", path.string(),
                            "--kind", "bar", "--m", "3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.json);
  CHECK(j.at("command") == "weights envelope");
  CHECK(j.contains("version"));
  CHECK(j.at("result").at("log_value").get<double>() == doctest::Approx(0.0));
  std::filesystem::remove(path);
}

TEST_CASE("reports carry the fields promised by the published schema") {
  const char* dir = std::getenv("SHIFTLAB_SCHEMA_DIR");
  REQUIRE(dir != nullptr);
  std::ifstream in(std::filesystem::path(dir) / "report.schema.json");
  REQUIRE(in.good());
  const auto schema = nlohmann::json::parse(in);

  Ctx ctx;
  const auto path = write_temp("capi_schema_weight.json", flat_weight(16));
  const Run r =
      run(ctx.p, {"weights", "classify", "--weight", path.string()});
  REQUIRE(r.code == 0);
  const auto rep = nlohmann::json::parse(r.json);
  for (const auto& key : schema.at("required"))
    CHECK(rep.contains(key.get<std::string>()));
  std::filesystem::remove(path);
}

TEST_CASE("identical invocations produce identical bytes") {
  Ctx ctx;
  const auto path = write_temp("capi_det_weight.json", flat_weight(24));
  const std::vector<std::string> args{"weights", "classify", "--weight",
                                      path.string()};
  const Run a = run(ctx.p, args);
  const Run b = run(ctx.p, args);
  REQUIRE(a.code == 0);
  CHECK(a.json == b.json);
  std::filesystem::remove(path);
}

TEST_CASE("a failing check returns exit code 1 with a report") {
  Ctx ctx;
  // generator (z - 0.5)(1 + 0.2 z) has a common zero at 0.5
  const auto space = write_temp(
      "capi_space.json",
      {{"weight", flat_weight(40)}, {"p", 2.0}, {"N", 40}, {"kind", "disc"}});
  nlohmann::json gen = {
      {"n_lo", 0},
      {"coeffs", {{-0.5, 0.0}, {0.9, 0.0}, {0.2, 0.0}}}};
  const auto gpath = write_temp("capi_gen.json", gen);
  const Run r = run(ctx.p, {"subspace", "check", "--space", space.string(),
                            "--generator", gpath.string(), "--re", "0.5",
                            "--im", "0"});
  CHECK(r.code == 1);
  CHECK(!r.json.empty());
  const auto j = nlohmann::json::parse(r.json);
  CHECK(j.at("result").at("has_division") == false);
  std::filesystem::remove(space);
  std::filesystem::remove(gpath);
}

TEST_CASE("missing input file is an input error, not a crash") {
  Ctx ctx;
  const Run r = run(ctx.p, {"weights", "classify", "--weight",
                            "/nonexistent/nope.json"});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("json_out may be null") {
  Ctx ctx;
  const char* argv[] = {"shiftlab", "--help"};
  CHECK(slab_run(ctx.p, 2, argv, nullptr) == 0);
  slab_string_free(nullptr);  // must be a no-op
}
