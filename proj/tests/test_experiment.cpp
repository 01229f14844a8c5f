#include "klab/experiment.hpp"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "klab/errors.hpp"

namespace ex = klab::experiment;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reference FNV-1a, written out independently of the library.
std::uint64_t fnv1a_oracle(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : s) h = (h ^ b) * 1099511628211ULL;
  return h;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("klab-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace

TEST_CASE("canonical form is key-order independent and ignores threads") {
  ex::Config a = ex::config_from_json(
      R"({"schema_version":1,"kind":"betti","params":{"genus":2},"seed":7,"threads":3})");
  ex::Config b = ex::config_from_json(
      R"({"threads":1,"seed":7,"params":{"genus":2},"kind":"betti","schema_version":1})");
  CHECK(ex::canonical_json(a) == ex::canonical_json(b));
  CHECK(ex::config_hash(a) == ex::config_hash(b));

  // Frozen canonical bytes: changing this layout silently invalidates every
  // existing cache, so it must be a deliberate, visible decision.
  CHECK(ex::canonical_json(a) ==
        R"({"kind":"betti","params":{"genus":2},"schema_version":1,"seed":7})");

  // Different seed, different hash.
  ex::Config c = ex::make_config("betti", R"({"genus":2})", 8);
  CHECK(ex::config_hash(c) != ex::config_hash(a));
}

TEST_CASE("config hash agrees with a reference FNV-1a") {
  ex::Config c = ex::make_config("disk", R"({"radii":[0.5]})", 11);
  CHECK(ex::config_hash(c) == fnv1a_oracle(ex::canonical_json(c)));
  CHECK(ex::config_hash_hex(c).size() == 16);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(ex::config_from_json("not json"), klab::validation_error);
  CHECK_THROWS_AS(ex::config_from_json(R"({"kind":"betti"})"), klab::validation_error);
  CHECK_THROWS_AS(ex::config_from_json(R"({"schema_version":2,"kind":"betti"})"),
                  klab::validation_error);
  CHECK_THROWS_AS(ex::config_from_json(R"({"schema_version":1,"kind":"nope"})"),
                  klab::validation_error);
  CHECK_THROWS_AS(
      ex::config_from_json(R"({"schema_version":1,"kind":"betti","extra":1})"),
      klab::validation_error);
  CHECK_THROWS_AS(
      ex::config_from_json(R"({"schema_version":1,"kind":"betti","params":[1]})"),
      klab::validation_error);
  CHECK_THROWS_AS(
      ex::config_from_json(R"({"schema_version":1,"kind":"betti","seed":-4})"),
      klab::validation_error);
  CHECK_THROWS_AS(
      ex::config_from_json(R"({"schema_version":1,"kind":"betti","threads":0})"),
      klab::validation_error);
}

TEST_CASE("betti experiment payload and table") {
  TempDir cache("cache-betti");
  ex::Config c = ex::make_config("betti", R"({"genus":2})");
  ex::ResultRecord r = ex::run(c, "", true, cache.path.string());
  json payload = json::parse(r.payload);
  CHECK(payload["b0"] == 1);
  CHECK(payload["b1"] == 4);
  CHECK(payload["b2"] == 1);
  CHECK(payload["euler"] == -2);
  CHECK(r.table.find("b1,4\n") != std::string::npos);
  CHECK_FALSE(r.cache_hit);
  CHECK(r.module_version == ex::kModuleVersion);
}

TEST_CASE("lueck-betti experiment reproduces the cyclic-tower table") {
  TempDir cache("cache-lueck");
  ex::Config c = ex::make_config(
      "lueck-betti",
      R"({"genus":2,"tower":{"type":"cyclic","moduli":[1,2,4,8]}})");
  ex::ResultRecord r = ex::run(c, "", true, cache.path.string());
  CHECK(r.table.find("level,degree,dim,normalized_num,normalized_den\n") == 0);
  CHECK(r.table.find("1,1,4,4,1\n") != std::string::npos);
  CHECK(r.table.find("2,2,6,3,1\n") != std::string::npos);
  CHECK(r.table.find("3,4,10,5,2\n") != std::string::npos);
  CHECK(r.table.find("4,8,18,9,4\n") != std::string::npos);
  CHECK(r.table.find("# limit 2/1\n") != std::string::npos);
  json payload = json::parse(r.payload);
  CHECK(payload["limit_num"] == 2);
  CHECK(payload["limit_den"] == 1);
  CHECK(payload["records"].size() == 4);
}

TEST_CASE("disk experiment reports the pinned half-disk mass") {
  TempDir cache("cache-disk");
  ex::Config c = ex::make_config("disk", R"({"radii":[0.5],"grid":16})");
  ex::ResultRecord r = ex::run(c, "", true, cache.path.string());
  json payload = json::parse(r.payload);
  CHECK(std::abs(payload["measure_half"].get<double>() - 2.0 / 3.0) < 1e-9);
  CHECK(r.table.find("radius,exhaustion_sup\n") == 0);
}

TEST_CASE("cache: miss, hit, bit-identical payload, corruption detection") {
  TempDir cache("cache-roundtrip");
  ex::Config c = ex::make_config(
      "lueck-betti", R"({"genus":2,"tower":{"type":"cyclic","moduli":[1,2]}})");

  ex::ResultRecord first = ex::run(c, "", true, cache.path.string());
  CHECK_FALSE(first.cache_hit);
  fs::path entry = ex::cache_entry_path(c, cache.path.string());
  REQUIRE(fs::exists(entry));

  ex::ResultRecord second = ex::run(c, "", true, cache.path.string());
  CHECK(second.cache_hit);
  CHECK(second.payload == first.payload);  // identical bytes
  CHECK(second.table == first.table);

  // Tamper with the stored payload: the content hash no longer matches.
  json stored = json::parse(slurp(entry));
  std::string payload = stored["payload"].get<std::string>();
  payload[payload.size() / 2] ^= 1;
  stored["payload"] = payload;
  spit(entry, stored.dump(2));
  CHECK_THROWS_AS(ex::run(c, "", true, cache.path.string()), klab::consistency_error);

  // Bypassing the cache recomputes and never reads the poisoned entry.
  ex::ResultRecord clean = ex::run(c, "", false, cache.path.string());
  CHECK_FALSE(clean.cache_hit);
  CHECK(clean.payload == first.payload);
}

TEST_CASE("cache directory resolution honors KAZHDAN_LAB_CACHE") {
  TempDir env_dir("cache-env");
  setenv("KAZHDAN_LAB_CACHE", env_dir.path.c_str(), 1);
  ex::Config c = ex::make_config("betti", R"({"genus":1})");
  std::string path = ex::cache_entry_path(c);
  CHECK(path.rfind(env_dir.path.string(), 0) == 0);
  ex::run(c, "", true);
  CHECK(fs::exists(path));
  unsetenv("KAZHDAN_LAB_CACHE");

  // Explicit directory wins over the environment.
  TempDir other("cache-explicit");
  CHECK(ex::cache_entry_path(c, other.path.string()).rfind(other.path.string(), 0) == 0);
}

TEST_CASE("output files embed the config hash and seed") {
  TempDir cache("cache-out");
  TempDir out("out-files");
  ex::Config c = ex::make_config("betti", R"({"genus":3})", 99);
  ex::ResultRecord r = ex::run(c, out.path.string(), true, cache.path.string());

  fs::path record_path = out.path / ("betti-" + r.config_hash + ".json");
  fs::path table_path = out.path / ("betti-" + r.config_hash + ".csv");
  REQUIRE(fs::exists(record_path));
  REQUIRE(fs::exists(table_path));

  json record = json::parse(slurp(record_path));
  CHECK(record["config_hash"] == r.config_hash);
  CHECK(record["seed"] == 99);
  CHECK(record["cache_hit"] == false);
  CHECK(record["payload"]["b1"] == 6);
  CHECK(record["started_at"].get<std::string>().size() == 20);

  std::string csv = slurp(table_path);
  CHECK(csv.rfind("# config " + r.config_hash + " seed 99\n", 0) == 0);
}

TEST_CASE("validation failure writes nothing") {
  TempDir cache("cache-noout");
  fs::path out = fs::temp_directory_path() /
                 ("klab-never-created-" + std::to_string(::getpid()));
  fs::remove_all(out);
  ex::Config c = ex::make_config("betti", R"({"genus":0})");
  CHECK_THROWS_AS(ex::run(c, out.string(), true, cache.path.string()),
                  klab::validation_error);
  CHECK_FALSE(fs::exists(out));
  CHECK_FALSE(fs::exists(ex::cache_entry_path(c, cache.path.string())));

  ex::Config bad = ex::make_config("curve-density",
                                   R"({"coefficients":[[0,0]],"samples":[[0,0]]})");
  CHECK_THROWS_AS(ex::run(bad, out.string(), true, cache.path.string()),
                  klab::validation_error);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("reruns without cache are bit-identical, and threads never matter") {
  TempDir cache("cache-bits");
  ex::Config c1 = ex::make_config(
      "curve-mass", R"({"coefficients":[[0,0],[-1,0],[0,0],[1,0]],"radial_nodes":48})",
      20240818, 1);
  ex::Config c3 = ex::make_config(
      "curve-mass", R"({"coefficients":[[0,0],[-1,0],[0,0],[1,0]],"radial_nodes":48})",
      20240818, 3);
  CHECK(ex::config_hash(c1) == ex::config_hash(c3));
  ex::ResultRecord serial = ex::run(c1, "", false);
  ex::ResultRecord threaded = ex::run(c3, "", false);
  CHECK(serial.payload == threaded.payload);
  CHECK(serial.table == threaded.table);
  json payload = json::parse(serial.payload);
  CHECK(std::abs(payload["value"].get<double>() - 1.0) < 1e-2);
  CHECK(payload["genus"] == 1);
}

TEST_CASE("remaining kinds dispatch end to end") {
  TempDir cache("cache-kinds");
  std::string dir = cache.path.string();

  json cover = json::parse(
      ex::run(ex::make_config("cover", R"({"genus":2,"cover":{"type":"cyclic","n":4}})"),
              "", true, dir)
          .payload);
  CHECK(cover["degree"] == 4);
  CHECK(cover["b1"] == 10);
  CHECK(cover["cover_genus"] == 5);

  json hm = json::parse(
      ex::run(ex::make_config("hodge-measure",
                              R"({"genus":2,"cover":{"type":"cyclic","n":8}})"),
              "", true, dir)
          .payload);
  CHECK(std::abs(hm["total"].get<double>() - 1.125) < 1e-8);

  json lm = json::parse(
      ex::run(ex::make_config(
                  "limit-measure",
                  R"({"genus":2,"weights":[[1],[0],[0],[0]],"nodes_per_circle":512})"),
              "", true, dir)
          .payload);
  CHECK(std::abs(lm["total"].get<double>() - 1.0) < 1e-6);

  ex::ResultRecord cd = ex::run(
      ex::make_config(
          "curve-density",
          R"({"coefficients":[[-1,0],[0,0],[0,0],[0,0],[0,0],[1,0]],"samples":[[0,0]]})"),
      "", true, dir);
  json cdp = json::parse(cd.payload);
  CHECK(cdp["genus"] == 2);
  CHECK(cdp["rho"].size() == 1);
  CHECK(cd.table.rfind("re,im,rho\n", 0) == 0);

  json lk = json::parse(
      ex::run(ex::make_config(
                  "lueck-matrix",
                  R"({"matrix":{"rank_d":1,"rows":1,"cols":1,"entries":[{"r":0,"c":0,"terms":[{"exp":[1],"coef":1},{"exp":[0],"coef":-2}]}]},"tower":[[2],[4],[8]]})"),
              "", true, dir)
          .payload);
  CHECK(lk["records"].size() == 3);
  CHECK(lk["vn"]["value"].get<double>() == 0.0);
}
