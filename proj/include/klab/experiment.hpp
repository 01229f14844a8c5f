#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace klab::experiment {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kModuleVersion = "1.0.0";

// An experiment request. kind selects the dispatch target; params carries
// the kind-specific parameters as a JSON object (stored canonically: sorted
// keys, no whitespace). threads is an execution detail -- results never
// depend on it, so it is excluded from the canonical form and the hash.
struct Config {
  int schema_version = kSchemaVersion;
  std::string kind;
  std::string params = "{}";
  std::uint64_t seed = 20240818;
  int threads = 1;
};

// The valid kinds: betti, cover, lueck-matrix, lueck-betti, hodge-measure,
// limit-measure, curve-density, curve-mass, disk.
const std::vector<std::string>& known_kinds();

// Parses {"schema_version":1, "kind":..., "params":{...}, "seed":..,
// "threads":..}. Unknown top-level keys, a missing/wrong schema version or
// an unknown kind are rejected with validation_error. Kind-specific params
// are validated at run() time, before any output is produced.
Config config_from_json(const std::string& text);

Config make_config(const std::string& kind, const std::string& params_json,
                   std::uint64_t seed = 20240818, int threads = 1);

// Canonical serialization of (schema_version, kind, params, seed): sorted
// keys, no whitespace. Two configs describing the same experiment always
// canonicalize to the same bytes.
std::string canonical_json(const Config& c);

// FNV-1a (64-bit) over the canonical serialization.
std::uint64_t config_hash(const Config& c);
std::string config_hash_hex(const Config& c);  // 16 lowercase hex digits

struct ResultRecord {
  std::string kind;
  std::string config_hash;  // 16 hex digits
  std::uint64_t seed = 0;
  std::string module_version;
  bool cache_hit = false;
  std::string payload;     // canonical JSON text; bit-identical on rerun
  std::string table;       // CSV text, possibly empty; stable column order
  std::string started_at;  // ISO-8601 UTC; never hashed or cached
  std::string finished_at;
};

// Resolved cache entry path for a config: <dir>/v<schema>/<hash>.json where
// <dir> is cache_dir if nonempty, else $KAZHDAN_LAB_CACHE, else .klab-cache.
std::string cache_entry_path(const Config& c, const std::string& cache_dir = "");

// Runs the experiment. Parameters are validated and the payload computed
// before anything touches the filesystem; a validation failure therefore
// writes nothing. On success, when out_dir is nonempty the record is written
// to <out_dir>/<kind>-<hash>.json plus <kind>-<hash>.csv when the table is
// nonempty (both embed the config hash and seed). With use_cache the payload
// bytes are reused from / stored into the cache entry for the config; a
// stored entry whose content hash no longer matches its payload raises
// consistency_error (cache corruption), and hits are marked on the record.
ResultRecord run(const Config& c, const std::string& out_dir = "",
                 bool use_cache = true, const std::string& cache_dir = "");

// Record as JSON (payload embedded as an object, timestamps as fields).
std::string record_json(const ResultRecord& r);

}  // namespace klab::experiment
