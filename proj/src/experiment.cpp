#include "klab/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "klab/covers.hpp"
#include "klab/curves.hpp"
#include "klab/cw_surface.hpp"
#include "klab/disk.hpp"
#include "klab/errors.hpp"
#include "klab/group_ring.hpp"
#include "klab/hodge.hpp"

namespace klab::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << v;
  return os.str();
}

std::string now_iso() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json parse_object(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw validation_error(what + ": not a JSON object");
  return j;
}

// Strict key check: every key must be known, every required key present.
void check_keys(const json& p, const std::vector<std::string>& required,
                const std::vector<std::string>& optional, const std::string& where) {
  for (auto it = p.begin(); it != p.end(); ++it) {
    bool known = false;
    for (const auto& k : required) known = known || k == it.key();
    for (const auto& k : optional) known = known || k == it.key();
    if (!known) throw validation_error(where + ": unknown key '" + it.key() + "'");
  }
  for (const auto& k : required)
    if (!p.contains(k)) throw validation_error(where + ": missing key '" + k + "'");
}

std::int64_t get_int(const json& p, const std::string& key, std::int64_t lo,
                     std::int64_t hi, const std::string& where) {
  if (!p.contains(key) || !p[key].is_number_integer())
    throw validation_error(where + ": '" + key + "' must be an integer");
  std::int64_t v = p[key].get<std::int64_t>();
  if (v < lo || v > hi)
    throw validation_error(where + ": '" + key + "' out of range (parameter " + key + ")");
  return v;
}

std::vector<int> get_int_list(const json& p, const std::string& key,
                              const std::string& where) {
  if (!p.contains(key) || !p[key].is_array() || p[key].empty())
    throw validation_error(where + ": '" + key + "' must be a nonempty array");
  std::vector<int> out;
  for (const auto& v : p[key]) {
    if (!v.is_number_integer())
      throw validation_error(where + ": '" + key + "' entries must be integers");
    out.push_back(v.get<int>());
  }
  return out;
}

std::vector<curves::Complex> get_complex_list(const json& p, const std::string& key,
                                              const std::string& where) {
  if (!p.contains(key) || !p[key].is_array())
    throw validation_error(where + ": '" + key + "' must be an array of [re, im] pairs");
  std::vector<curves::Complex> out;
  for (const auto& v : p[key]) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw validation_error(where + ": '" + key + "' entries must be [re, im] pairs");
    out.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return out;
}

covers::CoverSpec cover_from_params(const json& c, int g, const std::string& where) {
  if (!c.is_object()) throw validation_error(where + ": 'cover' must be an object");
  check_keys(c, {"type", "n"}, {"generator", "cap"}, where + ".cover");
  std::string type = c["type"].is_string() ? c["type"].get<std::string>() : "";
  int n = int(get_int(c, "n", 1, 100000, where + ".cover"));
  if (type == "cyclic") {
    int gen = c.contains("generator")
                  ? int(get_int(c, "generator", 0, 2 * g - 1, where + ".cover"))
                  : 0;
    return covers::cyclic_cover_spec(g, n, gen);
  }
  if (type == "homology") {
    int cap = c.contains("cap") ? int(get_int(c, "cap", 1, 1000000, where + ".cover"))
                                : 10000;
    return covers::homology_cover_spec(g, n, cap);
  }
  throw validation_error(where + ".cover: type must be 'cyclic' or 'homology'");
}

covers::TowerSpec tower_from_params(const json& t, int g, const std::string& where) {
  if (!t.is_object()) throw validation_error(where + ": 'tower' must be an object");
  check_keys(t, {"type", "moduli"}, {"generator", "cap"}, where + ".tower");
  std::string type = t["type"].is_string() ? t["type"].get<std::string>() : "";
  std::vector<int> moduli = get_int_list(t, "moduli", where + ".tower");
  if (type == "cyclic") {
    int gen = t.contains("generator")
                  ? int(get_int(t, "generator", 0, 2 * g - 1, where + ".tower"))
                  : 0;
    return covers::cyclic_tower(g, moduli, gen);
  }
  if (type == "full-cyclic") return covers::full_cyclic_tower(g, moduli);
  if (type == "homology") {
    int cap = t.contains("cap") ? int(get_int(t, "cap", 1, 1000000, where + ".tower"))
                                : 10000;
    return covers::homology_tower(g, moduli, cap);
  }
  throw validation_error(where +
                         ".tower: type must be 'cyclic', 'full-cyclic' or 'homology'");
}

json lueck_records_json(const l2::LueckSequence& seq) {
  json rows = json::array();
  for (const auto& r : seq.records) {
    json row;
    row["level"] = r.level;
    row["degree"] = r.degree;
    row["dim"] = r.dim;
    row["normalized_num"] = r.normalized.num();
    row["normalized_den"] = r.normalized.den();
    rows.push_back(row);
  }
  return rows;
}

struct Outputs {
  std::string payload;
  std::string table;
};

Outputs run_betti(const json& p) {
  check_keys(p, {"genus"}, {}, "betti");
  int g = int(get_int(p, "genus", 1, 64, "betti"));
  auto s = complexes::genus_surface_complex(g);
  auto b = complexes::betti_numbers(s);
  json payload;
  payload["genus"] = g;
  payload["b0"] = b.b0;
  payload["b1"] = b.b1;
  payload["b2"] = b.b2;
  payload["euler"] = complexes::euler_characteristic(s);
  std::ostringstream csv;
  csv << "quantity,value\n"
      << "b0," << b.b0 << "\nb1," << b.b1 << "\nb2," << b.b2 << "\neuler,"
      << complexes::euler_characteristic(s) << "\n";
  return {payload.dump(2), csv.str()};
}

Outputs run_cover(const json& p) {
  check_keys(p, {"genus", "cover"}, {}, "cover");
  int g = int(get_int(p, "genus", 1, 16, "cover"));
  auto spec = cover_from_params(p["cover"], g, "cover");
  auto base = complexes::genus_surface_complex(g);
  auto built = covers::build_cover(base, spec);
  auto b = complexes::betti_numbers(built.complex);
  json payload;
  payload["base_genus"] = g;
  payload["degree"] = built.degree;
  payload["b0"] = b.b0;
  payload["b1"] = b.b1;
  payload["b2"] = b.b2;
  payload["euler"] = complexes::euler_characteristic(built.complex);
  payload["cover_genus"] = b.b1 / 2;
  std::ostringstream csv;
  csv << "quantity,value\ndegree," << built.degree << "\nb1," << b.b1
      << "\ncover_genus," << b.b1 / 2 << "\n";
  return {payload.dump(2), csv.str()};
}

Outputs run_lueck_matrix(const json& p) {
  check_keys(p, {"matrix", "tower"}, {"fourier_nodes"}, "lueck-matrix");
  if (!p["matrix"].is_object())
    throw validation_error("lueck-matrix: 'matrix' must be a group-ring matrix object");
  auto f = l2::group_ring_from_json(p["matrix"].dump());
  if (!p["tower"].is_array() || p["tower"].empty())
    throw validation_error("lueck-matrix: 'tower' must be a nonempty array of moduli lists");
  std::vector<l2::Quotient> tower;
  for (const auto& level : p["tower"]) {
    if (!level.is_array() || level.empty())
      throw validation_error("lueck-matrix: each tower level is a nonempty moduli list");
    l2::Quotient q;
    for (const auto& m : level) {
      if (!m.is_number_integer())
        throw validation_error("lueck-matrix: moduli must be integers");
      q.moduli.push_back(m.get<std::int64_t>());
    }
    tower.push_back(q);
  }
  auto seq = l2::lueck_kernel_sequence(f, tower);
  json payload;
  payload["records"] = lueck_records_json(seq);
  if (f.rank_d <= 2) {
    std::int64_t nodes = p.contains("fourier_nodes")
                             ? get_int(p, "fourier_nodes", 16, 1 << 20, "lueck-matrix")
                             : 4096;
    auto vn = l2::vn_kernel_dim_fourier(f, nodes);
    json v;
    v["value"] = vn.value;
    v["method"] = vn.method;
    v["nodes"] = vn.nodes;
    v["error_bound"] = vn.error_bound;
    v["degenerate_nodes"] = vn.degenerate_nodes;
    payload["vn"] = v;
    payload["final_gap"] =
        std::abs(seq.records.back().normalized.value() - vn.value);
  }
  return {payload.dump(2), l2::lueck_csv(seq)};
}

Outputs run_lueck_betti(const json& p) {
  check_keys(p, {"genus", "tower"}, {"p"}, "lueck-betti");
  int g = int(get_int(p, "genus", 1, 16, "lueck-betti"));
  int deg = p.contains("p") ? int(get_int(p, "p", 0, 2, "lueck-betti")) : 1;
  auto tower = tower_from_params(p["tower"], g, "lueck-betti");
  auto base = complexes::genus_surface_complex(g);
  auto seq = l2::lueck_betti_sequence(base, tower, deg);
  json payload;
  payload["genus"] = g;
  payload["p"] = deg;
  payload["records"] = lueck_records_json(seq);
  if (seq.limit) {
    payload["limit_num"] = seq.limit->num();
    payload["limit_den"] = seq.limit->den();
  }
  return {payload.dump(2), l2::lueck_csv(seq)};
}

Outputs run_hodge_measure(const json& p) {
  check_keys(p, {"genus", "cover"}, {}, "hodge-measure");
  int g = int(get_int(p, "genus", 1, 16, "hodge-measure"));
  auto spec = cover_from_params(p["cover"], g, "hodge-measure");
  auto base = complexes::genus_surface_complex(g);
  auto m = hodge::pushforward_measure(base, spec);
  double degree = double(spec.group.order);
  json payload;
  payload["genus"] = g;
  payload["degree"] = spec.group.order;
  payload["total"] = m.total;
  payload["expected_total"] = double(g - 1) + 1.0 / degree;
  payload["values"] = m.value;
  return {payload.dump(2),
          hodge::measure_csv(m, complexes::generator_edge_names(g))};
}

Outputs run_limit_measure(const json& p) {
  check_keys(p, {"genus"}, {"weights", "nodes_per_circle", "tower"}, "limit-measure");
  int g = int(get_int(p, "genus", 1, 16, "limit-measure"));
  bool has_w = p.contains("weights"), has_t = p.contains("tower");
  if (has_w == has_t)
    throw validation_error("limit-measure: provide exactly one of 'weights' or 'tower'");
  auto labels = complexes::generator_edge_names(g);
  if (has_w) {
    if (!p["weights"].is_array() || p["weights"].size() != std::size_t(2 * g))
      throw validation_error("limit-measure: 'weights' must have one row per generator");
    std::vector<std::vector<int>> w;
    for (const auto& row : p["weights"]) {
      if (!row.is_array() || row.empty())
        throw validation_error("limit-measure: weight rows are nonempty integer lists");
      std::vector<int> r;
      for (const auto& v : row) {
        if (!v.is_number_integer())
          throw validation_error("limit-measure: weights must be integers");
        r.push_back(v.get<int>());
      }
      w.push_back(r);
    }
    std::int64_t nodes = p.contains("nodes_per_circle")
                             ? get_int(p, "nodes_per_circle", 16, 1 << 20, "limit-measure")
                             : 0;
    auto fm = hodge::fourier_limit_measure(g, w, nodes);
    json payload;
    payload["genus"] = g;
    payload["total"] = fm.measure.total;
    payload["values"] = fm.measure.value;
    payload["nodes"] = fm.nodes;
    payload["discarded"] = fm.discarded;
    return {payload.dump(2), hodge::measure_csv(fm.measure, labels)};
  }
  auto tower = tower_from_params(p["tower"], g, "limit-measure");
  auto base = complexes::genus_surface_complex(g);
  auto rep = hodge::measure_convergence_experiment(base, tower);
  std::ostringstream csv;
  csv << "level,degree,total,gap_to_next\n";
  for (std::size_t k = 0; k < rep.degrees.size(); ++k) {
    csv << k + 1 << "," << rep.degrees[k] << "," << std::setprecision(17)
        << rep.totals[k] << ",";
    if (k < rep.successive_sup.size()) csv << rep.successive_sup[k];
    csv << "\n";
  }
  return {hodge::report_json(rep, labels), csv.str()};
}

struct CurveBundle {
  curves::HyperellipticCurve curve;
  curves::GramMatrix gram;
};

CurveBundle curve_from_params(const json& p, const std::string& where) {
  auto coefficients = get_complex_list(p, "coefficients", where);
  auto c = curves::make_curve(coefficients);
  auto per = curves::periods(c);
  return {c, curves::hodge_gram(c, per)};
}

Outputs run_curve_density(const json& p) {
  check_keys(p, {"coefficients", "samples"}, {}, "curve-density");
  auto bundle = curve_from_params(p, "curve-density");
  auto samples = get_complex_list(p, "samples", "curve-density");
  if (samples.empty())
    throw validation_error("curve-density: 'samples' must be nonempty");
  json payload;
  payload["genus"] = bundle.curve.genus;
  payload["gram_hermitian_defect"] = bundle.gram.hermitian_defect;
  payload["gram_min_eigenvalue"] = bundle.gram.min_eigenvalue;
  json rho = json::array();
  for (const auto& x : samples)
    rho.push_back(curves::canonical_density(bundle.curve, bundle.gram, x));
  payload["rho"] = rho;
  return {payload.dump(2),
          curves::density_csv(bundle.curve, bundle.gram, samples)};
}

Outputs run_curve_mass(const json& p, int threads) {
  check_keys(p, {"coefficients"}, {"radial_nodes"}, "curve-mass");
  auto bundle = curve_from_params(p, "curve-mass");
  int nodes = p.contains("radial_nodes")
                  ? int(get_int(p, "radial_nodes", 16, 20000, "curve-mass"))
                  : 192;
  auto m = curves::total_mass(bundle.curve, bundle.gram, nodes, threads);
  json payload = json::parse(curves::mass_report_json(m));
  payload["genus"] = bundle.curve.genus;
  payload["deviation_from_genus"] = std::abs(m.value - double(bundle.curve.genus));
  std::ostringstream csv;
  csv << "quantity,value\nmass," << std::setprecision(17) << m.value
      << "\ngenus," << bundle.curve.genus << "\ntail_bound," << m.tail_bound << "\n";
  return {payload.dump(2), csv.str()};
}

Outputs run_disk(const json& p, std::uint64_t seed) {
  check_keys(p, {"radii"}, {"grid", "moebius_params"}, "disk");
  if (!p["radii"].is_array() || p["radii"].empty())
    throw validation_error("disk: 'radii' must be a nonempty array");
  std::vector<double> radii;
  for (const auto& r : p["radii"]) {
    if (!r.is_number()) throw validation_error("disk: radii must be numbers");
    radii.push_back(r.get<double>());
  }
  int grid = p.contains("grid") ? int(get_int(p, "grid", 4, 4096, "disk")) : 64;
  int mparams =
      p.contains("moebius_params") ? int(get_int(p, "moebius_params", 1, 10000, "disk")) : 10;
  auto checks = disk::model_checks(radii, grid, mparams, seed);
  std::ostringstream csv;
  csv << "radius,exhaustion_sup\n";
  for (std::size_t k = 0; k < checks.radii.size(); ++k)
    csv << std::setprecision(17) << checks.radii[k] << ","
        << checks.exhaustion_sup[k] << "\n";
  return {disk::model_checks_json(checks), csv.str()};
}

Outputs dispatch(const Config& c) {
  json p = parse_object(c.params, "params");
  if (c.kind == "betti") return run_betti(p);
  if (c.kind == "cover") return run_cover(p);
  if (c.kind == "lueck-matrix") return run_lueck_matrix(p);
  if (c.kind == "lueck-betti") return run_lueck_betti(p);
  if (c.kind == "hodge-measure") return run_hodge_measure(p);
  if (c.kind == "limit-measure") return run_limit_measure(p);
  if (c.kind == "curve-density") return run_curve_density(p);
  if (c.kind == "curve-mass") return run_curve_mass(p, c.threads);
  if (c.kind == "disk") return run_disk(p, c.seed);
  throw validation_error("unknown experiment kind: " + c.kind);
}

std::string content_hash(const std::string& payload, const std::string& table) {
  return to_hex(fnv1a(payload + '\x1f' + table));
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw resource_error("cannot open for writing: " + path.string());
  out << bytes;
  if (!out) throw resource_error("write failed: " + path.string());
}

std::string resolve_cache_dir(const std::string& cache_dir) {
  if (!cache_dir.empty()) return cache_dir;
  const char* env = std::getenv("KAZHDAN_LAB_CACHE");
  if (env != nullptr && *env != '\0') return env;
  return ".klab-cache";
}

}  // namespace

const std::vector<std::string>& known_kinds() {
  static const std::vector<std::string> kinds = {
      "betti",        "cover",         "lueck-matrix",
      "lueck-betti",  "hodge-measure", "limit-measure",
      "curve-density", "curve-mass",   "disk"};
  return kinds;
}

Config config_from_json(const std::string& text) {
  json j = parse_object(text, "config");
  check_keys(j, {"schema_version", "kind"}, {"params", "seed", "threads"}, "config");
  Config c;
  if (!j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != kSchemaVersion)
    throw validation_error("config: unsupported schema_version");
  if (!j["kind"].is_string())
    throw validation_error("config: 'kind' must be a string");
  c.kind = j["kind"].get<std::string>();
  bool ok = false;
  for (const auto& k : known_kinds()) ok = ok || k == c.kind;
  if (!ok) throw validation_error("config: unknown kind '" + c.kind + "'");
  if (j.contains("params")) {
    if (!j["params"].is_object())
      throw validation_error("config: 'params' must be an object");
    c.params = j["params"].dump();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw validation_error("config: 'seed' must be a nonnegative integer");
    if (j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() < 0)
      throw validation_error("config: 'seed' must be nonnegative");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads"))
    c.threads = int(get_int(j, "threads", 1, 256, "config"));
  return c;
}

Config make_config(const std::string& kind, const std::string& params_json,
                   std::uint64_t seed, int threads) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  j["params"] = parse_object(params_json, "params");
  j["seed"] = seed;
  j["threads"] = threads;
  return config_from_json(j.dump());
}

std::string canonical_json(const Config& c) {
  json j;
  j["kind"] = c.kind;
  j["params"] = parse_object(c.params, "params");
  j["schema_version"] = c.schema_version;
  j["seed"] = c.seed;
  return j.dump();  // std::map backing: keys sorted, no whitespace
}

std::uint64_t config_hash(const Config& c) { return fnv1a(canonical_json(c)); }

std::string config_hash_hex(const Config& c) { return to_hex(config_hash(c)); }

std::string cache_entry_path(const Config& c, const std::string& cache_dir) {
  fs::path dir = resolve_cache_dir(cache_dir);
  return (dir / ("v" + std::to_string(kSchemaVersion)) /
          (config_hash_hex(c) + ".json"))
      .string();
}

ResultRecord run(const Config& c, const std::string& out_dir, bool use_cache,
                 const std::string& cache_dir) {
  ResultRecord rec;
  rec.kind = c.kind;
  rec.config_hash = config_hash_hex(c);
  rec.seed = c.seed;
  rec.module_version = kModuleVersion;
  rec.started_at = now_iso();

  const std::string canonical = canonical_json(c);
  const fs::path entry = cache_entry_path(c, cache_dir);

  if (use_cache && fs::exists(entry)) {
    std::ifstream in(entry, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    json stored = json::parse(buf.str(), nullptr, false);
    if (stored.is_discarded() || !stored.is_object() ||
        !stored.contains("config") || !stored.contains("payload") ||
        !stored.contains("table") || !stored.contains("content_hash"))
      throw consistency_error("cache corruption: unreadable entry " + entry.string());
    if (stored["config"].get<std::string>() != canonical)
      throw consistency_error("cache corruption: config mismatch in " + entry.string());
    std::string payload = stored["payload"].get<std::string>();
    std::string table = stored["table"].get<std::string>();
    if (stored["content_hash"].get<std::string>() != content_hash(payload, table))
      throw consistency_error("cache corruption: content hash mismatch in " +
                              entry.string());
    rec.cache_hit = true;
    rec.payload = payload;
    rec.table = table;
  } else {
    Outputs out = dispatch(c);  // validates params; throws before any write
    rec.payload = out.payload;
    rec.table = out.table;
    if (use_cache) {
      json stored;
      stored["schema_version"] = kSchemaVersion;
      stored["config"] = canonical;
      stored["payload"] = rec.payload;
      stored["table"] = rec.table;
      stored["content_hash"] = content_hash(rec.payload, rec.table);
      fs::create_directories(entry.parent_path());
      fs::path tmp = entry;
      tmp += ".tmp";
      write_file(tmp, stored.dump(2));
      fs::rename(tmp, entry);
    }
  }
  rec.finished_at = now_iso();

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    fs::path stem = fs::path(out_dir) / (c.kind + "-" + rec.config_hash);
    write_file(fs::path(stem.string() + ".json"), record_json(rec));
    if (!rec.table.empty()) {
      std::string provenance =
          "# config " + rec.config_hash + " seed " + std::to_string(rec.seed) + "\n";
      write_file(fs::path(stem.string() + ".csv"), provenance + rec.table);
    }
  }
  return rec;
}

std::string record_json(const ResultRecord& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = r.kind;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["module_version"] = r.module_version;
  j["cache_hit"] = r.cache_hit;
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  j["payload"] = json::parse(r.payload);
  return j.dump(2);
}

}  // namespace klab::experiment
