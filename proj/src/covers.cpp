#include "klab/covers.hpp"

#include <algorithm>
#include <random>

#include "json.hpp"
#include "klab/errors.hpp"

namespace klab::covers {

FiniteGroupTable cyclic_group(int n) {
  if (n < 1) throw validation_error("cyclic group order must be positive");
  FiniteGroupTable q;
  q.order = n;
  q.identity = 0;
  q.table.resize(std::size_t(n) * n);
  q.inverse.resize(n);
  for (int g = 0; g < n; ++g) {
    for (int h = 0; h < n; ++h) q.table[std::size_t(g) * n + h] = (g + h) % n;
    q.inverse[g] = (n - g) % n;
  }
  return q;
}

FiniteGroupTable abelian_power(int n, int k, int cap) {
  if (n < 1 || k < 1) throw validation_error("abelian power needs n,k >= 1");
  double size = 1;
  for (int i = 0; i < k; ++i) {
    size *= n;
    if (size > double(cap))
      throw resource_error("group order " + std::to_string(std::int64_t(size)) +
                           " exceeds cap " + std::to_string(cap) +
                           " (parameter cap)");
  }
  int order = int(size);
  FiniteGroupTable q;
  q.order = order;
  q.identity = 0;
  q.table.resize(std::size_t(order) * order);
  q.inverse.resize(order);
  auto digits = [n, k](int id) {
    std::vector<int> d(k);
    for (int i = 0; i < k; ++i) {
      d[i] = id % n;
      id /= n;
    }
    return d;
  };
  auto encode = [n, k](const std::vector<int>& d) {
    int id = 0;
    for (int i = k - 1; i >= 0; --i) id = id * n + d[i];
    return id;
  };
  for (int g = 0; g < order; ++g) {
    auto dg = digits(g);
    for (int h = 0; h < order; ++h) {
      auto dh = digits(h);
      std::vector<int> sum(k);
      for (int i = 0; i < k; ++i) sum[i] = (dg[i] + dh[i]) % n;
      q.table[std::size_t(g) * order + h] = encode(sum);
    }
    std::vector<int> neg(k);
    for (int i = 0; i < k; ++i) neg[i] = (n - dg[i]) % n;
    q.inverse[g] = encode(neg);
  }
  return q;
}

void validate(const FiniteGroupTable& q, std::uint64_t seed) {
  if (q.order < 1) throw validation_error("group order must be positive");
  if (q.table.size() != std::size_t(q.order) * q.order ||
      int(q.inverse.size()) != q.order)
    throw validation_error("group table size mismatch");
  if (q.identity < 0 || q.identity >= q.order)
    throw validation_error("identity id out of range");
  for (int v : q.table)
    if (v < 0 || v >= q.order) throw validation_error("table entry out of range");
  for (int g = 0; g < q.order; ++g) {
    if (q.mul(q.identity, g) != g || q.mul(g, q.identity) != g)
      throw validation_error("identity law fails");
    if (q.inverse[g] < 0 || q.inverse[g] >= q.order ||
        q.mul(g, q.inverse[g]) != q.identity ||
        q.mul(q.inverse[g], g) != q.identity)
      throw validation_error("inverse law fails");
  }
  auto assoc = [&q](int a, int b, int c) {
    return q.mul(q.mul(a, b), c) == q.mul(a, q.mul(b, c));
  };
  if (q.order <= 64) {
    for (int a = 0; a < q.order; ++a)
      for (int b = 0; b < q.order; ++b)
        for (int c = 0; c < q.order; ++c)
          if (!assoc(a, b, c)) throw validation_error("associativity fails");
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, q.order - 1);
    std::uint64_t trials = 10ull * q.order * q.order;
    for (std::uint64_t t = 0; t < trials; ++t)
      if (!assoc(pick(rng), pick(rng), pick(rng)))
        throw validation_error("associativity fails on sampled triple");
  }
}

namespace {

// Image of the genus-g relator [a_1,b_1]...[a_g,b_g] under the edge images.
int relator_image(const FiniteGroupTable& q, const std::vector<int>& images,
                  int genus) {
  int acc = q.identity;
  for (int i = 0; i < genus; ++i) {
    int a = images[2 * i], b = images[2 * i + 1];
    acc = q.mul(acc, a);
    acc = q.mul(acc, b);
    acc = q.mul(acc, q.inv(a));
    acc = q.mul(acc, q.inv(b));
  }
  return acc;
}

bool images_generate(const FiniteGroupTable& q, const std::vector<int>& images) {
  std::vector<char> seen(q.order, 0);
  std::vector<int> frontier{q.identity};
  seen[q.identity] = 1;
  int count = 1;
  while (!frontier.empty()) {
    int g = frontier.back();
    frontier.pop_back();
    for (int im : images)
      for (int next : {q.mul(g, im), q.mul(g, q.inv(im))})
        if (!seen[next]) {
          seen[next] = 1;
          ++count;
          frontier.push_back(next);
        }
  }
  return count == q.order;
}

}  // namespace

void validate_for_genus(const CoverSpec& spec, int genus) {
  if (genus < 1) throw validation_error("genus must be at least 1");
  if (int(spec.images.size()) != 2 * genus)
    throw validation_error("cover spec has wrong number of generator images");
  validate(spec.group);
  for (int im : spec.images)
    if (im < 0 || im >= spec.group.order)
      throw validation_error("generator image out of range");
  if (relator_image(spec.group, spec.images, genus) != spec.group.identity)
    throw validation_error("surface relator does not map to the identity");
  if (!images_generate(spec.group, spec.images))
    throw validation_error("generator images do not generate the group");
}

std::vector<int> BuiltCover::edge_permutation(int h) const {
  std::vector<int> perm(complex.edges.size());
  int e_count = 2 * base_genus;
  for (int e = 0; e < e_count; ++e)
    for (int q = 0; q < degree; ++q)
      perm[edge_lift(e, q)] = edge_lift(e, group.mul(h, q));
  return perm;
}

BuiltCover build_cover(const complexes::CWSurface& base, const CoverSpec& spec) {
  complexes::validate(base);
  if (base.vertex_count != 1 || base.faces.size() != 1 ||
      int(base.edges.size()) != 2 * base.genus)
    throw validation_error("cover construction requires the one-vertex base");
  validate_for_genus(spec, base.genus);

  const FiniteGroupTable& q = spec.group;
  int d = q.order;
  int g = base.genus;

  BuiltCover out;
  out.group = q;
  out.images = spec.images;
  out.degree = d;
  out.base_genus = g;

  complexes::CWSurface& s = out.complex;
  s.genus = 1 + d * (g - 1);
  s.vertex_count = d;
  s.edges.resize(std::size_t(2 * g) * d);
  complexes::CellLabels labels;
  labels.vertices.resize(d);
  labels.edges.resize(s.edges.size());
  labels.faces.resize(d);
  for (int v = 0; v < d; ++v) labels.vertices[v] = {0, v};
  for (int e = 0; e < 2 * g; ++e)
    for (int qq = 0; qq < d; ++qq) {
      int idx = out.edge_lift(e, qq);
      s.edges[idx] = {qq, q.mul(qq, spec.images[e])};
      labels.edges[idx] = {e, qq};
    }

  const auto& base_word = base.faces[0];
  s.faces.resize(d);
  for (int qq = 0; qq < d; ++qq) {
    std::vector<complexes::SignedEdge> word;
    word.reserve(base_word.size());
    int cur = qq;
    for (const auto& se : base_word) {
      if (se.sign > 0) {
        word.push_back({out.edge_lift(se.edge, cur), +1});
        cur = q.mul(cur, spec.images[se.edge]);
      } else {
        int u = q.mul(cur, q.inv(spec.images[se.edge]));
        word.push_back({out.edge_lift(se.edge, u), -1});
        cur = u;
      }
    }
    if (cur != qq)
      throw consistency_error("relator walk did not close at its start");
    s.faces[qq] = std::move(word);
    labels.faces[qq] = {0, qq};
  }
  s.labels = std::move(labels);
  complexes::validate(s);
  return out;
}

CoverSpec cyclic_cover_spec(int g, int n, int generator) {
  if (g < 1 || n < 1) throw validation_error("need g >= 1 and n >= 1");
  if (generator < 0 || generator >= 2 * g)
    throw validation_error("generator index out of range");
  CoverSpec spec;
  spec.group = cyclic_group(n);
  spec.images.assign(2 * g, 0);
  spec.images[generator] = n == 1 ? 0 : 1;
  return spec;
}

CoverSpec homology_cover_spec(int g, int n, int cap) {
  if (g < 1 || n < 1) throw validation_error("need g >= 1 and n >= 1");
  CoverSpec spec;
  spec.group = abelian_power(n, 2 * g, cap);
  spec.images.resize(2 * g);
  int unit = 1;
  for (int i = 0; i < 2 * g; ++i) {
    spec.images[i] = n == 1 ? 0 : unit;
    if (n != 1) unit *= n;
  }
  return spec;
}

void validate(const TowerSpec& t, int genus, std::uint64_t seed) {
  if (t.levels.empty()) throw validation_error("tower has no levels");
  for (const auto& lvl : t.levels) validate_for_genus(lvl, genus);
  if (t.connecting.size() + 1 != t.levels.size())
    throw validation_error("tower needs one connecting map per adjacent pair");
  for (std::size_t k = 0; k < t.connecting.size(); ++k) {
    const auto& up = t.levels[k + 1].group;
    const auto& down = t.levels[k].group;
    const auto& phi = t.connecting[k];
    if (int(phi.size()) != up.order)
      throw validation_error("connecting map size mismatch");
    std::vector<char> hit(down.order, 0);
    for (int v : phi) {
      if (v < 0 || v >= down.order)
        throw validation_error("connecting map value out of range");
      hit[v] = 1;
    }
    if (std::count(hit.begin(), hit.end(), char(1)) != down.order)
      throw validation_error("connecting map is not surjective");
    auto hom_ok = [&](int a, int b) {
      return phi[up.mul(a, b)] == down.mul(phi[a], phi[b]);
    };
    if (up.order <= 2048) {
      for (int a = 0; a < up.order; ++a)
        for (int b = 0; b < up.order; ++b)
          if (!hom_ok(a, b))
            throw validation_error("connecting map is not a homomorphism");
    } else {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> pick(0, up.order - 1);
      for (int trial = 0; trial < 10 * up.order; ++trial)
        if (!hom_ok(pick(rng), pick(rng)))
          throw validation_error(
              "connecting map is not a homomorphism on sampled pair");
    }
    for (std::size_t i = 0; i < t.levels[k].images.size(); ++i)
      if (phi[t.levels[k + 1].images[i]] != t.levels[k].images[i])
        throw validation_error(
            "connecting map is incompatible with generator images");
  }
  if (t.limit_rank > 0) {
    if (int(t.limit_weights.size()) != 2 * genus)
      throw validation_error("limit weights need one row per generator");
    for (const auto& row : t.limit_weights)
      if (int(row.size()) != t.limit_rank)
        throw validation_error("limit weight row has wrong length");
  }
}

namespace {

void check_divisibility_chain(const std::vector<int>& moduli) {
  if (moduli.empty()) throw validation_error("tower needs at least one level");
  for (int n : moduli)
    if (n < 1) throw validation_error("moduli must be positive");
  for (std::size_t k = 0; k + 1 < moduli.size(); ++k)
    if (moduli[k + 1] % moduli[k] != 0)
      throw validation_error("moduli must form a divisibility chain");
}

}  // namespace

TowerSpec cyclic_tower(int g, const std::vector<int>& moduli, int generator) {
  check_divisibility_chain(moduli);
  TowerSpec t;
  for (int n : moduli) t.levels.push_back(cyclic_cover_spec(g, n, generator));
  for (std::size_t k = 0; k + 1 < moduli.size(); ++k) {
    std::vector<int> phi(moduli[k + 1]);
    for (int x = 0; x < moduli[k + 1]; ++x) phi[x] = x % moduli[k];
    t.connecting.push_back(std::move(phi));
  }
  t.declared_limit = "Z";
  t.limit_rank = 1;
  t.limit_weights.assign(2 * g, {0});
  t.limit_weights[generator] = {1};
  return t;
}

TowerSpec full_cyclic_tower(int g, const std::vector<int>& moduli) {
  check_divisibility_chain(moduli);
  TowerSpec t;
  for (int n : moduli) {
    CoverSpec spec;
    spec.group = cyclic_group(n);
    spec.images.assign(2 * g, n == 1 ? 0 : 1 % n);
    t.levels.push_back(std::move(spec));
  }
  for (std::size_t k = 0; k + 1 < moduli.size(); ++k) {
    std::vector<int> phi(moduli[k + 1]);
    for (int x = 0; x < moduli[k + 1]; ++x) phi[x] = x % moduli[k];
    t.connecting.push_back(std::move(phi));
  }
  t.declared_limit = "Z";
  t.limit_rank = 1;
  t.limit_weights.assign(2 * g, {1});
  return t;
}

TowerSpec homology_tower(int g, const std::vector<int>& moduli, int cap) {
  check_divisibility_chain(moduli);
  TowerSpec t;
  for (int n : moduli) t.levels.push_back(homology_cover_spec(g, n, cap));
  for (std::size_t k = 0; k + 1 < moduli.size(); ++k) {
    int nu = moduli[k + 1], nd = moduli[k];
    int up_order = t.levels[k + 1].group.order;
    std::vector<int> phi(up_order);
    for (int id = 0; id < up_order; ++id) {
      int rest = id, out = 0, mul = 1;
      for (int i = 0; i < 2 * g; ++i) {
        int digit = rest % nu;
        rest /= nu;
        out += (digit % nd) * mul;
        mul *= nd;
      }
      phi[id] = out;
    }
    t.connecting.push_back(std::move(phi));
  }
  t.declared_limit = "Z^" + std::to_string(2 * g);
  t.limit_rank = 2 * g;
  t.limit_weights.assign(2 * g, std::vector<int>(2 * g, 0));
  for (int i = 0; i < 2 * g; ++i) t.limit_weights[i][i] = 1;
  return t;
}

namespace {

nlohmann::json group_to_json(const FiniteGroupTable& q) {
  nlohmann::json j;
  j["order"] = q.order;
  j["identity"] = q.identity;
  auto rows = nlohmann::json::array();
  for (int g = 0; g < q.order; ++g) {
    auto row = nlohmann::json::array();
    for (int h = 0; h < q.order; ++h) row.push_back(q.mul(g, h));
    rows.push_back(std::move(row));
  }
  j["table"] = std::move(rows);
  return j;
}

FiniteGroupTable group_from_json(const nlohmann::json& j) {
  FiniteGroupTable q;
  q.order = j.at("order").get<int>();
  q.identity = j.at("identity").get<int>();
  if (q.order < 1) throw validation_error("group order must be positive");
  const auto& rows = j.at("table");
  if (int(rows.size()) != q.order)
    throw validation_error("group table row count mismatch");
  q.table.reserve(std::size_t(q.order) * q.order);
  for (const auto& row : rows) {
    if (int(row.size()) != q.order)
      throw validation_error("group table column count mismatch");
    for (const auto& v : row) q.table.push_back(v.get<int>());
  }
  q.inverse.assign(q.order, -1);
  for (int g = 0; g < q.order; ++g) {
    for (int h = 0; h < q.order; ++h)
      if (q.mul(g, h) == q.identity && q.mul(h, g) == q.identity) {
        q.inverse[g] = h;
        break;
      }
    if (q.inverse[g] < 0) throw validation_error("element has no inverse");
  }
  return q;
}

}  // namespace

std::string cover_spec_to_json(const CoverSpec& spec) {
  nlohmann::json j;
  j["group"] = group_to_json(spec.group);
  j["images"] = spec.images;
  return j.dump(2);
}

CoverSpec cover_spec_from_json(const std::string& text, int genus) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad cover spec JSON: ") + e.what());
  }
  CoverSpec spec;
  try {
    spec.group = group_from_json(j.at("group"));
    spec.images = j.at("images").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad cover spec JSON: ") + e.what());
  }
  validate_for_genus(spec, genus);
  return spec;
}

std::string tower_to_json(const TowerSpec& t) {
  nlohmann::json j;
  auto levels = nlohmann::json::array();
  for (const auto& lvl : t.levels) {
    nlohmann::json one;
    one["group"] = group_to_json(lvl.group);
    one["images"] = lvl.images;
    levels.push_back(std::move(one));
  }
  j["levels"] = std::move(levels);
  j["connecting"] = t.connecting;
  j["declared_limit"] = t.declared_limit;
  j["limit_rank"] = t.limit_rank;
  j["limit_weights"] = t.limit_weights;
  return j.dump(2);
}

TowerSpec tower_from_json(const std::string& text, int genus) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad tower JSON: ") + e.what());
  }
  TowerSpec t;
  try {
    for (const auto& lvl : j.at("levels")) {
      CoverSpec spec;
      spec.group = group_from_json(lvl.at("group"));
      spec.images = lvl.at("images").get<std::vector<int>>();
      t.levels.push_back(std::move(spec));
    }
    t.connecting = j.at("connecting").get<std::vector<std::vector<int>>>();
    t.declared_limit = j.at("declared_limit").get<std::string>();
    t.limit_rank = j.value("limit_rank", 0);
    if (j.contains("limit_weights"))
      t.limit_weights = j["limit_weights"].get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad tower JSON: ") + e.what());
  }
  validate(t, genus);
  return t;
}

}  // namespace klab::covers
