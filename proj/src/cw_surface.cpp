#include "klab/cw_surface.hpp"

#include <numeric>

#include "json.hpp"
#include "klab/errors.hpp"

namespace klab::complexes {

namespace {

int word_start(const CWSurface& s, const SignedEdge& se) {
  return se.sign > 0 ? s.edges[se.edge].src : s.edges[se.edge].tgt;
}

int word_end(const CWSurface& s, const SignedEdge& se) {
  return se.sign > 0 ? s.edges[se.edge].tgt : s.edges[se.edge].src;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

CWSurface genus_surface_complex(int g) {
  if (g < 1) throw validation_error("genus must be at least 1");
  CWSurface s;
  s.genus = g;
  s.vertex_count = 1;
  s.edges.assign(2 * g, Edge{0, 0});
  std::vector<SignedEdge> word;
  word.reserve(4 * g);
  for (int i = 0; i < g; ++i) {
    int a = 2 * i, b = 2 * i + 1;
    word.push_back({a, +1});
    word.push_back({b, +1});
    word.push_back({a, -1});
    word.push_back({b, -1});
  }
  s.faces.push_back(std::move(word));
  return s;
}

std::vector<std::string> generator_edge_names(int g) {
  std::vector<std::string> names;
  names.reserve(2 * g);
  for (int i = 1; i <= g; ++i) {
    names.push_back("a" + std::to_string(i));
    names.push_back("b" + std::to_string(i));
  }
  return names;
}

void validate(const CWSurface& s) {
  if (s.vertex_count < 1) throw validation_error("surface needs a vertex");
  if (s.genus < 0) throw validation_error("negative genus");
  for (const auto& e : s.edges)
    if (e.src < 0 || e.src >= s.vertex_count || e.tgt < 0 ||
        e.tgt >= s.vertex_count)
      throw validation_error("edge endpoint out of range");
  for (const auto& word : s.faces) {
    if (word.empty()) throw validation_error("empty face word");
    for (const auto& se : word) {
      if (se.edge < 0 || se.edge >= int(s.edges.size()))
        throw validation_error("face word references unknown edge");
      if (se.sign != 1 && se.sign != -1)
        throw validation_error("face word sign must be +1 or -1");
    }
    for (std::size_t i = 0; i < word.size(); ++i) {
      const auto& cur = word[i];
      const auto& nxt = word[(i + 1) % word.size()];
      if (word_end(s, cur) != word_start(s, nxt))
        throw validation_error("face word is not a closed edge path");
    }
  }
  UnionFind uf(s.vertex_count);
  for (const auto& e : s.edges) uf.unite(e.src, e.tgt);
  int root = uf.find(0);
  for (int v = 1; v < s.vertex_count; ++v)
    if (uf.find(v) != root) throw validation_error("1-skeleton not connected");
  if (euler_characteristic(s) != 2 - 2 * s.genus)
    throw validation_error("Euler characteristic does not match genus");
  BoundaryMaps d = boundary_matrices(s);
  if (!is_zero(multiply(d.d1, d.d0)))
    throw validation_error("coboundary composite d1*d0 is nonzero");
  if (s.labels) {
    if (int(s.labels->vertices.size()) != s.vertex_count ||
        s.labels->edges.size() != s.edges.size() ||
        s.labels->faces.size() != s.faces.size())
      throw validation_error("label arrays do not match cell counts");
  }
}

int euler_characteristic(const CWSurface& s) {
  return s.vertex_count - int(s.edges.size()) + int(s.faces.size());
}

BoundaryMaps boundary_matrices(const CWSurface& s) {
  BoundaryMaps m;
  m.d0 = IntMatrix(int(s.edges.size()), s.vertex_count);
  for (int e = 0; e < int(s.edges.size()); ++e) {
    m.d0.at(e, s.edges[e].tgt) += 1;
    m.d0.at(e, s.edges[e].src) -= 1;
  }
  m.d1 = IntMatrix(int(s.faces.size()), int(s.edges.size()));
  for (int f = 0; f < int(s.faces.size()); ++f)
    for (const auto& se : s.faces[f]) m.d1.at(f, se.edge) += se.sign;
  return m;
}

BettiVector betti_numbers(const CWSurface& s) {
  BoundaryMaps d = boundary_matrices(s);
  int r0 = exact_rank(d.d0);
  int r1 = exact_rank(d.d1);
  BettiVector b;
  b.b0 = s.vertex_count - r0;
  b.b1 = int(s.edges.size()) - r0 - r1;
  b.b2 = int(s.faces.size()) - r1;
  return b;
}

std::string to_json(const CWSurface& s) {
  nlohmann::json j;
  j["genus"] = s.genus;
  j["vertices"] = s.vertex_count;
  auto edges = nlohmann::json::array();
  for (const auto& e : s.edges) edges.push_back({e.src, e.tgt});
  j["edges"] = std::move(edges);
  auto faces = nlohmann::json::array();
  for (const auto& word : s.faces) {
    auto w = nlohmann::json::array();
    for (const auto& se : word) w.push_back({se.edge, se.sign});
    faces.push_back(std::move(w));
  }
  j["faces"] = std::move(faces);
  if (s.labels) {
    nlohmann::json lab;
    lab["vertices"] = s.labels->vertices;
    lab["edges"] = s.labels->edges;
    lab["faces"] = s.labels->faces;
    j["labels"] = std::move(lab);
  }
  return j.dump(2);
}

CWSurface surface_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad surface JSON: ") + e.what());
  }
  CWSurface s;
  try {
    s.genus = j.at("genus").get<int>();
    s.vertex_count = j.at("vertices").get<int>();
    for (const auto& e : j.at("edges"))
      s.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    for (const auto& w : j.at("faces")) {
      std::vector<SignedEdge> word;
      for (const auto& se : w)
        word.push_back({se.at(0).get<int>(), se.at(1).get<int>()});
      s.faces.push_back(std::move(word));
    }
    if (j.contains("labels")) {
      CellLabels lab;
      lab.vertices =
          j["labels"].at("vertices").get<std::vector<std::array<int, 2>>>();
      lab.edges = j["labels"].at("edges").get<std::vector<std::array<int, 2>>>();
      lab.faces = j["labels"].at("faces").get<std::vector<std::array<int, 2>>>();
      s.labels = std::move(lab);
    }
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad surface JSON: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace klab::complexes
