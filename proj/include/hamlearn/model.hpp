#pragma once

// Hamiltonian ansatz, dual interaction graph, and the perturbing-operator
// hierarchy P_{k,l}: all Hermitian Paulis supported inside the union of at
// most l pairwise-connected term supports.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hamlearn/pauli.hpp"

namespace hamlearn {

struct HamiltonianModel {
  int n = 0;
  std::vector<PauliString> terms;  // E_alpha, canonical Hermitian, norm 1
  std::vector<double> true_coeffs; // fixture ground truth; empty when unknown
  // Optional commuting decomposition (F_alpha, nu_alpha) for test fixtures.
  std::vector<PauliString> commuting_terms;
  std::vector<double> commuting_coeffs;

  int m() const { return static_cast<int>(terms.size()); }

  bool has_true_coeffs() const { return !true_coeffs.empty(); }
  bool has_commuting_decomposition() const { return !commuting_terms.empty(); }

  // Locality k = max term support size.
  int locality() const {
    int k = 0;
    for (const auto& t : terms) k = std::max(k, t.weight());
    return k;
  }
};

inline void validate_model(const HamiltonianModel& model) {
  if (model.n < 1) throw std::invalid_argument("model: n must be positive");
  if (model.terms.empty()) throw std::invalid_argument("model: no terms");
  for (const auto& t : model.terms) {
    if (t.n() != model.n) throw std::invalid_argument("model: term qubit count mismatch");
    if (!t.is_canonical_hermitian()) {
      throw std::invalid_argument("model: term " + t.letters() +
                                  " is not in canonical Hermitian form");
    }
  }
  if (!model.true_coeffs.empty() &&
      model.true_coeffs.size() != model.terms.size()) {
    throw std::invalid_argument("model: coefficient count mismatch");
  }
  if (!model.commuting_terms.empty()) {
    if (model.commuting_terms.size() != model.terms.size() ||
        model.commuting_coeffs.size() != model.terms.size()) {
      throw std::invalid_argument("model: commuting decomposition size mismatch");
    }
    for (std::size_t a = 0; a < model.commuting_terms.size(); ++a) {
      const auto& f = model.commuting_terms[a];
      if (f.n() != model.n || !f.is_canonical_hermitian()) {
        throw std::invalid_argument("model: bad commuting term");
      }
      if ((f.support_mask() & ~model.terms[a].support_mask()) != 0) {
        throw std::invalid_argument("model: supp(F) not contained in supp(E)");
      }
      for (std::size_t b = 0; b < a; ++b) {
        if (!commutes(f, model.commuting_terms[b])) {
          throw std::invalid_argument("model: commuting terms do not commute");
        }
      }
    }
  }
}

// Graph on the m terms; edge when supports intersect.
struct DualInteractionGraph {
  int m = 0;
  std::vector<std::vector<int>> adj;  // sorted neighbor lists
  int degree = 0;                     // max vertex degree
};

inline DualInteractionGraph build_dual_graph(const HamiltonianModel& model) {
  DualInteractionGraph g;
  g.m = model.m();
  g.adj.assign(g.m, {});
  for (int a = 0; a < g.m; ++a) {
    for (int b = a + 1; b < g.m; ++b) {
      if (model.terms[a].support_mask() & model.terms[b].support_mask()) {
        g.adj[a].push_back(b);
        g.adj[b].push_back(a);
      }
    }
  }
  for (const auto& nb : g.adj) g.degree = std::max(g.degree, static_cast<int>(nb.size()));
  return g;
}

// All connected vertex sets S with 1 <= |S| <= l, each exactly once,
// ordered by (size, lexicographic). Sets are grown breadth-first from the
// previous level and deduplicated per level.
inline std::vector<std::vector<int>> enumerate_connected_subsets(
    const DualInteractionGraph& g, int l) {
  if (l < 1) throw std::invalid_argument("enumerate_connected_subsets: l >= 1 required");
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> level;
  for (int v = 0; v < g.m; ++v) level.insert({v});
  for (int size = 1; size <= l && !level.empty(); ++size) {
    out.insert(out.end(), level.begin(), level.end());
    if (size == l) break;
    std::set<std::vector<int>> next;
    for (const auto& s : level) {
      for (int v : s) {
        for (int u : g.adj[v]) {
          if (std::binary_search(s.begin(), s.end(), u)) continue;
          std::vector<int> grown = s;
          grown.insert(std::upper_bound(grown.begin(), grown.end(), u), u);
          next.insert(std::move(grown));
        }
      }
    }
    level = std::move(next);
  }
  return out;
}

// Lemma-style counting bound on |P_{k,l}|, m * d^l * 10^{k l}. The edgeless
// case d = 0 only admits singleton subsets, for which the d-independent
// count applies; max(d,1) keeps the bound meaningful there.
inline double pkl_size_bound(int m, int degree, int k, int l) {
  const double d = std::max(degree, 1);
  double bound = static_cast<double>(m);
  for (int i = 0; i < l; ++i) bound *= d;
  for (int i = 0; i < k * l; ++i) bound *= 10.0;
  return bound;
}

// The hierarchy level-l perturber set: every Hermitian Pauli (identity
// included) supported inside some admissible support union, deduplicated,
// in canonical order.
inline std::vector<PauliString> enumerate_pkl(const HamiltonianModel& model, int l) {
  if (l < 1) throw std::invalid_argument("enumerate_pkl: l >= 1 required");
  const auto graph = build_dual_graph(model);
  const auto subsets = enumerate_connected_subsets(graph, l);

  // Distinct support unions; drop unions covered by a larger one.
  std::set<std::uint64_t> unions;
  for (const auto& s : subsets) {
    std::uint64_t u = 0;
    for (int a : s) u |= model.terms[a].support_mask();
    unions.insert(u);
  }
  std::vector<std::uint64_t> maximal;
  for (std::uint64_t u : unions) {
    bool covered = false;
    for (std::uint64_t v : unions) {
      if (v != u && (u & ~v) == 0) { covered = true; break; }
    }
    if (!covered) maximal.push_back(u);
  }

  std::set<PauliKey> seen;
  std::vector<PauliString> out;
  for (std::uint64_t u : maximal) {
    std::vector<int> qubits;
    for (int q = 0; q < model.n; ++q) {
      if (u & PauliString::bit(q)) qubits.push_back(q);
    }
    const std::size_t count = std::size_t{1} << (2 * qubits.size());
    for (std::size_t code = 0; code < count; ++code) {
      std::uint64_t x = 0, z = 0;
      std::size_t c = code;
      for (int q : qubits) {
        if (c & 1) x |= PauliString::bit(q);
        if (c & 2) z |= PauliString::bit(q);
        c >>= 2;
      }
      if (seen.insert({x, z}).second) {
        PauliString p(model.n, x, z, 0);
        out.push_back(p.canonicalized());
      }
    }
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

// ---------------------------------------------------------------------------
// Model file format (JSON):
//   { "n": int,
//     "terms": [ { "pauli": "ZZII", "coeff": float|null }, ... ],
//     "commuting_decomposition": [ { "pauli": "ZIII", "nu": float }, ... ] }
// Coefficients are fixture ground truth and are ignored by learning.
// ---------------------------------------------------------------------------

inline HamiltonianModel model_from_json(const nlohmann::json& j) {
  HamiltonianModel model;
  model.n = j.at("n").get<int>();
  bool any_coeff = false;
  for (const auto& t : j.at("terms")) {
    const std::string letters = t.at("pauli").get<std::string>();
    if (static_cast<int>(letters.size()) != model.n) {
      throw std::invalid_argument("model json: pauli length != n");
    }
    model.terms.push_back(PauliString::from_string(letters));
    if (t.contains("coeff") && !t.at("coeff").is_null()) {
      any_coeff = true;
      model.true_coeffs.push_back(t.at("coeff").get<double>());
    } else {
      model.true_coeffs.push_back(0.0);
    }
  }
  if (!any_coeff) model.true_coeffs.clear();
  if (j.contains("commuting_decomposition") && !j.at("commuting_decomposition").is_null()) {
    for (const auto& t : j.at("commuting_decomposition")) {
      model.commuting_terms.push_back(
          PauliString::from_string(t.at("pauli").get<std::string>()));
      model.commuting_coeffs.push_back(t.at("nu").get<double>());
    }
  }
  validate_model(model);
  return model;
}

inline nlohmann::json model_to_json(const HamiltonianModel& model) {
  nlohmann::json j;
  j["n"] = model.n;
  j["terms"] = nlohmann::json::array();
  for (int a = 0; a < model.m(); ++a) {
    nlohmann::json t;
    t["pauli"] = model.terms[a].letters();
    if (model.has_true_coeffs()) t["coeff"] = model.true_coeffs[a];
    else t["coeff"] = nullptr;
    j["terms"].push_back(t);
  }
  if (model.has_commuting_decomposition()) {
    j["commuting_decomposition"] = nlohmann::json::array();
    for (std::size_t a = 0; a < model.commuting_terms.size(); ++a) {
      j["commuting_decomposition"].push_back(
          {{"pauli", model.commuting_terms[a].letters()},
           {"nu", model.commuting_coeffs[a]}});
    }
  }
  return j;
}

}  // namespace hamlearn
