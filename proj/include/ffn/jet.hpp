#pragma once

// Taylor coefficients of the cell function at the origin, nondegeneracy
// checks, the Jacobian of the network system and center-subspace dimensions.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffn/error.hpp"
#include "ffn/network.hpp"

namespace ffn {

enum class BifurcationType { Valency, Internal };

inline std::string to_string(BifurcationType t) { return t == BifurcationType::Valency ? "valency" : "internal"; }

/// Coefficients of f(x_0, x_1, ..., x_k, lambda) at the origin. Index 0 is the
/// cell's own state, index i >= 1 its type-i input.
struct JetCoefficients {
  std::size_t k = 0;
  std::vector<double> first_order;                 // f_0 .. f_k
  std::vector<std::vector<double>> second_order;   // symmetric f_ij, (k+1) x (k+1)
  std::vector<double> mixed_lambda;                // f_{0 lambda} .. f_{k lambda}
  BifurcationType type = BifurcationType::Internal;

  static JetCoefficients zero(std::size_t k, BifurcationType type) {
    JetCoefficients j;
    j.k = k;
    j.first_order.assign(k + 1, 0.0);
    j.second_order.assign(k + 1, std::vector<double>(k + 1, 0.0));
    j.mixed_lambda.assign(k + 1, 0.0);
    j.type = type;
    return j;
  }

  double f(std::size_t i) const { return first_order.at(i); }
  double fij(std::size_t i, std::size_t j) const { return second_order.at(i).at(j); }
  double fil(std::size_t i) const { return mixed_lambda.at(i); }
  double f00() const { return fij(0, 0); }
  double f0l() const { return fil(0); }

  void set_fij(std::size_t i, std::size_t j, double v) {
    second_order.at(i).at(j) = v;
    second_order.at(j).at(i) = v;
  }

  /// Sum of f_i over the inputs i = 1..k.
  double input_sum() const {
    double s = 0;
    for (std::size_t i = 1; i <= k; ++i) s += first_order[i];
    return s;
  }
  /// Sum of f_i over i = 0..k.
  double full_sum() const { return input_sum() + first_order[0]; }
  /// Sum of f_ij over all ordered pairs (i, j).
  double second_order_sum() const {
    double s = 0;
    for (const auto& row : second_order)
      for (double v : row) s += v;
    return s;
  }
  double mixed_lambda_sum() const {
    double s = 0;
    for (double v : mixed_lambda) s += v;
    return s;
  }
};

inline void check_shape(const JetCoefficients& jet) {
  if (jet.first_order.size() != jet.k + 1 || jet.mixed_lambda.size() != jet.k + 1 ||
      jet.second_order.size() != jet.k + 1)
    throw PreconditionError("jet arrays do not match k = " + std::to_string(jet.k));
  for (std::size_t i = 0; i <= jet.k; ++i) {
    if (jet.second_order[i].size() != jet.k + 1) throw PreconditionError("second-order jet is not square");
    for (std::size_t j = 0; j <= jet.k; ++j)
      if (jet.second_order[i][j] != jet.second_order[j][i]) throw PreconditionError("second-order jet is not symmetric");
  }
}

/// Nondegeneracy for the jet's bifurcation type. Quantities required to be
/// nonzero must exceed `eps` in absolute value (exact comparison by default).
inline void validate_jet(const JetCoefficients& jet, double eps = 0.0) {
  check_shape(jet);
  auto nonzero = [&](double v, const std::string& what) {
    if (!(std::abs(v) > eps)) throw GenericityError("genericity violated: " + what + " vanishes");
  };
  if (jet.type == BifurcationType::Internal) {
    if (jet.f(0) != 0.0) throw PreconditionError("internal-dynamics jet needs f_0 = 0");
    nonzero(jet.f00(), "f_00");
    nonzero(jet.f0l(), "f_0lambda");
    nonzero(jet.input_sum(), "f_1 + ... + f_k");
  } else {
    double scale = 0;
    for (double v : jet.first_order) scale += std::abs(v);
    if (std::abs(jet.full_sum()) > 1e-12 * scale) throw PreconditionError("valency jet needs f_0 + f_1 + ... + f_k = 0");
    nonzero(jet.f(0), "f_0");
    nonzero(jet.second_order_sum(), "the sum of all f_ij");
    nonzero(jet.mixed_lambda_sum(), "the sum of all f_ilambda");
  }
}

inline void require_arity(const Network& n, const JetCoefficients& jet) {
  if (jet.k != n.edge_types())
    throw PreconditionError("jet has k = " + std::to_string(jet.k) + " inputs, network has " +
                            std::to_string(n.edge_types()) + " edge types");
}

// ---------------------------------------------------------------------------
// JSON: {"type", "k", "first_order": [f_0..f_k], "second_order": [[i, j, v], ...],
//        "mixed_lambda": [f_0l..f_kl]}

inline nlohmann::json jet_to_json(const JetCoefficients& jet) {
  nlohmann::json j;
  j["type"] = to_string(jet.type);
  j["k"] = jet.k;
  j["first_order"] = jet.first_order;
  auto so = nlohmann::json::array();
  for (std::size_t a = 0; a <= jet.k; ++a)
    for (std::size_t b = a; b <= jet.k; ++b)
      if (jet.fij(a, b) != 0.0) so.push_back({a, b, jet.fij(a, b)});
  j["second_order"] = so;
  j["mixed_lambda"] = jet.mixed_lambda;
  return j;
}

inline JetCoefficients jet_from_json(const nlohmann::json& doc) {
  try {
    const std::string type = doc.at("type").get<std::string>();
    if (type != "internal" && type != "valency") throw ParseError("jet type must be 'internal' or 'valency'");
    const auto k = doc.at("k").get<std::size_t>();
    auto jet = JetCoefficients::zero(k, type == "valency" ? BifurcationType::Valency : BifurcationType::Internal);
    if (doc.contains("first_order")) jet.first_order = doc["first_order"].get<std::vector<double>>();
    if (doc.contains("mixed_lambda")) jet.mixed_lambda = doc["mixed_lambda"].get<std::vector<double>>();
    if (jet.first_order.size() != k + 1 || jet.mixed_lambda.size() != k + 1)
      throw ParseError("jet arrays must have k + 1 entries");
    for (const auto& e : doc.value("second_order", nlohmann::json::array())) {
      auto i = e.at(0).get<std::size_t>(), j = e.at(1).get<std::size_t>();
      if (i > k || j > k) throw ParseError("second-order index out of range");
      jet.set_fij(i, j, e.at(2).get<double>());
    }
    return jet;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed jet: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Linearization

inline std::vector<std::vector<double>> jacobian_at_origin(const Network& n, const JetCoefficients& jet) {
  require_arity(n, jet);
  std::vector<std::vector<double>> J(n.size(), std::vector<double>(n.size(), 0.0));
  for (CellIndex c = 0; c < n.size(); ++c) {
    J[c][c] += jet.f(0);
    for (std::size_t t = 0; t < n.edge_types(); ++t) J[c][n.source(t, c)] += jet.f(t + 1);
  }
  return J;
}

/// Dimension of the generalized kernel of the Jacobian at the bifurcation point.
inline std::size_t center_subspace_dim(const FeedForwardStructure& ffs, BifurcationType type) {
  if (type == BifurcationType::Valency) return ffs.layer_size(0);
  std::size_t d = 0;
  for (std::size_t j = 1; j <= ffs.depth(); ++j) d += ffs.layer_size(j);
  return d;
}

}  // namespace ffn
