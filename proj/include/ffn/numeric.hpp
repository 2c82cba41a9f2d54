#pragma once

// Numeric counterpart of the symbolic branch enumeration: polynomial cell
// functions built from a jet, a triangular equilibrium solver, continuation
// along a geometric lambda grid, and order/slope estimation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffn/branches.hpp"
#include "ffn/error.hpp"
#include "ffn/jet.hpp"
#include "ffn/network.hpp"

namespace ffn {

/// f = sum f_i x_i + 1/2 sum_{i,j} f_ij x_i x_j + lambda sum f_il x_i + stabilizer x_0^3.
/// Higher-order terms are zero.
class PolynomialCellFunction {
 public:
  explicit PolynomialCellFunction(JetCoefficients jet, double stabilizer = 0.0)
      : jet_(std::move(jet)), stab_(stabilizer) {
    check_shape(jet_);
  }

  const JetCoefficients& jet() const noexcept { return jet_; }
  double stabilizer() const noexcept { return stab_; }
  std::size_t arity() const noexcept { return jet_.k; }

  /// x holds (x_0, x_1, ..., x_k).
  double operator()(const std::vector<double>& x, double lambda) const {
    double v = stab_ * x[0] * x[0] * x[0];
    for (std::size_t i = 0; i <= jet_.k; ++i) {
      v += (jet_.f(i) + lambda * jet_.fil(i)) * x[i];
      for (std::size_t j = 0; j <= jet_.k; ++j) v += 0.5 * jet_.fij(i, j) * x[i] * x[j];
    }
    return v;
  }

  double partial(std::size_t i, const std::vector<double>& x, double lambda) const {
    double v = jet_.f(i) + lambda * jet_.fil(i);
    for (std::size_t j = 0; j <= jet_.k; ++j) v += jet_.fij(i, j) * x[j];
    if (i == 0) v += 3.0 * stab_ * x[0] * x[0];
    return v;
  }

 private:
  JetCoefficients jet_;
  double stab_;
};

// ---------------------------------------------------------------------------
// Network system

inline std::vector<double> cell_arguments(const Network& n, CellIndex c, const std::vector<double>& x) {
  std::vector<double> args(n.edge_types() + 1);
  args[0] = x[c];
  for (std::size_t t = 0; t < n.edge_types(); ++t) args[t + 1] = x[n.source(t, c)];
  return args;
}

inline std::vector<double> system_residual(const Network& n, const PolynomialCellFunction& f,
                                           const std::vector<double>& x, double lambda) {
  std::vector<double> r(n.size());
  for (CellIndex c = 0; c < n.size(); ++c) r[c] = f(cell_arguments(n, c, x), lambda);
  return r;
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

/// Coefficients a0..a3 of f restricted to x_c, other coordinates fixed from x.
/// Inputs wired back to c itself vary together with x_c.
inline std::array<double, 4> cell_polynomial(const Network& n, const PolynomialCellFunction& f, CellIndex c,
                                             const std::vector<double>& x, double lambda) {
  const auto& jet = f.jet();
  const std::size_t k = jet.k;
  std::vector<double> alpha(k + 1, 0.0), beta(k + 1, 0.0);
  alpha[0] = 1;
  for (std::size_t t = 0; t < k; ++t) {
    if (n.source(t, c) == c) alpha[t + 1] = 1;
    else beta[t + 1] = x[n.source(t, c)];
  }
  std::array<double, 4> a{0, 0, 0, f.stabilizer()};
  for (std::size_t i = 0; i <= k; ++i) {
    const double lin = jet.f(i) + lambda * jet.fil(i);
    a[1] += lin * alpha[i];
    a[0] += lin * beta[i];
    for (std::size_t j = 0; j <= k; ++j) {
      const double h = 0.5 * jet.fij(i, j);
      a[2] += h * alpha[i] * alpha[j];
      a[1] += h * (alpha[i] * beta[j] + alpha[j] * beta[i]);
      a[0] += h * beta[i] * beta[j];
    }
  }
  return a;
}

namespace detail {

inline double poly_eval(const std::array<double, 4>& a, double t) { return ((a[3] * t + a[2]) * t + a[1]) * t + a[0]; }
inline double poly_deriv(const std::array<double, 4>& a, double t) { return (3 * a[3] * t + 2 * a[2]) * t + a[1]; }

inline double polish(const std::array<double, 4>& a, double t) {
  for (int it = 0; it < 3; ++it) {
    const double d = poly_deriv(a, t);
    if (d == 0) break;
    const double next = t - poly_eval(a, t) / d;
    if (std::abs(poly_eval(a, next)) >= std::abs(poly_eval(a, t))) break;
    t = next;
  }
  return t;
}

}  // namespace detail

/// Real roots of a0 + a1 t + a2 t^2 + a3 t^3, ascending, polished by Newton.
inline std::vector<double> real_roots(const std::array<double, 4>& a) {
  std::vector<double> r;
  if (a[3] != 0) {
    // Depressed cubic t = u - b/3.
    const double b = a[2] / a[3], c = a[1] / a[3], d = a[0] / a[3];
    const double p = c - b * b / 3, q = 2 * b * b * b / 27 - b * c / 3 + d;
    const double disc = q * q / 4 + p * p * p / 27;
    if (disc > 0) {
      const double s = std::sqrt(disc);
      r.push_back(std::cbrt(-q / 2 + s) + std::cbrt(-q / 2 - s) - b / 3);
    } else if (p == 0) {
      r.push_back(-b / 3);
    } else {
      const double m = 2 * std::sqrt(-p / 3);
      const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
      const double th = std::acos(arg) / 3;
      for (int j = 0; j < 3; ++j) r.push_back(m * std::cos(th - 2 * M_PI * j / 3) - b / 3);
    }
  } else if (a[2] != 0) {
    const double disc = a[1] * a[1] - 4 * a[2] * a[0];
    if (disc == 0) {
      r.push_back(-a[1] / (2 * a[2]));
    } else if (disc > 0) {
      const double q = -0.5 * (a[1] + std::copysign(std::sqrt(disc), a[1]));
      if (q == 0) {
        r = {0.0, 0.0};
      } else {
        r.push_back(q / a[2]);
        r.push_back(a[0] / q);
      }
    }
  } else if (a[1] != 0) {
    r.push_back(-a[0] / a[1]);
  } else if (a[0] == 0) {
    throw PreconditionError("cell equation vanishes identically; equilibria are not isolated");
  }
  for (double& t : r) t = detail::polish(a, t);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

struct Equilibrium {
  std::vector<double> state;
  std::vector<int> label;  // per cell: index of the chosen root among the admissible ones
  double residual = 0;
};

struct SolverOptions {
  double cluster_tol = 1e-9;
  bool local_only = true;  // drop roots that stay away from 0 as lambda -> 0
};

/// Every equilibrium at fixed lambda by layer-wise root propagation.
inline std::vector<Equilibrium> all_equilibria_at(const Network& n, const PolynomialCellFunction& f, double lambda,
                                                  const SolverOptions& opt = {}) {
  const auto ffs = require_layers(n);
  require_arity(n, f.jet());
  std::vector<CellIndex> order;
  for (const auto& layer : ffs.layers) order.insert(order.end(), layer.begin(), layer.end());

  std::vector<Equilibrium> partial{{std::vector<double>(n.size(), 0.0), std::vector<int>(n.size(), -1), 0.0}};
  for (CellIndex c : order) {
    std::vector<Equilibrium> next;
    for (const auto& e : partial) {
      const auto a = cell_polynomial(n, f, c, e.state, lambda);
      // Linear coefficient at lambda = 0 with all inputs zero decides which roots stay local.
      const auto a0 = cell_polynomial(n, f, c, std::vector<double>(n.size(), 0.0), 0.0);
      const double bound = (opt.local_only && a0[1] != 0 && a[2] != 0) ? 0.5 * std::abs(a0[1] / a[2]) : INFINITY;
      int idx = 0;
      for (double t : real_roots(a)) {
        if (!(std::abs(t) < bound)) continue;
        Equilibrium ne = e;
        ne.state[c] = t;
        ne.label[c] = idx++;
        next.push_back(std::move(ne));
      }
    }
    partial = std::move(next);
  }
  std::vector<Equilibrium> out;
  for (auto& e : partial) {
    bool dup = false;
    for (const auto& o : out) {
      double d = 0;
      for (CellIndex c = 0; c < n.size(); ++c) d = std::max(d, std::abs(o.state[c] - e.state[c]));
      if (d < opt.cluster_tol) dup = true;
    }
    if (dup) continue;
    e.residual = inf_norm(system_residual(n, f, e.state, lambda));
    out.push_back(std::move(e));
  }
  return out;
}

/// Newton's method on the full system; the Jacobian is triangular in layer order.
/// Stops on a relative step size, so it also moves from tiny starting residuals.
inline std::optional<std::vector<double>> newton_solve(const Network& n, const PolynomialCellFunction& f,
                                                       std::vector<double> x, double lambda, double tol = 1e-12,
                                                       int max_iter = 60) {
  const auto ffs = require_layers(n);
  std::vector<CellIndex> order;
  for (const auto& layer : ffs.layers) order.insert(order.end(), layer.begin(), layer.end());
  for (int it = 0; it < max_iter; ++it) {
    const auto r = system_residual(n, f, x, lambda);
    std::vector<double> dx(n.size(), 0.0);
    for (CellIndex c : order) {
      const auto args = cell_arguments(n, c, x);
      double own = f.partial(0, args, lambda), rhs = -r[c];
      for (std::size_t t = 0; t < n.edge_types(); ++t) {
        const CellIndex s = n.source(t, c);
        if (s == c) own += f.partial(t + 1, args, lambda);
        else rhs -= f.partial(t + 1, args, lambda) * dx[s];
      }
      if (own == 0) return std::nullopt;
      dx[c] = rhs / own;
    }
    for (CellIndex c = 0; c < n.size(); ++c) x[c] += dx[c];
    if (!std::isfinite(inf_norm(x))) return std::nullopt;
    if (inf_norm(dx) <= 1e-14 * inf_norm(x)) break;
  }
  if (inf_norm(system_residual(n, f, x, lambda)) <= tol) return x;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Continuation

struct TraceOptions {
  double lambda_start = 1e-2;
  double ratio = 0.5;
  std::size_t samples = 20;
  std::size_t min_chain = 10;
  double residual_tol = 1e-12;
  SolverOptions solver{};
};

struct NumericBranch {
  int side = 1;
  std::vector<int> label;
  std::vector<double> lambdas;
  std::vector<std::vector<double>> states;
  std::vector<double> residuals;
};

struct TraceResult {
  std::vector<NumericBranch> branches;
  std::vector<std::string> log;
};

inline std::vector<double> lambda_grid(int side, const TraceOptions& opt) {
  std::vector<double> g(opt.samples);
  for (std::size_t i = 0; i < opt.samples; ++i) g[i] = side * opt.lambda_start * std::pow(opt.ratio, double(i));
  return g;
}

inline std::string label_text(const std::vector<int>& label) {
  std::string s;
  for (std::size_t i = 0; i < label.size(); ++i) s += (i ? "." : "") + std::to_string(label[i]);
  return s;
}

/// Links equilibria along the grid by their root-choice labels; Newton from the
/// previous sample must land on the next one, otherwise the link is logged.
inline TraceResult trace_branches(const Network& n, const PolynomialCellFunction& f, int side,
                                  const TraceOptions& opt = {}) {
  if (side != 1 && side != -1) throw PreconditionError("side must be +1 or -1");
  const auto grid = lambda_grid(side, opt);
  std::vector<std::map<std::vector<int>, Equilibrium>> at(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (auto& e : all_equilibria_at(n, f, grid[i], opt.solver)) at[i].emplace(e.label, std::move(e));

  TraceResult res;
  const std::string tag = side > 0 ? "+" : "-";
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    for (const auto& [label, e] : at[i])
      if (!at[i + 1].count(label))
        res.log.push_back("side " + tag + ": branch " + label_text(label) + " leaves the window after lambda = " +
                          std::to_string(grid[i]));

  for (const auto& [label, last] : at.back()) {
    std::size_t first = grid.size() - 1;
    while (first > 0 && at[first - 1].count(label)) --first;
    if (grid.size() - first < opt.min_chain) {
      res.log.push_back("side " + tag + ": branch " + label_text(label) + " dropped, only " +
                        std::to_string(grid.size() - first) + " samples");
      continue;
    }
    NumericBranch nb;
    nb.side = side;
    nb.label = label;
    for (std::size_t i = first; i < grid.size(); ++i) {
      const auto& e = at[i].at(label);
      if (i > first) {
        auto x = newton_solve(n, f, nb.states.back(), grid[i]);
        double d = INFINITY;
        if (x) {
          d = 0;
          for (CellIndex c = 0; c < n.size(); ++c) d = std::max(d, std::abs((*x)[c] - e.state[c]));
        }
        if (d > 1e-7 * inf_norm(e.state))
          res.log.push_back("side " + tag + ": branch " + label_text(label) + " Newton link ambiguous at lambda = " +
                            std::to_string(grid[i]));
      }
      if (e.residual > opt.residual_tol)
        res.log.push_back("side " + tag + ": branch " + label_text(label) + " residual " + std::to_string(e.residual));
      nb.lambdas.push_back(grid[i]);
      nb.states.push_back(e.state);
      nb.residuals.push_back(e.residual);
    }
    res.branches.push_back(std::move(nb));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Order and slope estimation

struct EstimatorOptions {
  double zero_threshold = 1e-10;
  std::size_t fit_samples = 8;
  double reject = 0.1;
  // Extrapolate the slope to lambda -> 0 by a polynomial fit in |lambda|^{2^-p}
  // instead of reading it off the last sample.
  bool extrapolate_slope = false;
};

struct OrderEstimate {
  bool ok = false;
  int order = -1;
  double slope = 0;
  double exponent = 0;  // fitted exponent; 0 for a zero coordinate
  std::string reason;
};

namespace detail {

// Least-squares polynomial fit of degree `deg`, returning the constant term.
inline double extrapolate_to_zero(const std::vector<double>& mu, const std::vector<double>& v, std::size_t deg) {
  const std::size_t m = deg + 1;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t s = 0; s < mu.size(); ++s) {
    std::vector<double> pw(m, 1.0);
    for (std::size_t i = 1; i < m; ++i) pw[i] = pw[i - 1] * mu[s];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) a[i][j] += pw[i] * pw[j];
      a[i][m] += pw[i] * v[s];
    }
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || a[col][col] == 0) continue;
      const double fct = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= m; ++j) a[r][j] -= fct * a[col][j];
    }
  }
  return a[0][m] / a[0][0];
}

}  // namespace detail

inline double branch_scale(double lambda, int order) {
  return (lambda > 0 ? 1.0 : -1.0) * std::pow(std::abs(lambda), std::ldexp(1.0, -order));
}

inline OrderEstimate estimate_order_slope(const NumericBranch& nb, CellIndex cell, const EstimatorOptions& opt = {}) {
  OrderEstimate est;
  if (nb.states.size() < 10) {
    est.reason = "fewer than 10 samples";
    return est;
  }
  double mx = 0;
  for (const auto& s : nb.states) mx = std::max(mx, std::abs(s.at(cell)));
  if (mx < opt.zero_threshold) {
    est.ok = true;
    return est;
  }
  const std::size_t m = std::min(opt.fit_samples, nb.states.size());
  const std::size_t off = nb.states.size() - m;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = off; i < nb.states.size(); ++i) {
    const double v = std::abs(nb.states[i][cell]);
    if (v == 0) {
      est.reason = "coordinate vanishes at some samples only";
      return est;
    }
    const double lx = std::log(std::abs(nb.lambdas[i])), ly = std::log(v);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  est.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  if (!(est.exponent > 0)) {
    est.reason = "fitted exponent " + std::to_string(est.exponent) + " is not positive";
    return est;
  }
  est.order = static_cast<int>(std::lround(-std::log2(est.exponent)));
  if (est.order < 0) {
    est.reason = "fitted exponent " + std::to_string(est.exponent) + " exceeds 1";
    return est;
  }
  const double target = std::ldexp(1.0, -est.order);
  if (std::abs(est.exponent - target) / target > opt.reject) {
    est.reason = "exponent " + std::to_string(est.exponent) + " does not lock to a dyadic value";
    return est;
  }
  if (opt.extrapolate_slope) {
    std::vector<double> mu, v;
    for (std::size_t i = off; i < nb.states.size(); ++i) {
      mu.push_back(std::pow(std::abs(nb.lambdas[i]), target));
      v.push_back(nb.states[i][cell] / branch_scale(nb.lambdas[i], est.order));
    }
    est.slope = detail::extrapolate_to_zero(mu, v, est.order == 0 ? 1 : 3);
  } else {
    est.slope = nb.states.back()[cell] / branch_scale(nb.lambdas.back(), est.order);
  }
  est.ok = true;
  return est;
}

// ---------------------------------------------------------------------------
// Matching against symbolic signatures

struct BranchMatch {
  int side = 1;
  std::size_t branch = 0;                // index into the branch list
  std::optional<std::size_t> signature;  // index into the signature / pattern list
  std::vector<OrderEstimate> estimates;
  std::string note;
};

struct MatchReport {
  std::vector<BranchMatch> branches;
  std::vector<std::pair<int, std::size_t>> unmatched_signatures;  // (side, index)
  bool perfect() const {
    if (!unmatched_signatures.empty()) return false;
    for (const auto& b : branches)
      if (!b.signature) return false;
    return true;
  }
};

inline bool slope_close(double est, double exact, double rel) {
  return std::abs(est - exact) <= rel * std::abs(exact);
}

inline MatchReport match_numeric_to_signatures(const std::vector<NumericBranch>& branches,
                                               const std::vector<BranchSignature>& sigs, double rel_tol = 0.02,
                                               const EstimatorOptions& eopt = {}) {
  MatchReport rep;
  for (int side : {1, -1}) {
    std::vector<bool> used(sigs.size(), false);
    for (std::size_t b = 0; b < branches.size(); ++b) {
      if (branches[b].side != side) continue;
      BranchMatch bm{side, b, std::nullopt, {}, {}};
      const std::size_t cells = branches[b].states.front().size();
      bool ok = true;
      for (CellIndex c = 0; c < cells; ++c) {
        bm.estimates.push_back(estimate_order_slope(branches[b], c, eopt));
        if (!bm.estimates.back().ok) {
          ok = false;
          bm.note = "cell " + std::to_string(c) + ": " + bm.estimates.back().reason;
        }
      }
      if (ok) {
        for (std::size_t s = 0; s < sigs.size() && !bm.signature; ++s) {
          if (used[s] || (sigs[s].delta != 0 && sigs[s].delta != side)) continue;
          bool eq = true;
          for (CellIndex c = 0; c < cells && eq; ++c) {
            eq = bm.estimates[c].order == sigs[s].orders[c] &&
                 (sigs[s].orders[c] < 0 || slope_close(bm.estimates[c].slope, sigs[s].slopes[c], rel_tol));
          }
          if (eq) {
            used[s] = true;
            bm.signature = s;
          }
        }
        if (!bm.signature) bm.note = "no signature with these orders and slopes";
      }
      rep.branches.push_back(std::move(bm));
    }
    for (std::size_t s = 0; s < sigs.size(); ++s)
      if (!used[s] && (sigs[s].delta == 0 || sigs[s].delta == side)) rep.unmatched_signatures.emplace_back(side, s);
  }
  return rep;
}

/// Valency branches are identified by which first-layer cells are nonzero;
/// those carry the common slope on both sides.
inline MatchReport match_numeric_to_patterns(const Network& n, const std::vector<NumericBranch>& branches,
                                             const std::vector<ValencyBranchPattern>& pats, double rel_tol = 0.02,
                                             const EstimatorOptions& eopt = {}) {
  const auto ffs = require_layers(n);
  MatchReport rep;
  for (int side : {1, -1}) {
    std::vector<bool> used(pats.size(), false);
    for (std::size_t b = 0; b < branches.size(); ++b) {
      if (branches[b].side != side) continue;
      BranchMatch bm{side, b, std::nullopt, {}, {}};
      std::vector<CellIndex> support;
      bool ok = true;
      for (CellIndex c = 0; c < n.size(); ++c) {
        bm.estimates.push_back(estimate_order_slope(branches[b], c, eopt));
        const auto& e = bm.estimates.back();
        if (ffs.layer_of[c] != 0) continue;
        if (!e.ok || e.order > 0) {
          ok = false;
          bm.note = "first-layer cell " + n.name(c) + " has no order-0 or zero estimate";
        } else if (e.order == 0) {
          support.push_back(c);
        }
      }
      if (ok) {
        for (std::size_t s = 0; s < pats.size() && !bm.signature; ++s) {
          if (used[s] || pats[s].support != support) continue;
          bool eq = true;
          for (CellIndex c : support) eq = eq && slope_close(bm.estimates[c].slope, pats[s].slope, rel_tol);
          if (eq) {
            used[s] = true;
            bm.signature = s;
          }
        }
        if (!bm.signature) bm.note = "no pattern with this support and slope";
      }
      rep.branches.push_back(std::move(bm));
    }
    for (std::size_t s = 0; s < pats.size(); ++s)
      if (!used[s]) rep.unmatched_signatures.emplace_back(side, s);
  }
  return rep;
}

struct VerifyReport {
  std::vector<NumericBranch> branches;
  std::vector<BranchSignature> signatures;             // internal jets
  std::vector<ValencyBranchPattern> patterns;          // valency jets
  MatchReport match;
  std::vector<std::string> log;
};

inline VerifyReport verify_numeric(const Network& n, const JetCoefficients& jet, const TraceOptions& topt = {},
                                   const EstimatorOptions& eopt = {}) {
  VerifyReport rep;
  const PolynomialCellFunction f(jet);
  for (int side : {1, -1}) {
    auto tr = trace_branches(n, f, side, topt);
    for (auto& b : tr.branches) rep.branches.push_back(std::move(b));
    rep.log.insert(rep.log.end(), tr.log.begin(), tr.log.end());
  }
  if (jet.type == BifurcationType::Internal) {
    rep.signatures = enumerate_branches_internal(n, jet);
    rep.match = match_numeric_to_signatures(rep.branches, rep.signatures, 0.02, eopt);
  } else {
    rep.patterns = enumerate_branches_valency(n, jet);
    rep.match = match_numeric_to_patterns(n, rep.branches, rep.patterns, 0.02, eopt);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Output

inline std::string continuation_csv(const Network& n, const std::vector<NumericBranch>& branches) {
  std::ostringstream os;
  os.precision(17);
  os << "side,branch_id,lambda";
  for (CellIndex c = 0; c < n.size(); ++c) os << "," << n.name(c);
  os << ",residual\n";
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& nb = branches[b];
    for (std::size_t i = 0; i < nb.lambdas.size(); ++i) {
      os << (nb.side > 0 ? "+1" : "-1") << "," << b << "," << nb.lambdas[i];
      for (double v : nb.states[i]) os << "," << v + 0.0;  // no negative zeros
      os << "," << nb.residuals[i] << "\n";
    }
  }
  return os.str();
}

inline nlohmann::ordered_json estimates_to_json(const Network& n, const std::vector<NumericBranch>& branches,
                                                const MatchReport& rep) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& bm : rep.branches) {
    nlohmann::ordered_json j;
    j["branch_id"] = bm.branch;
    j["side"] = bm.side;
    j["label"] = label_text(branches[bm.branch].label);
    j["samples"] = branches[bm.branch].lambdas.size();
    nlohmann::ordered_json cells;
    for (CellIndex c = 0; c < bm.estimates.size(); ++c) {
      const auto& e = bm.estimates[c];
      nlohmann::ordered_json ce;
      ce["ok"] = e.ok;
      ce["order"] = e.order;
      ce["slope"] = e.slope;
      ce["exponent"] = e.exponent;
      if (!e.ok) ce["reason"] = e.reason;
      cells[n.name(c)] = ce;
    }
    j["cells"] = cells;
    j["matched"] = bm.signature ? nlohmann::ordered_json(*bm.signature) : nlohmann::ordered_json(nullptr);
    if (!bm.note.empty()) j["note"] = bm.note;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace ffn
