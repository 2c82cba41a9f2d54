#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ffn/ffn.hpp"

// Walks through one lift end to end: layers, colorings, decomposition,
// branch signatures, lifting verdicts and a numeric check.

namespace {

ffn::Network load(const std::string& name) {
  const char* env = std::getenv("FFN_CORPUS_DIR");
  std::ifstream in(std::string(env ? env : FFN_DEFAULT_CORPUS) + "/" + name + ".json");
  std::stringstream ss;
  ss << in.rdbuf();
  return ffn::parse_network(ss.str());
}

// First few lines of a long table.
std::string head(const std::string& text, int lines) {
  std::istringstream in(text);
  std::string out, line;
  for (int i = 0; i < lines && std::getline(in, line); ++i) out += line + "\n";
  if (std::getline(in, line)) out += "  ...\n";
  return out;
}

ffn::JetCoefficients jet(std::vector<double> f) {
  auto j = ffn::JetCoefficients::zero(f.size(), ffn::BifurcationType::Internal);
  for (std::size_t i = 0; i < f.size(); ++i) j.first_order[i + 1] = f[i];
  j.set_fij(0, 0, -2.0);
  j.mixed_lambda[0] = 1.0;
  return j;
}

}  // namespace

int main() {
  try {
    const auto quotient = load("fig6_quotient"), lift = load("fig6");
    const auto f = jet({1.0, 0.7});

    std::cout << "== quotient\n" << ffn::analyze_report(quotient).table;
    std::cout << "\n== lift\n" << ffn::analyze_report(lift).table;
    std::cout << "\n== decomposition\n" << ffn::lifts_report(quotient, lift).table;
    std::cout << "\n== branches of the lift\n" << head(ffn::branches_report(lift, f).table, 6);
    std::cout << "\n== lifting\n" << ffn::lifting_report(quotient, lift, f).table;

    const auto v = ffn::verify_report(lift, f);
    std::cout << "\n== numeric check\n" << head(v.table, 8);
    return v.mismatch ? 4 : 0;
  } catch (const ffn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  }
}
