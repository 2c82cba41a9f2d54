#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ffn/ffn.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string corpus_dir() {
  if (const char* env = std::getenv("FFN_CORPUS_DIR")) return env;
  return FFN_DEFAULT_CORPUS;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A path, or a bare name looked up in the corpus directory.
ffn::Network load_network(const std::string& arg) {
  fs::path p(arg);
  if (!fs::exists(p)) {
    for (const fs::path& cand : {fs::path(corpus_dir()) / arg, fs::path(corpus_dir()) / (arg + ".json")})
      if (fs::exists(cand)) {
        p = cand;
        break;
      }
  }
  if (!fs::exists(p)) throw UsageError("no such network: " + arg);
  try {
    return ffn::parse_network(read_text(p));
  } catch (const ffn::ParseError& e) {
    throw ffn::ParseError(p.string() + ": " + e.what());
  }
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

struct JetFlags {
  bool internal = false, valency = false;
  std::string file;
  std::string f;
  std::optional<double> f0, f00, f0l;
  std::vector<std::string> fij, fil;

  void attach(CLI::App* cmd) {
    auto* i = cmd->add_flag("--internal", internal, "bifurcation from the internal dynamics");
    auto* v = cmd->add_flag("--valency", valency, "bifurcation from the valency");
    i->excludes(v);
    cmd->add_option("--jet", file, "JSON file with jet coefficients")->check(CLI::ExistingFile);
    cmd->add_option("--f", f, "f_1,...,f_k");
    cmd->add_option("--f0", f0, "f_0 (valency default: -(f_1+...+f_k))");
    cmd->add_option("--f00", f00, "f_00 (default -2)");
    cmd->add_option("--f0l", f0l, "f_0lambda (default 1)");
    cmd->add_option("--fij", fij, "i,j,value for a second-order coefficient (repeatable)");
    cmd->add_option("--fil", fil, "i,value for a mixed lambda coefficient (repeatable)");
  }

  ffn::JetCoefficients build(const ffn::Network& n) const {
    auto warn = [](const std::string& what) { std::cerr << "warning: " << what << " overrides the jet file\n"; };
    const bool from_file = !file.empty();
    ffn::JetCoefficients jet;
    if (from_file) {
      try {
        jet = ffn::jet_from_json(nlohmann::json::parse(read_text(file)));
      } catch (const nlohmann::json::parse_error& e) {
        throw ffn::ParseError(file + ": " + e.what());
      }
      if ((internal && jet.type != ffn::BifurcationType::Internal) ||
          (valency && jet.type != ffn::BifurcationType::Valency)) {
        warn(internal ? "--internal" : "--valency");
        jet.type = internal ? ffn::BifurcationType::Internal : ffn::BifurcationType::Valency;
      }
    } else {
      if (!internal && !valency) throw UsageError("give --internal or --valency, or a --jet file");
      if (f.empty()) throw UsageError("--f is required without a --jet file");
      const auto fs_ = parse_list("--f", f);
      jet = ffn::JetCoefficients::zero(fs_.size(), internal ? ffn::BifurcationType::Internal
                                                             : ffn::BifurcationType::Valency);
      jet.set_fij(0, 0, -2.0);
      jet.mixed_lambda[0] = 1.0;
    }
    if (!f.empty()) {
      const auto fs_ = parse_list("--f", f);
      if (fs_.size() != jet.k) throw UsageError("--f has " + std::to_string(fs_.size()) + " entries, jet has k = " + std::to_string(jet.k));
      if (from_file) warn("--f");
      for (std::size_t i = 0; i < fs_.size(); ++i) jet.first_order[i + 1] = fs_[i];
      if (!from_file && jet.type == ffn::BifurcationType::Valency) jet.first_order[0] = -jet.input_sum();
    }
    if (f0) {
      if (from_file) warn("--f0");
      jet.first_order[0] = *f0;
    }
    if (f00) {
      if (from_file) warn("--f00");
      jet.set_fij(0, 0, *f00);
    }
    if (f0l) {
      if (from_file) warn("--f0l");
      jet.mixed_lambda[0] = *f0l;
    }
    for (const auto& s : fij) {
      const auto v = parse_list("--fij", s);
      if (v.size() != 3 || v[0] < 0 || v[1] < 0 || v[0] > double(jet.k) || v[1] > double(jet.k))
        throw UsageError("--fij expects i,j,value with 0 <= i,j <= k");
      if (from_file) warn("--fij");
      jet.set_fij(static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), v[2]);
    }
    for (const auto& s : fil) {
      const auto v = parse_list("--fil", s);
      if (v.size() != 2 || v[0] < 0 || v[0] > double(jet.k)) throw UsageError("--fil expects i,value with 0 <= i <= k");
      if (from_file) warn("--fil");
      jet.mixed_lambda[static_cast<std::size_t>(v[0])] = v[1];
    }
    ffn::require_arity(n, jet);
    return jet;
  }
};

void emit(const ffn::Report& r, const std::string& format) {
  if (format == "json")
    std::cout << r.json.dump(2) << "\n";
  else if (format == "csv")
    std::cout << r.csv;
  else
    std::cout << r.table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feed-forward coupled cell networks: colorings, lifts and bifurcation branches"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "table";
  bool json = false;
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"json", "table", "csv"}));
  app.add_flag("--json", json, "shorthand for --format json");

  std::string net, lift, target;
  std::size_t bound = ffn::kDefaultColoringBound;
  JetFlags jet_flags;
  ffn::TraceOptions topt;
  ffn::EstimatorOptions eopt;

  auto* analyze = app.add_subcommand("analyze", "layers, backward connectivity and adjacency checks");
  analyze->add_option("network", net, "network file or corpus name")->required();

  auto* quotients = app.add_subcommand("quotients", "balanced colorings and their quotients");
  quotients->add_option("network", net, "network file or corpus name")->required();
  quotients->add_option("--quotient", target, "keep colorings whose quotient equals this network");
  quotients->add_option("--bound", bound, "largest network size to enumerate");

  auto* lifts = app.add_subcommand("lifts", "classify and decompose a lift");
  lifts->add_option("quotient", net, "quotient network")->required();
  lifts->add_option("lift", lift, "lift network")->required();

  auto* branches = app.add_subcommand("branches", "enumerate bifurcation branch signatures");
  branches->add_option("network", net, "network file or corpus name")->required();
  jet_flags.attach(branches);

  auto* lifting = app.add_subcommand("lifting", "which quotient branches lift, by theorems and exhaustively");
  lifting->add_option("quotient", net, "quotient network")->required();
  lifting->add_option("lift", lift, "lift network")->required();
  jet_flags.attach(lifting);

  auto* verify = app.add_subcommand("verify", "trace branches numerically and match them to signatures");
  verify->add_option("network", net, "network file or corpus name")->required();
  jet_flags.attach(verify);
  verify->add_option("--lambda-start", topt.lambda_start, "largest |lambda| on the grid");
  verify->add_option("--ratio", topt.ratio, "geometric grid ratio")->check(CLI::Range(0.05, 0.95));
  verify->add_option("--samples", topt.samples, "grid size")->check(CLI::Range(10, 200));
  verify->add_flag("--extrapolate-slope", eopt.extrapolate_slope, "fit slopes toward lambda = 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(ffn::ErrorCode::Usage);
  }
  if (json) format = "json";

  try {
    ffn::Report r;
    if (analyze->parsed()) {
      r = ffn::analyze_report(load_network(net));
    } else if (quotients->parsed()) {
      std::optional<ffn::Network> q;
      if (!target.empty()) q = load_network(target);
      r = ffn::quotients_report(load_network(net), q, bound);
    } else if (lifts->parsed()) {
      r = ffn::lifts_report(load_network(net), load_network(lift));
    } else if (branches->parsed()) {
      const auto n = load_network(net);
      r = ffn::branches_report(n, jet_flags.build(n));
    } else if (lifting->parsed()) {
      const auto n = load_network(net), l = load_network(lift);
      r = ffn::lifting_report(n, l, jet_flags.build(l));
    } else if (verify->parsed()) {
      const auto n = load_network(net);
      r = ffn::verify_report(n, jet_flags.build(n), topt, eopt);
    }
    emit(r, format);
    return r.mismatch ? static_cast<int>(ffn::ErrorCode::Mismatch) : 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ffn::ErrorCode::Usage);
  } catch (const ffn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ffn::ErrorCode::Parse);
  }
}
