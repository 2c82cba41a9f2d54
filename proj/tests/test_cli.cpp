#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"

using namespace ffn::testing;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string("FFN_CORPUS_DIR='") + corpus_dir() + "' '" + FFN_CLI_PATH + "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("ffn_cli_test_" + name);
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST(Cli, AnalyzeExamples) {
  EXPECT_EQ(first_line(run("analyze fig2").out), "5 layers; backward connected (cell 10)");
  EXPECT_EQ(first_line(run("analyze fig1").out), "4 layers; not backward connected");
  EXPECT_EQ(first_line(run("analyze single").out), "1 layer; backward connected");
  EXPECT_EQ(run("analyze " + corpus_dir() + "/fig2.json").code, 0);
}

TEST(Cli, QuotientsLiftsBranchesLifting) {
  EXPECT_EQ(first_line(run("quotients fig5_right --quotient fig5_left").out), "3 colorings with the given quotient");
  EXPECT_EQ(first_line(run("lifts fig3 fig1").out), "InsideLayer(1)");
  EXPECT_EQ(first_line(run("branches chain3 --internal --f 1").out), "4 signatures");
  const auto l = run("lifting fig3 fig1 --internal --f 1,1");
  EXPECT_EQ(l.code, 0);
  EXPECT_EQ(first_line(l.out), "AllLifted (exhaustive); theorems: Undetermined");
}

TEST(Cli, JsonModeIsVersioned) {
  for (const char* args : {"analyze fig2", "quotients fig6", "lifts fig6_quotient fig6", "branches chain3 --internal --f 1",
                           "lifting fig6_quotient fig6 --internal --f 1,0.7", "verify chain3 --internal --f 1"}) {
    const auto r = run(std::string(args) + " --json");
    ASSERT_EQ(r.code, 0) << args;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("schema"), "ffn-report/1") << args;
    EXPECT_EQ(run(std::string("--format json ") + args).out, r.out) << args;
  }
}

TEST(Cli, OutputIsByteIdentical) {
  const std::string args = "verify fig3 --internal --f 1,0.7 --format csv";
  EXPECT_EQ(run(args).out, run(args).out);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("analyze").code, 1);
  EXPECT_EQ(run("analyze no_such_network").code, 1);
  EXPECT_EQ(run("branches chain3").code, 1);                        // no jet
  EXPECT_EQ(run("branches chain3 --internal --f 1,x").code, 1);      // bad number
  EXPECT_EQ(run("branches chain3 --internal --valency --f 1").code, 1);
  EXPECT_EQ(run("analyze " + temp_file("bad.json", "{\"cells\": [")).code, 2);
  EXPECT_EQ(run("branches chain3 --internal --f 1,2").code, 3);      // arity
  EXPECT_EQ(run("branches fig2 --internal --f 1,1,1").code, 3);      // genericity
  EXPECT_EQ(run("lifts fig2 fig1").code, 3);                         // not a lift
  EXPECT_EQ(run("verify fig2 --internal --f 1,0.7,0.4").code, 4);    // window limit
  EXPECT_EQ(run("verify chain3 --internal --f 1").code, 0);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, JetFileAndFlagOverrides) {
  const std::string jet = temp_file("jet.json",
                                    R"({"type": "internal", "k": 1, "first_order": [0, 1],
                                        "second_order": [[0, 0, -2]], "mixed_lambda": [1, 0]})");
  const auto from_file = run("branches chain3 --jet " + jet + " --json");
  const auto from_flags = run("branches chain3 --internal --f 1 --json");
  ASSERT_EQ(from_file.code, 0);
  EXPECT_EQ(from_file.out, from_flags.out);
  // flags win over the file
  const auto overridden = run("branches chain3 --jet " + jet + " --f00 2 --json");
  const auto direct = run("branches chain3 --internal --f 1 --f00 2 --json");
  EXPECT_EQ(overridden.out, direct.out);
  EXPECT_NE(overridden.out, from_file.out);
  EXPECT_EQ(run("branches chain3 --jet " + temp_file("badjet.json", "{\"type\": \"odd\", \"k\": 1}")).code, 2);
}

TEST(Cli, ValencyFlags) {
  const auto r = run("branches fig5_right --valency --f 1,1 --json");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out).at("count"), 8);
  EXPECT_EQ(run("verify fig3 --valency --f 1,1").code, 0);
}

TEST(Cli, SecondOrderFlags) {
  const auto a = run("branches chain3 --internal --f 1 --fij 0,0,-2 --fil 0,1 --json");
  const auto b = run("branches chain3 --internal --f 1 --json");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(run("branches chain3 --internal --f 1 --fij 0,5,1").code, 1);
}
