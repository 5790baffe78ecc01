// Command-line driver: parses a .cfg program, runs the value-range
// analysis, and emits reports.
//
//   analyze <file.cfg> [--json out.json] [--text] [--wto]
//           [--oracle seeds=<n> fuel=<n>] [--report-nodes all|marked]
//
// Exit codes:
//   0  analysis completed
//   1  file, parse, or semantic error
//   2  an iteration budget was exhausted and at least one function was
//      degraded to the trivial (all-top) result
//   3  the execution oracle found a state outside the reported ranges
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varan/analysis.hpp"
#include "varan/cfg_text.hpp"
#include "varan/report.hpp"
#include "varan/wto.hpp"

namespace {

struct OracleSpec {
  std::uint64_t seeds = 20;
  std::uint64_t fuel = 500;
};

// Accepts the `seeds=<n> fuel=<n>` argument pair in either order.
bool parse_oracle_spec(const std::vector<std::string>& args, OracleSpec& out,
                       std::string& err) {
  for (const std::string& a : args) {
    auto eq = a.find('=');
    if (eq == std::string::npos) {
      err = "expected key=value, got '" + a + "'";
      return false;
    }
    std::string key = a.substr(0, eq);
    std::string value = a.substr(eq + 1);
    std::uint64_t n = 0;
    try {
      std::size_t used = 0;
      n = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      err = "'" + value + "' is not a number";
      return false;
    }
    if (key == "seeds") {
      out.seeds = n;
    } else if (key == "fuel") {
      out.fuel = n;
    } else {
      err = "unknown oracle option '" + key + "'";
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-range analysis for .cfg programs"};
  app.name("analyze");

  std::string input;
  std::string json_path;
  bool text = false;
  bool wto = false;
  std::vector<std::string> oracle_args;
  std::string report_nodes = "all";

  app.add_option("file", input, "program to analyze (.cfg text format)")
      ->required();
  app.add_option("--json", json_path, "write the JSON report to this file");
  app.add_flag("--text", text, "print the text report (default when no other output is requested)");
  app.add_flag("--wto", wto, "print each function's iteration order");
  app.add_option("--oracle", oracle_args,
                 "run concrete executions against the result: seeds=<n> fuel=<n>")
      ->expected(1, 2);
  app.add_option("--report-nodes", report_nodes,
                 "report every node (all) or only @report-marked ones (marked)")
      ->check(CLI::IsMember({"all", "marked"}));

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(input);
  if (!in) {
    std::cerr << "analyze: cannot open '" << input << "'\n";
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();

  varan::CfgProgram prog;
  try {
    prog = varan::parse_program(buf.str());
    varan::validate(prog);
  } catch (const varan::ParseError& e) {
    std::cerr << "analyze: " << input << ": " << e.what() << "\n";
    return 1;
  } catch (const varan::SemanticError& e) {
    std::cerr << "analyze: " << input << ": " << e.what() << "\n";
    return 1;
  }

  OracleSpec oracle;
  bool run_oracle = !oracle_args.empty();
  if (run_oracle) {
    std::string err;
    if (!parse_oracle_spec(oracle_args, oracle, err)) {
      std::cerr << "analyze: --oracle: " << err << "\n";
      return 1;
    }
  }

  varan::AnalysisResult result = varan::analyze_program(prog);

  if (wto) {
    for (const varan::FunctionResult& fr : result.functions)
      std::cout << "wto " << fr.fn->name << ": " << varan::to_string(fr.order)
                << "\n";
  }

  varan::ReportNodes which = report_nodes == "marked"
                                 ? varan::ReportNodes::Marked
                                 : varan::ReportNodes::All;
  varan::ProgramReport rep = varan::build_report(result, which);

  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) {
      std::cerr << "analyze: cannot write '" << json_path << "'\n";
      return 1;
    }
    out << varan::report_to_json(rep).dump(2) << "\n";
  }

  bool default_text = json_path.empty() && !wto && !run_oracle;
  if (text || default_text) std::cout << varan::report_to_text(rep);

  std::size_t violations = 0;
  if (run_oracle) {
    const varan::CfgFunction& entry = prog.entry_function();
    std::size_t states = 0;
    for (std::uint64_t seed = 0; seed < oracle.seeds; ++seed) {
      varan::TraceResult tr =
          varan::trace(prog, varan::make_seed_env(entry, seed), oracle.fuel);
      states += tr.states.size();
      for (const varan::OracleViolation& v :
           varan::check_against_oracle(result, tr)) {
        ++violations;
        std::cerr << "oracle violation (seed " << seed << "): " << v.message
                  << "\n";
      }
    }
    std::cout << "oracle: " << violations << " violation(s) over "
              << oracle.seeds << " seed(s), " << states
              << " state(s) checked, fuel " << oracle.fuel << "\n";
  }

  for (const varan::FunctionResult& fr : result.functions) {
    if (fr.fallback)
      std::cerr << "analyze: function '" << fr.fn->name
                << "' exhausted its iteration budget; result degraded to top\n";
  }

  if (violations > 0) return 3;
  if (result.any_fallback) return 2;
  return 0;
}
