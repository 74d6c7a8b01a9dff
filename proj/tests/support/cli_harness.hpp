#pragma once

// Shared by the CLI unit tests and the acceptance suite. Needs FRACVAR_EXE,
// FRACVAR_TEST_DATA and FRACVAR_GOLDEN.

#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracvar_cli/commands.hpp"

namespace harness {

namespace fs = std::filesystem;

inline const std::string kData = FRACVAR_TEST_DATA;
inline const std::string kGolden = FRACVAR_GOLDEN;

inline std::string data(const std::string& name) { return kData + "/" + name; }

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;

  // Exit code and both streams in one document, as stored in golden files.
  std::string transcript() const {
    return "exit " + std::to_string(code) + "\n--- stdout\n" + out + "--- stderr\n" + err;
  }
};

inline Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = fracvar::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the built executable through the shell, capturing both streams.
inline Outcome spawn(const std::string& args) {
  const fs::path dir = fs::temp_directory_path();
  const std::string stem = "fracvar_cli_" + std::to_string(::getpid());
  const fs::path out = dir / (stem + ".out");
  const fs::path err = dir / (stem + ".err");
  const std::string cmd = std::string("'") + FRACVAR_EXE + "' " + args + " >'" + out.string() +
                          "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Outcome o{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  fs::remove(out);
  fs::remove(err);
  return o;
}

// Golden transcripts are compared token by token. Numbers match to a
// relative 1e-9 (absolute 1e-13), so the last printed digits may differ
// between platforms; everything else must be identical. Absolute data paths
// appear as <data>. Returns a description of the first mismatch. With
// FRACVAR_UPDATE_GOLDEN set the golden file is rewritten instead.
inline std::optional<std::string> golden_mismatch(const std::string& name, const Outcome& o) {
  std::string actual = o.transcript();
  for (std::size_t at; (at = actual.find(kData)) != std::string::npos;) {
    actual.replace(at, kData.size(), "<data>");
  }
  const fs::path path = fs::path(kGolden) / (name + ".txt");
  if (std::getenv("FRACVAR_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << actual;
    return std::nullopt;
  }
  if (!fs::exists(path)) return "missing golden " + path.string();
  const std::string expected = slurp(path);

  static const std::regex token(R"([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?|NaN|\S)");
  auto split = [](const std::string& s) {
    std::vector<std::string> t;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), token); it != std::sregex_iterator();
         ++it) {
      t.push_back(it->str());
    }
    return t;
  };
  auto as_number = [](const std::string& s, double& v) {
    if (s.empty() || !std::isdigit(static_cast<unsigned char>(s.back()))) return false;
    v = std::strtod(s.c_str(), nullptr);
    return true;
  };
  const auto a = split(actual);
  const auto e = split(expected);
  for (std::size_t i = 0; i < std::min(a.size(), e.size()); ++i) {
    double x = 0;
    double y = 0;
    if (as_number(a[i], x) && as_number(e[i], y)) {
      if (std::abs(x - y) <= 1e-13 + 1e-9 * std::abs(y)) continue;
    } else if (a[i] == e[i]) {
      continue;
    }
    return name + ": token " + std::to_string(i) + " is '" + a[i] + "', golden has '" + e[i] +
           "'\n--- actual transcript\n" + actual;
  }
  if (a.size() != e.size()) {
    return name + ": " + std::to_string(a.size()) + " tokens, golden has " +
           std::to_string(e.size()) + "\n--- actual transcript\n" + actual;
  }
  return std::nullopt;
}

struct GoldenCase {
  std::string name;
  std::vector<std::string> args;

  // Keeps test names readable in ctest listings.
  friend void PrintTo(const GoldenCase& c, std::ostream* os) { *os << c.name; }
};

// One or more transcripts per subcommand.
inline std::vector<GoldenCase> golden_cases() {
  return {
      {"operator_cfd_left",
       {"operator", "--kind", "cfd-left", "--alpha", "0.5", "--expr", "x", "--grid", "11"}},
      {"operator_combined_rlfd",
       {"operator", "--kind", "combined-rlfd", "--alpha", "0.5", "--beta", "0.3", "--gamma",
        "0.5", "--expr", "exp(x)", "--grid", "11"}},
      {"operator_rlfi_right_csv",
       {"operator", "--kind", "rlfi-right", "--alpha", "0.5", "--input", data("line_11.csv")}},
      {"operator_missing_gamma",
       {"operator", "--kind", "combined-cfd", "--alpha", "0.5", "--expr", "x", "--grid", "11"}},
      {"check_ibp",
       {"check", "ibp", "--alpha", "0.3", "--beta", "0.7", "--gamma", "0.4", "--f-expr",
        "sin(3.141592653589793*x)*exp(x)", "--g-expr", "cos(2*x) + x", "--grid", "201"}},
      {"check_el_linear",
       {"check", "el", "--problem", data("linear_small.txt"), "--trajectory",
        data("line_11.csv")}},
      {"check_el_isoperimetric",
       {"check", "el", "--problem", data("isoperimetric_small.txt"), "--trajectory",
        data("parabola_41.csv"), "--lambda", "6", "--norm", "l2", "--tol", "1"}},
      {"check_transversality_free",
       {"check", "transversality", "--problem", data("free_small.txt"), "--trajectory",
        data("zero_11.csv")}},
      {"check_transversality_capped",
       {"check", "transversality", "--problem", data("capped_small.txt"), "--trajectory",
        data("half_line_11.csv"), "--form", "literal"}},
      {"check_regularity",
       {"check", "regularity", "--problem", data("isoperimetric_small.txt"), "--trajectory",
        data("parabola_41.csv"), "--direction", data("bump_41.csv")}},
      {"check_complementarity_zero",
       {"check", "complementarity", "--problem", data("inequality_small.txt"), "--trajectory",
        data("line_41.csv")}},
      {"check_complementarity_slack",
       {"check", "complementarity", "--problem", data("inequality_small.txt"), "--trajectory",
        data("line_41.csv"), "--lambda", "2"}},
      {"check_oracle",
       {"check", "oracle", "--problem", data("oracle_7.txt"), "--samples", "2000"}},
      {"solve_basic", {"solve", data("basic_small.txt")}},
      {"solve_isoperimetric", {"solve", data("isoperimetric_small.txt")}},
      {"solve_iteration_limit",
       {"solve", data("basic_small.txt"), "--max-iter", "1", "--direction", "steepest"}},
      {"solve_missing_alpha", {"solve", data("missing_alpha.txt")}},
      {"solve_bad_flag", {"solve", data("basic_small.txt"), "--direction", "sideways"}},
  };
}

// Shell argument strings with the exit code each must produce.
inline std::vector<std::pair<std::string, int>> exit_code_table() {
  const std::string d = kData + "/";
  return {
      {"operator --kind cfd-left --alpha 0.5 --expr x --grid 11", 0},
      {"solve " + d + "basic_small.txt", 0},
      {"--help", 0},
      {"check el --help", 0},
      {"operator --kind cfd-left --alpha 1.5 --expr x --grid 11", 1},
      {"operator --kind cfd-left --alpha 0.5 --expr 'log(x - 2)' --grid 11", 1},
      {"operator --kind sideways --alpha 0.5 --expr x --grid 11", 2},
      {"operator --alpha 0.5 --expr x --grid 11", 2},
      {"bogus", 2},
      {"", 2},
      {"solve " + d + "missing_alpha.txt", 2},
      {"solve " + d + "does_not_exist.txt", 2},
      {"check el --problem " + d + "linear_small.txt --trajectory " + d + "bad_row.csv", 2},
      {"check el --problem " + d + "linear_small.txt --trajectory " + d + "line_11.csv", 3},
      {"solve " + d + "basic_small.txt --max-iter 1 --direction steepest", 4},
  };
}

// Malformed problem files and the line their diagnostic must name.
inline std::vector<std::pair<std::string, std::string>> malformed_files() {
  return {
      {"missing_alpha.txt", "line 1: "},  {"bad_gamma.txt", "line 6: "},
      {"bad_expression.txt", "line 9: "}, {"duplicate_key.txt", "line 4: "},
      {"unknown_key.txt", "line 8: "},    {"bad_end.txt", "line 11: "},
  };
}

}  // namespace harness
