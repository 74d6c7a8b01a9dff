#include "fracvar_cli/problem_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/expr.hpp"

namespace fracvar::cli {

ProblemFileError::ProblemFileError(std::size_t line, const std::string& msg)
    : std::runtime_error(line == 0 ? msg : "line " + std::to_string(line) + ": " + msg),
      line_(line) {}

namespace {

struct Entry {
  std::string value;
  std::size_t line;
};

struct Section {
  std::string name;
  std::size_t line;
  std::map<std::string, Entry, std::less<>> keys;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Drops a trailing comment, ignoring '#' inside double quotes.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double to_real(const Entry& e, std::string_view key) {
  const std::string_view s = trim(e.value);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ProblemFileError(e.line, "key '" + std::string(key) + "' expects a real number, got '" +
                                       std::string(s) + "'");
  }
  return v;
}

std::size_t to_count(const Entry& e, std::string_view key) {
  const std::string_view s = trim(e.value);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || v == 0) {
    throw ProblemFileError(e.line, "key '" + std::string(key) +
                                       "' expects a positive integer, got '" + std::string(s) +
                                       "'");
  }
  return v;
}

std::string to_quoted(const Entry& e, std::string_view key) {
  const std::string_view s = trim(e.value);
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
    throw ProblemFileError(e.line, "key '" + std::string(key) + "' expects a quoted expression");
  }
  return std::string(s.substr(1, s.size() - 2));
}

std::vector<std::string> to_list(const Entry& e, std::string_view key) {
  const std::string_view s = trim(e.value);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw ProblemFileError(e.line, "key '" + std::string(key) + "' expects a bracketed list");
  }
  std::vector<std::string> items;
  std::string_view rest = s.substr(1, s.size() - 2);
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (item.empty()) {
      throw ProblemFileError(e.line, "empty item in list for key '" + std::string(key) + "'");
    }
    items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return items;
}

const Entry& require(const Section& sec, std::string_view key) {
  const auto it = sec.keys.find(key);
  if (it == sec.keys.end()) {
    throw ProblemFileError(sec.line, "[" + sec.name + "] section is missing key '" +
                                         std::string(key) + "'");
  }
  return it->second;
}

Expr parse_expression(const Entry& e, std::string_view key, std::size_t n_components) {
  try {
    return parse(to_quoted(e, key), n_components, 0);
  } catch (const ParseError& err) {
    throw ProblemFileError(e.line, std::string(key) + ": " + err.what());
  }
}

std::vector<Section> split_sections(std::string_view text) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> allowed{
      {"problem",
       {"a", "b", "alpha", "beta", "gamma", "n_components", "grid_points", "lagrangian", "y_a",
        "y_b"}},
      {"constraint", {"integrand", "mode", "value"}},
  };
  std::vector<Section> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ProblemFileError(line_no, "unterminated section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!allowed.contains(name)) {
        throw ProblemFileError(line_no, "unknown section [" + name + "]");
      }
      if (name == "problem") {
        for (const Section& s : sections) {
          if (s.name == "problem") throw ProblemFileError(line_no, "duplicate [problem] section");
        }
      }
      sections.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ProblemFileError(line_no, "expected 'key = value'");
    }
    if (sections.empty()) throw ProblemFileError(line_no, "key outside of any section");
    Section& sec = sections.back();
    const std::string key(trim(line.substr(0, eq)));
    const auto& keys = allowed.find(sec.name)->second;
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ProblemFileError(line_no, "unknown key '" + key + "' in [" + sec.name + "]");
    }
    if (sec.keys.contains(key)) throw ProblemFileError(line_no, "duplicate key '" + key + "'");
    sec.keys.emplace(key, Entry{std::string(trim(line.substr(eq + 1))), line_no});
  }
  return sections;
}

}  // namespace

Problem parse_problem_file(std::string_view text) {
  const std::vector<Section> sections = split_sections(text);
  const Section* prob = nullptr;
  for (const Section& s : sections) {
    if (s.name == "problem") prob = &s;
  }
  if (prob == nullptr) throw ProblemFileError(1, "no [problem] section");

  // Pull every required key first so the first missing one is reported.
  static constexpr std::string_view kKeys[] = {"a",           "b",          "alpha", "beta",
                                               "gamma",       "n_components", "grid_points",
                                               "lagrangian",  "y_a",        "y_b"};
  for (std::string_view k : kKeys) require(*prob, k);

  const double a = to_real(require(*prob, "a"), "a");
  const double b = to_real(require(*prob, "b"), "b");
  const std::size_t n_points = to_count(require(*prob, "grid_points"), "grid_points");
  const std::size_t nc = to_count(require(*prob, "n_components"), "n_components");

  std::optional<Grid> grid;
  try {
    grid.emplace(a, b, n_points);
  } catch (const DomainError& err) {
    throw ProblemFileError(require(*prob, "grid_points").line, err.what());
  }

  auto order = [&](std::string_view key) {
    const Entry& e = require(*prob, key);
    try {
      return FracOrder(to_real(e, key));
    } catch (const DomainError& err) {
      throw ProblemFileError(e.line, std::string(key) + ": " + err.what());
    }
  };
  const FracOrder alpha = order("alpha");
  const FracOrder beta = order("beta");
  const Entry& gamma_entry = require(*prob, "gamma");
  const double gamma = to_real(gamma_entry, "gamma");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ProblemFileError(gamma_entry.line, "gamma must lie in [0,1]");
  }

  const Expr lagrangian = parse_expression(require(*prob, "lagrangian"), "lagrangian", nc);

  const Entry& ya = require(*prob, "y_a");
  const std::vector<std::string> left_items = to_list(ya, "y_a");
  if (left_items.size() != nc) {
    throw ProblemFileError(ya.line, "y_a lists " + std::to_string(left_items.size()) +
                                        " values for " + std::to_string(nc) + " components");
  }
  std::vector<double> left;
  for (const std::string& item : left_items) left.push_back(to_real({item, ya.line}, "y_a"));

  const Entry& yb = require(*prob, "y_b");
  const std::vector<std::string> right_items = to_list(yb, "y_b");
  if (right_items.size() != nc) {
    throw ProblemFileError(yb.line, "y_b lists " + std::to_string(right_items.size()) +
                                        " values for " + std::to_string(nc) + " components");
  }
  std::vector<EndCondition> right;
  for (const std::string& item : right_items) {
    if (item == "free") {
      right.push_back(EndCondition::free());
    } else if (item.starts_with("cap:")) {
      right.push_back(EndCondition::capped(to_real({item.substr(4), yb.line}, "y_b")));
    } else {
      right.push_back(EndCondition::fixed(to_real({item, yb.line}, "y_b")));
    }
  }

  std::vector<Constraint> constraints;
  for (const Section& s : sections) {
    if (s.name != "constraint") continue;
    for (std::string_view k : {"integrand", "mode", "value"}) require(s, k);
    const Entry& mode_entry = require(s, "mode");
    const std::string_view mode = trim(mode_entry.value);
    ConstraintMode cm{};
    if (mode == "eq") {
      cm = ConstraintMode::equality;
    } else if (mode == "le") {
      cm = ConstraintMode::inequality;
    } else {
      throw ProblemFileError(mode_entry.line, "mode must be 'eq' or 'le'");
    }
    constraints.push_back({parse_expression(require(s, "integrand"), "integrand", nc),
                           to_real(require(s, "value"), "value"), cm});
  }

  Problem p{*grid, alpha, beta, gamma, nc, lagrangian, {left, right}, constraints};
  try {
    p.validate();
  } catch (const std::exception& err) {
    throw ProblemFileError(prob->line, err.what());
  }
  return p;
}

Problem load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemFileError(0, "cannot open problem file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_file(buf.str());
}

}  // namespace fracvar::cli
