#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "latentdyn/decision.hpp"
#include "latentdyn/error.hpp"

namespace latentdyn {

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& msg) {
  fail(ErrorCode::InvalidModel, "line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

enum class Block { None, Prior, Obs, Cf, Utility };

struct PendingRow {
  std::size_t line;
  std::vector<std::size_t> key;
  std::vector<double> values;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

EnvironmentModel parse_environment_model(std::string_view text) {
  std::map<char, std::vector<std::string>> sets;
  std::map<char, std::size_t> set_lines;
  std::map<Block, std::vector<PendingRow>> rows;
  std::map<Block, std::size_t> block_lines;
  Block block = Block::None;

  auto lookup = [&](char set, std::string_view label, std::size_t line) -> std::size_t {
    const auto& labels = sets[set];
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return i;
    bad_line(line, "unknown " + std::string(1, set) + " label '" + std::string(label) + "'");
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    if (colon != std::string_view::npos && line.find('=') == std::string_view::npos) {
      const auto head = trim(line.substr(0, colon));
      const auto rest = trim(line.substr(colon + 1));
      if (head.size() == 1 && std::string_view("XEAY").find(head[0]) != std::string_view::npos) {
        const char set = head[0];
        if (!rows.empty()) bad_line(line_no, "set " + std::string(head) + " declared after tables began");
        if (sets.count(set)) bad_line(line_no, "set " + std::string(head) + " declared twice");
        auto labels = split_ws(rest);
        if (labels.empty()) bad_line(line_no, "set " + std::string(head) + " is empty");
        std::vector<std::string> owned;
        for (auto l : labels) {
          for (const auto& o : owned)
            if (o == l) bad_line(line_no, "duplicate label '" + std::string(l) + "'");
          owned.emplace_back(l);
        }
        sets[set] = std::move(owned);
        set_lines[set] = line_no;
        continue;
      }
      if (!rest.empty()) bad_line(line_no, "unexpected text after block header");
      if (head == "prior") block = Block::Prior;
      else if (head == "obs") block = Block::Obs;
      else if (head == "cf") block = Block::Cf;
      else if (head == "utility") block = Block::Utility;
      else bad_line(line_no, "unknown block '" + std::string(head) + "'");
      if (block_lines.count(block)) bad_line(line_no, "block '" + std::string(head) + "' repeated");
      for (char s : std::string_view("XEAY")) {
        if (!sets.count(s)) bad_line(line_no, std::string("set ") + s + " must be declared before tables");
      }
      block_lines[block] = line_no;
      rows[block];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad_line(line_no, "expected 'labels = values'");
    if (block == Block::None) bad_line(line_no, "table row outside of a block");
    const auto labels = split_ws(line.substr(0, eq));
    const auto numbers = split_ws(line.substr(eq + 1));

    static const std::map<Block, std::string> sigs = {
        {Block::Prior, "XE"}, {Block::Obs, "XEA"}, {Block::Cf, "XAYA"}, {Block::Utility, "AX"}};
    const std::string& sig = sigs.at(block);
    if (labels.size() != sig.size()) {
      bad_line(line_no, "expected " + std::to_string(sig.size()) + " labels, got " + std::to_string(labels.size()));
    }
    PendingRow row{line_no, {}, {}};
    for (std::size_t i = 0; i < sig.size(); ++i) row.key.push_back(lookup(sig[i], labels[i], line_no));
    for (auto tok : numbers) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        bad_line(line_no, "'" + std::string(tok) + "' is not a finite number");
      }
      row.values.push_back(v);
    }
    const std::size_t expect = block == Block::Prior ? 1 : sets['Y'].size();
    if (row.values.size() != expect) {
      bad_line(line_no, "expected " + std::to_string(expect) + " values, got " + std::to_string(row.values.size()));
    }
    if (block == Block::Cf && row.key[1] == row.key[3]) bad_line(line_no, "counterfactual action equals the taken action");
    for (const auto& other : rows[block]) {
      if (other.key == row.key) bad_line(line_no, "duplicate row (first at line " + std::to_string(other.line) + ")");
    }
    rows[block].push_back(std::move(row));
  }

  for (char s : std::string_view("XEAY")) {
    if (!sets.count(s)) bad_line(line_no, std::string("set ") + s + " is never declared");
  }
  EnvironmentModel m(sets['X'], sets['E'], sets['A'], sets['Y']);
  const std::size_t last = line_no;

  auto header = [&](Block b, const char* name) {
    if (!block_lines.count(b)) bad_line(last, std::string("block '") + name + "' is missing");
    return block_lines[b];
  };
  auto check_probability = [](const PendingRow& r) {
    double s = 0.0;
    for (double v : r.values) {
      if (v < 0.0) bad_line(r.line, "negative probability");
      s += v;
    }
    if (!(std::abs(s - 1.0) <= kProbabilityTolerance)) bad_line(r.line, "probabilities sum to " + fmt(s) + ", not 1");
  };

  const std::size_t prior_line = header(Block::Prior, "prior");
  double prior_total = 0.0;
  for (const auto& r : rows[Block::Prior]) {
    if (r.values[0] < 0.0) bad_line(r.line, "negative probability");
    m.prior(r.key[0], r.key[1]) = r.values[0];
    prior_total += r.values[0];
  }
  if (!(std::abs(prior_total - 1.0) <= kProbabilityTolerance)) {
    bad_line(prior_line, "prior sums to " + fmt(prior_total) + ", not 1");
  }

  const std::size_t obs_line = header(Block::Obs, "obs");
  for (const auto& r : rows[Block::Obs]) {
    check_probability(r);
    for (std::size_t y = 0; y < m.ny(); ++y) m.obs(y, r.key[0], r.key[1], r.key[2]) = r.values[y];
  }
  if (rows[Block::Obs].size() != m.nx() * m.ne() * m.na()) {
    bad_line(obs_line, "obs needs one row per (x, e, a): " + std::to_string(m.nx() * m.ne() * m.na()) + " rows, got " +
                           std::to_string(rows[Block::Obs].size()));
  }

  const std::size_t cf_line = header(Block::Cf, "cf");
  for (const auto& r : rows[Block::Cf]) {
    check_probability(r);
    for (std::size_t y = 0; y < m.ny(); ++y) m.cf(y, r.key[0], r.key[1], r.key[2], r.key[3]) = r.values[y];
  }
  const std::size_t cf_rows = m.nx() * m.na() * m.ny() * (m.na() - 1);
  if (rows[Block::Cf].size() != cf_rows) {
    bad_line(cf_line, "cf needs one row per (x, a, y, abar != a): " + std::to_string(cf_rows) + " rows, got " +
                          std::to_string(rows[Block::Cf].size()));
  }

  const std::size_t u_line = header(Block::Utility, "utility");
  for (const auto& r : rows[Block::Utility]) {
    for (std::size_t y = 0; y < m.ny(); ++y) m.utility(r.key[0], r.key[1], y) = r.values[y];
  }
  if (rows[Block::Utility].size() != m.na() * m.nx()) {
    bad_line(u_line, "utility needs one row per (a, x): " + std::to_string(m.na() * m.nx()) + " rows, got " +
                         std::to_string(rows[Block::Utility].size()));
  }

  m.validate();
  return m;
}

EnvironmentModel load_environment_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, path.string() + " not found");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_environment_model(ss.str());
}

std::string format_environment_model(const EnvironmentModel& m) {
  std::string out;
  auto set_line = [&](const char* name, const std::vector<std::string>& labels) {
    out += name;
    out += ":";
    for (const auto& l : labels) out += " " + l;
    out += "\n";
  };
  set_line("X", m.x_labels());
  set_line("E", m.e_labels());
  set_line("A", m.a_labels());
  set_line("Y", m.y_labels());
  const auto& X = m.x_labels();
  const auto& E = m.e_labels();
  const auto& A = m.a_labels();
  const auto& Y = m.y_labels();

  out += "prior:\n";
  for (std::size_t x = 0; x < m.nx(); ++x)
    for (std::size_t e = 0; e < m.ne(); ++e) out += "  " + X[x] + " " + E[e] + " = " + fmt(m.prior(x, e)) + "\n";
  out += "obs:\n";
  for (std::size_t x = 0; x < m.nx(); ++x)
    for (std::size_t e = 0; e < m.ne(); ++e)
      for (std::size_t a = 0; a < m.na(); ++a) {
        out += "  " + X[x] + " " + E[e] + " " + A[a] + " =";
        for (std::size_t y = 0; y < m.ny(); ++y) out += " " + fmt(m.obs(y, x, e, a));
        out += "\n";
      }
  out += "cf:\n";
  for (std::size_t x = 0; x < m.nx(); ++x)
    for (std::size_t a = 0; a < m.na(); ++a)
      for (std::size_t y = 0; y < m.ny(); ++y)
        for (std::size_t abar = 0; abar < m.na(); ++abar) {
          if (abar == a) continue;
          out += "  " + X[x] + " " + A[a] + " " + Y[y] + " " + A[abar] + " =";
          for (std::size_t ys = 0; ys < m.ny(); ++ys) out += " " + fmt(m.cf(ys, x, a, y, abar));
          out += "\n";
        }
  out += "utility:\n";
  for (std::size_t a = 0; a < m.na(); ++a)
    for (std::size_t x = 0; x < m.nx(); ++x) {
      out += "  " + A[a] + " " + X[x] + " =";
      for (std::size_t y = 0; y < m.ny(); ++y) out += " " + fmt(m.utility(a, x, y));
      out += "\n";
    }
  return out;
}

std::string format_decision_table(const EnvironmentModel& m, const DecisionTable& t) {
  std::string out = "# x e action risk\n";
  for (std::size_t x = 0; x < m.nx(); ++x)
    for (std::size_t e = 0; e < m.ne(); ++e) {
      const std::size_t a = t(x, e);
      out += m.x_labels()[x] + " " + m.e_labels()[e] + " " + m.a_labels()[a] + " " +
             fmt(t.action_risks[(x * m.ne() + e) * m.na() + a]) + "\n";
    }
  out += "total_risk " + fmt(t.risk) + "\n";
  return out;
}

}  // namespace latentdyn
