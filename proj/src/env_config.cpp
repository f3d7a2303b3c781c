#include <algorithm>
#include <charconv>
#include <sstream>

#include "jobshoplab/env.hpp"
#include "jobshoplab/errors.hpp"

namespace jsl {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::vector<std::vector<std::string>> split_lines(std::string_view text, std::vector<int>& line_numbers) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream words(raw);
    std::vector<std::string> cur;
    std::string w;
    auto flush = [&] {
      if (!cur.empty()) {
        out.push_back(std::move(cur));
        line_numbers.push_back(line);
      }
      cur.clear();
    };
    while (words >> w) {
      if (w == "/" || w == ";") flush();
      else cur.push_back(w);
    }
    flush();
  }
  return out;
}

std::pair<std::string, std::string> key_value(const std::string& token, int line) {
  const auto eq = token.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) fail(line, "expected key=value, got '" + token + "'");
  return {token.substr(0, eq), token.substr(eq + 1)};
}

double parse_double(const std::string& s, int line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "expected a number, got '" + s + "'");
  return v;
}

}  // namespace

EnvConfig parse_config_dsl(std::string_view text) {
  EnvConfig cfg;
  std::vector<int> lines;
  const auto stmts = split_lines(text, lines);
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const auto& t = stmts[i];
    const int line = lines[i];
    const std::string& key = t[0];
    if (key != "plugin") {
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) fail(line, "duplicate directive '" + key + "'");
      seen.push_back(key);
    }
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (t.size() < lo || t.size() > hi) fail(line, "wrong number of arguments for '" + key + "'");
    };
    if (key == "observation") {
      need(2, 2);
      if (t[1] != "simple") fail(line, "unknown observation factory '" + t[1] + "'");
      cfg.observation = t[1];
    } else if (key == "action") {
      need(2, 2);
      if (t[1] == "binary") cfg.action = ActionMode::binary;
      else if (t[1] == "multidiscrete") cfg.action = ActionMode::multidiscrete;
      else fail(line, "unknown action factory '" + t[1] + "'");
    } else if (key == "reward") {
      need(2, 64);
      cfg.reward = {};
      if (t[1] == "makespan") {
        need(2, 3);
        if (t.size() == 3) {
          if (t[2] == "dense") cfg.reward.mode = RewardMode::dense;
          else if (t[2] == "terminal") cfg.reward.mode = RewardMode::terminal;
          else fail(line, "unknown reward mode '" + t[2] + "'");
        }
      } else if (t[1] == "weighted") {
        cfg.reward.kind = "weighted";
        bool nonzero = false;
        for (std::size_t k = 2; k < t.size(); ++k) {
          auto [name, value] = key_value(t[k], line);
          const auto& names = objective_names();
          if (std::find(names.begin(), names.end(), name) == names.end()) fail(line, "unknown objective '" + name + "'");
          if (cfg.reward.weights.count(name)) fail(line, "duplicate weight for '" + name + "'");
          const double w = parse_double(value, line);
          nonzero = nonzero || w != 0.0;
          cfg.reward.weights[name] = w;
        }
        if (!nonzero) fail(line, "weighted reward needs at least one non-zero weight");
      } else {
        fail(line, "unknown reward factory '" + t[1] + "'");
      }
    } else if (key == "plugin") {
      need(2, 256);
      const auto kinds = plugin_kinds();
      if (std::find(kinds.begin(), kinds.end(), t[1]) == kinds.end()) fail(line, "unknown plugin '" + t[1] + "'");
      for (const auto& p : cfg.plugins)
        if (p.kind == t[1]) fail(line, "duplicate plugin '" + t[1] + "'");
      PluginConfig pc{t[1], {}, line};
      for (std::size_t k = 2; k < t.size(); ++k) {
        auto [name, value] = key_value(t[k], line);
        if (!pc.params.emplace(name, value).second) fail(line, "duplicate parameter '" + name + "'");
      }
      cfg.plugins.push_back(std::move(pc));
    } else if (key == "seed") {
      need(2, 2);
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(t[1].data(), t[1].data() + t[1].size(), v);
      if (ec != std::errc() || ptr != t[1].data() + t[1].size()) fail(line, "seed must be a non-negative integer");
      cfg.seed = v;
    } else if (key == "extensions") {
      need(2, 2);
      if (t[1] == "on") cfg.extensions = true;
      else if (t[1] == "off") cfg.extensions = false;
      else fail(line, "extensions expects on or off");
    } else {
      fail(line, "unknown directive '" + key + "'");
    }
  }
  return cfg;
}

std::string to_config_dsl(const EnvConfig& cfg) {
  std::ostringstream out;
  out << "observation " << cfg.observation << '\n';
  out << "action " << (cfg.action == ActionMode::binary ? "binary" : "multidiscrete") << '\n';
  if (cfg.reward.kind == "weighted") {
    out << "reward weighted";
    for (const auto& [name, w] : cfg.reward.weights) out << ' ' << name << '=' << w;
    out << '\n';
  } else {
    out << "reward makespan " << (cfg.reward.mode == RewardMode::dense ? "dense" : "terminal") << '\n';
  }
  for (const auto& p : cfg.plugins) {
    out << "plugin " << p.kind;
    for (const auto& [k, v] : p.params) out << ' ' << k << '=' << v;
    out << '\n';
  }
  out << "seed " << cfg.seed << '\n';
  if (!cfg.extensions) out << "extensions off\n";
  return out.str();
}

}  // namespace jsl
