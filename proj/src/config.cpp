#include "normcrit/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace normcrit {

namespace {

[[noreturn]] void config_error(const std::string& where,
                               const std::string& what) {
  fail(ErrorCode::ConfigInvalid, where + ": " + what);
}

}  // namespace

bool ConfigNode::has(const std::string& key) const {
  return values.count(key) > 0;
}

double ConfigNode::number(const std::string& key) const {
  if (!has(key)) config_error(location, "missing key '" + key + "'");
  const std::string& v = values.at(key);
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    config_error(location, "key '" + key + "' is not a number: '" + v + "'");
  }
}

double ConfigNode::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int ConfigNode::integer(const std::string& key) const {
  const double x = number(key);
  if (x != std::floor(x))
    config_error(location, "key '" + key + "' must be an integer");
  return static_cast<int>(x);
}

int ConfigNode::integer_or(const std::string& key, int fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool ConfigNode::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  config_error(location, "key '" + key + "' is not a boolean: '" + v + "'");
}

std::string ConfigNode::text(const std::string& key) const {
  if (!has(key)) config_error(location, "missing key '" + key + "'");
  return values.at(key);
}

const ConfigNode* ConfigNode::block(const std::string& key) const {
  const ConfigNode* found = nullptr;
  for (const auto& [name, node] : blocks)
    if (name == key) {
      if (found != nullptr)
        config_error(location, "duplicate block '" + key + "'");
      found = node.get();
    }
  return found;
}

std::vector<const ConfigNode*> ConfigNode::all_blocks(
    const std::string& key) const {
  std::vector<const ConfigNode*> out;
  for (const auto& [name, node] : blocks)
    if (name == key) out.push_back(node.get());
  return out;
}

namespace {

struct Token {
  std::string text;
  int line = 0;
};

std::vector<Token> tokenize(const std::string& text,
                            const std::string& filename) {
  std::vector<Token> tokens;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string cur;
    auto flush = [&]() {
      if (!cur.empty()) {
        tokens.push_back({cur, lineno});
        cur.clear();
      }
    };
    for (char c : raw) {
      if (c == ' ' || c == '\t' || c == '\r') {
        flush();
      } else if (c == '{' || c == '}' || c == '=') {
        flush();
        tokens.push_back({std::string(1, c), lineno});
      } else {
        cur += c;
      }
    }
    flush();
  }
  (void)filename;
  return tokens;
}

}  // namespace

ConfigNode parse_config_text(const std::string& text,
                             const std::string& filename) {
  ConfigNode root;
  root.name = "<root>";
  root.location = filename;
  const std::vector<Token> tokens = tokenize(text, filename);

  std::vector<ConfigNode*> stack{&root};
  size_t i = 0;
  auto where = [&](int line) { return filename + ":" + std::to_string(line); };
  while (i < tokens.size()) {
    const Token& t = tokens[i];
    if (t.text == "}") {
      if (stack.size() == 1) config_error(where(t.line), "unmatched '}'");
      stack.pop_back();
      ++i;
      continue;
    }
    if (t.text == "{" || t.text == "=")
      config_error(where(t.line), "expected a key before '" + t.text + "'");
    if (i + 1 >= tokens.size())
      config_error(where(t.line), "dangling key '" + t.text + "'");
    const Token& next = tokens[i + 1];
    if (next.text == "=") {
      if (i + 2 >= tokens.size() || tokens[i + 2].text == "{" ||
          tokens[i + 2].text == "}" || tokens[i + 2].text == "=")
        config_error(where(t.line), "missing value for '" + t.text + "'");
      if (stack.back()->values.count(t.text))
        config_error(where(t.line), "duplicate key '" + t.text + "'");
      stack.back()->values[t.text] = tokens[i + 2].text;
      i += 3;
    } else if (next.text == "{") {
      auto child = std::make_shared<ConfigNode>();
      child->name = t.text;
      child->location = where(t.line);
      stack.back()->blocks.emplace_back(t.text, child);
      stack.push_back(child.get());
      i += 2;
    } else {
      config_error(where(t.line),
                   "expected '=' or '{' after '" + t.text + "'");
    }
  }
  if (stack.size() != 1)
    config_error(filename, "unbalanced blocks at end of file");
  return root;
}

ConfigNode parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::ConfigInvalid, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::vector<double> MuScan::grid() const {
  std::vector<double> g;
  if (steps == 1) return {from};
  for (int i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / (steps - 1);
    g.push_back(log ? std::exp(std::log(from) +
                               t * (std::log(to) - std::log(from)))
                    : from + t * (to - from));
  }
  return g;
}

namespace {

void check_known_keys(const ConfigNode& node,
                      const std::set<std::string>& keys,
                      const std::set<std::string>& block_names) {
  for (const auto& [key, value] : node.values)
    if (!keys.count(key))
      config_error(node.location,
                   "unknown key '" + key + "' in '" + node.name + "'");
  for (const auto& [name, child] : node.blocks)
    if (!block_names.count(name))
      config_error(node.location,
                   "unknown block '" + name + "' in '" + node.name + "'");
}

DomainSpec parse_domain(const ConfigNode& node) {
  check_known_keys(node, {"kind", "a", "b", "ax", "bx", "ay", "by", "az",
                          "bz", "sx", "sy", "sz"},
                   {});
  const std::string kind = node.text("kind");
  DomainSpec dom;
  if (kind == "interval") {
    dom = make_interval(node.number("a"), node.number("b"));
  } else if (kind == "rectangle") {
    dom = make_rectangle(node.number("ax"), node.number("bx"),
                         node.number("ay"), node.number("by"));
  } else if (kind == "box") {
    dom = make_box(node.number("ax"), node.number("bx"), node.number("ay"),
                   node.number("by"), node.number("az"), node.number("bz"));
  } else {
    config_error(node.location, "unknown domain kind '" + kind + "'");
  }
  if (node.has("sx")) {
    std::array<double, 3> c{node.number("sx"), node.number_or("sy", 0.0),
                            node.number_or("sz", 0.0)};
    dom.star_center = c;
  }
  return build_domain(dom);
}

std::vector<PowerTerm> parse_terms(const ConfigNode& node) {
  check_known_keys(node, {}, {"term"});
  std::vector<PowerTerm> terms;
  for (const ConfigNode* t : node.all_blocks("term")) {
    check_known_keys(*t, {"a", "p"}, {});
    terms.push_back({t->number("a"), t->number("p")});
  }
  if (terms.empty())
    config_error(node.location, "nonlinearity block has no terms");
  return terms;
}

}  // namespace

double RunConfig::mu_value() const {
  if (mu) return *mu;
  if (mu_scan && mu_scan->steps == 1) return mu_scan->from;
  fail(ErrorCode::ConfigInvalid, "config has a mu scan, not a single mu");
}

RunConfig parse_run_config(const ConfigNode& root) {
  check_known_keys(
      root,
      {"mode", "mu", "n", "eigs", "seed", "out", "cache", "shift",
       "corroborate_mu0"},
      {"domain", "f", "g", "mu_scan", "schedule", "tol", "multiplicity",
       "overrides"});

  RunConfig cfg;
  const ConfigNode* dom = root.block("domain");
  if (dom == nullptr) config_error(root.location, "missing domain block");
  cfg.domain = parse_domain(*dom);
  cfg.mode = parse_mode(root.text("mode"));

  const ConfigNode* f = root.block("f");
  if (f == nullptr) config_error(root.location, "missing f block");
  cfg.f_terms = parse_terms(*f);
  if (const ConfigNode* g = root.block("g")) cfg.g_terms = parse_terms(*g);
  if (cfg.mode.is_robin() && cfg.g_terms.empty())
    config_error(root.location, "robin mode requires a g block");
  if (!cfg.mode.is_robin() && !cfg.g_terms.empty())
    config_error(root.location, "g block is only legal in robin mode");

  const bool has_mu = root.has("mu");
  const ConfigNode* scan = root.block("mu_scan");
  if (has_mu == (scan != nullptr))
    config_error(root.location, "exactly one of mu / mu_scan is required");
  if (has_mu) {
    cfg.mu = root.number("mu");
    if (!(*cfg.mu > 0.0)) config_error(root.location, "mu must be positive");
  } else {
    check_known_keys(*scan, {"from", "to", "steps", "log"}, {});
    MuScan ms;
    ms.from = scan->number("from");
    ms.to = scan->number("to");
    ms.steps = scan->integer("steps");
    ms.log = scan->flag_or("log", true);
    if (ms.steps < 1) config_error(scan->location, "steps must be >= 1");
    if (!(ms.from > 0.0) || !(ms.to >= ms.from))
      config_error(scan->location, "need 0 < from <= to");
    cfg.mu_scan = ms;
  }

  cfg.n = root.integer_or("n", 64);
  cfg.eigs = root.integer_or("eigs", 6);
  cfg.seed = static_cast<uint64_t>(root.integer_or("seed", 1));
  if (root.has("out")) cfg.out_dir = root.text("out");
  cfg.cache = root.flag_or("cache", false);
  cfg.shift = root.number_or("shift", 0.0);
  cfg.corroborate_mu0 = root.flag_or("corroborate_mu0", false);

  if (const ConfigNode* sch = root.block("schedule")) {
    check_known_keys(
        *sch, {"r0", "growth", "r_max", "newton_budget", "warm_start", "polish"},
        {});
    cfg.schedule.r0 = sch->number_or("r0", 2.0);
    cfg.schedule.growth = sch->number_or("growth", 2.0);
    cfg.schedule.r_max = sch->number_or("r_max", 16384.0);
    cfg.schedule.newton_budget = sch->integer_or("newton_budget", 200);
    cfg.schedule.warm_start = sch->flag_or("warm_start", true);
    cfg.schedule.polish = sch->flag_or("polish", true);
  }
  if (const ConfigNode* tol = root.block("tol")) {
    check_known_keys(
        *tol, {"grad", "mass", "resid", "distinct", "pen", "drift", "lambda"},
        {});
    cfg.tol.grad = tol->number_or("grad", cfg.tol.grad);
    cfg.tol.mass = tol->number_or("mass", cfg.tol.mass);
    cfg.tol.resid = tol->number_or("resid", cfg.tol.resid);
    cfg.tol.distinct = tol->number_or("distinct", cfg.tol.distinct);
    cfg.tol.pen = tol->number_or("pen", cfg.tol.pen);
    cfg.tol.drift = tol->number_or("drift", cfg.tol.drift);
    cfg.tol.lambda_zero = tol->number_or("lambda", cfg.tol.lambda_zero);
  }
  if (const ConfigNode* mult = root.block("multiplicity")) {
    check_known_keys(*mult, {"m", "k_tune"}, {});
    cfg.multiplicity_m = mult->integer_or("m", 1);
    cfg.k_tune = mult->number_or("k_tune", 100.0);
    if (cfg.multiplicity_m < 1)
      config_error(mult->location, "m must be >= 1");
    if (!(cfg.k_tune > 1.0))
      config_error(mult->location, "k_tune must exceed 1");
  }
  if (const ConfigNode* ov = root.block("overrides")) {
    check_known_keys(*ov, {"lambda1", "gn_c", "gn_c_trace", "M"}, {});
    if (ov->has("lambda1")) cfg.overrides.lambda1 = ov->number("lambda1");
    if (ov->has("gn_c")) cfg.overrides.gn_c = ov->number("gn_c");
    if (ov->has("gn_c_trace"))
      cfg.overrides.gn_c_trace = ov->number("gn_c_trace");
    if (ov->has("M")) cfg.overrides.energy_M = ov->number("M");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(parse_config_file(path));
}

}  // namespace normcrit
