#include "openqmc/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "openqmc/errors.hpp"

namespace openqmc {

using nlohmann::json;

namespace {

const std::set<std::string> kKeys = {"method", "epsilon", "delta",    "observable", "ws",   "rho_s", "L",
                                     "omega_c", "omega_max", "xi",    "beta",       "dt",   "steps", "mbar",
                                     "m0",      "b_bound",   "seed",  "threads",    "output"};

double get_real(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

long long get_int(const json& v, const std::string& field) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  throw ConfigError(field, "expected an integer");
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

cplx parse_entry(const json& e, const std::string& field) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw ConfigError(field, "matrix entries must be numbers or [re, im] pairs");
}

// --- flat TOML ---

struct TomlCursor {
  const std::string& s;
  std::size_t i = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("toml", "line " + std::to_string(line) + ": " + what);
  }
  void skip_space(bool newlines) {
    while (i < s.size()) {
      const char c = s[i];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
      } else if (newlines && c == '\n') {
        ++line;
        ++i;
      } else if (c == '#') {
        while (i < s.size() && s[i] != '\n') ++i;
      } else {
        break;
      }
    }
  }
  bool done() const { return i >= s.size(); }
  char peek() const { return i < s.size() ? s[i] : '\0'; }
};

json toml_value(TomlCursor& c);

json toml_string(TomlCursor& c) {
  const char quote = c.s[c.i++];
  std::string out;
  while (true) {
    if (c.done() || c.peek() == '\n') c.fail("unterminated string");
    char ch = c.s[c.i++];
    if (ch == quote) break;
    if (quote == '"' && ch == '\\') {
      if (c.done()) c.fail("bad escape");
      const char e = c.s[c.i++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: c.fail(std::string("unsupported escape \\") + e);
      }
      continue;
    }
    out += ch;
  }
  return out;
}

json toml_number(TomlCursor& c) {
  std::string tok;
  while (!c.done()) {
    const char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' || ch == '.' || ch == '_') {
      if (ch != '_') tok += ch;
      ++c.i;
    } else {
      break;
    }
  }
  if (tok.empty()) c.fail("expected a value");
  if (tok == "true") return true;
  if (tok == "false") return false;
  const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok.find("inf") != std::string::npos ||
                        tok.find("nan") != std::string::npos;
  try {
    std::size_t used = 0;
    if (is_float) {
      const double v = std::stod(tok, &used);
      if (used == tok.size()) return v;
    } else if (tok[0] == '-') {
      const long long v = std::stoll(tok, &used);
      if (used == tok.size()) return v;
    } else {
      const unsigned long long v = std::stoull(tok[0] == '+' ? tok.substr(1) : tok, &used);
      if (used + (tok[0] == '+' ? 1 : 0) == tok.size()) return v;
    }
  } catch (const std::exception&) {
  }
  c.fail("cannot parse value '" + tok + "'");
}

json toml_array(TomlCursor& c) {
  ++c.i;
  json arr = json::array();
  while (true) {
    c.skip_space(true);
    if (c.done()) c.fail("unterminated array");
    if (c.peek() == ']') {
      ++c.i;
      return arr;
    }
    arr.push_back(toml_value(c));
    c.skip_space(true);
    if (c.peek() == ',') {
      ++c.i;
    } else if (c.peek() != ']') {
      c.fail("expected ',' or ']' in array");
    }
  }
}

json toml_value(TomlCursor& c) {
  const char ch = c.peek();
  if (ch == '"' || ch == '\'') return toml_string(c);
  if (ch == '[') return toml_array(c);
  return toml_number(c);
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::BareDqmc: return "bare-dqmc";
    case Method::DysonDirect: return "dyson-direct";
    case Method::DysonReuse: return "dyson-reuse";
    case Method::Btb: return "btb";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "bare-dqmc") return Method::BareDqmc;
  if (name == "dyson-direct") return Method::DysonDirect;
  if (name == "dyson-reuse") return Method::DysonReuse;
  if (name == "btb") return Method::Btb;
  throw ConfigError("method", "unknown method '" + name + "' (bare-dqmc, dyson-direct, dyson-reuse, btb)");
}

Mat2 parse_matrix(const json& v, const std::string& field, bool density) {
  if (v.is_string()) {
    const std::string n = v.get<std::string>();
    if (density) {
      if (n == "up") return outer(1, 1);
      if (n == "down") return outer(0, 0);
      if (n == "mixed") return 0.5 * Mat2::identity();
      throw ConfigError(field, "unknown state '" + n + "' (up, down, mixed or a matrix)");
    }
    if (n == "sigma_z" || n == "sz" || n == "σz") return sigma_z();
    if (n == "sigma_x" || n == "sx" || n == "σx") return sigma_x();
    if (n == "identity" || n == "I") return Mat2::identity();
    throw ConfigError(field, "unknown operator '" + n + "' (sigma_z, sigma_x, identity or a matrix)");
  }
  if (!v.is_array()) throw ConfigError(field, "expected a name or a matrix");
  Mat2 m;
  if (v.size() == 4) {
    for (int q = 0; q < 4; ++q) m.a[q] = parse_entry(v[q], field);
  } else if (v.size() == 2 && v[0].is_array() && v[1].is_array() && v[0].size() == 2 && v[1].size() == 2) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m(r, c) = parse_entry(v[r][c], field);
  } else {
    throw ConfigError(field, "matrix must have 4 row-major entries or 2 rows of 2");
  }
  if (!is_hermitian(m, 1e-12)) throw ConfigError(field, "matrix must be Hermitian");
  return m;
}

void RunConfig::validate() const {
  if (!std::isfinite(system.epsilon)) throw ConfigError("epsilon", "must be finite");
  if (!std::isfinite(system.delta)) throw ConfigError("delta", "must be finite");
  if (!is_hermitian(system.Os)) throw ConfigError("observable", "must be Hermitian");
  if (!is_hermitian(system.Ws)) throw ConfigError("ws", "must be Hermitian");
  try {
    SystemSpec probe;
    probe.rho_s = system.rho_s;
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("rho_s", e.what());
  }
  if (bath.L < 1) throw ConfigError("L", "must be at least 1");
  if (!(bath.omega_c > 0.0)) throw ConfigError("omega_c", "must be positive");
  if (!(bath.omega_max > 0.0)) throw ConfigError("omega_max", "must be positive");
  if (!(bath.xi >= 0.0)) throw ConfigError("xi", "must be nonnegative");
  if (!(bath.beta > 0.0)) throw ConfigError("beta", "must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be positive");
  if (steps < 1) throw ConfigError("steps", "must be positive");
  if (method == Method::BareDqmc) {
    if (mbar < 2 || mbar > 12 || mbar % 2 != 0) throw ConfigError("mbar", "bare-dqmc needs an even value in 2..12");
  } else if (mbar < 1 || mbar > 11 || mbar % 2 == 0) {
    throw ConfigError("mbar", "must be an odd value in 1..11");
  }
  if (!(m0 > 0.0) || !std::isfinite(m0)) throw ConfigError("m0", "must be positive");
  if (b_bound && (!(*b_bound >= 0.0) || !std::isfinite(*b_bound))) throw ConfigError("b_bound", "must be nonnegative");
  if (threads < 1) throw ConfigError("threads", "must be positive");
  if (output.empty()) throw ConfigError("output", "must not be empty");
  if (b_table < 0) throw ConfigError("b_table", "must be nonnegative");
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config", "expected a key-value document");
  for (const auto& [key, _] : doc.items())
    if (!kKeys.count(key)) throw ConfigError(key, "unknown key");
  RunConfig c;
  auto has = [&](const char* k) { return doc.contains(k) && !doc.at(k).is_null(); };
  if (has("method")) c.method = parse_method(get_string(doc.at("method"), "method"));
  if (has("epsilon")) c.system.epsilon = get_real(doc.at("epsilon"), "epsilon");
  if (has("delta")) c.system.delta = get_real(doc.at("delta"), "delta");
  if (has("observable")) {
    c.system.Os = parse_matrix(doc.at("observable"), "observable", false);
    c.observable = doc.at("observable").is_string() ? doc.at("observable").get<std::string>() : "matrix";
  }
  if (has("ws")) {
    c.system.Ws = parse_matrix(doc.at("ws"), "ws", false);
    c.ws = doc.at("ws").is_string() ? doc.at("ws").get<std::string>() : "matrix";
  }
  if (has("rho_s")) {
    c.system.rho_s = parse_matrix(doc.at("rho_s"), "rho_s", true);
    c.rho_s = doc.at("rho_s").is_string() ? doc.at("rho_s").get<std::string>() : "matrix";
    c.rho_s_default = false;
  }
  if (has("L")) {
    const auto L = get_int(doc.at("L"), "L");
    if (L < 1 || L > 1000000) throw ConfigError("L", "must lie in 1..1000000");
    c.bath.L = static_cast<int>(L);
  }
  if (has("omega_c")) c.bath.omega_c = get_real(doc.at("omega_c"), "omega_c");
  c.bath.omega_max = has("omega_max") ? get_real(doc.at("omega_max"), "omega_max") : 4.0 * c.bath.omega_c;
  if (has("xi")) c.bath.xi = get_real(doc.at("xi"), "xi");
  if (has("beta")) c.bath.beta = get_real(doc.at("beta"), "beta");
  if (has("dt")) c.dt = get_real(doc.at("dt"), "dt");
  if (has("steps")) {
    const auto s = get_int(doc.at("steps"), "steps");
    if (s < 1 || s > 1000000) throw ConfigError("steps", "must lie in 1..1000000");
    c.steps = static_cast<int>(s);
  }
  if (has("mbar")) {
    const auto m = get_int(doc.at("mbar"), "mbar");
    if (m < 0 || m > 12) throw ConfigError("mbar", "out of range");
    c.mbar = static_cast<int>(m);
  } else if (c.method == Method::BareDqmc) {
    c.mbar = 4;
  }
  if (has("m0")) c.m0 = get_real(doc.at("m0"), "m0");
  if (has("b_bound")) {
    const json& b = doc.at("b_bound");
    if (b.is_string()) {
      if (b.get<std::string>() != "auto") throw ConfigError("b_bound", "expected a number or \"auto\"");
    } else {
      c.b_bound = get_real(b, "b_bound");
    }
  }
  if (has("seed")) {
    const json& s = doc.at("seed");
    if (s.is_number_unsigned()) {
      c.seed = s.get<std::uint64_t>();
    } else {
      const auto v = get_int(s, "seed");
      if (v < 0) throw ConfigError("seed", "must be nonnegative");
      c.seed = static_cast<std::uint64_t>(v);
    }
  }
  if (has("threads")) {
    const auto t = get_int(doc.at("threads"), "threads");
    if (t < 1 || t > 4096) throw ConfigError("threads", "must lie in 1..4096");
    c.threads = static_cast<int>(t);
  }
  if (has("output")) c.output = get_string(doc.at("output"), "output");
  c.validate();
  return c;
}

json parse_flat_toml(const std::string& text) {
  json out = json::object();
  TomlCursor c{text};
  while (true) {
    c.skip_space(true);
    if (c.done()) break;
    if (c.peek() == '[') c.fail("tables are not supported; use flat key = value lines");
    std::string key;
    if (c.peek() == '"') {
      key = toml_string(c).get<std::string>();
    } else {
      while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_' || c.peek() == '-'))
        key += c.s[c.i++];
    }
    if (key.empty()) c.fail("expected a key");
    c.skip_space(false);
    if (c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    ++c.i;
    c.skip_space(false);
    json value = toml_value(c);
    c.skip_space(false);
    if (!c.done() && c.peek() != '\n') c.fail("unexpected text after value of '" + key + "'");
    if (out.contains(key)) c.fail("duplicate key '" + key + "'");
    out[key] = std::move(value);
  }
  return out;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  auto ends_with = [&](const char* suffix) {
    const std::string s(suffix);
    return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
  };
  json doc;
  if (ends_with(".toml")) {
    doc = parse_flat_toml(text);
  } else {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      if (ends_with(".json")) throw ConfigError("config", std::string("invalid JSON: ") + e.what());
      doc = parse_flat_toml(text);
    }
  }
  return config_from_json(doc);
}

json config_to_json(const RunConfig& c, double b_bound) {
  auto mat = [](const Mat2& m) {
    json a = json::array();
    for (const auto& x : m.a) a.push_back({x.real(), x.imag()});
    return a;
  };
  json j;
  j["method"] = to_string(c.method);
  j["epsilon"] = c.system.epsilon;
  j["delta"] = c.system.delta;
  j["observable"] = c.observable == "matrix" ? mat(c.system.Os) : json(c.observable);
  j["ws"] = c.ws == "matrix" ? mat(c.system.Ws) : json(c.ws);
  j["rho_s"] = c.rho_s == "matrix" ? mat(c.system.rho_s) : json(c.rho_s);
  j["L"] = c.bath.L;
  j["omega_c"] = c.bath.omega_c;
  j["omega_max"] = c.bath.omega_max;
  j["xi"] = c.bath.xi;
  j["beta"] = c.bath.beta;
  j["dt"] = c.dt;
  j["steps"] = c.steps;
  j["mbar"] = c.mbar;
  j["m0"] = c.m0;
  j["b_bound"] = b_bound;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output;
  return j;
}

double resolve_b_bound(const RunConfig& config) {
  if (config.b_bound) return *config.b_bound;
  const BathModes modes = discretize_bath(config.bath);
  return estimate_B_bound(modes, config.bath.beta, 2.0 * config.steps * config.dt, 4096);
}

SolverSetup make_setup(const RunConfig& config, double b_bound) {
  config.validate();
  SolverSetup s;
  s.system = config.system;
  s.bath = config.bath;
  s.dt = config.dt;
  s.steps = config.steps;
  s.budget.M0 = config.m0;
  s.budget.Bbound = b_bound;
  s.budget.Mbar = config.mbar;
  s.seed = config.seed;
  s.threads = config.threads;
  s.b_table = config.b_table;
  return s;
}

}  // namespace openqmc
