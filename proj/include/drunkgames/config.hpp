#pragma once

// JSON formats: the game configuration file, the ABM configuration file and
// the reports written by the command-line tool.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "drunkgames/abm.hpp"
#include "drunkgames/basins.hpp"
#include "drunkgames/drunk_game.hpp"
#include "drunkgames/equilibria.hpp"
#include "drunkgames/error.hpp"

namespace drunk::config {

using Json = nlohmann::ordered_json;

/// Config failure with the offending field (a JSON pointer such as
/// "/g1/T") and its 1-based source line, when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string field, int line)
      : Error(ErrorCode::config, decorate(message, field, line)),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string decorate(const std::string& msg, const std::string& field,
                              int line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + msg;
  }

  std::string field_;
  int line_ = 0;
};

namespace detail {

inline int line_of_offset(std::string_view text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

/// Source line of the field at `pointer`: each key is searched for after the
/// position of its parent. Array indices keep the parent's position.
inline int locate(std::string_view text, const std::string& pointer) {
  std::size_t pos = 0;
  std::size_t start = 1;
  bool found_any = false;
  while (start <= pointer.size() && !pointer.empty()) {
    const auto end = pointer.find('/', start);
    const std::string token =
        pointer.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const bool index = !token.empty() && token.find_first_not_of("0123456789") == std::string::npos;
    if (!index) {
      const auto hit = text.find("\"" + token + "\"", pos);
      if (hit == std::string_view::npos) break;
      pos = hit;
      found_any = true;
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return found_any ? line_of_offset(text, pos) : 0;
}

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
    throw ConfigError(msg, pointer.empty() ? "/" : pointer, locate(source_, pointer));
  }

  const Json& object(const Json& j, const std::string& pointer) const {
    if (!j.is_object()) fail(pointer, "expected an object");
    return j;
  }

  double number(const Json& j, const std::string& pointer) const {
    if (!j.is_number()) fail(pointer, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(pointer, "expected a finite number");
    return v;
  }

  std::uint64_t unsigned_integer(const Json& j, const std::string& pointer) const {
    if (!j.is_number_unsigned()) fail(pointer, "expected a non-negative integer");
    return j.get<std::uint64_t>();
  }

  const std::string& string(const Json& j, const std::string& pointer) const {
    if (!j.is_string()) fail(pointer, "expected a string");
    return j.get_ref<const std::string&>();
  }

  bool boolean(const Json& j, const std::string& pointer) const {
    if (!j.is_boolean()) fail(pointer, "expected true or false");
    return j.get<bool>();
  }

  void only_keys(const Json& j, const std::string& pointer,
                 std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) fail(pointer + "/" + key, "unknown field");
    }
  }

  const Json& required(const Json& j, const std::string& pointer, const char* key) const {
    auto it = j.find(key);
    if (it == j.end()) fail(pointer + "/" + key, "missing required field");
    return *it;
  }

  std::string_view source() const noexcept { return source_; }

 private:
  std::string_view source_;
};

inline Json parse_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const int line = e.byte == 0 ? 0 : line_of_offset(text, e.byte - 1);
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "", line);
  }
}

inline PayoffMatrix read_matrix(const Reader& r, const Json& j, const std::string& p) {
  r.object(j, p);
  r.only_keys(j, p, {"R", "S", "T", "P"});
  return {r.number(r.required(j, p, "R"), p + "/R"), r.number(r.required(j, p, "S"), p + "/S"),
          r.number(r.required(j, p, "T"), p + "/T"), r.number(r.required(j, p, "P"), p + "/P")};
}

inline QPoly read_q(const Reader& r, const Json& j, const std::string& p) {
  r.object(j, p);
  const std::string& type = r.string(r.required(j, p, "type"), p + "/type");
  if (type == "linear") {
    r.only_keys(j, p, {"type", "mu"});
    return QPoly::linear(r.number(r.required(j, p, "mu"), p + "/mu"));
  }
  if (type == "poly") {
    r.only_keys(j, p, {"type", "coeffs"});
    const Json& c = r.required(j, p, "coeffs");
    if (!c.is_array()) r.fail(p + "/coeffs", "expected an array of numbers");
    std::vector<double> coeffs;
    for (std::size_t i = 0; i < c.size(); ++i) {
      coeffs.push_back(r.number(c[i], p + "/coeffs/" + std::to_string(i)));
    }
    return QPoly(std::move(coeffs));
  }
  r.fail(p + "/type", "expected \"linear\" or \"poly\"");
}

}  // namespace detail

struct PresetSpec {
  std::string name;
  std::map<std::string, double> params;

  friend bool operator==(const PresetSpec&, const PresetSpec&) = default;
};

/// Either explicit matrices or a preset, never both.
struct GameConfigFile {
  std::optional<DrunkGame> explicit_game;
  std::optional<PresetSpec> preset;

  DrunkGame resolve() const {
    if (preset) return drunk::preset(preset->name, preset->params);
    return *explicit_game;
  }
};

/// Parses a game object rooted at `pointer` inside an already parsed
/// document.
inline GameConfigFile read_game_config(const detail::Reader& r, const Json& j,
                                       const std::string& pointer) {
  r.object(j, pointer);
  GameConfigFile out;
  const bool has_preset = j.contains("preset");
  const bool has_explicit = j.contains("g1") || j.contains("g2");
  if (has_preset && has_explicit) {
    r.fail(pointer + "/preset", "give either a preset or explicit matrices, not both");
  }
  if (!has_preset && !has_explicit) {
    r.fail(pointer, "need either \"preset\" or \"g1\"/\"g2\"");
  }
  if (has_preset) {
    r.only_keys(j, pointer, {"preset"});
    const std::string p = pointer + "/preset";
    const Json& pj = r.object(j["preset"], p);
    r.only_keys(pj, p, {"name", "params"});
    PresetSpec spec;
    spec.name = r.string(r.required(pj, p, "name"), p + "/name");
    if (auto it = pj.find("params"); it != pj.end()) {
      r.object(*it, p + "/params");
      for (const auto& [key, value] : it->items()) {
        spec.params[key] = r.number(value, p + "/params/" + key);
      }
    }
    try {
      (void)drunk::preset(spec.name, spec.params);
    } catch (const Error& e) {
      r.fail(e.code() == ErrorCode::unknown_preset ? p + "/name" : p + "/params", e.what());
    }
    out.preset = std::move(spec);
    return out;
  }
  r.only_keys(j, pointer, {"g1", "g2", "kappa", "q"});
  DrunkGame dg;
  dg.g1 = detail::read_matrix(r, r.required(j, pointer, "g1"), pointer + "/g1");
  dg.g2 = detail::read_matrix(r, r.required(j, pointer, "g2"), pointer + "/g2");
  if (auto it = j.find("kappa"); it != j.end()) {
    dg.kappa = r.number(*it, pointer + "/kappa");
    if (!(dg.kappa > 0.0)) r.fail(pointer + "/kappa", "kappa must be positive");
  }
  if (auto it = j.find("q"); it != j.end()) {
    try {
      dg.q = detail::read_q(r, *it, pointer + "/q");
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.fail(pointer + "/q", e.what());
    }
  }
  out.explicit_game = std::move(dg);
  return out;
}

inline GameConfigFile parse_game_config(std::string_view text) {
  const Json j = detail::parse_text(text);
  detail::Reader r(text);
  return read_game_config(r, j, "");
}

inline Json q_to_json(const QPoly& q) {
  if (auto mu = q.linear_mu()) return Json{{"type", "linear"}, {"mu", *mu}};
  Json coeffs = Json::array();
  for (double c : q.coefficients()) coeffs.push_back(c);
  return Json{{"type", "poly"}, {"coeffs", coeffs}};
}

inline Json matrix_to_json(const PayoffMatrix& m) {
  return Json{{"R", m.R}, {"S", m.S}, {"T", m.T}, {"P", m.P}};
}

/// Explicit form of a game; parsing it back yields an equal game.
inline Json game_to_json(const DrunkGame& dg) {
  return Json{{"g1", matrix_to_json(dg.g1)},
              {"g2", matrix_to_json(dg.g2)},
              {"kappa", dg.kappa},
              {"q", q_to_json(dg.q)}};
}

inline Json game_config_to_json(const GameConfigFile& cfg) {
  if (cfg.preset) {
    Json params = Json::object();
    for (const auto& [k, v] : cfg.preset->params) params[k] = v;
    return Json{{"preset", Json{{"name", cfg.preset->name}, {"params", params}}}};
  }
  return game_to_json(*cfg.explicit_game);
}

inline Json fixed_point_to_json(const FixedPoint& fp) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json j{{"x", fp.state.x},
         {"alpha", fp.state.alpha},
         {"kind", std::string(to_string(fp.kind))},
         {"stability", std::string(to_string(fp.stability))},
         {"u", num(fp.eigen.u)},
         {"v", num(fp.eigen.v)},
         {"lambda1_re", num(fp.eigen.lambda1.real())},
         {"lambda1_im", num(fp.eigen.lambda1.imag())},
         {"lambda2_re", num(fp.eigen.lambda2.real())},
         {"lambda2_im", num(fp.eigen.lambda2.imag())}};
  if (fp.line) j["line"] = true;
  if (fp.degenerate_root) j["degenerate_root"] = true;
  if (!fp.note.empty()) j["note"] = fp.note;
  return j;
}

inline Json equilibria_to_json(const std::vector<FixedPoint>& fps) {
  Json arr = Json::array();
  for (const auto& fp : fps) arr.push_back(fixed_point_to_json(fp));
  return arr;
}

inline Json basin_to_json(const BasinResult& r) {
  Json j{{"attractiveness", r.attractiveness},
         {"n_samples", r.n_samples},
         {"n_cooperative", r.n_cooperative},
         {"seed", r.seed},
         {"eps", r.eps},
         {"t_max", r.t_max},
         {"dt", r.dt}};
  if (!r.samples.empty()) {
    Json samples = Json::array();
    for (const auto& s : r.samples) {
      samples.push_back(Json{{"x0", s.initial.x},
                             {"alpha0", s.initial.alpha},
                             {"termination", std::string(to_string(s.termination))}});
    }
    j["samples"] = std::move(samples);
  }
  return j;
}

/// ABM run description: population settings plus the game.
struct AbmConfigFile {
  AbmConfig abm;
  GameConfigFile game;
};

inline Json abm_config_to_json(const AbmConfig& c) {
  return Json{{"N", c.N},
              {"beta", c.beta},
              {"kappa", c.kappa},
              {"mu", c.mu},
              {"x0", c.x0},
              {"alpha1", c.alpha1},
              {"alpha2", c.alpha2},
              {"split", c.split},
              {"t_max", c.t_max},
              {"seed", c.seed},
              {"perception_mode", std::string(to_string(c.perception_mode))},
              {"alpha_rule", std::string(to_string(c.alpha_rule))},
              {"allow_large_per_interaction", c.allow_large_per_interaction}};
}

inline Json abm_config_file_to_json(const AbmConfigFile& f) {
  Json j = abm_config_to_json(f.abm);
  j["game"] = game_config_to_json(f.game);
  return j;
}

/// Fields: game (required), N, beta, kappa, mu, x0, alpha1, alpha2, split,
/// delta0 (sets alpha1/alpha2/split, exclusive with them), t_max, seed,
/// perception_mode, alpha_rule, allow_large_per_interaction.
inline AbmConfigFile parse_abm_config(std::string_view text) {
  const Json j = detail::parse_text(text);
  detail::Reader r(text);
  r.object(j, "");
  r.only_keys(j, "", {"game", "N", "beta", "kappa", "mu", "x0", "alpha1", "alpha2", "split",
                      "delta0", "t_max", "seed", "perception_mode", "alpha_rule",
                      "allow_large_per_interaction"});
  AbmConfigFile out;
  out.game = read_game_config(r, r.required(j, "", "game"), "/game");
  AbmConfig& c = out.abm;
  auto num = [&](const char* key, double& dst) {
    if (auto it = j.find(key); it != j.end()) dst = r.number(*it, std::string("/") + key);
  };
  auto count = [&](const char* key, auto& dst) {
    if (auto it = j.find(key); it != j.end()) {
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(
          r.unsigned_integer(*it, std::string("/") + key));
    }
  };
  count("N", c.N);
  num("beta", c.beta);
  num("kappa", c.kappa);
  num("mu", c.mu);
  num("x0", c.x0);
  if (j.contains("delta0")) {
    for (const char* k : {"alpha1", "alpha2", "split"}) {
      if (j.contains(k)) r.fail(std::string("/") + k, "conflicts with delta0");
    }
    try {
      c.with_heterogeneity(r.number(j["delta0"], "/delta0"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.fail("/delta0", e.what());
    }
  }
  num("alpha1", c.alpha1);
  num("alpha2", c.alpha2);
  num("split", c.split);
  count("t_max", c.t_max);
  count("seed", c.seed);
  if (auto it = j.find("perception_mode"); it != j.end()) {
    try {
      c.perception_mode = parse_perception_mode(r.string(*it, "/perception_mode"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.fail("/perception_mode", e.what());
    }
  }
  if (auto it = j.find("alpha_rule"); it != j.end()) {
    try {
      c.alpha_rule = parse_alpha_rule(r.string(*it, "/alpha_rule"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.fail("/alpha_rule", e.what());
    }
  }
  if (auto it = j.find("allow_large_per_interaction"); it != j.end()) {
    c.allow_large_per_interaction = r.boolean(*it, "/allow_large_per_interaction");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    r.fail("", e.what());
  }
  return out;
}

}  // namespace drunk::config
