#ifndef QCONC_CONFIG_HPP
#define QCONC_CONFIG_HPP

// Experiment configuration: JSON parsing with strict key checking, shot-regime
// tokens, normalisation and the built-in presets.

#include <qconc/error.hpp>
#include <qconc/optimizers.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qconc {

inline constexpr int kConfigSchemaVersion = 1;

/// Invalid configuration. The message carries "line:column" when the
/// offending token could be located in the source text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, std::string message, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(format(path, message, line, column)),
        path_(std::move(path)),
        line_(line),
        column_(column) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& path, const std::string& message, std::size_t line,
                            std::size_t column) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    if (!path.empty()) out += path + ": ";
    return out + message;
  }

  std::string path_;
  std::size_t line_;
  std::size_t column_;
};

/// A shot regime as written in a config: a fixed count, "infinite", "2^n" or
/// "<k>n" (k times the qubit count).
class ShotToken {
 public:
  enum class Kind { fixed, infinite, exponential, linear };

  static ShotToken fixed(std::uint64_t n) { return ShotToken(Kind::fixed, n); }
  static ShotToken infinite() { return ShotToken(Kind::infinite, 0); }
  static ShotToken exponential() { return ShotToken(Kind::exponential, 0); }
  static ShotToken linear(std::uint64_t k) { return ShotToken(Kind::linear, k); }

  /// Returns nullopt for anything that is not a valid token.
  static std::optional<ShotToken> parse(std::string_view s) {
    if (s == "infinite") return infinite();
    if (s == "2^n") return exponential();
    if (s.size() >= 2 && s.back() == 'n') {
      std::uint64_t k = 0;
      const auto body = s.substr(0, s.size() - 1);
      const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), k);
      if (ec == std::errc() && ptr == body.data() + body.size() && k >= 1) return linear(k);
    }
    return std::nullopt;
  }

  Kind kind() const noexcept { return kind_; }
  std::uint64_t value() const noexcept { return value_; }

  ShotBudget resolve(std::size_t num_qubits) const {
    switch (kind_) {
      case Kind::fixed: return ShotBudget::finite(value_);
      case Kind::infinite: return ShotBudget::infinite();
      case Kind::exponential:
        detail::require(num_qubits < 63, "shots: 2^n overflows for n >= 63");
        return ShotBudget::finite(std::uint64_t{1} << num_qubits);
      case Kind::linear: return ShotBudget::finite(value_ * num_qubits);
    }
    return ShotBudget::infinite();
  }

  /// Short label for file names and plot legends.
  std::string label() const {
    switch (kind_) {
      case Kind::fixed: return std::to_string(value_);
      case Kind::infinite: return "inf";
      case Kind::exponential: return "2pown";
      case Kind::linear: return std::to_string(value_) + "n";
    }
    return "?";
  }

  nlohmann::ordered_json to_json() const {
    switch (kind_) {
      case Kind::fixed: return value_;
      case Kind::infinite: return "infinite";
      case Kind::exponential: return "2^n";
      case Kind::linear: return std::to_string(value_) + "n";
    }
    return nullptr;
  }

  bool operator==(const ShotToken&) const = default;

 private:
  ShotToken(Kind k, std::uint64_t v) : kind_(k), value_(v) {}
  Kind kind_;
  std::uint64_t value_;
};

struct DiagnosticsSettings {
  bool random_walk = false;
  bool pca = false;
  std::size_t pca_resolution = 41;
};

struct TrainingSettings {
  Method method = Method::gd;
  std::vector<std::size_t> system_sizes{15};
  std::vector<ShotToken> shots{ShotToken::infinite()};
  std::size_t ensemble = 20;
  std::size_t steps = 300;
  double learning_rate = 0.1;
  RotationConvention convention = RotationConvention::half_angle;
  std::optional<ShiftRule> shift_rule;
  double gamma = 0.25;
  std::vector<double> cvar_coefficients{1.0, 0.5, 0.25, 0.125};
  QgtSettings qgt;
  MlpSettings mlp;
  double init_low = 0.0;
  double init_high = 2.0 * std::numbers::pi;
  DiagnosticsSettings diagnostics;

  OptimizerConfig optimizer(std::size_t n, const ShotToken& shot) const {
    OptimizerConfig c;
    c.method = method;
    c.num_qubits = n;
    c.learning_rate = learning_rate;
    c.shift_rule = shift_rule;
    c.steps = steps;
    c.shots = shot.resolve(n);
    c.convention = convention;
    c.gamma = gamma;
    c.cvar_coefficients = cvar_coefficients;
    c.qgt = qgt;
    c.mlp = mlp;
    c.init_low = init_low;
    c.init_high = init_high;
    return c;
  }
};

struct CertificateRequest {
  double beta = 0.0;
  std::uint64_t cardinality = 2;
  std::uint64_t shots = 1;
};

struct HypotestSettings {
  std::vector<CertificateRequest> certificates;
  std::uint64_t parity_support = 16;
  std::vector<std::uint64_t> parity_shots{1, 2, 3, 4, 5, 6, 8, 10};
  std::uint64_t parity_trials = 100000;
  std::uint64_t likelihood_trials = 10000;
  std::size_t random_pairs = 100;
  std::uint64_t random_pair_support = 4;
  std::uint64_t family_support = 65536;
  std::vector<std::uint64_t> family_shots{1, 10, 100, 1000};
};

enum class ConcentrationPovm { global_z, cvar_eigen, fidelity_kernel };

inline const char* to_string(ConcentrationPovm p) {
  switch (p) {
    case ConcentrationPovm::global_z: return "global_z";
    case ConcentrationPovm::cvar_eigen: return "cvar_eigen";
    case ConcentrationPovm::fidelity_kernel: return "fidelity_kernel";
  }
  return "?";
}

struct ConcentrationSettings {
  std::vector<std::size_t> system_sizes{6, 8, 10, 12};
  std::size_t draws = 10000;
  std::vector<ConcentrationPovm> povms{ConcentrationPovm::global_z};
  ShotToken shots = ShotToken::infinite();  // infinite: exact probabilities
  RotationConvention convention = RotationConvention::half_angle;
};

enum class ExperimentKind { training, hypotest, concentration };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::training: return "training";
    case ExperimentKind::hypotest: return "hypotest";
    case ExperimentKind::concentration: return "concentration";
  }
  return "?";
}

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::training;
  std::uint64_t seed = 1;
  std::string output_dir;  // empty: runs/<name>
  TrainingSettings training;
  HypotestSettings hypotest;
  ConcentrationSettings concentration;

  std::string resolved_output_dir() const { return output_dir.empty() ? "runs/" + name : output_dir; }
};

// ---------------------------------------------------------------------------
// Serialisation
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json shift_rule_json(const std::optional<ShiftRule>& r) {
  if (!r) return nullptr;
  return {{"shift", r->shift}, {"scale", r->scale}};
}

inline const char* to_string(QgtMode m) {
  return m == QgtMode::analytic ? "analytic" : "shot_estimated";
}

}  // namespace detail

/// Fully resolved configuration in a fixed key order. Parsing the output and
/// serialising again reproduces it byte for byte.
inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["name"] = c.name;
  j["kind"] = to_string(c.kind);
  j["seed"] = c.seed;
  j["output_dir"] = c.resolved_output_dir();
  switch (c.kind) {
    case ExperimentKind::training: {
      const auto& t = c.training;
      ordered_json shots = ordered_json::array();
      for (const auto& s : t.shots) shots.push_back(s.to_json());
      j["training"] = {
          {"method", to_string(t.method)},
          {"system_sizes", t.system_sizes},
          {"shots", shots},
          {"ensemble", t.ensemble},
          {"steps", t.steps},
          {"learning_rate", t.learning_rate},
          {"convention", to_string(t.convention)},
          {"shift_rule", detail::shift_rule_json(t.shift_rule)},
          {"gamma", t.gamma},
          {"cvar_coefficients", t.cvar_coefficients},
          {"qgt", {{"mode", detail::to_string(t.qgt.mode)}, {"tolerance", t.qgt.tolerance}, {"ridge", t.qgt.ridge}}},
          {"mlp", {{"input_dim", t.mlp.input_dim}, {"hidden", t.mlp.hidden}, {"init_scale", t.mlp.init_scale}}},
          {"init_range", {t.init_low, t.init_high}},
          {"diagnostics",
           {{"random_walk", t.diagnostics.random_walk},
            {"pca", t.diagnostics.pca},
            {"pca_resolution", t.diagnostics.pca_resolution}}},
      };
      break;
    }
    case ExperimentKind::hypotest: {
      const auto& h = c.hypotest;
      ordered_json certs = ordered_json::array();
      for (const auto& r : h.certificates) {
        certs.push_back({{"beta", r.beta}, {"cardinality", r.cardinality}, {"shots", r.shots}});
      }
      j["hypotest"] = {
          {"certificates", certs},
          {"parity_support", h.parity_support},
          {"parity_shots", h.parity_shots},
          {"parity_trials", h.parity_trials},
          {"likelihood_trials", h.likelihood_trials},
          {"random_pairs", h.random_pairs},
          {"random_pair_support", h.random_pair_support},
          {"family_support", h.family_support},
          {"family_shots", h.family_shots},
      };
      break;
    }
    case ExperimentKind::concentration: {
      const auto& s = c.concentration;
      ordered_json povms = ordered_json::array();
      for (auto p : s.povms) povms.push_back(to_string(p));
      j["concentration"] = {
          {"system_sizes", s.system_sizes},
          {"draws", s.draws},
          {"povms", povms},
          {"shots", s.shots.to_json()},
          {"convention", to_string(s.convention)},
      };
      break;
    }
  }
  return j;
}

inline std::string normalized_config_text(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

/// Line and column (1-based) of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

/// Walks the object keys of a JSON pointer through the source text to find
/// where the offending value starts. Array indices keep the position of the
/// enclosing key. Returns 0 when the text is unavailable.
inline std::size_t locate(std::string_view text, const std::vector<std::string>& keys) {
  if (text.empty()) return std::string_view::npos;
  std::size_t pos = 0;
  for (const auto& k : keys) {
    if (!k.empty() && std::isdigit(static_cast<unsigned char>(k.front()))) continue;
    const std::string needle = "\"" + k + "\"";
    std::size_t at = text.find(needle, pos);
    while (at != std::string_view::npos) {
      std::size_t after = at + needle.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      at = text.find(needle, at + 1);
    }
    if (at == std::string_view::npos) return pos == 0 ? std::string_view::npos : pos;
    pos = at;
  }
  return pos;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& keys, const std::string& message) const {
    std::string path;
    for (const auto& k : keys) path += "/" + k;
    const std::size_t at = locate(text_, keys);
    if (at == std::string_view::npos) throw ConfigError(path.empty() ? "/" : path, message);
    const auto [line, col] = line_column(text_, at);
    throw ConfigError(path.empty() ? "/" : path, message, line, col);
  }

  void expect_object(const nlohmann::json& j, const std::vector<std::string>& at,
                     std::initializer_list<std::string_view> allowed) const {
    if (!j.is_object()) fail(at, "expected an object");
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) {
        auto p = at;
        p.push_back(key);
        fail(p, "unknown key");
      }
    }
  }

  static std::vector<std::string> child(std::vector<std::string> at, const std::string& key) {
    at.push_back(key);
    return at;
  }

  double number(const nlohmann::json& j, const std::vector<std::string>& at) const {
    if (!j.is_number()) fail(at, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(at, "expected a finite number");
    return v;
  }

  double positive(const nlohmann::json& j, const std::vector<std::string>& at) const {
    const double v = number(j, at);
    if (!(v > 0.0)) fail(at, "must be positive");
    return v;
  }

  std::uint64_t integer(const nlohmann::json& j, const std::vector<std::string>& at,
                        std::uint64_t min = 0) const {
    if (!j.is_number_integer()) fail(at, "expected an integer");
    if (j.is_number_unsigned()) {
      const auto v = j.get<std::uint64_t>();
      if (v < min) fail(at, "must be at least " + std::to_string(min));
      return v;
    }
    const auto v = j.get<std::int64_t>();
    if (v < 0 || static_cast<std::uint64_t>(v) < min) fail(at, "must be at least " + std::to_string(min));
    return static_cast<std::uint64_t>(v);
  }

  std::string string(const nlohmann::json& j, const std::vector<std::string>& at) const {
    if (!j.is_string()) fail(at, "expected a string");
    return j.get<std::string>();
  }

  bool boolean(const nlohmann::json& j, const std::vector<std::string>& at) const {
    if (!j.is_boolean()) fail(at, "expected true or false");
    return j.get<bool>();
  }

  const nlohmann::json& array(const nlohmann::json& j, const std::vector<std::string>& at,
                              bool non_empty = true) const {
    if (!j.is_array()) fail(at, "expected an array");
    if (non_empty && j.empty()) fail(at, "must not be empty");
    return j;
  }

  ShotToken shot(const nlohmann::json& j, const std::vector<std::string>& at) const {
    if (j.is_number_integer()) return ShotToken::fixed(integer(j, at, 1));
    if (j.is_string()) {
      if (auto t = ShotToken::parse(j.get<std::string>())) return *t;
    }
    fail(at, "expected a positive integer, \"infinite\", \"2^n\" or \"<k>n\"");
  }

  RotationConvention convention(const nlohmann::json& j, const std::vector<std::string>& at) const {
    const auto s = string(j, at);
    if (s == "half_angle") return RotationConvention::half_angle;
    if (s == "full_angle") return RotationConvention::full_angle;
    fail(at, "expected \"half_angle\" or \"full_angle\"");
  }

 private:
  std::string_view text_;
};

inline Method parse_method(const Reader& r, const nlohmann::json& j, const std::vector<std::string>& at) {
  const auto s = r.string(j, at);
  for (Method m : {Method::gd, Method::qng, Method::cvar_gd, Method::rps, Method::nn_init}) {
    if (s == to_string(m)) return m;
  }
  r.fail(at, "unknown method \"" + s + "\" (gd, qng, cvar_gd, rps, nn_init)");
}

inline TrainingSettings parse_training(const Reader& r, const nlohmann::json& j,
                                       const std::vector<std::string>& at) {
  r.expect_object(j, at,
                  {"method", "system_sizes", "shots", "ensemble", "steps", "learning_rate", "convention",
                   "shift_rule", "gamma", "cvar_coefficients", "qgt", "mlp", "init_range", "diagnostics"});
  TrainingSettings t;
  auto c = [&](const char* k) { return Reader::child(at, k); };
  if (!j.contains("method")) r.fail(at, "missing key \"method\"");
  t.method = parse_method(r, j.at("method"), c("method"));
  if (j.contains("system_sizes")) {
    t.system_sizes.clear();
    const auto& a = r.array(j.at("system_sizes"), c("system_sizes"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto p = Reader::child(c("system_sizes"), std::to_string(i));
      const auto n = r.integer(a[i], p, 1);
      if (n > 62) r.fail(p, "at most 62 qubits supported");
      t.system_sizes.push_back(n);
    }
  }
  if (j.contains("shots")) {
    t.shots.clear();
    const auto& a = r.array(j.at("shots"), c("shots"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      t.shots.push_back(r.shot(a[i], Reader::child(c("shots"), std::to_string(i))));
    }
  }
  if (j.contains("ensemble")) t.ensemble = r.integer(j.at("ensemble"), c("ensemble"), 1);
  if (j.contains("steps")) t.steps = r.integer(j.at("steps"), c("steps"), 1);
  if (j.contains("learning_rate")) t.learning_rate = r.positive(j.at("learning_rate"), c("learning_rate"));
  if (j.contains("convention")) t.convention = r.convention(j.at("convention"), c("convention"));
  if (j.contains("shift_rule") && !j.at("shift_rule").is_null()) {
    const auto p = c("shift_rule");
    r.expect_object(j.at("shift_rule"), p, {"shift", "scale"});
    if (!j.at("shift_rule").contains("shift") || !j.at("shift_rule").contains("scale")) {
      r.fail(p, "needs both \"shift\" and \"scale\"");
    }
    const double s = r.positive(j.at("shift_rule").at("shift"), Reader::child(p, "shift"));
    if (s > std::numbers::pi) r.fail(Reader::child(p, "shift"), "must not exceed pi");
    t.shift_rule = ShiftRule{s, r.positive(j.at("shift_rule").at("scale"), Reader::child(p, "scale"))};
  }
  if (j.contains("gamma")) {
    t.gamma = r.positive(j.at("gamma"), c("gamma"));
    if (t.gamma > 1.0) r.fail(c("gamma"), "must lie in (0, 1]");
  }
  if (j.contains("cvar_coefficients")) {
    const auto& a = r.array(j.at("cvar_coefficients"), c("cvar_coefficients"));
    if (a.size() != 4) r.fail(c("cvar_coefficients"), "expected exactly four coefficients");
    t.cvar_coefficients.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      t.cvar_coefficients.push_back(r.number(a[i], Reader::child(c("cvar_coefficients"), std::to_string(i))));
    }
  }
  if (j.contains("qgt")) {
    const auto p = c("qgt");
    const auto& q = j.at("qgt");
    r.expect_object(q, p, {"mode", "tolerance", "ridge"});
    if (q.contains("mode")) {
      const auto s = r.string(q.at("mode"), Reader::child(p, "mode"));
      if (s == "analytic") t.qgt.mode = QgtMode::analytic;
      else if (s == "shot_estimated") t.qgt.mode = QgtMode::shot_estimated;
      else r.fail(Reader::child(p, "mode"), "expected \"analytic\" or \"shot_estimated\"");
    }
    if (q.contains("tolerance")) t.qgt.tolerance = r.positive(q.at("tolerance"), Reader::child(p, "tolerance"));
    if (q.contains("ridge")) {
      t.qgt.ridge = r.number(q.at("ridge"), Reader::child(p, "ridge"));
      if (t.qgt.ridge < 0.0) r.fail(Reader::child(p, "ridge"), "must be non-negative");
    }
  }
  if (j.contains("mlp")) {
    const auto p = c("mlp");
    const auto& m = j.at("mlp");
    r.expect_object(m, p, {"input_dim", "hidden", "init_scale"});
    if (m.contains("input_dim")) t.mlp.input_dim = r.integer(m.at("input_dim"), Reader::child(p, "input_dim"), 1);
    if (m.contains("hidden")) t.mlp.hidden = r.integer(m.at("hidden"), Reader::child(p, "hidden"));
    if (m.contains("init_scale")) t.mlp.init_scale = r.positive(m.at("init_scale"), Reader::child(p, "init_scale"));
  }
  if (j.contains("init_range")) {
    const auto& a = r.array(j.at("init_range"), c("init_range"));
    if (a.size() != 2) r.fail(c("init_range"), "expected [low, high]");
    t.init_low = r.number(a[0], Reader::child(c("init_range"), "0"));
    t.init_high = r.number(a[1], Reader::child(c("init_range"), "1"));
    if (!(t.init_high > t.init_low)) r.fail(c("init_range"), "high must exceed low");
  }
  if (j.contains("diagnostics")) {
    const auto p = c("diagnostics");
    const auto& d = j.at("diagnostics");
    r.expect_object(d, p, {"random_walk", "pca", "pca_resolution"});
    if (d.contains("random_walk")) t.diagnostics.random_walk = r.boolean(d.at("random_walk"), Reader::child(p, "random_walk"));
    if (d.contains("pca")) t.diagnostics.pca = r.boolean(d.at("pca"), Reader::child(p, "pca"));
    if (d.contains("pca_resolution")) {
      t.diagnostics.pca_resolution = r.integer(d.at("pca_resolution"), Reader::child(p, "pca_resolution"), 2);
    }
  }
  if (t.method == Method::cvar_gd) {
    for (std::size_t i = 0; i < t.system_sizes.size(); ++i) {
      if (t.system_sizes[i] < 4) {
        r.fail(Reader::child(c("system_sizes"), std::to_string(i)), "cvar_gd needs at least four qubits");
      }
    }
  }
  return t;
}

inline HypotestSettings parse_hypotest(const Reader& r, const nlohmann::json& j,
                                       const std::vector<std::string>& at) {
  r.expect_object(j, at,
                  {"certificates", "parity_support", "parity_shots", "parity_trials", "likelihood_trials",
                   "random_pairs", "random_pair_support", "family_support", "family_shots"});
  HypotestSettings h;
  auto c = [&](const char* k) { return Reader::child(at, k); };
  auto even_support = [&](const char* key, std::uint64_t& out) {
    if (!j.contains(key)) return;
    out = r.integer(j.at(key), c(key), 2);
    if (out % 2 != 0) r.fail(c(key), "must be even");
  };
  auto integer_list = [&](const char* key, std::vector<std::uint64_t>& out) {
    if (!j.contains(key)) return;
    const auto& a = r.array(j.at(key), c(key));
    out.clear();
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(r.integer(a[i], Reader::child(c(key), std::to_string(i)), 1));
  };
  if (j.contains("certificates")) {
    const auto& a = r.array(j.at("certificates"), c("certificates"), false);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto p = Reader::child(c("certificates"), std::to_string(i));
      r.expect_object(a[i], p, {"beta", "cardinality", "shots"});
      for (const char* k : {"beta", "cardinality", "shots"}) {
        if (!a[i].contains(k)) r.fail(p, std::string("missing key \"") + k + "\"");
      }
      CertificateRequest q;
      q.beta = r.positive(a[i].at("beta"), Reader::child(p, "beta"));
      if (q.beta > 1.0) r.fail(Reader::child(p, "beta"), "must lie in (0, 1]");
      q.cardinality = r.integer(a[i].at("cardinality"), Reader::child(p, "cardinality"), 2);
      q.shots = r.integer(a[i].at("shots"), Reader::child(p, "shots"), 1);
      h.certificates.push_back(q);
    }
  }
  even_support("parity_support", h.parity_support);
  integer_list("parity_shots", h.parity_shots);
  if (j.contains("parity_trials")) h.parity_trials = r.integer(j.at("parity_trials"), c("parity_trials"), 1);
  if (j.contains("likelihood_trials")) h.likelihood_trials = r.integer(j.at("likelihood_trials"), c("likelihood_trials"), 1);
  if (j.contains("random_pairs")) h.random_pairs = r.integer(j.at("random_pairs"), c("random_pairs"));
  if (j.contains("random_pair_support")) {
    h.random_pair_support = r.integer(j.at("random_pair_support"), c("random_pair_support"), 2);
  }
  even_support("family_support", h.family_support);
  integer_list("family_shots", h.family_shots);
  return h;
}

inline ConcentrationSettings parse_concentration(const Reader& r, const nlohmann::json& j,
                                                 const std::vector<std::string>& at) {
  r.expect_object(j, at, {"system_sizes", "draws", "povms", "shots", "convention"});
  ConcentrationSettings s;
  auto c = [&](const char* k) { return Reader::child(at, k); };
  if (j.contains("system_sizes")) {
    s.system_sizes.clear();
    const auto& a = r.array(j.at("system_sizes"), c("system_sizes"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto p = Reader::child(c("system_sizes"), std::to_string(i));
      const auto n = r.integer(a[i], p, 1);
      if (n > 62) r.fail(p, "at most 62 qubits supported");
      s.system_sizes.push_back(n);
    }
  }
  if (j.contains("draws")) s.draws = r.integer(j.at("draws"), c("draws"), 2);
  if (j.contains("povms")) {
    s.povms.clear();
    const auto& a = r.array(j.at("povms"), c("povms"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto p = Reader::child(c("povms"), std::to_string(i));
      const auto name = r.string(a[i], p);
      bool found = false;
      for (auto k : {ConcentrationPovm::global_z, ConcentrationPovm::cvar_eigen, ConcentrationPovm::fidelity_kernel}) {
        if (name == to_string(k)) {
          s.povms.push_back(k);
          found = true;
        }
      }
      if (!found) r.fail(p, "unknown POVM \"" + name + "\" (global_z, cvar_eigen, fidelity_kernel)");
    }
  }
  if (j.contains("shots")) {
    s.shots = r.shot(j.at("shots"), c("shots"));
    if (s.shots.kind() != ShotToken::Kind::infinite && s.shots.kind() != ShotToken::Kind::fixed) {
      r.fail(c("shots"), "expected \"infinite\" or a fixed count of at least 2");
    }
    if (s.shots.kind() == ShotToken::Kind::fixed && s.shots.value() < 2) r.fail(c("shots"), "must be at least 2");
  }
  if (j.contains("convention")) s.convention = r.convention(j.at("convention"), c("convention"));
  for (auto p : s.povms) {
    if (p == ConcentrationPovm::cvar_eigen) {
      for (std::size_t i = 0; i < s.system_sizes.size(); ++i) {
        if (s.system_sizes[i] < 4) {
          r.fail(Reader::child(c("system_sizes"), std::to_string(i)), "cvar_eigen needs at least four qubits");
        }
      }
    }
  }
  return s;
}

inline ExperimentConfig parse_config_json(const nlohmann::json& j, std::string_view text) {
  const Reader r(text);
  r.expect_object(j, {}, {"schema_version", "name", "kind", "seed", "output_dir", "training", "hypotest", "concentration"});
  ExperimentConfig c;
  if (j.contains("schema_version") &&
      r.integer(j.at("schema_version"), {"schema_version"}) != static_cast<std::uint64_t>(kConfigSchemaVersion)) {
    r.fail({"schema_version"}, "unsupported schema version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  if (j.contains("name")) {
    c.name = r.string(j.at("name"), {"name"});
    if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
      r.fail({"name"}, "must be a non-empty name without path separators");
    }
  }
  if (!j.contains("kind")) r.fail({}, "missing key \"kind\"");
  const auto kind = r.string(j.at("kind"), {"kind"});
  if (kind == "training") c.kind = ExperimentKind::training;
  else if (kind == "hypotest") c.kind = ExperimentKind::hypotest;
  else if (kind == "concentration") c.kind = ExperimentKind::concentration;
  else r.fail({"kind"}, "expected \"training\", \"hypotest\" or \"concentration\"");
  if (j.contains("seed")) c.seed = r.integer(j.at("seed"), {"seed"});
  if (j.contains("output_dir")) c.output_dir = r.string(j.at("output_dir"), {"output_dir"});

  const char* section = to_string(c.kind);
  for (const char* other : {"training", "hypotest", "concentration"}) {
    if (std::string_view(other) != section && j.contains(other)) {
      r.fail({other}, std::string("section does not match kind \"") + section + "\"");
    }
  }
  if (!j.contains(section)) r.fail({}, std::string("missing section \"") + section + "\"");
  switch (c.kind) {
    case ExperimentKind::training: c.training = parse_training(r, j.at(section), {section}); break;
    case ExperimentKind::hypotest: c.hypotest = parse_hypotest(r, j.at(section), {section}); break;
    case ExperimentKind::concentration:
      c.concentration = parse_concentration(r, j.at(section), {section});
      break;
  }
  return c;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError("", what, line, col);
  }
  return detail::parse_config_json(j, text);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3",     "fig4-qng",      "fig4-cvar",         "fig4-nn",
                                              "fig4-rps", "hypotest-demo", "concentration-scan"};
  return names;
}

namespace detail {

/// Fig. 4 cells: n in {9,...,17}, shots {10n, 2^n, infinite}. Step sizes keep
/// the infinite-shot loss monotone (see README).
inline ExperimentConfig fig4_preset(const std::string& name, Method method, double eta) {
  ExperimentConfig c;
  c.name = name;
  c.kind = ExperimentKind::training;
  c.seed = 2024;
  auto& t = c.training;
  t.method = method;
  t.system_sizes = {9, 11, 13, 15, 17};
  t.shots = {ShotToken::linear(10), ShotToken::exponential(), ShotToken::infinite()};
  t.ensemble = 20;
  t.steps = 300;
  t.learning_rate = eta;
  return c;
}

}  // namespace detail

/// Throws ConfigError for unknown names.
inline ExperimentConfig preset(const std::string& name) {
  if (name == "fig3") {
    ExperimentConfig c;
    c.name = name;
    c.seed = 2024;
    auto& t = c.training;
    t.method = Method::gd;
    t.system_sizes = {15};
    t.shots = {ShotToken::fixed(150), ShotToken::exponential(), ShotToken::infinite()};
    t.ensemble = 100;
    t.steps = 300;
    t.learning_rate = 0.1;
    t.diagnostics = {true, true, 41};
    return c;
  }
  if (name == "fig4-qng") return detail::fig4_preset(name, Method::qng, 0.0125);
  if (name == "fig4-cvar") return detail::fig4_preset(name, Method::cvar_gd, 0.05);
  if (name == "fig4-nn") return detail::fig4_preset(name, Method::nn_init, 0.002);
  if (name == "fig4-rps") return detail::fig4_preset(name, Method::rps, 0.05);
  if (name == "hypotest-demo") {
    ExperimentConfig c;
    c.name = name;
    c.kind = ExperimentKind::hypotest;
    c.seed = 2024;
    auto& h = c.hypotest;
    h.certificates = {{std::ldexp(1.0, -40), 2, 100}, {std::ldexp(1.0, -20), 2, 100},
                      {std::ldexp(1.0, -40), 4, 1000}, {std::ldexp(1.0, -10), 2, 10},
                      {1.0, 2, 1}};
    return c;
  }
  if (name == "concentration-scan") {
    ExperimentConfig c;
    c.name = name;
    c.kind = ExperimentKind::concentration;
    c.seed = 2024;
    auto& s = c.concentration;
    s.system_sizes = {6, 8, 10, 12};
    s.draws = 10000;
    s.povms = {ConcentrationPovm::global_z, ConcentrationPovm::cvar_eigen, ConcentrationPovm::fidelity_kernel};
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("", "unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace qconc

#endif  // QCONC_CONFIG_HPP
