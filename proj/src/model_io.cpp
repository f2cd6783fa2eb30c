#include "dht/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dht/errors.hpp"
#include "dht/gaussian_tools.hpp"

namespace dht {

using nlohmann::json;

const char* to_string(ModelKind k) noexcept {
  return k == ModelKind::Discrete ? "discrete" : "gaussian";
}

namespace {

[[noreturn]] void bad(const std::string& ptr, const std::string& msg) {
  fail(ErrorCode::Validation, (ptr.empty() ? std::string("/") : ptr) + ": " + msg);
}

// Re-throws library validation errors with the field they came from.
template <class F>
auto at_field(const std::string& ptr, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    fail(e.code(), ptr + ": " + e.what());
  }
}

void check_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(ptr, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) bad(ptr + "/" + k, "unknown field");
  }
}

const json& require(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.contains(key)) bad(ptr + "/" + key, "missing required field");
  return obj.at(key);
}

double get_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) bad(ptr, "expected a number");
  return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& ptr) {
  if (!j.is_number_integer() || j.get<long long>() < 1) bad(ptr, "expected a positive integer");
  return j.get<std::size_t>();
}

std::vector<double> get_vector(const json& j, const std::string& ptr) {
  if (!j.is_array()) bad(ptr, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], ptr + "/" + std::to_string(i)));
  return out;
}

std::vector<double> get_matrix(const json& j, std::size_t rows, std::size_t cols,
                               const std::string& ptr) {
  if (!j.is_array() || j.size() != rows) {
    bad(ptr, "expected " + std::to_string(rows) + " rows");
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = ptr + "/" + std::to_string(r);
    const std::vector<double> row = get_vector(j[r], rp);
    if (row.size() != cols) bad(rp, "expected " + std::to_string(cols) + " entries");
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::size_t alphabet_size(const json& j, const std::string& ptr) {
  if (j.is_array()) {
    if (j.empty()) bad(ptr, "alphabet is empty");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_string()) bad(ptr + "/" + std::to_string(i), "labels must be strings");
      if (!labels.insert(j[i].get<std::string>()).second) {
        bad(ptr + "/" + std::to_string(i), "duplicate label");
      }
    }
    return j.size();
  }
  return get_count(j, ptr);
}

JointPmf get_pmf(const json& j, std::size_t nx, std::size_t ny, const std::string& ptr) {
  std::vector<double> probs = get_matrix(j, nx, ny, ptr);
  return at_field(ptr, [&] { return JointPmf(nx, ny, std::move(probs)); });
}

TestChannel parse_discrete_channel(const json& j, std::size_t nx, const std::string& ptr) {
  const std::string kind = require(j, ptr, "kind").is_string() ? j.at("kind").get<std::string>() : "";
  if (kind == "bsc") {
    check_keys(j, ptr, {"kind", "crossover"});
    if (nx != 2) bad(ptr + "/kind", "a BSC needs a binary X alphabet");
    const double q = get_number(require(j, ptr, "crossover"), ptr + "/crossover");
    return at_field(ptr + "/crossover", [&] { return TestChannel::bsc(q); });
  }
  if (kind == "discrete") {
    check_keys(j, ptr, {"kind", "matrix"});
    const json& m = require(j, ptr, "matrix");
    if (!m.is_array() || m.empty() || !m[0].is_array() || m[0].empty()) {
      bad(ptr + "/matrix", "expected a nonempty |X| x |U| matrix");
    }
    const std::size_t nu = m[0].size();
    std::vector<double> rows = get_matrix(m, nx, nu, ptr + "/matrix");
    return at_field(ptr + "/matrix", [&] { return TestChannel::discrete(nx, nu, std::move(rows)); });
  }
  if (kind == "gaussian") bad(ptr + "/kind", "a Gaussian channel needs a Gaussian model");
  bad(ptr + "/kind", "expected \"bsc\" or \"discrete\"");
}

ModelSpec parse_discrete(const json& doc) {
  check_keys(doc, "", {"name", "kind", "alphabet_x", "alphabet_y", "memory", "pmf_h0", "pmf_h1",
                       "markov", "mixture", "block", "channel", "marginal_tolerance"});
  ModelSpec spec;
  spec.kind = ModelKind::Discrete;
  json resolved = doc;
  std::size_t nx = alphabet_size(require(doc, "", "alphabet_x"), "/alphabet_x");
  std::size_t ny = alphabet_size(require(doc, "", "alphabet_y"), "/alphabet_y");
  const std::string memory = doc.value("memory", "iid");
  resolved["memory"] = memory;
  double tol = kValidationTolerance;
  if (doc.contains("marginal_tolerance")) {
    tol = get_number(doc.at("marginal_tolerance"), "/marginal_tolerance");
    if (!(tol > 0.0)) bad("/marginal_tolerance", "must be positive");
  }

  if (memory == "iid") {
    if (doc.contains("block")) {
      const json& b = doc.at("block");
      check_keys(b, "/block", {"x", "y", "pmf_h0", "pmf_h1"});
      const std::size_t m = get_count(require(b, "/block", "x"), "/block/x");
      const std::size_t n = get_count(require(b, "/block", "y"), "/block/y");
      std::size_t sx = 1, sy = 1;
      for (std::size_t i = 0; i < m; ++i) sx *= nx;
      for (std::size_t i = 0; i < n; ++i) sy *= ny;
      JointPmf h0 = get_pmf(require(b, "/block", "pmf_h0"), sx, sy, "/block/pmf_h0");
      JointPmf h1 = get_pmf(require(b, "/block", "pmf_h1"), sx, sy, "/block/pmf_h1");
      spec.discrete = at_field("/block", [&] {
        return BlockIidSource(m, n, nx, ny, std::move(h0), std::move(h1)).reduce();
      });
      nx = sx;
      ny = sy;
    } else {
      JointPmf h0 = get_pmf(require(doc, "", "pmf_h0"), nx, ny, "/pmf_h0");
      JointPmf h1 = get_pmf(require(doc, "", "pmf_h1"), nx, ny, "/pmf_h1");
      spec.discrete = DiscreteJointSource::iid(std::move(h0), std::move(h1));
    }
  } else if (memory == "markov") {
    const json& mk = require(doc, "", "markov");
    check_keys(mk, "/markov", {"initial_h0", "transition_h0", "initial_h1", "transition_h1"});
    const std::size_t s = nx * ny;
    MarkovLaw law[2];
    for (int h = 0; h < 2; ++h) {
      const std::string suffix = h == 0 ? "_h0" : "_h1";
      const std::string ip = "/markov/initial" + suffix, tp = "/markov/transition" + suffix;
      law[h].initial = get_vector(require(mk, "/markov", ("initial" + suffix).c_str()), ip);
      if (law[h].initial.size() != s) bad(ip, "expected " + std::to_string(s) + " pair states");
      law[h].transition = get_matrix(require(mk, "/markov", ("transition" + suffix).c_str()), s, s, tp);
    }
    spec.discrete = at_field("/markov", [&] {
      return DiscreteJointSource::markov(nx, ny, std::move(law[0]), std::move(law[1]));
    });
  } else if (memory == "mixture") {
    const json& mx = require(doc, "", "mixture");
    if (!mx.is_array() || mx.empty()) bad("/mixture", "expected a nonempty array of components");
    std::vector<MixtureComponent> comps;
    for (std::size_t k = 0; k < mx.size(); ++k) {
      const std::string cp = "/mixture/" + std::to_string(k);
      check_keys(mx[k], cp, {"weight", "pmf_h0", "pmf_h1"});
      MixtureComponent c;
      c.weight = get_number(require(mx[k], cp, "weight"), cp + "/weight");
      c.h0 = get_pmf(require(mx[k], cp, "pmf_h0"), nx, ny, cp + "/pmf_h0");
      c.h1 = get_pmf(require(mx[k], cp, "pmf_h1"), nx, ny, cp + "/pmf_h1");
      comps.push_back(std::move(c));
    }
    spec.discrete = at_field("/mixture", [&] { return DiscreteJointSource::mixture(std::move(comps)); });
  } else {
    bad("/memory", "expected \"iid\", \"markov\" or \"mixture\"");
  }

  at_field("", [&] { require_equal_marginals(*spec.discrete, tol); });
  spec.channel = parse_discrete_channel(require(doc, "", "channel"), nx, "/channel");
  resolved["alphabet_x"] = doc.at("alphabet_x").is_array() ? doc.at("alphabet_x") : json(nx);
  resolved["alphabet_y"] = doc.at("alphabet_y").is_array() ? doc.at("alphabet_y") : json(ny);
  resolved["marginal_tolerance"] = tol;
  spec.resolved = std::move(resolved);
  return spec;
}

std::vector<double> get_acf(const json& j, const std::string& ptr) {
  if (j.is_object()) {
    check_keys(j, ptr, {"ar1_rho", "scale", "max_lag"});
    const double rho = get_number(require(j, ptr, "ar1_rho"), ptr + "/ar1_rho");
    const double scale = j.contains("scale") ? get_number(j.at("scale"), ptr + "/scale") : 1.0;
    const std::size_t max_lag =
        j.contains("max_lag") ? get_count(j.at("max_lag"), ptr + "/max_lag") : 1024;
    if (!(rho > -1.0 && rho < 1.0)) bad(ptr + "/ar1_rho", "must lie in (-1, 1)");
    return ar1_autocovariance(rho, scale, max_lag);
  }
  std::vector<double> v = get_vector(j, ptr);
  if (v.empty()) bad(ptr, "expected at least one lag");
  return v;
}

CrossCovariance get_ccf(const json& j, const std::string& ptr) {
  if (j.is_object() && j.contains("nonnegative")) {
    check_keys(j, ptr, {"nonnegative", "negative"});
    CrossCovariance c;
    c.nonnegative = get_vector(j.at("nonnegative"), ptr + "/nonnegative");
    if (j.contains("negative")) c.negative = get_vector(j.at("negative"), ptr + "/negative");
    return c;
  }
  return CrossCovariance{get_acf(j, ptr), {}};
}

ModelSpec parse_gaussian(const json& doc) {
  check_keys(doc, "", {"name", "kind", "acf_x", "acf_y", "ccf_h0", "ccf_h1", "mean_x", "mean_y",
                       "mean_shift_x_h1", "mean_shift_y_h1", "channel"});
  ModelSpec spec;
  spec.kind = ModelKind::Gaussian;
  GaussianJointSource src;
  src.acf_x = get_acf(require(doc, "", "acf_x"), "/acf_x");
  src.acf_y = get_acf(require(doc, "", "acf_y"), "/acf_y");
  src.ccf_h0 = get_ccf(require(doc, "", "ccf_h0"), "/ccf_h0");
  src.ccf_h1 = doc.contains("ccf_h1") ? get_ccf(doc.at("ccf_h1"), "/ccf_h1") : CrossCovariance{{0.0}, {}};
  auto opt_number = [&](const char* key) {
    return doc.contains(key) ? get_number(doc.at(key), std::string("/") + key) : 0.0;
  };
  src.mean_x = opt_number("mean_x");
  src.mean_y = opt_number("mean_y");
  src.mean_shift_x_h1 = opt_number("mean_shift_x_h1");
  src.mean_shift_y_h1 = opt_number("mean_shift_y_h1");
  if (src.acf_x[0] <= 0.0) bad("/acf_x/0", "variance must be positive");
  if (src.acf_y[0] <= 0.0) bad("/acf_y/0", "variance must be positive");
  spec.warnings = at_field("", [&] { return validate_gaussian_source(src, 1); });

  if (doc.contains("channel")) {
    const json& ch = doc.at("channel");
    check_keys(ch, "/channel", {"kind", "kappa"});
    if (ch.value("kind", "") != "gaussian") bad("/channel/kind", "a Gaussian model needs \"gaussian\"");
    const double kappa = get_number(require(ch, "/channel", "kappa"), "/channel/kappa");
    spec.channel = at_field("/channel/kappa", [&] { return TestChannel::gaussian(kappa); });
  }
  json resolved = doc;
  if (!doc.contains("ccf_h1")) resolved["ccf_h1"] = json::array({0.0});
  for (const char* key : {"mean_x", "mean_y", "mean_shift_x_h1", "mean_shift_y_h1"}) {
    if (!doc.contains(key)) resolved[key] = 0.0;
  }
  spec.resolved = std::move(resolved);
  spec.gaussian = std::move(src);
  return spec;
}

}  // namespace

ModelSpec parse_model(const json& doc) {
  if (!doc.is_object()) bad("", "model must be a JSON object");
  const json& kind = require(doc, "", "kind");
  if (!kind.is_string()) bad("/kind", "expected a string");
  ModelSpec spec;
  if (kind == "discrete") {
    spec = parse_discrete(doc);
  } else if (kind == "gaussian") {
    spec = parse_gaussian(doc);
  } else {
    bad("/kind", "expected \"discrete\" or \"gaussian\"");
  }
  if (doc.contains("name") && !doc.at("name").is_string()) bad("/name", "expected a string");
  spec.name = doc.value("name", "model");
  spec.resolved["name"] = spec.name;
  spec.resolved["kind"] = to_string(spec.kind);
  return spec;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": JSON syntax error";
    fail(ErrorCode::Validation, os.str());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Validation, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

ModelSpec load_model(const std::filesystem::path& path) {
  return parse_model(read_json_file(path));
}

}  // namespace dht
