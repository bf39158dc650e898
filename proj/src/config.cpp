#include "anovasvm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "anovasvm/errors.hpp"

namespace anovasvm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const std::string& why) {
  fail(ErrorCode::config_error, "invalid value '" + std::string(value) + "' for '" + std::string(key) + "': " + why);
}

double to_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    bad_value(key, text, "expected a number");
  return v;
}

std::uint64_t to_u64(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text, "expected a nonnegative integer");
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  bad_value(key, text, "expected true or false");
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = text.find(',', pos);
    const auto tok = trim(text.substr(pos, next == std::string_view::npos ? text.npos : next - pos));
    if (!tok.empty()) out.push_back(tok);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// "2^-3" or a plain number
double lambda_value(std::string_view tok) {
  if (tok.size() > 2 && tok.substr(0, 2) == "2^") {
    const auto e = to_double("lambda", tok.substr(2));
    if (e != std::floor(e)) bad_value("lambda", tok, "exponent must be an integer");
    return std::ldexp(1.0, static_cast<int>(e));
  }
  return to_double("lambda", tok);
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto str = [](std::string RunConfig::*field) {
      return [field](RunConfig& c, std::string_view, std::string_view v) { c.*field = std::string(v); };
    };
    auto size = [](std::size_t RunConfig::*field, std::size_t min) {
      return [field, min](RunConfig& c, std::string_view k, std::string_view v) {
        const auto n = to_u64(k, v);
        if (n < min) bad_value(k, v, "must be >= " + std::to_string(min));
        c.*field = static_cast<std::size_t>(n);
      };
    };
    auto solver_double = [](double SolveConfig::*field) {
      return [field](RunConfig& c, std::string_view k, std::string_view v) { c.solve.*field = to_double(k, v); };
    };
    t["data"] = str(&RunConfig::data);
    t["test-data"] = str(&RunConfig::test_data);
    t["model"] = str(&RunConfig::model);
    t["active-set"] = str(&RunConfig::active_set);
    t["out"] = str(&RunConfig::out);
    t["trace"] = str(&RunConfig::trace);
    t["suite"] = str(&RunConfig::suite);
    t["format"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      if (v != "auto" && v != "csv" && v != "libsvm") bad_value(k, v, "expected auto, csv or libsvm");
      c.format = std::string(v);
    };
    t["delimiter"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      if (v == "tab" || v == "\\t") c.delimited.delimiter = '\t';
      else if (v == "space") c.delimited.delimiter = ' ';
      else if (v.size() == 1) c.delimited.delimiter = v[0];
      else bad_value(k, v, "expected a single character, 'tab' or 'space'");
    };
    t["label-column"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      if (v == "last") {
        c.delimited.label_column = -1;
        return;
      }
      int n = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(k, v, "expected an integer or 'last'");
      c.delimited.label_column = n;
    };
    t["header"] = [](RunConfig& c, std::string_view k, std::string_view v) { c.delimited.header = to_bool(k, v); };
    t["scale"] = [](RunConfig& c, std::string_view k, std::string_view v) { c.scale = to_bool(k, v); };
    t["basis"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      try {
        c.basis = parse_basis_kind(v);
      } catch (const Error&) {
        bad_value(k, v, "expected cos or haar");
      }
    };
    t["normalization"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      try {
        c.normalization = parse_normalization(v);
      } catch (const Error&) {
        bad_value(k, v, "expected orthonormal or factor2");
      }
    };
    t["ds"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      const auto n = to_u64(k, v);
      if (n < 1) bad_value(k, v, "must be >= 1");
      c.ds = static_cast<int>(n);
    };
    auto order = [](std::size_t index) {
      return [index](RunConfig& c, std::string_view k, std::string_view v) {
        const auto n = to_u64(k, v);
        if (c.per_order.size() <= index) c.per_order.resize(index + 1, static_cast<int>(n));
        c.per_order[index] = static_cast<int>(n);
      };
    };
    t["n1"] = order(0);
    t["n2"] = order(1);
    t["n3"] = order(2);
    t["bandwidths"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      try {
        c.per_order = parse_int_list(v);
      } catch (const Error&) {
        bad_value(k, v, "expected a comma-separated integer list");
      }
    };
    t["reg"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      if (v == "l1") c.reg = RegKind::l1;
      else if (v == "l2") c.reg = RegKind::l2;
      else bad_value(k, v, "expected l1 or l2");
    };
    t["lambda"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      const double l = lambda_value(trim(v));
      if (l < 0) bad_value(k, v, "must be >= 0");
      c.lambdas = {l};
    };
    t["lambda-grid"] = [](RunConfig& c, std::string_view, std::string_view v) { c.lambdas = parse_lambda_grid(v); };
    t["max-iters"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      c.solve.max_iters = static_cast<std::size_t>(to_u64(k, v));
    };
    t["grad-tol"] = solver_double(&SolveConfig::grad_tol);
    t["obj-tol"] = solver_double(&SolveConfig::obj_tol);
    t["step-tol"] = solver_double(&SolveConfig::step_tol);
    t["armijo-sigma"] = solver_double(&SolveConfig::armijo_sigma);
    t["armijo-shrink"] = solver_double(&SolveConfig::armijo_shrink);
    t["armijo-initial-step"] = solver_double(&SolveConfig::armijo_initial_step);
    t["fista-l0"] = solver_double(&SolveConfig::fista_L0);
    t["fista-theta"] = solver_double(&SolveConfig::fista_theta);
    t["train-count"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      c.train_count = static_cast<std::size_t>(to_u64(k, v));
      c.train_ratio.reset();
    };
    t["train-ratio"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      const double r = to_double(k, v);
      if (!(r > 0 && r < 1)) bad_value(k, v, "must lie in (0,1)");
      c.train_ratio = r;
      c.train_count.reset();
    };
    t["seed"] = [](RunConfig& c, std::string_view k, std::string_view v) { c.seed = to_u64(k, v); };
    t["runs"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      const auto n = to_u64(k, v);
      if (n < 1) bad_value(k, v, "must be >= 1");
      c.runs = static_cast<std::size_t>(n);
    };
    t["max-rows"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      c.delimited.max_rows = static_cast<std::size_t>(to_u64(k, v));
    };
    t["jobs"] = size(&RunConfig::jobs, 1);
    t["eps"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      const double e = to_double(k, v);
      if (!(e > 0)) bad_value(k, v, "must be positive");
      c.eps = e;
    };
    t["toy"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      if (v != "toy1d" && v != "toy6d" && v != "friedman10d") bad_value(k, v, "expected toy1d, toy6d or friedman10d");
      c.toy = std::string(v);
    };
    t["samples"] = size(&RunConfig::samples, 1);
    t["test-samples"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      const auto n = to_u64(k, v);
      if (n < 1) bad_value(k, v, "must be >= 1");
      c.test_samples = static_cast<std::size_t>(n);
    };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto tok : split_list(text)) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      fail(ErrorCode::config_error, "malformed integer '" + std::string(tok) + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_lambda_grid(std::string_view text) {
  std::vector<double> out;
  for (auto tok : split_list(text)) {
    const auto dots = tok.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(lambda_value(tok));
      continue;
    }
    const auto a = trim(tok.substr(0, dots)), b = trim(tok.substr(dots + 2));
    if (a.substr(0, 2) != "2^" || b.substr(0, 2) != "2^")
      bad_value("lambda-grid", tok, "ranges are written 2^a..2^b");
    int ea = static_cast<int>(to_double("lambda-grid", a.substr(2)));
    int eb = static_cast<int>(to_double("lambda-grid", b.substr(2)));
    if (ea > eb) std::swap(ea, eb);
    for (int e = eb; e >= ea; --e) out.push_back(std::ldexp(1.0, e));
  }
  if (out.empty()) bad_value("lambda-grid", text, "grid is empty");
  for (double l : out)
    if (l < 0) bad_value("lambda-grid", text, "lambdas must be >= 0");
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    k.push_back("bandwidth.<subset>");
    return k;
  }();
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key.substr(0, 10) == "bandwidth.") {
    const auto subset = key.substr(10);
    try {
      const auto u = AnovaSubset::parse(subset);
      bandwidth_overrides[u.to_string()] = parse_int_list(value);
    } catch (const Error& e) {
      bad_value(key, value, e.what());
    }
    return;
  }
  const auto it = setters().find(key);
  if (it == setters().end()) fail(ErrorCode::config_error, "unknown configuration key '" + std::string(key) + "'");
  it->second(*this, key, value);
}

void RunConfig::validate() const {
  if (lambdas.empty()) fail(ErrorCode::config_error, "lambda grid is empty");
  if (runs && *runs < 1) fail(ErrorCode::config_error, "runs must be >= 1");
  if (ds < 1) fail(ErrorCode::config_error, "ds must be >= 1");
  if (per_order.size() < static_cast<std::size_t>(ds))
    fail(ErrorCode::config_error, "need a bandwidth for every subset order up to ds = " + std::to_string(ds));
  try {
    solve.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config_error, e.what());
  }
}

void load_config(RunConfig& config, std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::config_error, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    try {
      config.set(view.substr(0, eq), view.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::config_error, origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open config file '" + path + "'");
  load_config(config, in, path);
}

}  // namespace anovasvm
