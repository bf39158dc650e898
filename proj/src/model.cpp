#include "anovasvm/model.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "anovasvm/errors.hpp"

namespace anovasvm {

namespace {

constexpr std::string_view kMagic = "anovasvm-model";

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::format_error, "model file: " + what); }

std::string join_ints(const std::vector<int>& v) {
  if (v.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> split_ints(std::string_view text) {
  std::vector<int> out;
  if (text == "-") return out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = text.find(',', pos);
    const auto tok = text.substr(pos, next == std::string_view::npos ? text.npos : next - pos);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) bad("malformed integer list '" + std::string(text) + "'");
    out.push_back(v);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, const char* field) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    bad(std::string("malformed value for '") + field + "': '" + std::string(text) + "'");
  return v;
}

// Line reader that insists on "key value..." records in a fixed order.
class Reader {
public:
  explicit Reader(std::string_view body) : body_(body) {}

  std::vector<std::string_view> expect(std::string_view key, std::size_t min_fields = 1) {
    if (pos_ >= body_.size()) bad("unexpected end of file, expected '" + std::string(key) + "'");
    const auto end = body_.find('\n', pos_);
    if (end == std::string_view::npos) bad("unterminated line");
    const auto line = body_.substr(pos_, end - pos_);
    pos_ = end + 1;
    std::vector<std::string_view> fields;
    std::size_t p = 0;
    while (p < line.size()) {
      const auto q = line.find(' ', p);
      fields.push_back(line.substr(p, q == std::string_view::npos ? line.npos : q - p));
      if (q == std::string_view::npos) break;
      p = q + 1;
    }
    if (fields.empty() || fields[0] != key) bad("expected '" + std::string(key) + "', found '" + std::string(line) + "'");
    if (fields.size() < min_fields + 1) bad("missing fields on '" + std::string(key) + "' line");
    fields.erase(fields.begin());
    return fields;
  }

  std::string_view value(std::string_view key) { return expect(key, 1)[0]; }

  std::string_view line() {
    if (pos_ >= body_.size()) bad("unexpected end of file");
    const auto end = body_.find('\n', pos_);
    if (end == std::string_view::npos) bad("unterminated line");
    const auto out = body_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return out;
  }
  bool done() const { return pos_ >= body_.size(); }

private:
  std::string_view body_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string double_to_hex(double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  char buf[17];
  static constexpr char digits[] = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = digits[(bits >> (60 - 4 * i)) & 0xf];
  buf[16] = '\0';
  return std::string(buf, 16);
}

double hex_to_double(std::string_view text) {
  if (text.size() != 16) bad("coefficient '" + std::string(text) + "' is not 16 hex digits");
  std::uint64_t bits = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + 16, bits, 16);
  if (ec != std::errc() || ptr != text.data() + 16) bad("coefficient '" + std::string(text) + "' is not hexadecimal");
  return std::bit_cast<double>(bits);
}

void Model::validate() const {
  if (coeffs.size() != static_cast<Eigen::Index>(set.cardinality()))
    fail(ErrorCode::invalid_argument, "model has " + std::to_string(coeffs.size()) +
                                          " coefficients for an index set of size " +
                                          std::to_string(set.cardinality()));
  if (scaling && scaling->dimension() != set.dimension())
    fail(ErrorCode::invalid_argument, "scaling record dimension differs from the model dimension");
  if (scaling && scaling->domain != set.kind())
    fail(ErrorCode::invalid_argument, "scaling record targets the other basis domain");
}

Matrix Model::to_domain(const Matrix& raw, std::size_t* clamped) const {
  if (raw.cols() != dimension())
    fail(ErrorCode::config_error, "model expects " + std::to_string(dimension()) +
                                      " features, data has " + std::to_string(raw.cols()));
  if (clamped) *clamped = 0;
  if (!scaling) return raw;
  return apply_scaling(*scaling, raw, clamped);
}

Vector Model::decision_values(const Matrix& raw, std::size_t* clamped) const {
  const FeatureTransform t(to_domain(raw, clamped), set, normalization);
  return t.apply(coeffs);
}

Vector Model::predict(const Matrix& raw) const { return predict_labels(decision_values(raw)); }

std::string serialize_model(const Model& model) {
  model.validate();
  std::ostringstream out;
  out << kMagic << ' ' << kModelFormatVersion << '\n';
  out << "basis " << basis_kind_name(model.basis()) << '\n';
  out << "cosine_normalization " << normalization_name(model.normalization) << '\n';
  out << "dimension " << model.dimension() << '\n';
  out << "terms " << model.set.terms().size() << '\n';
  for (const auto& t : model.set.terms())
    out << "term " << t.subset().to_string() << ' ' << join_ints(t.bandwidth()) << '\n';
  if (model.scaling) {
    out << "scaling minmax\n";
    for (int c = 0; c < model.scaling->dimension(); ++c) {
      const auto i = static_cast<std::size_t>(c);
      out << "range " << (c + 1) << ' ' << double_to_hex(model.scaling->min[i]) << ' '
          << double_to_hex(model.scaling->max[i]) << '\n';
    }
  } else {
    out << "scaling none\n";
  }
  const auto& p = model.provenance;
  out << "seed " << p.seed << '\n';
  out << "reg " << reg_kind_name(p.reg.kind) << '\n';
  out << "lambda " << double_to_hex(p.reg.lambda) << ' ' << shortest(p.reg.lambda) << '\n';
  out << "iterations " << p.iterations << '\n';
  out << "objective " << double_to_hex(p.objective) << ' ' << shortest(p.objective) << '\n';
  out << "converged " << (p.converged ? 1 : 0) << '\n';
  out << "stop " << stop_reason_name(p.stop) << '\n';
  out << "coefficients " << model.coeffs.size() << '\n';
  for (Eigen::Index i = 0; i < model.coeffs.size(); ++i) out << double_to_hex(model.coeffs[i]) << '\n';
  std::string body = out.str();
  body += "checksum " + double_to_hex(std::bit_cast<double>(fnv1a64(body))) + '\n';
  return body;
}

Model parse_model(const std::string& text) {
  // version check comes first so a bumped version is reported as such
  const auto first_end = text.find('\n');
  if (first_end == std::string::npos) bad("missing header line");
  {
    const std::string_view header(text.data(), first_end);
    if (header.substr(0, kMagic.size()) != kMagic || header.size() < kMagic.size() + 2 ||
        header[kMagic.size()] != ' ')
      bad("not an anovasvm model (bad header)");
    const auto version = parse_number<int>(header.substr(kMagic.size() + 1), "version");
    if (version != kModelFormatVersion)
      bad("unsupported model format version " + std::to_string(version) + " (this build reads version " +
          std::to_string(kModelFormatVersion) + ")");
  }

  const auto tail = text.rfind("checksum ");
  if (tail == std::string::npos || (tail > 0 && text[tail - 1] != '\n')) bad("missing checksum (truncated file?)");
  const std::string_view body(text.data(), tail);
  std::string_view sum_line(text.data() + tail + 9, text.size() - tail - 9);
  if (sum_line.empty() || sum_line.back() != '\n') bad("truncated checksum line");
  sum_line.remove_suffix(1);
  if (std::bit_cast<std::uint64_t>(hex_to_double(sum_line)) != fnv1a64(body)) bad("checksum mismatch");

  Reader r(body.substr(first_end + 1));
  Model m;
  const BasisKind kind = [&] {
    try {
      return parse_basis_kind(r.value("basis"));
    } catch (const Error& e) {
      bad(e.what());
    }
  }();
  m.normalization = [&] {
    try {
      return parse_normalization(r.value("cosine_normalization"));
    } catch (const Error& e) {
      bad(e.what());
    }
  }();
  const int d = parse_number<int>(r.value("dimension"), "dimension");
  const auto nterms = parse_number<std::size_t>(r.value("terms"), "terms");
  std::vector<AnovaSubset> subsets;
  Bandwidths bandwidths;
  try {
    for (std::size_t i = 0; i < nterms; ++i) {
      const auto f = r.expect("term", 2);
      subsets.push_back(AnovaSubset::parse(f[0]));
      bandwidths.push_back(split_ints(f[1]));
    }
    const SubsetFamily family(d, subsets);
    if (family.subsets() != subsets) bad("terms are not in canonical order");
    m.set = build_index_set(kind, family, bandwidths);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::format_error) throw;
    bad(std::string("invalid index set: ") + e.what());
  }

  const auto scaling = r.value("scaling");
  if (scaling == "minmax") {
    ScalingRecord rec;
    rec.domain = kind;
    for (int c = 0; c < d; ++c) {
      const auto f = r.expect("range", 3);
      if (parse_number<int>(f[0], "range") != c + 1) bad("scaling ranges out of order");
      rec.min.push_back(hex_to_double(f[1]));
      rec.max.push_back(hex_to_double(f[2]));
      rec.constant.push_back(!(rec.max.back() > rec.min.back()));
    }
    m.scaling = std::move(rec);
  } else if (scaling != "none") {
    bad("unknown scaling '" + std::string(scaling) + "'");
  }

  auto& p = m.provenance;
  p.seed = parse_number<std::uint64_t>(r.value("seed"), "seed");
  const auto reg = r.value("reg");
  if (reg != "l1" && reg != "l2") bad("unknown reg '" + std::string(reg) + "'");
  p.reg.kind = reg == "l1" ? RegKind::l1 : RegKind::l2;
  p.reg.lambda = hex_to_double(r.value("lambda"));
  p.iterations = parse_number<std::size_t>(r.value("iterations"), "iterations");
  p.objective = hex_to_double(r.value("objective"));
  p.converged = parse_number<int>(r.value("converged"), "converged") != 0;
  const auto stop = r.value("stop");
  bool known = false;
  for (auto s : {StopReason::gradient, StopReason::objective_change, StopReason::step_change, StopReason::max_iters})
    if (stop == stop_reason_name(s)) {
      p.stop = s;
      known = true;
    }
  if (!known) bad("unknown stop reason '" + std::string(stop) + "'");

  const auto n = parse_number<std::size_t>(r.value("coefficients"), "coefficients");
  if (n != m.set.cardinality())
    bad("coefficient count " + std::to_string(n) + " does not match the index set (" +
        std::to_string(m.set.cardinality()) + ")");
  m.coeffs.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) m.coeffs[static_cast<Eigen::Index>(i)] = hex_to_double(r.line());
  if (!r.done()) bad("trailing content before checksum");
  return m;
}

}  // namespace anovasvm

namespace anovasvm {

void save_model(const Model& model, std::ostream& out) {
  out << serialize_model(model);
  if (!out) fail(ErrorCode::io_error, "failed writing model");
}

void save_model(const Model& model, const std::string& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) fail(ErrorCode::io_error, "failed writing '" + path + "'");
}

Model load_model(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open model '" + path + "'");
  return load_model(in);
}

}  // namespace anovasvm
