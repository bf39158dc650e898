#include "anovasvm/anovasvm.h"

#include <cstring>
#include <exception>
#include <iostream>
#include <limits>
#include <new>
#include <string>

#include "anovasvm/analysis.hpp"
#include "anovasvm/config.hpp"
#include "anovasvm/data.hpp"
#include "anovasvm/errors.hpp"
#include "anovasvm/experiment.hpp"
#include "anovasvm/model.hpp"

struct asvm_config {
  anovasvm::RunConfig config;
};

struct asvm_dataset {
  anovasvm::Dataset data;
};

struct asvm_model {
  anovasvm::Model model;
};

struct asvm_gsi_report {
  anovasvm::GsiReport report;
};

namespace {

thread_local std::string last_error;

asvm_status to_status(anovasvm::ErrorCode code) {
  using anovasvm::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return ASVM_INVALID_ARGUMENT;
    case ErrorCode::not_found: return ASVM_NOT_FOUND;
    case ErrorCode::domain_error: return ASVM_DOMAIN_ERROR;
    case ErrorCode::index_error: return ASVM_INDEX_ERROR;
    case ErrorCode::parse_error: return ASVM_PARSE_ERROR;
    case ErrorCode::numeric_failure: return ASVM_NUMERIC_FAILURE;
    case ErrorCode::step_failure: return ASVM_STEP_FAILURE;
    case ErrorCode::format_error: return ASVM_FORMAT_ERROR;
    case ErrorCode::config_error: return ASVM_CONFIG_ERROR;
    case ErrorCode::io_error: return ASVM_IO_ERROR;
  }
  return ASVM_INTERNAL_ERROR;
}

asvm_status fail_with(asvm_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename Fn>
asvm_status guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return ASVM_OK;
  } catch (const anovasvm::Error& e) {
    return fail_with(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(ASVM_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(ASVM_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail_with(ASVM_INTERNAL_ERROR, "unknown error");
  }
}

#define ASVM_REQUIRE(ptr)                                                    \
  do {                                                                       \
    if (!(ptr)) return fail_with(ASVM_INVALID_ARGUMENT, #ptr " is NULL");    \
  } while (0)

anovasvm::Matrix matrix_from(const double* X, size_t rows, size_t cols) {
  anovasvm::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = X[i * cols + j];
  return m;
}

template <typename Cmd>
asvm_status run_command(const asvm_config* config, Cmd cmd) {
  ASVM_REQUIRE(config);
  return guard([&] {
    cmd(config->config, std::cout);
    std::cout.flush();
  });
}

}  // namespace

extern "C" {

const char* asvm_version(void) { return "1.0.0"; }

const char* asvm_status_name(asvm_status status) {
  switch (status) {
    case ASVM_OK: return "ok";
    case ASVM_INVALID_ARGUMENT: return "invalid-argument";
    case ASVM_NOT_FOUND: return "not-found";
    case ASVM_DOMAIN_ERROR: return "domain-error";
    case ASVM_INDEX_ERROR: return "index-error";
    case ASVM_PARSE_ERROR: return "parse-error";
    case ASVM_NUMERIC_FAILURE: return "numeric-failure";
    case ASVM_STEP_FAILURE: return "step-failure";
    case ASVM_FORMAT_ERROR: return "format-error";
    case ASVM_CONFIG_ERROR: return "config-error";
    case ASVM_IO_ERROR: return "io-error";
    case ASVM_INTERNAL_ERROR: return "internal-error";
  }
  return "unknown";
}

int asvm_exit_code(asvm_status status) {
  switch (status) {
    case ASVM_OK: return 0;
    case ASVM_INVALID_ARGUMENT:
    case ASVM_NOT_FOUND:
    case ASVM_DOMAIN_ERROR:
    case ASVM_INDEX_ERROR:
    case ASVM_PARSE_ERROR:
    case ASVM_FORMAT_ERROR:
    case ASVM_CONFIG_ERROR: return 2;
    case ASVM_NUMERIC_FAILURE:
    case ASVM_STEP_FAILURE: return 3;
    case ASVM_IO_ERROR: return 4;
    case ASVM_INTERNAL_ERROR: return 1;
  }
  return 1;
}

const char* asvm_last_error(void) { return last_error.c_str(); }

void asvm_set_log_callback(asvm_log_fn fn, void* user) {
  if (!fn) {
    anovasvm::set_log_sink({});
    return;
  }
  anovasvm::set_log_sink([fn, user](anovasvm::LogLevel level, const std::string& message) {
    fn(level == anovasvm::LogLevel::warning ? ASVM_LOG_WARNING : ASVM_LOG_INFO, message.c_str(), user);
  });
}

asvm_status asvm_config_create(asvm_config** out) {
  ASVM_REQUIRE(out);
  *out = nullptr;
  return guard([&] { *out = new asvm_config{}; });
}

void asvm_config_destroy(asvm_config* config) { delete config; }

asvm_status asvm_config_set(asvm_config* config, const char* key, const char* value) {
  ASVM_REQUIRE(config);
  ASVM_REQUIRE(key);
  ASVM_REQUIRE(value);
  return guard([&] { config->config.set(key, value); });
}

asvm_status asvm_config_load(asvm_config* config, const char* path) {
  ASVM_REQUIRE(config);
  ASVM_REQUIRE(path);
  return guard([&] { anovasvm::load_config_file(config->config, path); });
}

asvm_status asvm_config_validate(const asvm_config* config) {
  ASVM_REQUIRE(config);
  return guard([&] { config->config.validate(); });
}

asvm_status asvm_cmd_fit(const asvm_config* config) { return run_command(config, anovasvm::cmd_fit); }
asvm_status asvm_cmd_predict(const asvm_config* config) { return run_command(config, anovasvm::cmd_predict); }
asvm_status asvm_cmd_gsi(const asvm_config* config) { return run_command(config, anovasvm::cmd_gsi); }
asvm_status asvm_cmd_refine(const asvm_config* config) { return run_command(config, anovasvm::cmd_refine); }
asvm_status asvm_cmd_bench(const asvm_config* config) { return run_command(config, anovasvm::cmd_bench); }
asvm_status asvm_cmd_synth(const asvm_config* config) { return run_command(config, anovasvm::cmd_synth); }

asvm_status asvm_dataset_read(const char* path, const asvm_config* config, asvm_dataset** out) {
  ASVM_REQUIRE(path);
  ASVM_REQUIRE(out);
  *out = nullptr;
  return guard([&] {
    const anovasvm::RunConfig defaults;
    auto data = anovasvm::load_dataset(config ? config->config : defaults, path);
    *out = new asvm_dataset{std::move(data)};
  });
}

asvm_status asvm_dataset_from_arrays(const double* X, const double* labels, size_t rows, size_t cols,
                                     asvm_dataset** out) {
  ASVM_REQUIRE(X);
  ASVM_REQUIRE(labels);
  ASVM_REQUIRE(out);
  *out = nullptr;
  if (rows == 0 || cols == 0) return fail_with(ASVM_INVALID_ARGUMENT, "dataset needs at least one row and column");
  return guard([&] {
    anovasvm::Dataset d;
    d.X = matrix_from(X, rows, cols);
    d.y.resize(static_cast<Eigen::Index>(rows));
    bool zero = false, minus = false;
    for (size_t i = 0; i < rows; ++i) {
      const double v = labels[i];
      if (v == 0.0) zero = true;
      else if (v == -1.0) minus = true;
      else if (v != 1.0) anovasvm::fail(anovasvm::ErrorCode::invalid_argument, "labels must be -1/+1 or 0/1");
      d.y[static_cast<Eigen::Index>(i)] = v == 1.0 ? 1.0 : -1.0;
    }
    if (zero && minus) anovasvm::fail(anovasvm::ErrorCode::invalid_argument, "labels mix the 0/1 and -1/+1 alphabets");
    d.alphabet = zero ? anovasvm::LabelAlphabet::zero_one : anovasvm::LabelAlphabet::plus_minus_one;
    d.validate();
    *out = new asvm_dataset{std::move(d)};
  });
}

void asvm_dataset_destroy(asvm_dataset* data) { delete data; }

size_t asvm_dataset_rows(const asvm_dataset* data) { return data ? data->data.size() : 0; }

size_t asvm_dataset_cols(const asvm_dataset* data) {
  return data ? static_cast<size_t>(data->data.dimension()) : 0;
}

asvm_status asvm_dataset_labels(const asvm_dataset* data, double* out, size_t n) {
  ASVM_REQUIRE(data);
  ASVM_REQUIRE(out);
  if (n != data->data.size()) return fail_with(ASVM_INVALID_ARGUMENT, "label buffer length differs from row count");
  for (size_t i = 0; i < n; ++i) out[i] = data->data.y[static_cast<Eigen::Index>(i)];
  last_error.clear();
  return ASVM_OK;
}

asvm_status asvm_model_fit(const asvm_config* config, const asvm_dataset* data, asvm_model** out) {
  ASVM_REQUIRE(config);
  ASVM_REQUIRE(data);
  ASVM_REQUIRE(out);
  *out = nullptr;
  return guard([&] {
    using namespace anovasvm;
    const RunConfig& c = config->config;
    c.validate();
    if (c.lambdas.size() != 1)
      fail(ErrorCode::config_error, "asvm_model_fit needs a single lambda, the grid has " +
                                        std::to_string(c.lambdas.size()));
    Model m;
    const auto features = feature_spec(c);
    m.set = build_feature_set(features, data->data.dimension());
    m.normalization = features.normalization;
    Matrix X = data->data.X;
    if (c.scale) {
      m.scaling = fit_scaling(data->data.X, c.basis);
      X = apply_scaling(*m.scaling, X);
    }
    const FeatureTransform t(X, m.set, m.normalization);
    const auto res = solve(t, data->data.y, {c.reg, c.lambdas.front()}, c.solve);
    m.coeffs = res.coeffs;
    m.provenance = {c.seed, {c.reg, c.lambdas.front()}, res.iterations, res.objective, res.converged, res.reason};
    *out = new asvm_model{std::move(m)};
  });
}

asvm_status asvm_model_load(const char* path, asvm_model** out) {
  ASVM_REQUIRE(path);
  ASVM_REQUIRE(out);
  *out = nullptr;
  return guard([&] { *out = new asvm_model{anovasvm::load_model(std::string(path))}; });
}

asvm_status asvm_model_save(const asvm_model* model, const char* path) {
  ASVM_REQUIRE(model);
  ASVM_REQUIRE(path);
  return guard([&] { anovasvm::save_model(model->model, std::string(path)); });
}

void asvm_model_destroy(asvm_model* model) { delete model; }

asvm_status asvm_model_info_get(const asvm_model* model, asvm_model_info* out) {
  ASVM_REQUIRE(model);
  ASVM_REQUIRE(out);
  const auto& m = model->model;
  out->basis = m.basis() == anovasvm::BasisKind::haar ? 1 : 0;
  out->dimension = m.dimension();
  out->coefficients = static_cast<size_t>(m.coeffs.size());
  out->terms = m.set.terms().size();
  out->reg = m.provenance.reg.kind == anovasvm::RegKind::l1 ? 1 : 0;
  out->lambda = m.provenance.reg.lambda;
  out->iterations = m.provenance.iterations;
  out->converged = m.provenance.converged ? 1 : 0;
  out->scaled = m.scaling ? 1 : 0;
  last_error.clear();
  return ASVM_OK;
}

asvm_status asvm_model_coefficients(const asvm_model* model, double* out, size_t n) {
  ASVM_REQUIRE(model);
  ASVM_REQUIRE(out);
  const auto& c = model->model.coeffs;
  if (n != static_cast<size_t>(c.size()))
    return fail_with(ASVM_INVALID_ARGUMENT, "buffer holds " + std::to_string(n) + " values, model has " +
                                                std::to_string(c.size()) + " coefficients");
  std::memcpy(out, c.data(), n * sizeof(double));
  last_error.clear();
  return ASVM_OK;
}

asvm_status asvm_model_decision(const asvm_model* model, const double* X, size_t rows, size_t cols,
                                double* scores) {
  ASVM_REQUIRE(model);
  ASVM_REQUIRE(X);
  ASVM_REQUIRE(scores);
  return guard([&] {
    const auto s = model->model.decision_values(matrix_from(X, rows, cols));
    for (size_t i = 0; i < rows; ++i) scores[i] = s[static_cast<Eigen::Index>(i)];
  });
}

asvm_status asvm_model_predict(const asvm_model* model, const double* X, size_t rows, size_t cols,
                               double* labels) {
  ASVM_REQUIRE(model);
  ASVM_REQUIRE(X);
  ASVM_REQUIRE(labels);
  return guard([&] {
    const auto l = model->model.predict(matrix_from(X, rows, cols));
    for (size_t i = 0; i < rows; ++i) labels[i] = l[static_cast<Eigen::Index>(i)];
  });
}

asvm_status asvm_model_gsi(const asvm_model* model, asvm_gsi_report** out) {
  ASVM_REQUIRE(model);
  ASVM_REQUIRE(out);
  *out = nullptr;
  return guard([&] { *out = new asvm_gsi_report{anovasvm::gsi(model->model.set, model->model.coeffs)}; });
}

void asvm_gsi_destroy(asvm_gsi_report* report) { delete report; }

size_t asvm_gsi_count(const asvm_gsi_report* report) { return report ? report->report.entries.size() : 0; }

int asvm_gsi_degenerate(const asvm_gsi_report* report) { return report && report->report.degenerate ? 1 : 0; }

asvm_status asvm_gsi_entry(const asvm_gsi_report* report, size_t rank, char* buf, size_t buf_len, double* rho) {
  ASVM_REQUIRE(report);
  if (rank >= report->report.entries.size())
    return fail_with(ASVM_INDEX_ERROR, "rank " + std::to_string(rank) + " out of range");
  const auto& e = report->report.entries[rank];
  if (buf) {
    const auto text = e.subset.to_string();
    if (text.size() + 1 > buf_len) return fail_with(ASVM_INVALID_ARGUMENT, "buffer too small for subset text");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  }
  if (rho) *rho = e.rho;
  last_error.clear();
  return ASVM_OK;
}

asvm_status asvm_metrics(const double* scores, const double* labels, size_t n, double* ca, double* auc) {
  ASVM_REQUIRE(scores);
  ASVM_REQUIRE(labels);
  return guard([&] {
    anovasvm::Vector s(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      s[static_cast<Eigen::Index>(i)] = scores[i];
      y[static_cast<Eigen::Index>(i)] = labels[i];
    }
    const auto e = anovasvm::evaluate(s, y);
    if (ca) *ca = e.ca;
    if (auc) *auc = e.auc.value_or(std::numeric_limits<double>::quiet_NaN());
  });
}

}  // extern "C"
