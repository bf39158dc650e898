#include "anovasvm/errors.hpp"
#include "anovasvm/random.hpp"

namespace anovasvm {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::index_error: return "index-error";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::numeric_failure: return "numeric-failure";
    case ErrorCode::step_failure: return "step-failure";
    case ErrorCode::format_error: return "format-error";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) fail(ErrorCode::invalid_argument, "Rng::below: bound must be positive");
  // reject the top partial bucket so every residue is equally likely
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % bound;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace anovasvm
