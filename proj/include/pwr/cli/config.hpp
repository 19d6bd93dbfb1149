#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "pwr/baselines.hpp"
#include "pwr/error.hpp"
#include "pwr/graph.hpp"
#include "pwr/kl.hpp"
#include "pwr/pwr.hpp"
#include "pwr/system.hpp"

namespace pwr::cli {

using Json = nlohmann::ordered_json;

// Validation failure that names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : Error(ErrorKind::config_error, message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Checks every key against the schema and fills all defaults.
Json resolve_config(const Json& in);

Json default_method(const std::string& kind);

NetworkSystem build_system(const Json& system, std::uint64_t seed);
// Decomposition with neighbor and parameter sets derived.
Decomposition build_decomposition(const Json& dec, const NetworkSystem& sys, std::uint64_t seed, ExecPolicy policy);

PwrConfig pwr_config(const Json& pwr, std::uint64_t seed);
IntrusiveOptions intrusive_options(const Json& pwr);
PcmOptions pcm_options(const Json& pcm);
CovarianceKernel kernel_from(const Json& kernel);

Json distribution_json(const Distribution& d);
Distribution distribution_from(const Json& j, const std::string& key);

}  // namespace pwr::cli
