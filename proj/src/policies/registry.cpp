#include <string>

#include "saath/policies.hpp"

namespace saath {

std::unique_ptr<Policy> make_policy(std::string_view name) {
  if (name == "saath") return std::make_unique<SaathPolicy>();
  if (name == "saath-an") {
    return std::make_unique<SaathPolicy>(
        SaathOptions{.per_flow_threshold = false, .lcof = false, .deadlines = false}, "saath-an");
  }
  if (name == "saath-an-pf") {
    return std::make_unique<SaathPolicy>(
        SaathOptions{.per_flow_threshold = true, .lcof = false, .deadlines = false}, "saath-an-pf");
  }
  if (name == "aalo") return std::make_unique<AaloPolicy>();
  if (name == "uc-tcp") return std::make_unique<UcTcpPolicy>();
  if (name == "scf" || name == "srtf" || name == "sebf" || name == "lwtf") {
    return std::make_unique<OfflinePolicy>(parse_offline_kind(name));
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

std::vector<std::string> policy_names() {
  return {"saath", "aalo", "scf", "srtf", "sebf", "lwtf", "uc-tcp", "saath-an", "saath-an-pf"};
}

}  // namespace saath
