#ifndef SUBRK_HARNESS_HPP
#define SUBRK_HARNESS_HPP

#include <string>
#include <vector>

#include "subrk/report.hpp"

namespace subrk {

// A named verification suite plus its full parameter set. Every suite has a
// complete built-in default, so {"suite": name} alone is a valid config.
struct SuiteConfig {
    std::string suite;
    Json values = Json::object();
};

std::vector<std::string> suite_names();
std::string suite_description(const std::string& suite);
SuiteConfig default_config(const std::string& suite);

// Parse a config document and merge it onto the suite defaults (top-level
// keys override). suite_override, when nonempty, selects the suite instead of
// the document's "suite" field.
SuiteConfig load_config(const std::string& json_text, const std::string& suite_override = "");

SuiteReport run_suite(const SuiteConfig& cfg);

} // namespace subrk

#endif
