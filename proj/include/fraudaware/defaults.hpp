#pragma once

#include <string_view>

// The shipped config documents under data/ are compiled into the library so
// that tools and tests do not depend on the working directory.
namespace fraudaware::defaults {

std::string_view scenario_json();
std::string_view knowledge_pool_json();
std::string_view cohort_json();
std::string_view pipeline_json();
std::string_view bot_policies_json();

}  // namespace fraudaware::defaults
