#pragma once

#include <filesystem>
#include <iosfwd>

#include "windcast/point/model.hpp"

namespace windcast::point {

/// Versioned plain-text key-value document, one key per line.
void save_model(std::ostream& out, const FittedModel& model);
void save_model(const std::filesystem::path& path, const FittedModel& model);
FittedModel load_model(std::istream& in);
FittedModel load_model(const std::filesystem::path& path);

}  // namespace windcast::point
