#pragma once

#include "rq/model.hpp"

#include <string>

namespace rq {

struct JsonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict scenario loader: unknown keys are rejected, required keys depend on
// the variant.  See scenarios/ for the schema by example.
ModelSpec load_model(const std::string& path);
ModelSpec parse_model(const std::string& json_text);

std::string model_to_json(const ModelSpec& model);

// FNV-1a content hash of a file, hex-encoded; used by the CLI manifest to
// make reruns auditable
std::string content_hash(const std::string& path);

}  // namespace rq
