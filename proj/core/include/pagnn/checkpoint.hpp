#pragma once

#include <string>

#include "pagnn/model.hpp"

namespace pagnn {

// Binary checkpoint: "PGCK" magic, version, model + scenario config text,
// then named arrays (learnable, then buffers) with shapes and interleaved
// re/im f64 values, little-endian.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace pagnn
