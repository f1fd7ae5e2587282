#pragma once

#include <string>

#include "htmax/ht_tensor.hpp"

namespace htmax {

/// JSON container: fields `d`, `mode_sizes`, `tree` (node records with id,
/// subset, children), `ranks`, `leaf_frames` (row-major), `transfer_tensors`
/// ([k, k1, k2] row-major). Doubles are serialized with full round-trip
/// precision.
std::string to_json(const HtTensor& a);
HtTensor from_json(const std::string& text);

void save_tensor(const HtTensor& a, const std::string& path);
HtTensor load_tensor(const std::string& path);

} // namespace htmax
