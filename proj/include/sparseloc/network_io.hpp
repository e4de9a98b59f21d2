// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include <json.hpp>

#include "sparseloc/core_model.hpp"

namespace sparseloc {

/// Network document: {"dim": d, "positions": [[...], ...], "edges": [[i, j], ...]}.
/// Indices are 0-based, coordinates in meters.
nlohmann::json network_to_json(const NetworkInstance& net);
NetworkInstance network_from_json(const nlohmann::json& doc);

NetworkInstance read_network(const std::filesystem::path& path);
void write_network(const std::filesystem::path& path, const NetworkInstance& net);

nlohmann::json block_vector_to_json(const BlockVector& v);
BlockVector block_vector_from_json(const nlohmann::json& doc, int dim);

}  // namespace sparseloc
