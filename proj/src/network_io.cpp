// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/network_io.hpp"

#include <fstream>

namespace sparseloc {

nlohmann::json block_vector_to_json(const BlockVector& v) {
  auto out = nlohmann::json::array();
  for (int i = 0; i < v.num_blocks(); ++i) {
    auto row = nlohmann::json::array();
    for (int m = 0; m < v.dim(); ++m) row.push_back(v.block(i)[m]);
    out.push_back(std::move(row));
  }
  return out;
}

BlockVector block_vector_from_json(const nlohmann::json& doc, int dim) {
  if (!doc.is_array()) throw Error("expected an array of blocks");
  Eigen::VectorXd values(dim * static_cast<int>(doc.size()));
  int k = 0;
  for (const auto& row : doc) {
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw Error("block " + std::to_string(k / dim) + " must have " + std::to_string(dim) + " entries");
    }
    for (const auto& x : row) values[k++] = x.get<double>();
  }
  return BlockVector(dim, std::move(values));
}

nlohmann::json network_to_json(const NetworkInstance& net) {
  nlohmann::json doc;
  doc["dim"] = net.config.dim();
  doc["positions"] = block_vector_to_json(net.config.positions());
  auto edges = nlohmann::json::array();
  for (const auto& e : net.graph.edges) edges.push_back({e.i, e.j});
  doc["edges"] = std::move(edges);
  return doc;
}

NetworkInstance network_from_json(const nlohmann::json& doc) {
  try {
    const int dim = doc.at("dim").get<int>();
    if (dim != 2 && dim != 3) throw Error("network: dim must be 2 or 3");
    Configuration cfg(block_vector_from_json(doc.at("positions"), dim));
    SensorGraph graph{cfg.num_agents(), {}};
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error("network: each edge must be a pair [i, j]");
      graph.edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    require_valid(cfg, graph);
    return {std::move(cfg), graph.normalized()};
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("network: malformed document: ") + ex.what());
  }
}

NetworkInstance read_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
  return network_from_json(doc);
}

void write_network(const std::filesystem::path& path, const NetworkInstance& net) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << network_to_json(net).dump(2) << '\n';
}

}  // namespace sparseloc
