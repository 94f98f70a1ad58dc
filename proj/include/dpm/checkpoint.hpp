// Copyright 2026 The Deep Pacejka Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON checkpoints. Doubles are written with round-trip precision, so a
// reloaded model reproduces outputs bit-exactly.

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpm/models.hpp"
#include "json.hpp"

namespace dpm {

using nlohmann::json;

inline json VehicleToJson(const VehicleParams& p) {
  return {{"m", p.m},   {"iz", p.iz},
          {"lf", p.lf}, {"lr", p.lr},
          {"max_steer", p.max_steer}, {"max_accel", p.max_accel}};
}

inline VehicleParams VehicleFromJson(const json& j) {
  VehicleParams p;
  p.m = j.at("m").get<double>();
  p.iz = j.at("iz").get<double>();
  p.lf = j.at("lf").get<double>();
  p.lr = j.at("lr").get<double>();
  p.max_steer = j.at("max_steer").get<double>();
  p.max_accel = j.at("max_accel").get<double>();
  p.Validate();
  return p;
}

inline json CoeffsToJson(const PacejkaCoeffs& c) {
  auto axle = [](const AxleCoeffs& a) {
    return json{{"B", a.b}, {"C", a.c}, {"D", a.d}, {"E", a.e}};
  };
  return {{"front", axle(c.front)}, {"rear", axle(c.rear)}};
}

inline PacejkaCoeffs CoeffsFromJson(const json& j) {
  auto axle = [](const json& a) {
    return AxleCoeffs{a.at("B").get<double>(), a.at("C").get<double>(),
                      a.at("D").get<double>(), a.at("E").get<double>()};
  };
  return {axle(j.at("front")), axle(j.at("rear"))};
}

inline json ModelToJson(const Model& m) {
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < m.net.num_layers(); ++l) {
    const auto& w = m.net.weights[l];
    json rows = json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index c = 0; c < w.cols(); ++c) row[c] = w(r, c);
      rows.push_back(row);
    }
    weights.push_back(rows);
    const auto& b = m.net.biases[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  return {
      {"kind", ToString(m.kind)},
      {"layer_sizes", m.net.layer_sizes},
      {"weights", weights},
      {"biases", biases},
      {"normalization",
       {{"input_mean", m.input_stats.mean},
        {"input_std", m.input_stats.std},
        {"target_mean", m.target_stats.mean},
        {"target_std", m.target_stats.std}}},
      {"coeff_bounds", {{"lo", m.bounds.lo}, {"hi", m.bounds.hi}}},
      {"H", m.history},
      {"dt", m.dt},
      {"vehicle", VehicleToJson(m.vehicle)},
  };
}

inline Model ModelFromJson(const json& j) {
  Model m;
  m.kind = ModelKindFromString(j.at("kind").get<std::string>());
  m.history = j.at("H").get<int>();
  m.dt = j.at("dt").get<double>();
  m.vehicle = VehicleFromJson(j.at("vehicle"));
  m.net = Mlp::Zeros(j.at("layer_sizes").get<std::vector<int>>());
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != m.net.num_layers() ||
      biases.size() != m.net.num_layers()) {
    throw DimensionMismatch("checkpoint: layer count mismatch");
  }
  for (std::size_t l = 0; l < m.net.num_layers(); ++l) {
    auto& w = m.net.weights[l];
    const auto& rows = weights[l];
    if (rows.size() != static_cast<std::size_t>(w.rows())) {
      throw DimensionMismatch("checkpoint: weight rows mismatch");
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      const auto row = rows[r].get<std::vector<double>>();
      if (row.size() != static_cast<std::size_t>(w.cols())) {
        throw DimensionMismatch("checkpoint: weight cols mismatch");
      }
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[c];
    }
    const auto b = biases[l].get<std::vector<double>>();
    if (b.size() != static_cast<std::size_t>(m.net.biases[l].size())) {
      throw DimensionMismatch("checkpoint: bias size mismatch");
    }
    for (std::size_t i = 0; i < b.size(); ++i) m.net.biases[l](i) = b[i];
  }
  const auto& norm = j.at("normalization");
  m.input_stats = {norm.at("input_mean").get<std::vector<double>>(),
                   norm.at("input_std").get<std::vector<double>>()};
  m.target_stats = {norm.at("target_mean").get<std::vector<double>>(),
                    norm.at("target_std").get<std::vector<double>>()};
  m.bounds.lo = j.at("coeff_bounds").at("lo").get<std::array<double, 8>>();
  m.bounds.hi = j.at("coeff_bounds").at("hi").get<std::array<double, 8>>();
  if (m.net.input_size() != m.feature_count() ||
      m.input_stats.size() != static_cast<std::size_t>(m.feature_count()) ||
      m.target_stats.size() != kNumTargets) {
    throw DimensionMismatch("checkpoint: feature size mismatch");
  }
  const int expected_out = m.kind == ModelKind::kDpm ? kNumCoeffs : kNumTargets;
  if (m.net.output_size() != expected_out) {
    throw DimensionMismatch("checkpoint: output size mismatch");
  }
  if (!m.bounds.IsValid()) {
    throw std::invalid_argument("checkpoint: invalid coefficient bounds");
  }
  return m;
}

inline void SaveModel(const Model& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  os << ModelToJson(m).dump(1) << '\n';
}

inline Model LoadModel(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read checkpoint " + path);
  return ModelFromJson(json::parse(is));
}

}  // namespace dpm
