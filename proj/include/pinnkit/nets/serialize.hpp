// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON form of NetworkConfig. Unknown keys are rejected.

#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "pinnkit/error.hpp"
#include "pinnkit/nets/config.hpp"

namespace pinnkit::nets {

using Json = nlohmann::json;

inline void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::invalid_config, where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw Error(Errc::invalid_config, "unknown key '" + k + "' in " + where);
}

inline std::string to_string(Arch a) { return a == Arch::plain ? "plain" : "modified"; }

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::gelu: return "gelu";
    case Activation::sin: return "sin";
    case Activation::relu: return "relu";
  }
  return "?";
}

inline Arch parse_arch(const std::string& s) {
  if (s == "plain" || s == "mlp") return Arch::plain;
  if (s == "modified" || s == "modified_mlp") return Arch::modified;
  throw Error(Errc::invalid_config, "unknown architecture '" + s + "'");
}

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "gelu") return Activation::gelu;
  if (s == "sin") return Activation::sin;
  if (s == "relu") return Activation::relu;
  throw Error(Errc::invalid_config, "unknown activation '" + s + "'");
}

inline Json to_json(const NetworkConfig& c) {
  Json j;
  j["arch"] = to_string(c.arch);
  j["input_dim"] = c.input_dim;
  j["depth"] = c.depth;
  j["width"] = c.width;
  j["activation"] = to_string(c.activation);
  j["output_dim"] = c.output_dim;
  j["periodic"] = Json::array();
  for (const auto& p : c.periodic)
    j["periodic"].push_back({{"axis", p.axis}, {"period", p.period}, {"trainable", p.trainable}});
  j["fourier"] = c.fourier ? Json{{"sigma", c.fourier->sigma}, {"features", c.fourier->features}} : Json(nullptr);
  j["rwf"] = c.rwf ? Json{{"mean", c.rwf->mean}, {"stddev", c.rwf->stddev}} : Json(nullptr);
  return j;
}

/// Missing keys keep their defaults; `null` disables Fourier features or RWF.
inline NetworkConfig network_config_from_json(const Json& j) {
  reject_unknown(j, {"arch", "input_dim", "depth", "width", "activation", "output_dim", "periodic", "fourier", "rwf"},
                 "network");
  NetworkConfig c;
  try {
    if (j.contains("arch")) c.arch = parse_arch(j["arch"].get<std::string>());
    c.input_dim = j.value("input_dim", c.input_dim);
    c.depth = j.value("depth", c.depth);
    c.width = j.value("width", c.width);
    if (j.contains("activation")) c.activation = parse_activation(j["activation"].get<std::string>());
    c.output_dim = j.value("output_dim", c.output_dim);
    if (j.contains("periodic"))
      for (const auto& p : j["periodic"]) {
        reject_unknown(p, {"axis", "period", "trainable"}, "network.periodic");
        c.periodic.push_back({p.value("axis", 0), p.value("period", 1.0), p.value("trainable", false)});
      }
    if (j.contains("fourier") && !j["fourier"].is_null()) {
      reject_unknown(j["fourier"], {"sigma", "features"}, "network.fourier");
      c.fourier = FourierConfig{j["fourier"].value("sigma", 1.0), j["fourier"].value("features", 64)};
    }
    if (j.contains("rwf") && !j["rwf"].is_null()) {
      reject_unknown(j["rwf"], {"mean", "stddev"}, "network.rwf");
      c.rwf = RwfConfig{j["rwf"].value("mean", 1.0), j["rwf"].value("stddev", 0.1)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("network config: ") + e.what());
  }
  return c;
}

}  // namespace pinnkit::nets
