// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint file layout (little-endian):
//   8 bytes   magic "PKCKPT1\0"
//   u32       format version (1)
//   u64       header length H
//   H bytes   JSON header, keys sorted: network config, Fourier matrix
//             shape, parameter layout fingerprint, step, loss weights,
//             learning-rate schedule, RNG state
//   f64[]     Fourier matrix (column-major), parameters, Adam m, Adam v
// Saving a freshly loaded checkpoint reproduces the file byte for byte.

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pinnkit/nets/serialize.hpp"
#include "pinnkit/train/trainer.hpp"

namespace pinnkit::train {

inline constexpr char kCheckpointMagic[8] = {'P', 'K', 'C', 'K', 'P', 'T', '1', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nets::Network net;
  TrainState state;
};

namespace detail {

inline void write_doubles(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

inline void read_doubles(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw Error(Errc::checkpoint_error, "checkpoint payload truncated");
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const nets::Network& net, const TrainState& s) {
  if (s.params.layout().fingerprint() != net.params.layout().fingerprint())
    throw Error(Errc::checkpoint_error, "state does not match the network layout");
  nlohmann::json h;
  h["network"] = nets::to_json(net.config);
  h["fourier_rows"] = net.fourier_B.rows();
  h["fourier_cols"] = net.fourier_B.cols();
  h["layout"] = s.params.layout().fingerprint();
  h["param_count"] = s.params.size();
  h["step"] = s.step;
  h["lambda"] = {s.weights.lambda_ic, s.weights.lambda_bc, s.weights.lambda_r};
  h["causal_w"] = s.weights.w;
  h["eps"] = s.weights.eps;
  h["alpha"] = s.weights.alpha;
  h["f"] = s.weights.f;
  h["lr"] = {{"eta0", s.lr.eta0}, {"rate", s.lr.rate}, {"decay_steps", s.lr.decay_steps}};
  std::ostringstream rng;
  rng << s.rng;
  h["rng"] = rng.str();
  const std::string header = h.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::checkpoint_error, "cannot open " + path.string() + " for writing");
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t len = header.size();
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(header.data(), static_cast<std::streamsize>(len));
  detail::write_doubles(os, net.fourier_B.data(), static_cast<std::size_t>(net.fourier_B.size()));
  for (const ParamVector* pv : {&s.params, &s.m, &s.v})
    detail::write_doubles(os, pv->flat().data(), static_cast<std::size_t>(pv->size()));
  if (!os) throw Error(Errc::checkpoint_error, "write failed for " + path.string());
}

/// Rebuilds the network from the stored config and restores the full
/// training state. Throws CheckpointError on a malformed file or when the
/// rebuilt parameter layout differs from the stored one.
inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::checkpoint_error, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw Error(Errc::checkpoint_error, path.string() + " is not a pinnkit checkpoint");
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is || version != kCheckpointVersion) throw Error(Errc::checkpoint_error, "unsupported checkpoint version");
  if (len > (std::uint64_t{1} << 30)) throw Error(Errc::checkpoint_error, "checkpoint header too large");
  std::string header(len, '\0');
  is.read(header.data(), static_cast<std::streamsize>(len));
  if (!is) throw Error(Errc::checkpoint_error, "checkpoint header truncated");

  Checkpoint c;
  try {
    const auto h = nlohmann::json::parse(header);
    nets::NetworkConfig cfg = nets::network_config_from_json(h.at("network"));
    c.net = nets::make_network(cfg, 0);
    if (c.net.params.layout().fingerprint() != h.at("layout").get<std::string>())
      throw Error(Errc::checkpoint_error, "parameter layout in checkpoint does not match its network config");
    c.net.fourier_B.resize(h.at("fourier_rows").get<Eigen::Index>(), h.at("fourier_cols").get<Eigen::Index>());
    detail::read_doubles(is, c.net.fourier_B.data(), static_cast<std::size_t>(c.net.fourier_B.size()));
    TrainState& s = c.state;
    s.params = c.net.params.zeros_like();
    s.m = s.params.zeros_like();
    s.v = s.params.zeros_like();
    for (ParamVector* pv : {&s.params, &s.m, &s.v})
      detail::read_doubles(is, pv->flat().data(), static_cast<std::size_t>(pv->size()));
    c.net.params = s.params;
    s.step = h.at("step").get<std::int64_t>();
    const auto& l = h.at("lambda");
    s.weights.lambda_ic = l.at(0).get<double>();
    s.weights.lambda_bc = l.at(1).get<double>();
    s.weights.lambda_r = l.at(2).get<double>();
    s.weights.w = h.at("causal_w").get<std::vector<double>>();
    s.weights.eps = h.at("eps").get<double>();
    s.weights.alpha = h.at("alpha").get<double>();
    s.weights.f = h.at("f").get<int>();
    s.lr.eta0 = h.at("lr").at("eta0").get<double>();
    s.lr.rate = h.at("lr").at("rate").get<double>();
    s.lr.decay_steps = h.at("lr").at("decay_steps").get<std::int64_t>();
    std::istringstream rng(h.at("rng").get<std::string>());
    rng >> s.rng;
    if (!rng) throw Error(Errc::checkpoint_error, "bad RNG state in checkpoint");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::checkpoint_error, std::string("bad checkpoint header: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::checkpoint_error) throw;
    throw Error(Errc::checkpoint_error, std::string("bad checkpoint: ") + e.what());
  }
  if (is.peek() != std::char_traits<char>::eof()) throw Error(Errc::checkpoint_error, "trailing bytes in checkpoint");
  return c;
}

}  // namespace pinnkit::train
