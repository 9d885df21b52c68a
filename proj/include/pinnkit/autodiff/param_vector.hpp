// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pinnkit/error.hpp"

namespace pinnkit::ad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Version tag written into checkpoints next to the segment table.
inline constexpr const char* kParamLayoutVersion = "pinnkit-params-v1";

struct Segment {
  std::string name;  // "<layer>.<tensor>", e.g. "hidden2.V"
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
  bool operator==(const Segment&) const = default;
};

/// Named segments of a flat parameter array. Segments are contiguous and
/// stored in insertion order; a segment's matrix is column-major.
class ParamLayout {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    if (find(name)) throw Error(Errc::invalid_argument, "duplicate segment " + name);
    segments_.push_back(Segment{std::move(name), size_, rows, cols});
    size_ += rows * cols;
    return segments_.size() - 1;
  }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < segments_.size(); ++i)
      if (segments_[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t index(const std::string& name) const {
    auto i = find(name);
    if (!i) throw Error(Errc::invalid_argument, "unknown parameter segment " + name);
    return *i;
  }

  const Segment& operator[](std::size_t i) const { return segments_[i]; }
  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t count() const { return segments_.size(); }
  Eigen::Index size() const { return size_; }

  /// Human-readable signature used to reject incompatible checkpoints.
  std::string fingerprint() const {
    std::string out = kParamLayoutVersion;
    for (const auto& s : segments_)
      out += ";" + s.name + ":" + std::to_string(s.rows) + "x" + std::to_string(s.cols);
    return out;
  }

  bool operator==(const ParamLayout& other) const { return segments_ == other.segments_; }

 private:
  std::vector<Segment> segments_;
  Eigen::Index size_ = 0;
};

/// Flat parameter storage plus the layout that gives it structure.
class ParamVector {
 public:
  ParamVector() : layout_(std::make_shared<ParamLayout>()) {}
  explicit ParamVector(std::shared_ptr<const ParamLayout> layout)
      : layout_(std::move(layout)), flat_(Vector::Zero(layout_->size())) {}
  ParamVector(std::shared_ptr<const ParamLayout> layout, Vector flat)
      : layout_(std::move(layout)), flat_(std::move(flat)) {
    if (flat_.size() != layout_->size())
      throw Error(Errc::shape_error, "flat size does not match parameter layout");
  }

  const ParamLayout& layout() const { return *layout_; }
  const std::shared_ptr<const ParamLayout>& layout_ptr() const { return layout_; }

  Vector& flat() { return flat_; }
  const Vector& flat() const { return flat_; }
  Eigen::Index size() const { return flat_.size(); }

  Eigen::Map<Matrix> view(std::size_t segment) {
    const auto& s = (*layout_)[segment];
    return {flat_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<const Matrix> view(std::size_t segment) const {
    const auto& s = (*layout_)[segment];
    return {flat_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<Matrix> view(const std::string& name) { return view(layout_->index(name)); }
  Eigen::Map<const Matrix> view(const std::string& name) const {
    return view(layout_->index(name));
  }

  std::map<std::string, Matrix> to_structured() const {
    std::map<std::string, Matrix> out;
    for (std::size_t i = 0; i < layout_->count(); ++i) out[(*layout_)[i].name] = view(i);
    return out;
  }

  static ParamVector from_structured(std::shared_ptr<const ParamLayout> layout,
                                     const std::map<std::string, Matrix>& tensors) {
    ParamVector pv(std::move(layout));
    for (std::size_t i = 0; i < pv.layout().count(); ++i) {
      const auto& seg = pv.layout()[i];
      auto it = tensors.find(seg.name);
      if (it == tensors.end()) throw Error(Errc::shape_error, "missing tensor " + seg.name);
      if (it->second.rows() != seg.rows || it->second.cols() != seg.cols)
        throw Error(Errc::shape_error, "tensor shape mismatch for " + seg.name);
      pv.view(i) = it->second;
    }
    return pv;
  }

  ParamVector zeros_like() const { return ParamVector(layout_); }

 private:
  std::shared_ptr<const ParamLayout> layout_;
  Vector flat_;
};

}  // namespace pinnkit::ad
