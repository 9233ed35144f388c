#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gossiprec {

using NodeId = std::uint32_t;
using ItemId = std::uint32_t;

/// Thrown when two parameter vectors cannot be combined or a payload is malformed.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const Segment&) const = default;
};

/// Flat array of reals partitioned into named, contiguous, disjoint segments.
class ParamVector {
 public:
  ParamVector() = default;

  /// Appends a zero-filled segment after the existing ones.
  void add_segment(std::string name, std::size_t length);

  std::span<double> segment(std::string_view name);
  std::span<const double> segment(std::string_view name) const;
  bool has_segment(std::string_view name) const noexcept;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  bool same_layout(const ParamVector& other) const noexcept {
    return segments_ == other.segments_;
  }

  /// Segments tile [0, size) in order.
  bool layout_valid() const noexcept;
  bool all_finite() const noexcept;

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<double> values_;
  std::vector<Segment> segments_;
};

/// Number of local training passes a model has absorbed.
struct ModelAge {
  std::uint64_t count = 0;

  auto operator<=>(const ModelAge&) const = default;
};

/// Shared parameters plus the metadata that travels with them.
struct GossipModel {
  ParamVector params;
  ModelAge age;
  std::uint64_t sample_count = 0;
  NodeId owner = 0;

  bool operator==(const GossipModel&) const = default;
};

/// Wire/checkpoint encoding. Layout, all integers and reals little-endian:
///   magic "GRPV" | u32 version | u32 owner | u64 age | u64 sample_count |
///   u32 n_segments | { u32 name_len | name bytes | u64 offset | u64 length }* |
///   u64 n_values | f64 values*
std::vector<std::uint8_t> serialize(const GossipModel& model);
GossipModel deserialize(std::span<const std::uint8_t> bytes);

/// Byte size of serialize(model) without building it.
std::size_t serialized_size(const GossipModel& model);

void save_checkpoint(const GossipModel& model, const std::string& path);
GossipModel load_checkpoint(const std::string& path);

}  // namespace gossiprec
