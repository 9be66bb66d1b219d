#pragma once

// Discrete-time LoRa broadcast medium: hard range cutoff, all-or-nothing
// collisions on airtime overlap, optional seeded random loss.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fireline/geo.hpp"

namespace fireline::channel {

using NodeId = std::string;

enum class Role { kWearable, kBase };

struct RadioNode {
  NodeId node_id;
  GeoPoint position;
  Role role = Role::kWearable;
};

struct ChannelConfig {
  double max_range_m = 610.0;
  double data_rate_bps = 50000.0;
  double random_loss_prob = 0.0;
  std::uint64_t rng_seed = 0;
  // Descriptive only; the propagation model is the range cutoff above.
  double frequency_mhz = 915.0;
  double tx_power_dbm = 23.0;

  // Empty string when valid.
  std::string validate() const;
};

struct Transmission {
  NodeId origin;
  std::string line;
  double start = 0.0;
  double airtime = 0.0;

  double end() const { return start + airtime; }
};

struct Delivery {
  NodeId receiver;
  NodeId origin;
  std::string line;
  double at = 0.0;

  bool operator==(const Delivery&) const = default;
};

enum class SubmitError { kDuplicateSubmission, kUnknownOrigin };

// Half-open airtime intervals [start, end): frames that merely touch do not collide.
bool overlaps(const Transmission& a, const Transmission& b);

class Channel {
 public:
  explicit Channel(ChannelConfig config);

  const ChannelConfig& config() const { return config_; }
  double now() const { return now_; }

  void add_node(RadioNode node);
  void move(const NodeId& node_id, const GeoPoint& position);
  const RadioNode& node(const NodeId& node_id) const;
  bool has_node(const NodeId& node_id) const { return nodes_.contains(node_id); }

  // Transmission occupying the channel for the codec airtime of `line`.
  Transmission make_transmission(const NodeId& origin, std::string line, double start) const;

  // Queues `tx`; returns the rejection reason, if any.
  std::optional<SubmitError> submit(Transmission tx);

  // Resolves every queued transmission that ends at or before `until`.
  std::vector<Delivery> step(double until);

  std::size_t in_flight() const { return pending_.size(); }

 private:
  struct Queued {
    Transmission tx;
    GeoPoint origin_position;
    std::uint64_t order = 0;
  };

  double uniform();

  ChannelConfig config_;
  std::map<NodeId, RadioNode> nodes_;
  std::vector<Queued> pending_;
  // Already-resolved transmissions that may still overlap a pending one.
  std::vector<Queued> recent_;
  std::uint64_t next_order_ = 0;
  double now_ = 0.0;
  std::mt19937_64 rng_;
};

}  // namespace fireline::channel
