#include "fireline/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "fireline/codec.hpp"

namespace fireline::channel {

std::string ChannelConfig::validate() const {
  if (!(max_range_m > 0.0)) return "max_range_m must be > 0";
  if (!(data_rate_bps > 0.0)) return "data_rate_bps must be > 0";
  if (!(random_loss_prob >= 0.0 && random_loss_prob <= 1.0)) return "random_loss_prob must be in [0,1]";
  return {};
}

bool overlaps(const Transmission& a, const Transmission& b) {
  return a.start < b.end() && b.start < a.end();
}

Channel::Channel(ChannelConfig config) : config_(std::move(config)), rng_(config_.rng_seed) {
  if (auto msg = config_.validate(); !msg.empty()) throw std::invalid_argument(msg);
}

void Channel::add_node(RadioNode node) {
  if (nodes_.contains(node.node_id)) throw std::invalid_argument("duplicate node id: " + node.node_id);
  if (!is_valid(node.position)) throw std::invalid_argument("invalid position for node " + node.node_id);
  const NodeId id = node.node_id;
  nodes_.emplace(id, std::move(node));
}

void Channel::move(const NodeId& node_id, const GeoPoint& position) {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node: " + node_id);
  if (!is_valid(position)) throw std::invalid_argument("invalid position for node " + node_id);
  it->second.position = position;
}

const RadioNode& Channel::node(const NodeId& node_id) const {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node: " + node_id);
  return it->second;
}

Transmission Channel::make_transmission(const NodeId& origin, std::string line, double start) const {
  const double air = codec::airtime(line, config_.data_rate_bps);
  return Transmission{origin, std::move(line), start, air};
}

std::optional<SubmitError> Channel::submit(Transmission tx) {
  if (tx.start < now_) throw std::invalid_argument("transmission starts before current sim time");
  if (!(tx.airtime > 0.0)) throw std::invalid_argument("transmission airtime must be > 0");
  auto origin = nodes_.find(tx.origin);
  if (origin == nodes_.end()) return SubmitError::kUnknownOrigin;

  const auto same_origin_overlap = [&](const Queued& q) {
    return q.tx.origin == tx.origin && overlaps(q.tx, tx);
  };
  if (std::any_of(pending_.begin(), pending_.end(), same_origin_overlap) ||
      std::any_of(recent_.begin(), recent_.end(), same_origin_overlap)) {
    return SubmitError::kDuplicateSubmission;
  }
  pending_.push_back(Queued{std::move(tx), origin->second.position, next_order_++});
  return std::nullopt;
}

double Channel::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::vector<Delivery> Channel::step(double until) {
  if (until < now_) throw std::invalid_argument("step target precedes current sim time");

  std::vector<Queued> done;
  std::vector<Queued> still_pending;
  for (auto& q : pending_) {
    (q.tx.end() <= until ? done : still_pending).push_back(std::move(q));
  }
  std::sort(done.begin(), done.end(), [](const Queued& a, const Queued& b) {
    return std::tie(a.tx.start, a.tx.origin, a.order) < std::tie(b.tx.start, b.tx.origin, b.order);
  });

  const auto collides = [&](const Queued& q) {
    const auto other = [&](const Queued& o) { return o.order != q.order && overlaps(o.tx, q.tx); };
    return std::any_of(done.begin(), done.end(), other) ||
           std::any_of(still_pending.begin(), still_pending.end(), other) ||
           std::any_of(recent_.begin(), recent_.end(), other);
  };

  std::vector<Delivery> out;
  for (const auto& q : done) {
    if (collides(q)) continue;
    for (const auto& [id, node] : nodes_) {
      if (id == q.tx.origin) continue;
      if (haversine_m(q.origin_position, node.position) > config_.max_range_m) continue;
      if (uniform() < config_.random_loss_prob) continue;
      out.push_back(Delivery{id, q.tx.origin, q.tx.line, q.tx.end()});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Delivery& a, const Delivery& b) {
    return std::tie(a.at, a.origin, a.receiver) < std::tie(b.at, b.origin, b.receiver);
  });

  pending_ = std::move(still_pending);
  for (auto& q : done) recent_.push_back(std::move(q));
  now_ = until;

  double horizon = until;
  for (const auto& q : pending_) horizon = std::min(horizon, q.tx.start);
  std::erase_if(recent_, [&](const Queued& q) { return q.tx.end() <= horizon; });
  return out;
}

}  // namespace fireline::channel
