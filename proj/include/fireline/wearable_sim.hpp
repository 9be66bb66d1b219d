#pragma once

// Scenario-driven helm/strap pairs. Each unit broadcasts on a fixed phase
// schedule, samples its scripted timelines at the transmit instant, and
// drains a linear battery.

#include <map>
#include <vector>

#include "fireline/channel.hpp"
#include "fireline/codec.hpp"
#include "fireline/scenario.hpp"

namespace fireline::sim {

inline constexpr double kJerkSpikeMs2 = 35.0;

enum class Led { kOff, kRed };

struct WearableState {
  FirefighterId id;
  Led led = Led::kOff;
  double battery_pct = 100.0;
  double next_helm_tx = 0.0;
  double next_strap_tx = 0.0;
  std::uint64_t helm_seq = 0;  // next sequence number to send
  std::uint64_t strap_seq = 0;
};

channel::NodeId helm_node(FirefighterId id);
channel::NodeId strap_node(FirefighterId id);

// Linear interpolation with the ends held; shared with tests.
double interpolate(double t0, double v0, double t1, double v1, double t);

// Shortest-arc interpolation between two headings, result in [0,360).
double interpolate_heading(double t0, double y0, double t1, double y1, double t);

// max(0, 100 * (1 - t / life))
double battery_at(double t, double life_s);

class WearableSim {
 public:
  WearableSim(Scenario scenario, double data_rate_bps);

  const Scenario& scenario() const { return scenario_; }

  // Every broadcast scheduled at or before `now`, oldest first; each starts
  // at its scheduled instant.
  std::vector<channel::Transmission> tick(double now);

  void deliver_command(const codec::CommandFrame& cmd);

  // Earliest pending broadcast across live units, +inf when none remain.
  double next_due() const;

  GeoPoint actual_position(FirefighterId id, double t) const;
  codec::HelmFrame sample_helm(FirefighterId id, double t) const;
  codec::StrapFrame sample_strap(FirefighterId id, double t) const;

  const WearableState& state(FirefighterId id) const;
  std::vector<WearableState> states() const;

 private:
  struct Unit {
    UnitScript script;
    WearableState state;
    double helm_phase = 0.0;
    double strap_phase = 0.0;
    std::size_t next_jerk = 0;
    std::optional<GeoPoint> last_fix;
    bool helm_done = false;
    bool strap_done = false;
  };

  const Unit& unit(FirefighterId id) const;
  codec::HelmFrame synth_helm(Unit& u, double t);
  codec::StrapFrame synth_strap(Unit& u, double t);

  Scenario scenario_;
  double data_rate_bps_;
  std::map<FirefighterId, Unit> units_;
  double last_now_ = 0.0;
};

}  // namespace fireline::sim
