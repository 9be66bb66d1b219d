#include "fireline/wearable_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "fireline/vitals.hpp"

namespace fireline::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quantize(double v, double scale) { return std::round(v * scale) / scale; }

// Index of the last point with t <= query (timelines start at 0).
template <typename Point>
std::size_t segment(const std::vector<Point>& pts, double t) {
  auto it = std::upper_bound(pts.begin(), pts.end(), t, [](double q, const Point& p) { return q < p.t; });
  return it == pts.begin() ? 0 : static_cast<std::size_t>(it - pts.begin()) - 1;
}

template <typename Point, typename Get>
double sample(const std::vector<Point>& pts, double t, Get get) {
  const std::size_t i = segment(pts, t);
  if (i + 1 >= pts.size()) return get(pts[i]);
  return interpolate(pts[i].t, get(pts[i]), pts[i + 1].t, get(pts[i + 1]), t);
}

}  // namespace

channel::NodeId helm_node(FirefighterId id) { return "helm-" + std::to_string(id.value); }
channel::NodeId strap_node(FirefighterId id) { return "strap-" + std::to_string(id.value); }

double interpolate(double t0, double v0, double t1, double v1, double t) {
  if (t <= t0) return v0;
  if (t >= t1) return v1;
  const double w = (t - t0) / (t1 - t0);
  return v0 + (v1 - v0) * w;
}

double interpolate_heading(double t0, double y0, double t1, double y1, double t) {
  const double a = vitals::heading_from_yaw(y0);
  double delta = vitals::heading_from_yaw(y1) - a;
  if (delta > 180.0) delta -= 360.0;
  if (delta < -180.0) delta += 360.0;
  return vitals::heading_from_yaw(interpolate(t0, a, t1, a + delta, t));
}

double battery_at(double t, double life_s) { return std::max(0.0, 100.0 * (1.0 - t / life_s)); }

WearableSim::WearableSim(Scenario scenario, double data_rate_bps)
    : scenario_(std::move(scenario)), data_rate_bps_(data_rate_bps) {
  if (!(data_rate_bps_ > 0.0)) throw std::invalid_argument("data rate must be > 0");
  std::uint32_t max_id = 0;
  for (const auto& u : scenario_.units) max_id = std::max(max_id, u.id.value);
  const double slots = static_cast<double>(max_id) + 1.0;

  for (const auto& script : scenario_.units) {
    Unit u;
    u.script = script;
    u.state.id = script.id;
    // Strap sits half a slot after its helm so a pair never collides with itself.
    u.helm_phase = script.id.value * script.helm_period_s / slots;
    u.strap_phase = (script.id.value + 0.5) * script.strap_period_s / slots;
    u.state.next_helm_tx = u.helm_phase;
    u.state.next_strap_tx = u.strap_phase;
    units_.emplace(script.id, std::move(u));
  }
}

const WearableSim::Unit& WearableSim::unit(FirefighterId id) const {
  auto it = units_.find(id);
  if (it == units_.end()) throw std::invalid_argument("unknown unit " + std::to_string(id.value));
  return it->second;
}

GeoPoint WearableSim::actual_position(FirefighterId id, double t) const {
  const auto& wps = unit(id).script.waypoints;
  return {sample(wps, t, [](const Waypoint& w) { return w.position.lat; }),
          sample(wps, t, [](const Waypoint& w) { return w.position.lon; })};
}

codec::HelmFrame WearableSim::sample_helm(FirefighterId id, double t) const {
  const Unit& u = unit(id);
  const auto& s = u.script;
  codec::HelmFrame f;
  f.id = id;
  f.gps_fix = s.waypoints[segment(s.waypoints, t)].gps_fix;
  const GeoPoint p = actual_position(id, t);
  f.position = {quantize(p.lat, 1e6), quantize(p.lon, 1e6)};
  f.ambient_c = quantize(sample(s.vitals, t, [](const VitalsPoint& v) { return v.ambient_c; }), 100.0);
  double yaw = 0.0;
  if (!s.heading.empty()) {
    const std::size_t i = segment(s.heading, t);
    yaw = i + 1 < s.heading.size()
              ? interpolate_heading(s.heading[i].t, s.heading[i].yaw, s.heading[i + 1].t,
                                    s.heading[i + 1].yaw, t)
              : vitals::heading_from_yaw(s.heading[i].yaw);
  }
  yaw = quantize(yaw, 100.0);
  f.yaw = yaw >= 360.0 ? 0.0 : yaw;
  return f;
}

codec::StrapFrame WearableSim::sample_strap(FirefighterId id, double t) const {
  const auto& v = unit(id).script.vitals;
  codec::StrapFrame f;
  f.id = id;
  f.hr_bpm = static_cast<int>(std::lround(sample(v, t, [](const VitalsPoint& p) { return p.hr_bpm; })));
  f.pulse_bpm = static_cast<int>(std::lround(sample(v, t, [](const VitalsPoint& p) { return p.pulse_bpm; })));
  f.spo2_pct = quantize(sample(v, t, [](const VitalsPoint& p) { return p.spo2_pct; }), 10.0);
  f.body_c = quantize(sample(v, t, [](const VitalsPoint& p) { return p.body_c; }), 100.0);
  return f;
}

codec::HelmFrame WearableSim::synth_helm(Unit& u, double t) {
  codec::HelmFrame f = sample_helm(u.script.id, t);
  f.seq = u.state.helm_seq++;
  if (f.gps_fix) {
    u.last_fix = f.position;
  } else if (u.last_fix) {
    f.position = *u.last_fix;
  }
  const auto& jerks = u.script.jerk_events;
  if (u.next_jerk < jerks.size() && jerks[u.next_jerk] <= t) {
    while (u.next_jerk < jerks.size() && jerks[u.next_jerk] <= t) ++u.next_jerk;
    f.lin_accel = {kJerkSpikeMs2, 0.0, 0.0};
  }
  return f;
}

codec::StrapFrame WearableSim::synth_strap(Unit& u, double t) {
  codec::StrapFrame f = sample_strap(u.script.id, t);
  f.seq = u.state.strap_seq++;
  return f;
}

std::vector<channel::Transmission> WearableSim::tick(double now) {
  if (now < last_now_) throw std::invalid_argument("tick time went backwards");
  last_now_ = now;

  std::vector<channel::Transmission> out;
  const auto emit = [&](const channel::NodeId& node, const codec::Frame& frame, double at) {
    std::string line = codec::encode(frame);
    const double air = codec::airtime(line, data_rate_bps_);
    out.push_back(channel::Transmission{node, std::move(line), at, air});
  };
  const double life = scenario_.battery_life_s;

  for (auto& [id, u] : units_) {
    auto& st = u.state;
    while (!u.helm_done && st.next_helm_tx <= now) {
      const double at = st.next_helm_tx;
      if (battery_at(at, life) <= 0.0) {
        u.helm_done = true;
        break;
      }
      emit(helm_node(id), synth_helm(u, at), at);
      st.next_helm_tx = u.helm_phase + static_cast<double>(st.helm_seq) * u.script.helm_period_s;
    }
    while (!u.strap_done && st.next_strap_tx <= now) {
      const double at = st.next_strap_tx;
      if (battery_at(at, life) <= 0.0) {
        u.strap_done = true;
        break;
      }
      emit(strap_node(id), synth_strap(u, at), at);
      st.next_strap_tx = u.strap_phase + static_cast<double>(st.strap_seq) * u.script.strap_period_s;
    }
    st.battery_pct = battery_at(now, life);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start, a.origin) < std::tie(b.start, b.origin);
  });
  return out;
}

void WearableSim::deliver_command(const codec::CommandFrame& cmd) {
  auto it = units_.find(cmd.target);
  if (it == units_.end()) return;
  if (cmd.command == codec::Command::kLedRed) it->second.state.led = Led::kRed;
}

double WearableSim::next_due() const {
  double t = kInf;
  for (const auto& [id, u] : units_) {
    if (!u.helm_done) t = std::min(t, u.state.next_helm_tx);
    if (!u.strap_done) t = std::min(t, u.state.next_strap_tx);
  }
  return t;
}

const WearableState& WearableSim::state(FirefighterId id) const { return unit(id).state; }

std::vector<WearableState> WearableSim::states() const {
  std::vector<WearableState> out;
  for (const auto& [id, u] : units_) out.push_back(u.state);
  return out;
}

}  // namespace fireline::sim
