#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "proxilab/geo.hpp"
#include "proxilab/net.hpp"
#include "proxilab/rng.hpp"

namespace proxilab::probe {

inline constexpr int kInnerClass = 500;
inline constexpr int kOuterClass = 1000;
/// Pace speed: a margin below the 25 m/s velocity ban.
inline constexpr double kPaceSpeed = 24.9;
/// Minimum virtual-time advance between two queries.
inline constexpr double kMinPaceStep = 1.0;

struct ProbeConfig {
  double accuracy = 10.0;         // bisection stops at this straddle width (m)
  double jump = 100.0;            // walking step (m)
  int max_queries = 1000;         // query budget for a run
  double reset_distance = 3000.0; // abandon a straight walk beyond this (m)
  double speed_limit = 25.0;      // m/s, informational; pacing uses kPaceSpeed
  std::uint64_t seed = 1;
  int target_transitions = 30;
  double start_ts = 0.0;          // virtual clock origin
  int start_probes = 20;          // random probes when looking for a 500 m start
  double start_radius = 1000.0;
  int max_direction_draws = 32;
  bool verify_endpoints = false;  // re-query the outer endpoint before bisecting

  void validate() const;
};

enum class Direction { Out, In };  // Out: 500 -> 1000, In: 1000 -> 500

const char* to_string(Direction d);

struct Transition {
  geo::GeoPoint inside;   // last position reporting 500
  geo::GeoPoint outside;  // first position reporting 1000
  double bearing = 0.0;   // walking bearing when the crossing was found
  Direction dir = Direction::Out;
  int queries = 0;        // queries spent since the previous transition

  geo::GeoPoint midpoint() const { return geo::midpoint(inside, outside); }
  double width() const { return geo::distance(inside, outside); }
};

enum class RunStatus { Complete, BudgetExhausted, Banned, NotFound };

const char* to_string(RunStatus s);

struct TransitionSet {
  std::string target;
  std::vector<Transition> transitions;
  int exploration_queries = 0;  // queries not attributed to any transition
  int total_queries = 0;
  RunStatus status = RunStatus::Complete;
  std::string ban_code;   // set when status == Banned
  std::string ban_step;   // phase that triggered the ban
};

// --- errors -----------------------------------------------------------------

struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Exhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Reset : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InconsistentOracle : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Banned : std::runtime_error {
  Banned(std::string code, std::string step)
      : std::runtime_error(code + " during " + step),
        code(std::move(code)),
        step(std::move(step)) {}
  std::string code;
  std::string step;
};

/// Minimal virtual timestamp for moving from prev_pos to next_pos without
/// exceeding kPaceSpeed; at least kMinPaceStep after prev_ts.
double pace(const geo::GeoPoint& prev_pos, const geo::GeoPoint& next_pos, double prev_ts);

/// Supplies candidate bearings to choose_direction.
using BearingSource = std::function<double()>;

/// Finder-side walker. Knows the target id and what the service reports,
/// never the target's true position.
class Prober {
 public:
  Prober(wire::NearbyClient& client, std::string target_id, ProbeConfig cfg);

  /// Queries from `p` (paced) and returns the class reported for the target,
  /// 0 when it is not listed. Throws BudgetExhausted / Banned.
  int observe(const geo::GeoPoint& p);

  /// A position reporting 500 near `hint`; throws NotFound.
  geo::GeoPoint find_inward_start(const geo::GeoPoint& hint);

  /// Draws bearings until one jump from the current position still reports
  /// 500, moves there and returns the bearing. Throws Exhausted.
  double choose_direction(const BearingSource& source);
  double choose_direction(std::optional<double> preferred = std::nullopt);

  /// Jumps along `bearing` until the class flips; returns (inside, outside).
  /// Throws Reset beyond cfg.reset_distance from the walk's origin.
  std::pair<geo::GeoPoint, geo::GeoPoint> probe_outward(double bearing);

  /// Jumps from an outside position along `bearing` until 500 is reported;
  /// returns (inside, outside).
  std::pair<geo::GeoPoint, geo::GeoPoint> probe_inward(const geo::GeoPoint& from,
                                                        double bearing);

  /// Halves the straddle until it is at most cfg.accuracy wide.
  Transition bisect_boundary(geo::GeoPoint inside, geo::GeoPoint outside,
                             Direction dir, double bearing);

  /// The full direction -> probe -> bisect loop, alternating OUT and IN
  /// crossings. Budget exhaustion and bans end the run with a partial set.
  TransitionSet collect_transitions(const geo::GeoPoint& hint);

  // State accessors.
  const geo::GeoPoint& position() const { return pos_; }
  void set_position(const geo::GeoPoint& p) { pos_ = p; }
  int queries_used() const { return used_; }
  double clock() const { return ts_; }
  const ProbeConfig& config() const { return cfg_; }
  Rng& rng() { return rng_; }
  /// Queries since the last call; used for per-transition accounting.
  int take_query_count();

 private:
  std::string phase_ = "start";
  wire::NearbyClient& client_;
  std::string target_;
  ProbeConfig cfg_;
  Rng rng_;
  geo::GeoPoint pos_;
  std::optional<geo::GeoPoint> last_query_pos_;
  double ts_ = 0.0;
  int used_ = 0;
  int since_mark_ = 0;
};

}  // namespace proxilab::probe
