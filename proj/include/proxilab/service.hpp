#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxilab/geo.hpp"
#include "proxilab/quantizer.hpp"

namespace proxilab::service {

inline constexpr double kSecondsPerDay = 86400.0;

enum class RejectCode { FloodWait, SpeedBan, BadRequest };

const char* to_string(RejectCode code);

struct Rejection {
  RejectCode code = RejectCode::BadRequest;
  double retry_after_s = 0.0;
  std::string detail;
};

/// Optional "stay where you declared" admission policy: requests farther than
/// `radius_m` from the first position of the current window are dropped
/// (answered with an empty list). The anchor is renewed every `window_s`.
struct Geofence {
  double radius_m = 10.0;
  double window_s = 600.0;
};

struct AdmissionPolicy {
  int daily_quota = 1000;
  double speed_limit_mps = 25.0;  // 90 km/h
  double flood_ban_s = kSecondsPerDay;
  double speed_ban_s = kSecondsPerDay;
  std::optional<Geofence> geofence;
};

struct AccountState {
  std::string id;
  int queries_today = 0;
  std::int64_t day_epoch = -1;  // UTC day index of queries_today
  std::optional<geo::GeoPoint> last_pos;
  std::optional<double> last_ts;
  std::optional<double> ban_until;
  RejectCode ban_reason = RejectCode::FloodWait;
  std::optional<geo::GeoPoint> fence_anchor;
  double fence_since = 0.0;
  std::int64_t admitted_total = 0;
};

struct Admission {
  std::optional<Rejection> rejection;
  bool dropped = false;  // admitted but filtered by the geofence policy

  bool admitted() const { return !rejection.has_value(); }
};

/// Applies quota, velocity and (optionally) geofence rules for one query at
/// virtual time `ts` (seconds since the UTC epoch). Mutates `st` only when
/// the query is admitted or a ban is imposed.
Admission admit_query(AccountState& st, const AdmissionPolicy& policy,
                      const geo::GeoPoint& pos, double ts);

// --- registry ---------------------------------------------------------------

struct Target {
  std::string id;
  geo::GeoPoint pos;
  std::set<std::string> contact_of;
};

class RegistryError : public std::runtime_error {
 public:
  RegistryError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TargetRegistry {
 public:
  void add(Target t);
  void move(const std::string& id, const geo::GeoPoint& pos);
  const Target* find(const std::string& id) const;
  const std::map<std::string, Target>& targets() const { return targets_; }
  std::size_t size() const { return targets_.size(); }
  bool empty() const { return targets_.empty(); }

  /// One JSON object per line: {"id", "lat", "lon", "contact_of": [...]}.
  /// Blank lines are skipped. Throws RegistryError carrying the line number.
  static TargetRegistry load_jsonl(std::istream& in);
  /// Same format, records in file order (duplicates are still rejected).
  static std::vector<Target> read_jsonl(std::istream& in);
  static TargetRegistry load_jsonl_file(const std::string& path);

 private:
  std::map<std::string, Target> targets_;
};

// --- service ----------------------------------------------------------------

struct ServiceConfig {
  Quantizer quantizer;
  std::vector<int> classes = default_classes();
  double cutoff_m = kDefaultCutoff;
  std::size_t max_entries = 100;
  AdmissionPolicy policy;
};

struct Entry {
  std::string id;
  int class_m = 0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct SearchResult {
  std::optional<Rejection> rejection;
  std::vector<Entry> entries;

  bool ok() const { return !rejection.has_value(); }
};

/// Simulated proximity service. Thread-safe: admissions are serialized per
/// account, distance computation runs under a shared registry lock.
class Service {
 public:
  explicit Service(ServiceConfig cfg = {}, TargetRegistry registry = {});

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  SearchResult search_chats_nearby(const std::string& account,
                                   const geo::GeoPoint& pos, double ts);

  /// Adds or relocates a target (the target device spoofing a new position).
  void place_target(const std::string& id, const geo::GeoPoint& pos,
                    std::set<std::string> contact_of = {});

  std::optional<geo::GeoPoint> target_position(const std::string& id) const;
  std::size_t target_count() const;

  /// Copy of an account's state; default-constructed if never seen.
  AccountState account(const std::string& id) const;

  const ServiceConfig& config() const { return cfg_; }

 private:
  struct IndexedTarget {
    std::string id;
    geo::GeoPoint node_pos;
    std::set<std::string> contact_of;
  };
  struct AccountSlot {
    std::mutex mu;
    AccountState state;
  };

  AccountSlot& slot(const std::string& account);
  IndexedTarget index(const Target& t) const;

  ServiceConfig cfg_;
  mutable std::shared_mutex registry_mu_;
  TargetRegistry registry_;
  std::map<std::string, IndexedTarget> indexed_;

  mutable std::mutex accounts_mu_;
  std::map<std::string, std::unique_ptr<AccountSlot>> accounts_;
};

}  // namespace proxilab::service
