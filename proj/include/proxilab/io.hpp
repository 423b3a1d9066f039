#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proxilab/analysis.hpp"
#include "proxilab/prober.hpp"
#include "proxilab/stats.hpp"

// File formats shared by the CLI, the experiment drivers and the bindings.
//
//   transitions JSONL  {"target","inside":[lat,lon],"outside":[lat,lon],"bearing","dir","queries"}
//   report JSON        PrivacyReport fields
//   sweep CSV          name,lat,lon,l_m,D_m,shape
//   ECDF CSV           value,F,lo,hi
//
// Every file starts with the experiment configuration: a {"config": ...}
// record in JSONL, a "config" member in JSON, a "# config: ..." line in CSV.
namespace proxilab::io {

using ojson = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ojson transition_to_json(const std::string& target, const probe::Transition& t);
probe::Transition transition_from_json(const ojson& j);

void write_transitions(std::ostream& out, const probe::TransitionSet& set,
                       const std::optional<ojson>& config = std::nullopt);

struct TransitionsFile {
  probe::TransitionSet set;
  std::optional<ojson> config;
};

/// Throws FormatError naming the offending line.
TransitionsFile read_transitions(std::istream& in);

ojson report_to_json(const analysis::PrivacyReport& rep);

void write_sweep_csv(std::ostream& out, std::span<const analysis::SweepRow> rows,
                     const std::optional<ojson>& config = std::nullopt);

void write_ecdf_csv(std::ostream& out, const stats::Ecdf& ecdf,
                    const std::optional<ojson>& config = std::nullopt);

void write_config_comment(std::ostream& out, const std::optional<ojson>& config);

/// Fixed-precision decimal used in every CSV cell.
std::string fmt(double v, int precision = 6);

/// The ten reference cities used by the latitude sweep.
std::vector<analysis::Location> table1_locations();

std::vector<analysis::Location> locations_from_registry(const std::string& path);

}  // namespace proxilab::io
