#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proxilab/service.hpp"

// Newline-delimited JSON protocol between finder clients and the service.
//
//   request:  {"v":1,"type":"search","account":"a1","lat":25.26174,"lon":51.359269,"ts":10}
//   result:   {"v":1,"type":"result","entries":[{"id":"t1","class_m":500}]}
//   error:    {"v":1,"type":"error","code":"FLOOD_WAIT","retry_after_s":86400}
namespace proxilab::wire {

inline constexpr int kVersion = 1;

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Request {
  int v = kVersion;
  std::string type = "search";
  std::string account;
  double lat = 0.0;
  double lon = 0.0;
  double ts = 0.0;

  friend bool operator==(const Request&, const Request&) = default;
};

struct Response {
  enum class Kind { Result, Error };

  int v = kVersion;
  Kind kind = Kind::Result;
  std::vector<service::Entry> entries;  // Result only
  std::string code;                     // Error only
  double retry_after_s = 0.0;           // Error only

  bool ok() const { return kind == Kind::Result; }
  /// Class reported for `id`, or 0 when the id is absent or this is an error.
  int class_of(std::string_view id) const;

  static Response result(std::vector<service::Entry> entries);
  static Response error(std::string code, double retry_after_s);

  friend bool operator==(const Response&, const Response&) = default;
};

/// Serialized message terminated by '\n'.
std::string encode(const Request& req);
std::string encode(const Response& resp);

/// Accepts a line with or without its trailing newline. Throws DecodeError.
Request decode_request(std::string_view line);
Response decode_response(std::string_view line);

Response to_response(const service::SearchResult& r);

/// Full server-side handling of one request line; malformed input yields a
/// BAD_REQUEST response.
Response handle_line(service::Service& svc, std::string_view line);

}  // namespace proxilab::wire
