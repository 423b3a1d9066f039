#include <doctest.h>

#include <thread>

#include "proxilab/net.hpp"
#include "proxilab/rng.hpp"
#include "proxilab/wire.hpp"

using namespace proxilab;
using namespace proxilab::wire;

TEST_CASE("request round trips") {
  Request zero;
  zero.account = "a0";
  CHECK(decode_request(encode(zero)) == zero);

  const std::string doha =
      R"({"v":1,"type":"search","account":"a1","lat":25.26174,"lon":51.359269,"ts":10})";
  const Request r = decode_request(doha);
  CHECK(r.account == "a1");
  CHECK(r.lat == 25.26174);
  CHECK(r.lon == 51.359269);
  CHECK(r.ts == 10.0);
  CHECK(decode_request(encode(r)) == r);
  const std::string line = encode(r);
  CHECK(line.back() == '\n');
  CHECK(line.find("\"v\":1,\"type\":\"search\",\"account\":\"a1\",\"lat\":25.26174") == 1);
}

TEST_CASE("response round trips") {
  const Response res = Response::result({{"t1", 500}, {"t2", 1000}});
  CHECK(decode_response(encode(res)) == res);
  CHECK(res.class_of("t2") == 1000);
  CHECK(res.class_of("nope") == 0);
  const Response err = Response::error("FLOOD_WAIT", 86400.0);
  CHECK(decode_response(encode(err)) == err);
  CHECK(err.class_of("t1") == 0);
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(decode_request("not json"), DecodeError);
  CHECK_THROWS_AS(decode_request(R"({"v":2,"type":"search","account":"a","lat":0,"lon":0,"ts":0})"),
                  DecodeError);
  CHECK_THROWS_AS(decode_request(R"({"v":1,"type":"search","account":"","lat":0,"lon":0,"ts":0})"),
                  DecodeError);
  CHECK_THROWS_AS(decode_request(R"({"v":1,"type":"search","account":"a","lat":95,"lon":0,"ts":0})"),
                  DecodeError);
  CHECK_THROWS_AS(decode_response(R"({"v":1,"type":"error","code":"NOPE","retry_after_s":0})"),
                  DecodeError);
  CHECK_THROWS_AS(decode_response(R"({"v":1,"type":"result","entries":[{"id":"a","class_m":700}]})"),
                  DecodeError);

  service::Service svc;
  const Response r = handle_line(svc, "not json");
  CHECK_FALSE(r.ok());
  CHECK(r.code == "BAD_REQUEST");
}

TEST_CASE("property: fuzzed messages round trip") {
  Rng rng(21);
  const auto& classes = service::default_classes();
  for (int k = 0; k < 500; ++k) {
    Request q;
    q.account = "acct-" + std::to_string(rng.next() % 100000);
    q.lat = rng.uniform(-85, 85);
    q.lon = rng.uniform(-180, 180);
    q.ts = std::floor(rng.uniform(0, 1e9) * 1000) / 1000;
    CHECK(decode_request(encode(q)) == q);

    std::vector<service::Entry> entries;
    const int n = static_cast<int>(rng.next() % 6);
    for (int e = 0; e < n; ++e) {
      entries.push_back({"t" + std::to_string(e), classes[1 + rng.next() % (classes.size() - 1)]});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.class_m != b.class_m ? a.class_m < b.class_m : a.id < b.id;
    });
    const Response r = Response::result(entries);
    CHECK(decode_response(encode(r)) == r);
  }
}

TEST_CASE("server: independent quotas, deterministic replies, flood wait") {
  service::Service svc;
  svc.place_target("t", {0, 0});
  Server server(svc, Endpoint{"127.0.0.1", 0});
  std::thread runner([&] { server.wait(); });
  const Endpoint ep{"127.0.0.1", server.port()};

  Client a(ep);
  Client b(ep);
  for (int k = 0; k < 1000; ++k) {
    Request q{kVersion, "search", "alice", 0.0, 0.0, static_cast<double>(k)};
    REQUIRE(a.call(q).ok());
  }
  const Response flood = a.call(Request{kVersion, "search", "alice", 0.0, 0.0, 1000.0});
  CHECK(flood.code == "FLOOD_WAIT");
  CHECK(flood.retry_after_s > 0.0);

  const Response other = b.call(Request{kVersion, "search", "bob", 0.0, 0.0, 1000.0});
  CHECK(other.ok());
  CHECK(other.class_of("t") == 500);

  const std::string line = encode(Request{kVersion, "search", "carol", 0.001, 0.001, 5.0});
  const std::string r1 = b.call_raw(line);
  const std::string r2 = b.call_raw(line);
  CHECK(r1 == r2);

  CHECK(decode_response(b.call_raw("not json")).code == "BAD_REQUEST");
  CHECK(b.call(Request{kVersion, "search", "bob", 0.0, 0.0, 1001.0}).ok());

  TcpClient nearby(ep, "dave");
  CHECK(nearby.search({0, 0}, 0.0).class_of("t") == 500);

  server.stop();
  runner.join();
}

TEST_CASE("endpoint parsing and bind failure") {
  const Endpoint e = Endpoint::parse("127.0.0.1:7878");
  CHECK(e.host == "127.0.0.1");
  CHECK(e.port == 7878);
  CHECK(e.str() == "127.0.0.1:7878");
  CHECK_THROWS(Endpoint::parse("nope"));
  CHECK_THROWS(Endpoint::parse("host:99999"));

  service::Service svc;
  Server first(svc, Endpoint{"127.0.0.1", 0});
  CHECK_THROWS_AS(Server(svc, Endpoint{"127.0.0.1", first.port()}), TransportError);
  first.stop();
}
