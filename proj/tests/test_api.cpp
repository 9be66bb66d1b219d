#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

#include "fireline/api_server.hpp"
#include "fireline/codec.hpp"
#include "fireline/mission_service.hpp"

using namespace fireline;
using namespace fireline::api;
using nlohmann::json;

namespace {

IncidentConfig incident() {
  IncidentConfig c;
  c.address = "1 Test Rd";
  c.origin = {40.0, -88.0};
  c.roster = {FirefighterId(1), FirefighterId(2)};
  return c;
}

const char* kSquare = R"({"name": "yard", "vertices": [
  {"lat": 39.999, "lon": -88.001}, {"lat": 39.999, "lon": -87.999},
  {"lat": 40.001, "lon": -87.999}, {"lat": 40.001, "lon": -88.001}]})";

}  // namespace

TEST_CASE("unit routes") {
  mission::MissionService svc(incident());
  svc.ingest(codec::encode(codec::StrapFrame{FirefighterId(1), 0, 155, 150, 97.0, 37.5}), 1.0);

  auto r = handle(svc, "GET", "/units", "");
  CHECK(r.status == 200);
  CHECK(r.body["units"].size() == 2);
  CHECK(r.body["units"][0]["hr_bpm"] == 155);

  r = handle(svc, "GET", "/units/1", "");
  CHECK(r.status == 200);
  CHECK(r.body["id"] == 1);
  CHECK(r.body["active_alerts"] == json::array({"HIGH_HR"}));
  CHECK(r.body["strap"]["status"] == "LIVE");
  CHECK(r.body["helm"]["status"] == "NONE");

  CHECK(handle(svc, "GET", "/units/9", "").status == 404);
  CHECK(handle(svc, "GET", "/units/abc", "").status == 400);
  CHECK(handle(svc, "GET", "/nowhere", "").status == 404);
  CHECK(handle(svc, "OPTIONS", "/units", "").status == 204);
}

TEST_CASE("recall route") {
  mission::MissionService svc(incident());
  auto r = handle(svc, "POST", "/units/2/recall", "");
  CHECK(r.status == 202);
  CHECK(r.body["command"] == "C,2,LED_RED");
  CHECK(svc.unit(FirefighterId(2))->led == mission::LedState::kPending);
  r = handle(svc, "POST", "/units/42/recall", "");
  CHECK(r.status == 404);
  CHECK(r.body["error"] == "UnknownUnit");
}

TEST_CASE("boundary routes") {
  mission::MissionService svc(incident());
  auto r = handle(svc, "POST", "/boundaries", kSquare);
  REQUIRE(r.status == 201);
  const auto id = r.body["id"].get<std::uint64_t>();
  CHECK(r.body["name"] == "yard");

  r = handle(svc, "POST", "/boundaries", R"({"name": "x", "vertices": [{"lat": 0, "lon": 0}, {"lat": 1, "lon": 0}]})");
  CHECK(r.status == 422);
  CHECK(r.body["error"] == "TooFewVertices");
  r = handle(svc, "POST", "/boundaries", R"({"vertices": [{"lat": 0, "lon": 0}, {"lat": 1, "lon": 0}, {"lat": 0, "lon": 1}]})");
  CHECK(r.status == 422);
  CHECK(r.body["error"] == "MissingName");
  CHECK(handle(svc, "POST", "/boundaries", "{oops").status == 400);
  CHECK(handle(svc, "POST", "/boundaries", R"({"name": "x", "vertices": [{"lat": 91, "lon": 0}]})").status == 400);

  r = handle(svc, "GET", "/boundaries", "");
  CHECK(r.body.size() == 1);
  CHECK(handle(svc, "DELETE", "/boundaries/" + std::to_string(id), "").status == 204);
  CHECK(handle(svc, "DELETE", "/boundaries/" + std::to_string(id), "").status == 404);
  CHECK(handle(svc, "GET", "/boundaries", "").body.empty());
}

TEST_CASE("log and config routes") {
  mission::MissionService svc(incident());
  svc.open(0.0);
  svc.ingest("###", 1.0);
  svc.ingest("C,1,LED_RED", 2.0);
  auto r = handle(svc, "GET", "/log", "");
  CHECK(r.body.size() == 3);
  r = handle(svc, "GET", "/log?since=2", "");
  REQUIRE(r.body.size() == 1);
  CHECK(r.body[0]["seq"] == 3);
  CHECK(r.body[0]["kind"] == "FRAME");
  CHECK(handle(svc, "GET", "/log?since=x", "").status == 400);

  r = handle(svc, "GET", "/config", "");
  CHECK(r.body["address"] == "1 Test Rd");
  CHECK(r.body["thresholds"]["hr_high_bpm"] == 150.0);
  CHECK(r.body["channel"]["max_range_m"] == 610.0);
}

TEST_CASE("endpoint parsing") {
  auto e = parse_endpoint("0.0.0.0:9000");
  CHECK(e.host == "0.0.0.0");
  CHECK(e.port == 9000);
  CHECK(parse_endpoint("8080").port == 8080);
  CHECK_THROWS(parse_endpoint("host:notaport"));
}

TEST_CASE("live server over http and websocket") {
  namespace beast = boost::beast;
  namespace ws = beast::websocket;
  using boost::asio::ip::tcp;

  mission::MissionService svc(incident());
  Server server(svc, Endpoint{"127.0.0.1", 0});
  server.start();
  const auto port = server.port();
  REQUIRE(port != 0);

  httplib::Client http("127.0.0.1", port);
  auto res = http.Get("/units");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(json::parse(res->body)["units"].size() == 2);

  boost::asio::io_context ioc;
  tcp::resolver resolver(ioc);
  ws::stream<tcp::socket> client(ioc);
  boost::asio::connect(client.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
  client.handshake("127.0.0.1", "/stream");
  beast::flat_buffer buf;
  client.read(buf);
  auto first = json::parse(beast::buffers_to_string(buf.data()));
  buf.consume(buf.size());
  CHECK(first["type"] == "snapshot");
  CHECK(first["units"].size() == 2);

  res = http.Post("/units/1/recall", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 202);

  bool saw_command = false;
  for (int i = 0; i < 5 && !saw_command; ++i) {
    client.read(buf);
    auto m = json::parse(beast::buffers_to_string(buf.data()));
    buf.consume(buf.size());
    if (m["type"] == "command") {
      saw_command = true;
      CHECK(m["record"]["payload"]["unit"] == 1);
    }
  }
  CHECK(saw_command);

  res = http.Post("/boundaries", kSquare, "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  res = http.Get("/boundaries");
  CHECK(json::parse(res->body).size() == 1);

  client.close(ws::close_code::normal);
  server.stop();
}
