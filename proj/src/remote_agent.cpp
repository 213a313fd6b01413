#include <memory>
#include <string>

#include "flowplan/harness.hpp"
#include "httplib.h"
#include "json.hpp"

namespace flowplan {

namespace {

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

ParsedUrl parse_http_url(const std::string& url) {
  std::string rest = url;
  if (rest.rfind("http://", 0) == 0) {
    rest = rest.substr(7);
  } else if (rest.rfind("https://", 0) == 0) {
    throw_error(Errc::kInvalidArgument, "only plain http endpoints are supported");
  }
  ParsedUrl out;
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  if (slash != std::string::npos) out.path = rest.substr(slash);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    out.host = authority.substr(0, colon);
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw_error(Errc::kInvalidArgument, "bad port in endpoint '" + url + "'");
    }
  } else {
    out.host = authority;
  }
  if (out.host.empty()) throw_error(Errc::kInvalidArgument, "bad endpoint '" + url + "'");
  return out;
}

// POST {"context": ...} -> {"output": ...}, one request per turn.
class RemoteAgent : public Agent {
 public:
  explicit RemoteAgent(const std::string& endpoint)
      : url_(parse_http_url(endpoint)), client_(url_.host, url_.port) {
    client_.set_connection_timeout(10, 0);
    client_.set_read_timeout(60, 0);
  }

  std::string respond(const AgentQuery& query) override {
    nlohmann::json body;
    body["context"] = query.context;
    const auto res = client_.Post(url_.path, body.dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
          err == httplib::Error::Write)
        throw_error(Errc::kTimeout, "endpoint did not answer: " + httplib::to_string(err));
      throw_error(Errc::kAgentUnavailable, "cannot reach endpoint: " + httplib::to_string(err));
    }
    if (res->status != 200)
      throw_error(Errc::kAgentUnavailable, "endpoint returned status " + std::to_string(res->status));
    try {
      return nlohmann::json::parse(res->body).at("output").get<std::string>();
    } catch (const std::exception& e) {
      throw_error(Errc::kAgentUnavailable, std::string("bad response body: ") + e.what());
    }
  }

 private:
  ParsedUrl url_;
  httplib::Client client_;
};

}  // namespace

std::unique_ptr<Agent> make_remote_agent(const std::string& endpoint) {
  return std::make_unique<RemoteAgent>(endpoint);
}

}  // namespace flowplan
