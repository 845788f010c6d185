// Copyright 2026 The revfocus Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <regex>

#include "revfocus/gateway.hpp"

namespace revfocus {

HttpResponse HttplibTransport::post(const HttpRequest& req) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  HttpResponse out;
  if (!std::regex_match(req.url, m, kUrl)) {
    out.transport_error = "bad url " + req.url;
    return out;
  }
  httplib::Client client(m[1].str());
  const auto secs = static_cast<time_t>(req.timeout_s);
  const auto usecs = static_cast<time_t>((req.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : req.headers) {
    if (k == "Content-Type") {
      content_type = v;
    } else {
      headers.emplace(k, v);
    }
  }
  const std::string path = m[2].matched ? m[2].str() : "/";
  auto res = client.Post(path, headers, req.body, content_type);
  if (!res) {
    out.timed_out = res.error() == httplib::Error::Read ||
                    res.error() == httplib::Error::ConnectionTimeout;
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace revfocus
