//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "carat/error.h"
#include "carat/mapping.h"

using namespace carat;
using json = nlohmann::json;

namespace {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on scope exit.
class ScratchDir {
public:
  ScratchDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("carat-mapping-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path &path() const { return path_; }

private:
  fs::path path_;
};

// Counts calls so tests can tell cache hits from provider round trips.
class CountingProvider: public MappingProvider {
public:
  std::vector<std::string> map(std::span<const std::string> reactions) override {
    ++calls;
    seen += reactions.size();
    std::vector<std::string> out;
    for (const std::string &r: reactions)
      out.push_back("mapped(" + r + ")");
    return out;
  }
  std::string describe() const override { return "counting"; }

  int calls = 0;
  std::size_t seen = 0;
};

// Local stand-in for the mapping service. The handler decides the response.
class StubService {
public:
  explicit StubService(httplib::Server::Handler handler) {
    server_.Post("/map", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// Echo service: maps "X" to "[X]" and reports batch sizes.
httplib::Server::Handler echo(std::vector<std::size_t> &batches) {
  return [&batches](const httplib::Request &req, httplib::Response &res) {
    const json body = json::parse(req.body);
    json mapped = json::array(), confidence = json::array();
    for (const auto &r: body.at("reactions")) {
      mapped.push_back("[" + r.get<std::string>() + "]");
      confidence.push_back(0.5);
    }
    batches.push_back(mapped.size());
    res.set_content(json { { "mapped", mapped }, { "confidence", confidence } }.dump(),
                    "application/json");
  };
}

std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back("C" + std::string(i % 7 + 1, 'C') + ">>R" + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("mapping tables round-trip through CSV") {
  ScratchDir dir;
  const fs::path file = dir.path() / "sub" / "table.csv";
  std::map<std::string, std::string, std::less<>> rows {
    { "CO.O>>O=C=O", "[C-:1]#[O+:2].[OH2:3]>>[O:2]=[C:1]=[O:3]" },
    { "C,C>>CC", "quoted, with comma" },
  };
  write_mapping_table(file, rows);
  CHECK(read_mapping_table(file) == rows);
  CHECK(read_mapping_table(dir.path() / "absent.csv").empty());
}

TEST_CASE("file provider") {
  ScratchDir dir;
  const fs::path file = dir.path() / "m.csv";
  write_mapping_table(file, { { "C>>C", "[CH4:1]>>[CH4:1]" } });
  FileMappingProvider p(file);
  CHECK(p.size() == 1);
  CHECK(p.describe() == "file:" + file.string());
  const std::vector<std::string> in { "C>>C", "C>>C" };
  CHECK(p.map(in) == std::vector<std::string> { "[CH4:1]>>[CH4:1]", "[CH4:1]>>[CH4:1]" });
  const std::vector<std::string> unknown { "CC>>CC" };
  CHECK_THROWS_AS(p.map(unknown), MappingError);
  CHECK_THROWS_AS(FileMappingProvider(dir.path() / "none.csv"), std::ios_base::failure);
}

TEST_CASE("provider specs") {
  ScratchDir dir;
  write_mapping_table(dir.path() / "m.csv", {});
  CHECK(make_provider("file:" + (dir.path() / "m.csv").string())->describe() ==
        "file:" + (dir.path() / "m.csv").string());
  CHECK(make_provider("http://localhost:8000/")->describe() ==
        "http:http://localhost:8000");
  CHECK(make_provider("http:http://h:1/x")->describe() == "http:http://h:1/x");
  CHECK_THROWS_AS(make_provider("rxnmapper"), Error);
}

TEST_CASE("cache serves repeats and persists") {
  ScratchDir dir;
  const fs::path file = dir.path() / "cache.csv";
  auto inner = std::make_unique<CountingProvider>();
  CountingProvider *counter = inner.get();
  {
    CachingMappingProvider cache(std::move(inner), file);
    const std::vector<std::string> a { "A>>B", "C>>D" };
    CHECK(cache.map(a) == std::vector<std::string> { "mapped(A>>B)", "mapped(C>>D)" });
    const std::vector<std::string> b { "C>>D", "E>>F", "A>>B" };
    CHECK(cache.map(b) ==
          std::vector<std::string> { "mapped(C>>D)", "mapped(E>>F)", "mapped(A>>B)" });
    CHECK(counter->calls == 2);
    CHECK(counter->seen == 3);
    CHECK(cache.size() == 3);
    cache.save();
  }
  CachingMappingProvider offline(nullptr, file);
  CHECK(offline.size() == 3);
  CHECK(offline.lookup("E>>F") == "mapped(E>>F)");
  CHECK(offline.describe() == "cache(none)");
  const std::vector<std::string> miss { "X>>Y" };
  CHECK_THROWS_AS(offline.map(miss), MappingError);
  offline.insert("X>>Y", "m");
  CHECK(offline.map(miss)[0] == "m");
}

TEST_CASE("http provider batches requests and keeps order") {
  std::vector<std::size_t> batches;
  StubService svc(echo(batches));
  HttpMappingProvider p(svc.url());
  const auto in = numbered(70);
  const auto out = p.map(in);
  REQUIRE(out.size() == in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    CHECK(out[i] == "[" + in[i] + "]");
  CHECK(batches == std::vector<std::size_t> { 32, 32, 6 });
  CHECK(p.last_confidence() == std::vector<double>(70, 0.5));

  batches.clear();
  HttpMappingProvider small(svc.url() + "/", { .batch_size = 10 });
  small.map(numbered(25));
  CHECK(batches == std::vector<std::size_t> { 10, 10, 5 });
  CHECK(small.map({}).empty());
}

TEST_CASE("http provider rejects bad responses") {
  SUBCASE("wrong length") {
    StubService svc([](const httplib::Request &, httplib::Response &res) {
      res.set_content(R"({"mapped": ["a"]})", "application/json");
    });
    HttpMappingProvider p(svc.url());
    CHECK_THROWS_WITH_AS(p.map(numbered(2)), doctest::Contains("1 entries for 2"),
                         MappingError);
  }
  SUBCASE("missing confidence defaults to zero") {
    StubService svc([](const httplib::Request &, httplib::Response &res) {
      res.set_content(R"({"mapped": ["a", "b"]})", "application/json");
    });
    HttpMappingProvider p(svc.url());
    CHECK(p.map(numbered(2)) == std::vector<std::string> { "a", "b" });
    CHECK(p.last_confidence() == std::vector<double> { 0, 0 });
  }
  SUBCASE("error status") {
    StubService svc([](const httplib::Request &, httplib::Response &res) {
      res.status = 422;
      res.set_content(R"({"detail": "too many tokens"})", "application/json");
    });
    HttpMappingProvider p(svc.url());
    CHECK_THROWS_WITH_AS(p.map(numbered(1)), doctest::Contains("422"), MappingError);
  }
  SUBCASE("not json") {
    StubService svc([](const httplib::Request &, httplib::Response &res) {
      res.set_content("<html>", "text/html");
    });
    HttpMappingProvider p(svc.url());
    CHECK_THROWS_AS(p.map(numbered(1)), MappingError);
  }
  SUBCASE("non-string entry") {
    StubService svc([](const httplib::Request &, httplib::Response &res) {
      res.set_content(R"({"mapped": [3]})", "application/json");
    });
    HttpMappingProvider p(svc.url());
    CHECK_THROWS_AS(p.map(numbered(1)), MappingError);
  }
  SUBCASE("unreachable") {
    int port = 0;
    {
      httplib::Server probe;
      port = probe.bind_to_any_port("127.0.0.1");
    }
    HttpMappingProvider p("http://127.0.0.1:" + std::to_string(port),
                          { .timeout = std::chrono::seconds(2) });
    CHECK_THROWS_WITH_AS(p.map(numbered(1)), doctest::Contains("unreachable"),
                         MappingError);
  }
}

TEST_CASE("cache in front of the http provider only asks for misses") {
  std::vector<std::size_t> batches;
  StubService svc(echo(batches));
  CachingMappingProvider cache(make_provider(svc.url()));
  cache.map(numbered(40));
  const auto again = cache.map(numbered(45));
  CHECK(again[44] == "[" + numbered(45)[44] + "]");
  CHECK(batches == std::vector<std::size_t> { 32, 8, 5 });
}
