//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/mapping.h"

#include <fstream>
#include <mutex>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "carat/csv.h"

namespace carat {

std::map<std::string, std::string, std::less<>> read_mapping_table(
    const std::filesystem::path &path) {
  std::map<std::string, std::string, std::less<>> rows;
  if (!std::filesystem::exists(path))
    return rows;
  const CsvTable table = CsvTable::read_file(path);
  const std::size_t unmapped = table.column("unmapped");
  const std::size_t mapped = table.column("mapped");
  for (const auto &row: table.rows())
    rows[table.field(row, unmapped)] = table.field(row, mapped);
  return rows;
}

void write_mapping_table(
    const std::filesystem::path &path,
    const std::map<std::string, std::string, std::less<>> &rows) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot write " + path.string());
  CsvWriter w(out);
  w.row({ "unmapped", "mapped" });
  for (const auto &[unmapped, mapped]: rows)
    w.row({ unmapped, mapped });
}

FileMappingProvider::FileMappingProvider(const std::filesystem::path &path)
    : path_(path) {
  if (!std::filesystem::exists(path))
    throw std::ios_base::failure("cannot open " + path.string());
  table_ = read_mapping_table(path);
}

std::vector<std::string> FileMappingProvider::map(
    std::span<const std::string> reactions) {
  std::vector<std::string> out;
  out.reserve(reactions.size());
  for (const std::string &r: reactions) {
    auto it = table_.find(r);
    if (it == table_.end())
      throw MappingError(
          fmt::format("{}: no mapping for {}", path_.filename().string(), r));
    out.push_back(it->second);
  }
  return out;
}

std::string FileMappingProvider::describe() const {
  return "file:" + path_.string();
}

HttpMappingProvider::HttpMappingProvider(std::string base_url,
                                         HttpProviderOptions options)
    : base_url_(std::move(base_url)), options_(options) {
  while (!base_url_.empty() && base_url_.back() == '/')
    base_url_.pop_back();
  if (options_.batch_size == 0)
    options_.batch_size = 1;
}

std::vector<std::string> HttpMappingProvider::map(
    std::span<const std::string> reactions) {
  using json = nlohmann::json;

  // Split "http://host:port/prefix" into the client address and path prefix.
  const auto scheme = base_url_.find("://");
  const auto slash = base_url_.find('/', scheme == std::string::npos
                                             ? 0
                                             : scheme + 3);
  const std::string host = base_url_.substr(0, slash);
  const std::string prefix =
      slash == std::string::npos ? std::string {} : base_url_.substr(slash);

  httplib::Client client(host);
  if (!client.is_valid())
    throw MappingError("invalid mapping service address " + base_url_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);

  std::vector<std::string> out;
  confidence_.clear();
  out.reserve(reactions.size());
  for (std::size_t begin = 0; begin < reactions.size();
       begin += options_.batch_size) {
    const std::size_t end =
        std::min(reactions.size(), begin + options_.batch_size);
    json request = { { "reactions", json::array() } };
    for (std::size_t i = begin; i < end; ++i)
      request["reactions"].push_back(reactions[i]);

    auto res = client.Post(prefix + "/map", request.dump(), "application/json");
    if (!res)
      throw MappingError(fmt::format("mapping service {} unreachable: {}",
                                     base_url_, httplib::to_string(res.error())));
    if (res->status != 200)
      throw MappingError(fmt::format("mapping service {} answered {}: {}",
                                     base_url_, res->status, res->body));

    json body;
    try {
      body = json::parse(res->body);
    } catch (const json::parse_error &e) {
      throw MappingError("malformed mapping response: " + std::string(e.what()));
    }
    if (!body.is_object() || !body.contains("mapped") ||
        !body["mapped"].is_array())
      throw MappingError("mapping response lacks a 'mapped' array");
    const json &mapped = body["mapped"];
    if (mapped.size() != end - begin)
      throw MappingError(fmt::format("mapping response has {} entries for {} "
                                     "reactions",
                                     mapped.size(), end - begin));
    for (const json &m: mapped) {
      if (!m.is_string())
        throw MappingError("mapping response entry is not a string");
      out.push_back(m.get<std::string>());
    }
    if (body.contains("confidence") && body["confidence"].is_array() &&
        body["confidence"].size() == mapped.size()) {
      for (const json &c: body["confidence"])
        confidence_.push_back(c.is_number() ? c.get<double>() : 0.0);
    } else {
      confidence_.insert(confidence_.end(), mapped.size(), 0.0);
    }
  }
  return out;
}

std::string HttpMappingProvider::describe() const {
  return "http:" + base_url_;
}

CachingMappingProvider::CachingMappingProvider(
    std::unique_ptr<MappingProvider> inner, std::filesystem::path cache_file)
    : inner_(std::move(inner)), cache_file_(std::move(cache_file)) {
  if (!cache_file_.empty())
    cache_ = read_mapping_table(cache_file_);
}

std::optional<std::string> CachingMappingProvider::lookup(
    const std::string &reaction) const {
  std::shared_lock lock(mutex_);
  auto it = cache_.find(reaction);
  if (it == cache_.end())
    return std::nullopt;
  return it->second;
}

void CachingMappingProvider::insert(const std::string &reaction,
                                    const std::string &mapped) {
  std::unique_lock lock(mutex_);
  cache_.insert_or_assign(reaction, mapped);
}

std::size_t CachingMappingProvider::size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

std::vector<std::string> CachingMappingProvider::map(
    std::span<const std::string> reactions) {
  std::vector<std::string> out(reactions.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < reactions.size(); ++i) {
    if (auto hit = lookup(reactions[i])) {
      out[i] = std::move(*hit);
    } else {
      missing.push_back(reactions[i]);
      where.push_back(i);
    }
  }
  if (missing.empty())
    return out;
  if (!inner_)
    throw MappingError("no mapping for " + missing.front());
  std::vector<std::string> fresh = inner_->map(missing);
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    insert(missing[k], fresh[k]);
    out[where[k]] = std::move(fresh[k]);
  }
  return out;
}

std::string CachingMappingProvider::describe() const {
  return "cache(" + (inner_ ? inner_->describe() : std::string("none")) + ")";
}

void CachingMappingProvider::save() const {
  if (cache_file_.empty())
    return;
  std::shared_lock lock(mutex_);
  write_mapping_table(cache_file_, cache_);
}

std::unique_ptr<MappingProvider> make_provider(const std::string &spec) {
  if (spec.rfind("file:", 0) == 0)
    return std::make_unique<FileMappingProvider>(spec.substr(5));
  if (spec.rfind("http://", 0) == 0)
    return std::make_unique<HttpMappingProvider>(spec);
  if (spec.rfind("http:", 0) == 0)
    return std::make_unique<HttpMappingProvider>(spec.substr(5));
  throw Error("mapper must be file:<path> or http:<url>, got '" + spec + "'");
}

}  // namespace carat
