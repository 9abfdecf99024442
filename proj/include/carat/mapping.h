//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_MAPPING_H_
#define CARAT_MAPPING_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "carat/error.h"

namespace carat {

// Source of atom-mapped reaction SMILES.
class MappingProvider {
public:
  virtual ~MappingProvider() = default;

  // Same length and order as `reactions`. Throws MappingError when any
  // reaction cannot be mapped.
  virtual std::vector<std::string> map(std::span<const std::string> reactions) = 0;
  virtual std::string describe() const = 0;
};

// Reads mapped.csv with columns unmapped,mapped.
class FileMappingProvider: public MappingProvider {
public:
  explicit FileMappingProvider(const std::filesystem::path &path);

  std::vector<std::string> map(std::span<const std::string> reactions) override;
  std::string describe() const override;

  std::size_t size() const { return table_.size(); }

private:
  std::filesystem::path path_;
  std::map<std::string, std::string, std::less<>> table_;
};

struct HttpProviderOptions {
  // Requests carry at most this many reactions.
  std::size_t batch_size = 32;
  std::chrono::seconds timeout { 120 };
};

// Client of the mapping service: POST {"reactions": [...]} to <url>/map,
// expecting {"mapped": [...], "confidence": [...]}.
class HttpMappingProvider: public MappingProvider {
public:
  explicit HttpMappingProvider(std::string base_url,
                               HttpProviderOptions options = {});

  std::vector<std::string> map(std::span<const std::string> reactions) override;
  std::string describe() const override;

  // Confidence scores of the most recent map() call.
  const std::vector<double> &last_confidence() const { return confidence_; }

private:
  std::string base_url_;
  HttpProviderOptions options_;
  std::vector<double> confidence_;
};

// Memoizes another provider keyed by the exact unmapped string. Lookups and
// inserts are safe from several threads.
class CachingMappingProvider: public MappingProvider {
public:
  explicit CachingMappingProvider(std::unique_ptr<MappingProvider> inner,
                                  std::filesystem::path cache_file = {});

  std::vector<std::string> map(std::span<const std::string> reactions) override;
  std::string describe() const override;

  std::optional<std::string> lookup(const std::string &reaction) const;
  void insert(const std::string &reaction, const std::string &mapped);
  std::size_t size() const;

  // Writes the cache to the file given at construction (unmapped,mapped).
  void save() const;

private:
  std::unique_ptr<MappingProvider> inner_;
  std::filesystem::path cache_file_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::string, std::less<>> cache_;
};

// Provider from "file:<path>" or "http:<url>" ("http://..." also accepted).
// Throws carat::Error for anything else.
std::unique_ptr<MappingProvider> make_provider(const std::string &spec);

// Reads unmapped,mapped rows; missing file gives an empty table.
std::map<std::string, std::string, std::less<>> read_mapping_table(
    const std::filesystem::path &path);
void write_mapping_table(const std::filesystem::path &path,
                         const std::map<std::string, std::string, std::less<>> &rows);

}  // namespace carat

#endif  // CARAT_MAPPING_H_
