#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>

#include "cascade/pipeline.hpp"
#include "cascade/types.hpp"

namespace cascade {

struct CacheKey {
  std::string user_id;
  std::string context_hash;
  std::string config_version;

  auto operator<=>(const CacheKey&) const = default;
};

CacheKey cache_key(const UserContext& ctx, const PolicyConstraints& policy);

struct CacheEntry {
  CacheKey key;
  Storefront storefront;
  std::int64_t created_at = 0;  // seconds
  std::int64_t ttl = 0;         // seconds

  bool expired(std::int64_t now) const { return now - created_at > ttl; }
};

// Storage behind the cache. Implementations must be thread-safe; an external
// store (redis, memcached, ...) plugs in here.
class CacheBackend {
 public:
  virtual ~CacheBackend() = default;
  virtual std::optional<CacheEntry> get(const CacheKey& key) = 0;
  virtual void put(CacheEntry entry) = 0;
  virtual std::size_t erase_if(const std::function<bool(const CacheKey&)>& pred) = 0;
  virtual std::size_t size() = 0;
};

class InMemoryCacheBackend final : public CacheBackend {
 public:
  std::optional<CacheEntry> get(const CacheKey& key) override;
  void put(CacheEntry entry) override;
  std::size_t erase_if(const std::function<bool(const CacheKey&)>& pred) override;
  std::size_t size() override;

 private:
  std::shared_mutex mu_;
  std::map<CacheKey, CacheEntry> entries_;
};

using UnixClock = std::function<std::int64_t()>;
std::int64_t system_unix_seconds();

// Storefront cache with single-flight build coalescing: concurrent misses on
// one key wait on the same build. Backend exceptions degrade to a build.
class StorefrontCache {
 public:
  explicit StorefrontCache(std::shared_ptr<CacheBackend> backend = nullptr,
                           UnixClock clock = system_unix_seconds);

  // Returns the cached storefront (provenance Cached) for an unexpired hit,
  // otherwise runs `build`. Fallback storefronts are returned but not stored.
  Storefront get_or_build(const CacheKey& key, std::int64_t ttl,
                          const std::function<Storefront()>& build);

  std::optional<Storefront> peek(const CacheKey& key);
  std::size_t invalidate(const std::function<bool(const CacheKey&)>& pred);
  std::size_t size();

  std::uint64_t hits() const noexcept { return hits_.load(); }
  std::uint64_t builds() const noexcept { return builds_.load(); }

 private:
  std::shared_ptr<CacheBackend> backend_;
  UnixClock clock_;
  std::mutex flight_mu_;
  std::map<CacheKey, std::shared_future<Storefront>> in_flight_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> builds_{0};
};

// Cache-first storefront for ctx under (policy, cfg).
Storefront get_or_build(const UserContext& ctx, const PolicyConstraints& policy,
                        const PipelineConfig& cfg, StorefrontCache& cache,
                        const PipelineDeps& deps);

std::size_t invalidate(StorefrontCache& cache,
                       const std::function<bool(const CacheKey&)>& pred);

}  // namespace cascade
