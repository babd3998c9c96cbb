#include "cascade/cache.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

namespace cascade {

CacheKey cache_key(const UserContext& ctx, const PolicyConstraints& policy) {
  return {ctx.user_id, context_hash(ctx, policy), policy.config_version};
}

std::optional<CacheEntry> InMemoryCacheBackend::get(const CacheKey& key) {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void InMemoryCacheBackend::put(CacheEntry entry) {
  std::unique_lock lock(mu_);
  const CacheKey key = entry.key;
  entries_.insert_or_assign(key, std::move(entry));
}

std::size_t InMemoryCacheBackend::erase_if(
    const std::function<bool(const CacheKey&)>& pred) {
  std::unique_lock lock(mu_);
  return std::erase_if(entries_, [&](const auto& kv) { return pred(kv.first); });
}

std::size_t InMemoryCacheBackend::size() {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::int64_t system_unix_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

StorefrontCache::StorefrontCache(std::shared_ptr<CacheBackend> backend,
                                 UnixClock clock)
    : backend_(backend ? std::move(backend)
                       : std::make_shared<InMemoryCacheBackend>()),
      clock_(std::move(clock)) {}

std::optional<Storefront> StorefrontCache::peek(const CacheKey& key) {
  try {
    auto entry = backend_->get(key);
    if (!entry || entry->expired(clock_())) return std::nullopt;
    entry->storefront.provenance = Provenance::Cached;
    return std::move(entry->storefront);
  } catch (const std::exception& e) {
    spdlog::warn("[cache] get failed, treating as miss: {}", e.what());
    return std::nullopt;
  }
}

Storefront StorefrontCache::get_or_build(const CacheKey& key, std::int64_t ttl,
                                         const std::function<Storefront()>& build) {
  if (auto hit = peek(key)) {
    ++hits_;
    return std::move(*hit);
  }

  std::promise<Storefront> promise;
  std::shared_future<Storefront> waiting;
  {
    std::lock_guard lock(flight_mu_);
    // Re-check under the flight lock: a build may have landed meanwhile.
    if (auto hit = peek(key)) {
      ++hits_;
      return std::move(*hit);
    }
    auto it = in_flight_.find(key);
    if (it != in_flight_.end()) {
      waiting = it->second;
    } else {
      in_flight_.emplace(key, promise.get_future().share());
    }
  }
  if (waiting.valid()) return waiting.get();

  ++builds_;
  try {
    Storefront sf = build();
    if (sf.provenance != Provenance::Fallback) {
      try {
        backend_->put({key, sf, clock_(), ttl});
      } catch (const std::exception& e) {
        spdlog::warn("[cache] put failed: {}", e.what());
      }
    }
    promise.set_value(sf);
    std::lock_guard lock(flight_mu_);
    in_flight_.erase(key);
    return sf;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(flight_mu_);
    in_flight_.erase(key);
    throw;
  }
}

std::size_t StorefrontCache::invalidate(
    const std::function<bool(const CacheKey&)>& pred) {
  return backend_->erase_if(pred);
}

std::size_t StorefrontCache::size() { return backend_->size(); }

Storefront get_or_build(const UserContext& ctx, const PolicyConstraints& policy,
                        const PipelineConfig& cfg, StorefrontCache& cache,
                        const PipelineDeps& deps) {
  return cache.get_or_build(cache_key(ctx, policy), cfg.cache_ttl_seconds, [&] {
    return build_storefront(ctx, policy, cfg, deps);
  });
}

std::size_t invalidate(StorefrontCache& cache,
                       const std::function<bool(const CacheKey&)>& pred) {
  return cache.invalidate(pred);
}

}  // namespace cascade
