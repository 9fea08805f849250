#pragma once

#include <chrono>
#include <functional>
#include <thread>

#include "sandbox/core/error.hpp"

namespace sandbox {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_delay{200};
  double backoff_multiplier = 2.0;
  // Replaced in tests so backoff does not slow the suite down.
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

/// Runs `call`, retrying only on ProviderUnavailable. Every other error
/// (NotFound, FixtureMissing, ...) propagates on the first occurrence.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& call) -> decltype(call()) {
  auto delay = policy.initial_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return call();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ProviderUnavailable || attempt >= policy.max_attempts) throw;
    }
    if (policy.sleep) policy.sleep(delay);
    delay = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(delay.count()) * policy.backoff_multiplier));
  }
}

}  // namespace sandbox
