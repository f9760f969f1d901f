// Copyright 2026 The Panoweave Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOWEAVE_RETRY_H_
#define PANOWEAVE_RETRY_H_

#include <algorithm>
#include <chrono>
#include <functional>
#include <optional>
#include <thread>

namespace panoweave {

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds max_backoff{5000};
};

// Delay before retry number `attempt` (0-based): initial * 2^attempt, capped.
inline std::chrono::milliseconds BackoffForAttempt(const RetryPolicy& policy, int attempt) {
  const int shift = std::clamp(attempt, 0, 30);
  const auto delay = policy.initial_backoff * (int64_t{1} << shift);
  return std::min<std::chrono::milliseconds>(delay, policy.max_backoff);
}

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void RealSleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

// Calls `attempt_fn` until it yields a value or attempts run out.
// `attempt_fn` returns std::nullopt for a retriable failure and throws for a
// permanent one. Returns std::nullopt once every attempt has failed.
template <typename T, typename Fn>
std::optional<T> RetryWithBackoff(const RetryPolicy& policy, Fn&& attempt_fn,
                                  const Sleeper& sleep = RealSleep) {
  for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
    if (std::optional<T> result = attempt_fn(attempt)) return result;
    if (attempt + 1 < policy.max_attempts) sleep(BackoffForAttempt(policy, attempt));
  }
  return std::nullopt;
}

}  // namespace panoweave

#endif  // PANOWEAVE_RETRY_H_
