#pragma once

// Shared softmax-policy arithmetic for the policy-gradient learners.

#include <algorithm>
#include <cmath>
#include <span>

namespace gridrl::detail {

// Fills p (softmax) and logp (log softmax) from logits; returns the entropy.
inline float softmax_entropy(std::span<const float> logits, std::span<float> p,
                             std::span<float> logp) {
  float mx = logits[0];
  for (float v : logits) mx = std::max(mx, v);
  float sum = 0.0f;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logp[i] = logits[i] - mx;
    sum += std::exp(logp[i]);
  }
  const float log_sum = std::log(sum);
  float h = 0.0f;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logp[i] -= log_sum;
    p[i] = std::exp(logp[i]);
    h -= p[i] * logp[i];
  }
  return h;
}

}  // namespace gridrl::detail
