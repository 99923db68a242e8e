#pragma once

#include <cstdint>
#include <vector>

namespace csqpe {

class Rng;

// Strictly increasing time indices drawn from {0, ..., n-1}.
struct SampleSet {
  std::int64_t n = 0;
  std::vector<std::int64_t> indices;
  double ratio = 1.0;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }

  // Throws ContractError on unsorted, duplicate or out-of-range indices.
  void validate() const;

  static SampleSet full(std::int64_t n);
};

// Includes each index independently with probability r. An empty draw is
// retried on a fresh substream; `retries` (if given) receives the count.
SampleSet draw_sample_set(std::int64_t n, double r, const Rng& rng, int* retries = nullptr);

}  // namespace csqpe
