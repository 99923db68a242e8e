#include "csqpe/sample_set.hpp"

#include "csqpe/errors.hpp"
#include "csqpe/rng.hpp"

#include <string>

namespace csqpe {

void SampleSet::validate() const {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= n)
      throw ContractError("sample index out of range: " + std::to_string(indices[i]));
    if (i > 0 && indices[i] <= indices[i - 1])
      throw ContractError("sample indices must be strictly increasing");
  }
}

SampleSet SampleSet::full(std::int64_t n) {
  SampleSet s;
  s.n = n;
  s.ratio = 1.0;
  s.indices.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) s.indices[static_cast<std::size_t>(i)] = i;
  return s;
}

SampleSet draw_sample_set(std::int64_t n, double r, const Rng& rng, int* retries) {
  if (n < 1) throw ConfigError("signal length must be positive");
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("sampling ratio must lie in (0, 1]");
  SampleSet s;
  s.n = n;
  s.ratio = r;
  for (int attempt = 0;; ++attempt) {
    Rng stream = rng.split({static_cast<std::uint64_t>(attempt)});
    s.indices.clear();
    for (std::int64_t i = 0; i < n; ++i) {
      if (r >= 1.0 || stream.bernoulli(r)) s.indices.push_back(i);
    }
    if (!s.indices.empty()) {
      if (retries) *retries = attempt;
      return s;
    }
  }
}

}  // namespace csqpe
