#include "longdoc/window.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace longdoc {

std::size_t WindowingConfig::stride() const {
  auto raw = static_cast<std::size_t>(
      std::floor(static_cast<double>(window_len) * (1.0 - overlap)));
  return std::max<std::size_t>(1, raw);
}

void WindowingConfig::validate() const {
  if (window_len == 1)
    throw std::runtime_error("window length must be 0 (whole document) or >= 2");
  if (overlap < 0.0 || overlap >= 1.0)
    throw std::runtime_error("overlap fraction must be in [0, 1)");
}

std::size_t window_count(std::size_t length, const WindowingConfig& cfg) {
  if (length < 1) throw std::runtime_error("cannot window an empty sequence");
  if (cfg.whole_document() || length <= cfg.window_len) return 1;
  std::size_t s = cfg.stride();
  return (length - cfg.window_len + s - 1) / s + 1;
}

WindowSet make_windows(const TokenSequence& tokens,
                       const WindowingConfig& cfg) {
  cfg.validate();
  const std::size_t n = tokens.length();
  if (n < 1) throw std::runtime_error("cannot window an empty sequence");

  WindowSet set;
  set.doc_id = tokens.doc_id;
  const std::size_t padded = cfg.whole_document() ? n : cfg.window_len;
  set.padded_len = padded;

  const std::size_t count = window_count(n, cfg);
  const std::size_t s = cfg.whole_document() ? n : cfg.stride();
  set.spans.reserve(count);
  set.padded_ids.reserve(count);
  set.masks.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * s;
    const std::size_t end = std::min(start + padded, n);  // final window clips
    set.spans.push_back({start, end});

    std::vector<int> ids(padded, Vocab::kPad);
    std::vector<std::uint8_t> mask(padded, 0);
    for (std::size_t t = start; t < end; ++t) {
      ids[t - start] = tokens.ids[t];
      mask[t - start] = 1;
    }
    set.padded_ids.push_back(std::move(ids));
    set.masks.push_back(std::move(mask));
  }
  return set;
}

}  // namespace longdoc
