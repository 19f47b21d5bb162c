#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longdoc/tokenize.hpp"

namespace longdoc {

// Sliding-window parameters. Stride is floor(L * (1 - overlap)), clamped to
// at least 1, so the realized overlap is never below the requested fraction.
// window_len == 0 selects whole-document mode: one window, no padding.
struct WindowingConfig {
  std::size_t window_len = 512;
  double overlap = 0.2;

  std::size_t stride() const;
  bool whole_document() const { return window_len == 0; }
  void validate() const;
};

struct WindowSpan {
  std::size_t start;
  std::size_t end;  // exclusive
};

struct WindowSet {
  std::string doc_id;
  std::size_t padded_len = 0;  // every padded_ids entry has this many ids
  std::vector<WindowSpan> spans;
  std::vector<std::vector<int>> padded_ids;
  std::vector<std::vector<std::uint8_t>> masks;

  std::size_t count() const { return spans.size(); }
};

WindowSet make_windows(const TokenSequence& tokens,
                       const WindowingConfig& cfg);

// Closed-form window count; matches make_windows exactly.
std::size_t window_count(std::size_t length, const WindowingConfig& cfg);

}  // namespace longdoc
