#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace sscca {

using Rng = std::mt19937_64;

/// Purposes for substreams derived from one replication seed. Adding a new
/// purpose never perturbs the others.
enum class StreamPurpose : std::uint64_t { ModelDraw = 1, DataDraw = 2, SplitDraw = 3 };

/// Derives an independent generator from a root seed and a path of integers
/// (cell coordinates, replication index, purpose). std::seed_seq gives a
/// fully specified, platform-independent mixing of the path.
inline Rng make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(root);
  for (auto v : path) push(v);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace sscca
