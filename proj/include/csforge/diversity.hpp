#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"

namespace csforge {

struct DiversityReport {
  std::size_t s1 = 0;    // sum of per-sentence compressed sizes
  std::size_t s2 = 0;    // compressed size of the concatenation
  long long d = 0;       // s1 - s2; smaller = more diverse
};

// Compressed byte length under DEFLATE in gzip framing at level 6 with a
// pinned header (mtime 0, OS byte 255, no name/comment), so a given input
// always compresses to the same byte count.
inline std::size_t gzip_compressed_size(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw IoError("deflateInit2 failed");
  gz_header header{};
  header.time = 0;
  header.os = 255;
  deflateSetHeader(&zs, &header);

  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::size_t total = 0;
  std::vector<unsigned char> buf(1 << 16);
  int ret;
  do {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    ret = deflate(&zs, Z_FINISH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      deflateEnd(&zs);
      throw IoError("deflate failed: " + std::to_string(ret));
    }
    total += buf.size() - zs.avail_out;
  } while (ret != Z_STREAM_END);
  deflateEnd(&zs);
  return total;
}

// D = S1 - S2: each sentence text (newline-terminated) compressed alone,
// versus all of them compressed as one newline-joined stream in corpus
// order. A corpus of near-identical sentences compresses jointly far
// better than individually, giving a large D.
inline DiversityReport gzip_diversity(const Corpus& c) {
  if (c.empty()) throw UndefinedError("gzip_diversity: empty corpus");
  DiversityReport r;
  std::string all;
  for (const auto& s : c.sentences) {
    std::string line = s.text();
    line += '\n';
    r.s1 += gzip_compressed_size(line);
    all += line;
  }
  r.s2 = gzip_compressed_size(all);
  r.d = static_cast<long long>(r.s1) - static_cast<long long>(r.s2);
  return r;
}

}  // namespace csforge
