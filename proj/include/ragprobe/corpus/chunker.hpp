#pragma once

#include <cstddef>
#include <vector>

#include "ragprobe/corpus/types.hpp"

namespace ragprobe::corpus {

inline constexpr std::size_t kDefaultMaxChunkChars = 1500;
inline constexpr std::size_t kMinChunkChars = 200;

/// Splits a document body into passages of at most `max_chunk_chars` bytes.
///
/// Paragraph boundaries (blank lines) are preferred; a paragraph longer than
/// the limit is split at sentence boundaries, and a sentence longer than the
/// limit at the last whitespace (or UTF-8 character boundary) that fits.
/// Separators stay attached to the preceding chunk, so the concatenation of
/// the passages in seq order is exactly the body. No overlap.
///
/// Throws InvalidArgument if max_chunk_chars < kMinChunkChars.
std::vector<Passage> chunk_document(const Document& doc, std::size_t max_chunk_chars = kDefaultMaxChunkChars);

} // namespace ragprobe::corpus
