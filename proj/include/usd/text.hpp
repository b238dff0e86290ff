#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace usd::text {

/// Half-open span of Unicode code point offsets into a string.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

// UTF-8 helpers. All external spans are code point offsets so that they line
// up with Python string indexing on the exporter side.
std::vector<char32_t> decode(std::string_view s);
std::string encode(const std::vector<char32_t>& cps);
void append_utf8(std::string& out, char32_t cp);
bool valid_utf8(std::string_view s);

std::size_t length(std::string_view s);  // in code points
std::size_t byte_offset(std::string_view s, std::size_t cp_offset);
std::size_t cp_offset(std::string_view s, std::size_t byte_offset);

/// Substring by code point span.
std::string slice(std::string_view s, Span span);

/// Replaces `span` in `s` by `replacement`.
std::string replace(std::string_view s, Span span, std::string_view replacement);

/// Lowercases ASCII and the Latin-1 supplement / Latin Extended-A letters
/// (enough for English and Swedish headwords).
std::string lower(std::string_view s);

bool is_word_char(char32_t cp);
bool is_space(char32_t cp);

/// Removes control characters (C0, DEL, C1) and turns tabs/newlines into
/// spaces. Letters with diacritics are left untouched.
std::string clean(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms and trivially reproducible in other
/// languages, which is why it is used for content addressing.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view s);

}  // namespace usd::text
