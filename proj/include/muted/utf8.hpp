#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// All character offsets in this project are Unicode scalar-value indices.
// These helpers convert between UTF-8 storage and scalar positions.
namespace muted::utf8 {

// Throws ValidationError on malformed UTF-8 (overlongs, surrogates, truncation).
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view scalars);
void append(std::string& out, char32_t scalar);

// Number of scalar values; throws on malformed input.
std::size_t length(std::string_view bytes);

// Substring by scalar range [start, end).
std::string slice(std::u32string_view scalars, std::size_t start, std::size_t end);

bool is_space(char32_t c) noexcept;

}  // namespace muted::utf8
