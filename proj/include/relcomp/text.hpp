// Copyright 2026 The relcomp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relcomp {

using Phrase = std::vector<std::string>;

/// Lowercases ASCII letters and splits on every ASCII character that is not a
/// letter or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words
/// survive intact. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// True iff `needle` occurs as a contiguous run inside `haystack`.
/// An empty needle never matches.
bool contains_phrase(std::span<const std::string> haystack,
                     std::span<const std::string> needle);

/// Splits on '.', '!' or '?' when followed by whitespace or end of text.
/// The terminator stays with its sentence; blank sentences are dropped.
std::vector<std::string_view> split_sentences(std::string_view text);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
std::string join(std::span<const std::string> parts, std::string_view sep);

/// Whitespace-delimited token count; the prompt budget proxy.
std::size_t count_whitespace_tokens(std::string_view text);

}  // namespace relcomp
