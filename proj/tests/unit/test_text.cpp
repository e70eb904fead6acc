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

#include <gtest/gtest.h>

#include "relcomp/text.hpp"

namespace relcomp {
namespace {

using V = std::vector<std::string>;

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Chevy Chase, Maryland"), (V{"chevy", "chase", "maryland"}));
  EXPECT_EQ(tokenize("  state-of-the-art  "), (V{"state", "of", "the", "art"}));
  EXPECT_EQ(tokenize("R2D2 (droid)"), (V{"r2d2", "droid"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" ,.;- ").empty());
}

TEST(Tokenize, KeepsUtf8BytesInsideTokens) {
  EXPECT_EQ(tokenize("Zürich Université"), (V{"zürich", "université"}));
}

TEST(ContainsPhrase, RequiresContiguity) {
  const V doc{"acme", "was", "founded", "by", "jane"};
  EXPECT_TRUE(contains_phrase(doc, V{"founded", "by"}));
  EXPECT_TRUE(contains_phrase(doc, V{"acme"}));
  EXPECT_FALSE(contains_phrase(doc, V{"founded", "jane"}));
  EXPECT_FALSE(contains_phrase(doc, V{"by", "founded"}));
  EXPECT_FALSE(contains_phrase(doc, V{}));
  EXPECT_FALSE(contains_phrase(V{"a"}, V{"a", "b"}));
}

TEST(SplitSentences, SplitsOnTerminatorsFollowedBySpace) {
  const auto s = split_sentences("Dr.Who lives. He is old! Is he?  Yes");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], "Dr.Who lives.");
  EXPECT_EQ(s[1], "He is old!");
  EXPECT_EQ(s[2], "Is he?");
  EXPECT_EQ(s[3], "Yes");
  EXPECT_TRUE(split_sentences("   ").empty());
}

TEST(Strings, TrimLowerJoinCount) {
  EXPECT_EQ(trim("\t a b \n"), "a b");
  EXPECT_EQ(trim("   "), "");
  EXPECT_EQ(to_lower("AbC-1"), "abc-1");
  EXPECT_EQ(join(V{"a", "b", "c"}, ", "), "a, b, c");
  EXPECT_EQ(join(V{}, ", "), "");
  EXPECT_EQ(count_whitespace_tokens("  one two\nthree\t"), 3u);
  EXPECT_EQ(count_whitespace_tokens(""), 0u);
}

}  // namespace
}  // namespace relcomp
