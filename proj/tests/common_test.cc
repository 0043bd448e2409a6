// Copyright (c) 2026 The asgscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "asg/common.h"

#include <gtest/gtest.h>

namespace asg {
namespace {

TEST(TopKTest, ParseAllAndNumbers) {
  EXPECT_TRUE(TopK::Parse("all").all());
  EXPECT_EQ(TopK::Parse("64").value(), 64);
  EXPECT_EQ(TopK::Parse("1"), TopK::Of(1));
  EXPECT_EQ(TopK::Parse("all"), TopK::All());
}

TEST(TopKTest, RejectsMalformed) {
  for (const char* bad : {"0", "-3", "", "12x", "ALL", " 5", "1.5"}) {
    EXPECT_THROW(TopK::Parse(bad), Error) << bad;
  }
  EXPECT_THROW(TopK::Of(0), Error);
}

TEST(TopKTest, ClampToAvailable) {
  EXPECT_EQ(TopK::All().Clamp(7), 7);
  EXPECT_EQ(TopK::Of(3).Clamp(7), 3);
  EXPECT_EQ(TopK::Of(64).Clamp(5), 5);
}

TEST(TopKTest, RoundTripsThroughText) {
  for (const TopK& k : {TopK::All(), TopK::Of(1), TopK::Of(512)}) {
    EXPECT_EQ(TopK::Parse(k.ToString()), k);
  }
}

}  // namespace
}  // namespace asg
